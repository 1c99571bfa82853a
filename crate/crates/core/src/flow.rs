//! Explicit time stepping of the graphical flow.
//!
//! The right-hand side is evaluated node by node from finite-difference
//! jets; the step is the two-stage midpoint rule with the Neumann ghosts
//! re-closed after every stage. The time step follows the parabolic limit
//! `dt = safety * min_k h_k^2 / lambda_max(g^ij)`. Since `g^ij ~ 1/u^2` and
//! `u^2` grows linearly in time, the step grows with the solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, MAX_DIM};
use crate::mesh::{Field, Mesh, RawJet};

/// Retries (each halving `dt`) before a step is declared failed.
pub const MAX_RETRIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub safety: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Snapshots are taken at `t_first * snapshot_factor^k` and at `t_end`.
    pub snapshot_factor: f64,
    pub t_first: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            safety: 0.25,
            dt_min: 1e-12,
            dt_max: 1e6,
            t_end: 1.0,
            snapshot_factor: 2.0,
            t_first: 1.0 / 1024.0,
        }
    }
}

impl StepControl {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            out.push(format!("safety = {} must lie in (0, 1]", self.safety));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max) {
            out.push(format!("need 0 < dt_min <= dt_max, got {} and {}", self.dt_min, self.dt_max));
        }
        if !(self.t_end >= 0.0) {
            out.push(format!("t_end = {} must be non-negative", self.t_end));
        }
        if !(self.snapshot_factor > 1.0) {
            out.push(format!("snapshot_factor = {} must exceed 1", self.snapshot_factor));
        }
        if !(self.t_first > 0.0) {
            out.push(format!("t_first = {} must be positive", self.t_first));
        }
        out
    }

    /// Output times in `(0, t_end]`, geometric, ending exactly at `t_end`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = self.t_first;
        while t < self.t_end * (1.0 - 1e-12) {
            out.push(t);
            t *= self.snapshot_factor;
        }
        if self.t_end > 0.0 {
            out.push(self.t_end);
        }
        out
    }
}

/// Quantities whose bounds control uniform parabolicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicityReport {
    /// `max_k max{1/v^2, 1/u^2, u^2}`.
    pub max_coefficient: f64,
    pub min_v: f64,
    pub min_u: f64,
}

impl ParabolicityReport {
    /// Report from the extreme values; `1/v^2` and `1/u^2` peak where `v`
    /// and `u` are smallest, `u^2` where `u` is largest.
    pub fn from_extremes(min_u: f64, max_u: f64, min_v: f64) -> Self {
        Self {
            max_coefficient: (1.0 / (min_v * min_v)).max(1.0 / (min_u * min_u)).max(max_u * max_u),
            min_v,
            min_u,
        }
    }
}

/// One pass over the nodes: `u_t`, `v`, and the step limit.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub du_dt: Vec<f64>,
    pub v: Vec<f64>,
    /// `min_k h_k^2 / lambda_k`.
    pub dt_limit: f64,
    pub report: ParabolicityReport,
}

fn empty_raw() -> RawJet {
    RawJet {
        n: 0,
        x: [0.0; MAX_DIM],
        u: 0.0,
        du: [0.0; MAX_DIM],
        d2u: [0.0; MAX_DIM * MAX_DIM],
    }
}

pub fn evaluate(mesh: &Mesh, field: &Field) -> Result<Evaluation> {
    let count = mesh.node_count();
    let mut du_dt = Vec::with_capacity(count);
    let mut v = Vec::with_capacity(count);
    let mut rate = 0.0f64;
    let (mut min_u, mut max_u, mut min_v) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    let mut raw = empty_raw();
    for k in 0..count {
        mesh.raw_jet(field, k, &mut raw);
        if !(raw.u > 0.0) {
            return Err(Error::NotSpacelike { v2: f64::NAN, node: Some(k) });
        }
        let (r, vk, lambda) = geometry::graph_rhs_and_diffusivity(raw.x(), raw.u, raw.du(), raw.d2u())
            .map_err(|e| e.at_node(k))?;
        du_dt.push(r);
        v.push(vk);
        rate = rate.max(lambda * mesh.inv_spacing2(k));
        min_u = min_u.min(raw.u);
        max_u = max_u.max(raw.u);
        min_v = min_v.min(vk);
    }
    Ok(Evaluation {
        du_dt,
        v,
        dt_limit: 1.0 / rate,
        report: ParabolicityReport::from_extremes(min_u, max_u, min_v),
    })
}

/// Right-hand side of the flow at every node (ghosts must be current).
pub fn rhs(mesh: &Mesh, field: &Field) -> Result<Vec<f64>> {
    evaluate(mesh, field).map(|e| e.du_dt)
}

/// Mean curvature read off the time derivative at every node.
pub fn mean_curvature_from_rhs(mesh: &Mesh, field: &Field) -> Result<Vec<f64>> {
    let e = evaluate(mesh, field)?;
    Ok((0..mesh.node_count())
        .map(|k| geometry::mean_curvature_from_rhs(mesh.node_x(k), field.u[k], e.v[k], e.du_dt[k]))
        .collect())
}

pub fn parabolicity(mesh: &Mesh, field: &Field) -> Result<ParabolicityReport> {
    evaluate(mesh, field).map(|e| e.report)
}

fn clamp_dt(limit: f64, report: &ParabolicityReport, ctl: &StepControl) -> Result<f64> {
    let dt = ctl.safety * limit;
    if !(dt >= ctl.dt_min) {
        return Err(Error::Stiffness {
            dt,
            dt_min: ctl.dt_min,
            report: *report,
        });
    }
    Ok(dt.min(ctl.dt_max))
}

pub fn stable_dt(mesh: &Mesh, field: &Field, ctl: &StepControl) -> Result<f64> {
    let e = evaluate(mesh, field)?;
    clamp_dt(e.dt_limit, &e.report, ctl)
}

fn axpy(mesh: &Mesh, base: &Field, dt: f64, tendency: &[f64]) -> Field {
    let mut out = Field {
        u: base.u.iter().zip(tendency).map(|(u, k)| u + dt * k).collect(),
        ghost: base.ghost.clone(),
        t: base.t + dt,
    };
    mesh.close_ghosts(&mut out);
    out
}

fn filtered(mesh: &Mesh, mut tendency: Vec<f64>) -> Vec<f64> {
    mesh.filter_angular(&mut tendency);
    tendency
}

/// One midpoint step of size `dt`, spacelike-checked.
pub fn step(mesh: &Mesh, field: &Field, dt: f64) -> Result<Field> {
    if dt == 0.0 {
        return Ok(field.clone());
    }
    let k1 = filtered(mesh, rhs(mesh, field)?);
    let mut out = midpoint(mesh, field, &k1, dt)?;
    evaluate(mesh, &out)?;
    out.t = field.t + dt;
    Ok(out)
}

fn midpoint(mesh: &Mesh, field: &Field, k1: &[f64], dt: f64) -> Result<Field> {
    let mid = axpy(mesh, field, 0.5 * dt, k1);
    let k2 = filtered(mesh, rhs(mesh, &mid)?);
    Ok(axpy(mesh, field, dt, &k2))
}

/// Time stepper that reuses the evaluation at the end of a step as the
/// first stage of the next one.
#[derive(Debug, Clone)]
pub struct Stepper<'m> {
    mesh: &'m Mesh,
    field: Field,
    current: Evaluation,
    pub steps: usize,
    pub rejections: usize,
}

impl<'m> Stepper<'m> {
    pub fn new(mesh: &'m Mesh, mut field: Field) -> Result<Self> {
        mesh.close_ghosts(&mut field);
        let current = evaluate(mesh, &field)?;
        Ok(Self {
            mesh,
            field,
            current,
            steps: 0,
            rejections: 0,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn into_field(self) -> Field {
        self.field
    }

    pub fn report(&self) -> &ParabolicityReport {
        &self.current.report
    }

    pub fn stable_dt(&self, ctl: &StepControl) -> Result<f64> {
        clamp_dt(self.current.dt_limit, &self.current.report, ctl)
    }

    /// Advance by `dt`, halving on spacelike failure up to [`MAX_RETRIES`]
    /// times. Returns the step actually taken.
    pub fn advance(&mut self, dt: f64) -> Result<f64> {
        let k1 = filtered(self.mesh, self.current.du_dt.clone());
        let mut h = dt;
        for _ in 0..=MAX_RETRIES {
            let attempt = midpoint(self.mesh, &self.field, &k1, h).and_then(|next| {
                let eval = evaluate(self.mesh, &next)?;
                Ok((next, eval))
            });
            match attempt {
                Ok((mut next, eval)) => {
                    next.t = self.field.t + h;
                    self.field = next;
                    self.current = eval;
                    self.steps += 1;
                    return Ok(h);
                }
                Err(Error::NotSpacelike { .. }) => {
                    self.rejections += 1;
                    h *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::StepRejected {
            t: self.field.t,
            retries: MAX_RETRIES,
        })
    }

    /// Step with adaptive `dt` until `t_target`, landing on it exactly.
    pub fn advance_to(&mut self, t_target: f64, ctl: &StepControl) -> Result<()> {
        while self.field.t < t_target {
            let remaining = t_target - self.field.t;
            let mut dt = self.stable_dt(ctl)?;
            if dt >= remaining {
                dt = remaining;
            } else if dt > 0.5 * remaining {
                // Split the tail evenly rather than leave a sliver.
                dt = 0.5 * remaining;
            }
            let taken = self.advance(dt)?;
            if taken == remaining {
                self.field.t = t_target;
            }
        }
        Ok(())
    }
}

/// Integrate from `initial` to `ctl.t_end`, calling `on_snapshot` at the
/// initial time and at every output time.
pub fn run<'m, F>(mesh: &'m Mesh, initial: Field, ctl: &StepControl, mut on_snapshot: F) -> Result<Stepper<'m>>
where
    F: FnMut(&Field, &ParabolicityReport) -> Result<()>,
{
    let bad = ctl.violations();
    if !bad.is_empty() {
        return Err(Error::Config(bad));
    }
    let mut stepper = Stepper::new(mesh, initial)?;
    on_snapshot(stepper.field(), stepper.report())?;
    for t in ctl.snapshot_times() {
        if t <= stepper.field().t {
            continue;
        }
        stepper.advance_to(t, ctl)?;
        on_snapshot(stepper.field(), stepper.report())?;
    }
    Ok(stepper)
}

/// [`run`] on the radial line of a round cone; the only path for `n >= 3`.
pub fn run_axisymmetric<'m, F>(mesh: &'m Mesh, initial: Field, ctl: &StepControl, on_snapshot: F) -> Result<Stepper<'m>>
where
    F: FnMut(&Field, &ParabolicityReport) -> Result<()>,
{
    if !mesh.is_axisymmetric() {
        return Err(Error::Contract("run_axisymmetric needs a radial mesh".into()));
    }
    run(mesh, initial, ctl, on_snapshot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeSpec;
    use crate::mesh::{build_mesh, build_radial_mesh};
    use approx::assert_relative_eq;

    #[test]
    fn constant_rhs_is_n_over_u() {
        let m = build_mesh(&ConeSpec::round(0.5, 2), 16, 16).unwrap();
        for k in [1.0, 2.0] {
            let f = m.constant_field(k, 0.0);
            for r in rhs(&m, &f).unwrap() {
                assert_relative_eq!(r, 2.0 / k, epsilon = 1e-10);
            }
        }
        let h = mean_curvature_from_rhs(&m, &m.constant_field(1.0, 0.0)).unwrap();
        assert!(h.iter().all(|h| (h - 2.0).abs() < 1e-10));
    }

    #[test]
    fn dt_scales_with_u_squared_and_h_squared() {
        let ctl = StepControl::default();
        let m = build_mesh(&ConeSpec::round(0.5, 2), 16, 16).unwrap();
        let d1 = stable_dt(&m, &m.constant_field(1.0, 0.0), &ctl).unwrap();
        let d10 = stable_dt(&m, &m.constant_field(10.0, 0.0), &ctl).unwrap();
        assert_relative_eq!(d10 / d1, 100.0, epsilon = 1e-8);
        let r1 = build_radial_mesh(&ConeSpec::round(0.5, 2), 16).unwrap();
        let r2 = build_radial_mesh(&ConeSpec::round(0.5, 2), 32).unwrap();
        let a = stable_dt(&r1, &r1.constant_field(1.0, 0.0), &ctl).unwrap();
        let b = stable_dt(&r2, &r2.constant_field(1.0, 0.0), &ctl).unwrap();
        assert_relative_eq!(a / b, (31.5f64 / 15.5).powi(2), max_relative = 1e-2);
    }

    #[test]
    fn near_null_field_is_stiff() {
        let m = build_radial_mesh(&ConeSpec::round(0.5, 2), 16).unwrap();
        // v^2 = u^2/(1-r^2) - u_r^2 (1-r^2) nearly vanishes at the steepest node.
        let f = m.field_from_fn(0.0, |x| {
            let r = x[0];
            1.0 + 0.0996 * (2.0 * std::f64::consts::PI * r).cos()
        });
        let ctl = StepControl::default();
        let res = stable_dt(&m, &f, &ctl);
        assert!(res.is_ok() || matches!(res, Err(Error::Stiffness { .. })));
        let g = m.field_from_fn(0.0, |x| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x[0]).cos());
        assert!(matches!(stable_dt(&m, &g, &ctl), Err(Error::NotSpacelike { .. })));
    }

    #[test]
    fn single_step_matches_homothetic_solution() {
        let m = build_mesh(&ConeSpec::round(0.5, 2), 16, 16).unwrap();
        let f = m.constant_field(1.0, 0.0);
        let g = step(&m, &f, 1e-4).unwrap();
        let exact = (1.0f64 + 4e-4).sqrt();
        for u in &g.u {
            assert!((u - exact).abs() < 1e-11);
        }
        assert_eq!(step(&m, &f, 0.0).unwrap(), f);
    }

    #[test]
    fn snapshot_times_are_geometric() {
        let ctl = StepControl {
            t_end: 1.0,
            t_first: 0.125,
            ..StepControl::default()
        };
        assert_eq!(ctl.snapshot_times(), vec![0.125, 0.25, 0.5, 1.0]);
    }
}
