//! Per-snapshot measurements of the maximum-principle quantities and the
//! audit that checks their persistence along a run.

use serde::{Deserialize, Serialize};

use crate::cone::{self, BoundarySample};
use crate::error::{Error, Result};
use crate::flow::{self, ParabolicityReport};
use crate::geometry;
use crate::mesh::{jet_at, Field, Mesh};

/// Default interior region `|x| <= fraction * R(theta)`.
pub const DEFAULT_INTERIOR_FRACTION: f64 = 0.5;

/// `osc(psi u)` values below this are treated as converged to roundoff.
pub const OSC_FLOOR: f64 = 1e-11;

/// Geometry of one node, as written to snapshot tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub node_id: usize,
    pub x: Vec<f64>,
    pub u: f64,
    pub v: f64,
    /// Support function `S`.
    pub s: f64,
    pub h: f64,
    pub a2: f64,
    pub j: f64,
}

pub fn node_rows(mesh: &Mesh, field: &Field) -> Result<Vec<NodeRow>> {
    (0..mesh.node_count())
        .map(|k| {
            let jet = jet_at(mesh, field, k)?;
            let g = geometry::node_geometry(&jet).map_err(|e| e.at_node(k))?;
            Ok(NodeRow {
                node_id: k,
                x: mesh.node_x(k).to_vec(),
                u: jet.u,
                v: g.v,
                s: g.s,
                h: g.h.unwrap_or(f64::NAN),
                a2: g.a2.unwrap_or(f64::NAN),
                j: g.j,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub n: usize,
    pub area: f64,
    /// `area^{-1/n}`.
    pub psi: f64,
    /// Discrete area of the hyperbolic cap cut out by the cone.
    pub cap_area: f64,
    /// `F^2 - 2nt`.
    pub f2m2nt_min: f64,
    pub f2m2nt_max: f64,
    /// `H F`.
    pub hf_min: f64,
    pub hf_max: f64,
    /// `(H/S) F^2`.
    pub hs_f2_min: f64,
    pub hs_f2_max: f64,
    /// Area-weighted mean of `H F`.
    pub mean_hf: f64,
    pub j_max: f64,
    pub h_min: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// `max psi u - min psi u`.
    pub osc_psi_u: f64,
    /// `|int H S - n area| / area`.
    pub integral_residual: f64,
    /// `max |A|^2 F^2` over the interior region.
    pub interior_a2f2_max: f64,
    pub r_f2: f64,
    pub r_hs: f64,
    pub r_h: f64,
    pub parabolicity: ParabolicityReport,
}

/// Largest conormal-derivative residuals over the boundary nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResiduals {
    /// `<grad F^2, mu>`.
    pub r_f2: f64,
    /// `<grad (H/S), mu>`.
    pub r_hs: f64,
    /// `<grad H, mu> + H A^Sigma(nu, nu)`.
    pub r_h: f64,
}

/// `<grad q, mu>` at a boundary node from the chart gradient of `q`.
///
/// With `mu = (gamma, gamma.x) / sqrt(1 - (gamma.x)^2)` one has
/// `<d_j F, mu> = u gamma_j / sqrt((1 - |x|^2)(1 - (gamma.x)^2))`.
fn conormal_derivative(ginv: &nalgebra::DMatrix<f64>, dq: &[f64], sample: &BoundarySample, u: f64) -> f64 {
    let x = &sample.x;
    let gap = 1.0 - x.iter().map(|v| v * v).sum::<f64>();
    let gx: f64 = sample.gamma.iter().zip(x).map(|(g, v)| g * v).sum();
    let scale = u / (gap * (1.0 - gx * gx)).sqrt();
    let n = dq.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += ginv[(i, j)] * dq[i] * sample.gamma[j];
        }
    }
    acc * scale
}

fn residuals_from_rows(mesh: &Mesh, field: &Field, rows: &[NodeRow]) -> Result<BoundaryResiduals> {
    let f2: Vec<f64> = rows.iter().map(|r| r.u * r.u).collect();
    let hs: Vec<f64> = rows.iter().map(|r| r.h / r.s).collect();
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let mut out = BoundaryResiduals {
        r_f2: 0.0,
        r_hs: 0.0,
        r_h: 0.0,
    };
    for k in mesh.boundary_nodes() {
        let jet = jet_at(mesh, field, k)?;
        let ginv = geometry::inverse_metric(&jet).map_err(|e| e.at_node(k))?;
        let nu = geometry::normal(&jet)?;
        let sample = mesh.boundary_sample(k);
        let u = field.u[k];
        let d = |q: &[f64]| conormal_derivative(&ginv, &mesh.boundary_gradient(q, k), sample, u);
        let sigma = cone::sigma_a_nu_nu_projected(sample, u, &nu);
        out.r_f2 = out.r_f2.max(d(&f2).abs());
        out.r_hs = out.r_hs.max(d(&hs).abs());
        out.r_h = out.r_h.max((d(&h) + h[k] * sigma).abs());
    }
    Ok(out)
}

pub fn boundary_residuals(mesh: &Mesh, field: &Field) -> Result<BoundaryResiduals> {
    let rows = node_rows(mesh, field)?;
    residuals_from_rows(mesh, field, &rows)
}

/// Diagnostics of one snapshot; `interior_fraction` defines the interior
/// region as a sub-cone `|x| <= fraction * R(theta)`.
pub fn record(mesh: &Mesh, field: &Field, interior_fraction: f64) -> Result<DiagnosticsRecord> {
    let rows = node_rows(mesh, field)?;
    record_from_rows(mesh, field, &rows, interior_fraction)
}

pub fn record_from_rows(mesh: &Mesh, field: &Field, rows: &[NodeRow], interior_fraction: f64) -> Result<DiagnosticsRecord> {
    let n = mesh.dim();
    let nf = n as f64;
    let t = field.t;
    let mut area = 0.0;
    let mut hs_integral = 0.0;
    let mut hf_integral = 0.0;
    let mut ext = Extrema::default();
    let mut interior_a2f2_max = 0.0f64;
    for r in rows {
        let gap = 1.0 - r.x.iter().map(|v| v * v).sum::<f64>();
        // sqrt(det g) = u^{n-1} v (1 - |x|^2)^{-n/2}; the hyperbolic weight
        // carries (1 - |x|^2)^{-(n+1)/2}.
        let dmu = mesh.hyperbolic_weight(r.node_id) * r.u.powi(n as i32 - 1) * r.v * gap.sqrt();
        area += dmu;
        hs_integral += r.h * r.s * dmu;
        hf_integral += r.h * r.u * dmu;
        let f2 = r.u * r.u;
        ext.f2m2nt.add(f2 - 2.0 * nf * t);
        ext.hf.add(r.h * r.u);
        ext.hs_f2.add(r.h / r.s * f2);
        ext.j.add(r.j);
        ext.h.add(r.h);
        ext.u.add(r.u);
        let radius = mesh.spec.radius_towards(&r.x);
        let norm = r.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= interior_fraction * radius {
            interior_a2f2_max = interior_a2f2_max.max(r.a2 * f2);
        }
    }
    if !(area > 0.0) {
        return Err(Error::Contract(format!("non-positive area {area}")));
    }
    let psi = area.powf(-1.0 / nf);
    let residuals = residuals_from_rows(mesh, field, rows)?;
    let parabolicity = flow::parabolicity(mesh, field)?;
    Ok(DiagnosticsRecord {
        t,
        n,
        area,
        psi,
        cap_area: crate::mesh::cap_area_discrete(mesh),
        f2m2nt_min: ext.f2m2nt.lo,
        f2m2nt_max: ext.f2m2nt.hi,
        hf_min: ext.hf.lo,
        hf_max: ext.hf.hi,
        hs_f2_min: ext.hs_f2.lo,
        hs_f2_max: ext.hs_f2.hi,
        mean_hf: hf_integral / area,
        j_max: ext.j.hi,
        h_min: ext.h.lo,
        u_min: ext.u.lo,
        u_max: ext.u.hi,
        osc_psi_u: psi * (ext.u.hi - ext.u.lo),
        integral_residual: (hs_integral - nf * area).abs() / area,
        interior_a2f2_max,
        r_f2: residuals.r_f2,
        r_hs: residuals.r_hs,
        r_h: residuals.r_h,
        parabolicity,
    })
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Default for Range {
    fn default() -> Self {
        Self {
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
        }
    }
}

impl Range {
    fn add(&mut self, v: f64) {
        self.lo = self.lo.min(v);
        self.hi = self.hi.max(v);
    }
}

#[derive(Debug, Default)]
struct Extrema {
    f2m2nt: Range,
    hf: Range,
    hs_f2: Range,
    j: Range,
    h: Range,
    u: Range,
}

/// Radius `R` of the hyperbolic plane whose cap has unit area, from a record.
pub fn unit_area_radius(rec: &DiagnosticsRecord) -> f64 {
    rec.cap_area.powf(-1.0 / rec.n as f64)
}

// ---------------------------------------------------------------- audit

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub passed: bool,
    /// Smallest slack seen; negative values are violations.
    pub worst_margin: f64,
    /// Time of the worst margin.
    pub at_t: f64,
    pub detail: String,
}

/// `1/J = log(b + 2nt) / a`, fitted through the origin for each `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    pub samples: usize,
    pub t_from: f64,
    pub t_to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub passed: bool,
    pub checks: Vec<AuditCheck>,
    pub j_fit: Option<LogFit>,
}

impl AuditReport {
    pub fn check(&self, prefix: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name.starts_with(prefix))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    /// Relative slack on the envelope and hull checks.
    pub rel_tol: f64,
    /// Absolute slack on the `(H/S) F^2` hull, per unit of `n`.
    pub hull_tol_per_n: f64,
    pub j_tol: f64,
    pub h_tol: f64,
    /// Slack on the mean of `H F`, per unit of `n`.
    pub mean_tol_per_n: f64,
    /// Records before this time are a transient for the oscillation check.
    pub osc_from: f64,
}

impl Default for AuditSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            hull_tol_per_n: 1e-3,
            j_tol: 1e-6,
            h_tol: 1e-6,
            mean_tol_per_n: 1e-3,
            osc_from: 1.0,
        }
    }
}

struct Tracker {
    margin: f64,
    at_t: f64,
}

impl Tracker {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            at_t: f64::NAN,
        }
    }

    fn see(&mut self, margin: f64, t: f64) {
        if margin < self.margin || self.at_t.is_nan() {
            self.margin = margin.min(self.margin);
            self.at_t = t;
        }
    }

    /// Passes when the worst slack is at least `-tol`.
    fn finish(self, name: &str, tol: f64, detail: String) -> AuditCheck {
        let margin = if self.margin.is_finite() { self.margin } else { 0.0 };
        AuditCheck {
            name: name.to_string(),
            passed: margin >= -tol,
            worst_margin: margin,
            at_t: if self.at_t.is_nan() { 0.0 } else { self.at_t },
            detail,
        }
    }
}

pub fn audit(records: &[DiagnosticsRecord]) -> Result<AuditReport> {
    audit_with(records, &AuditSettings::default())
}

pub fn audit_with(records: &[DiagnosticsRecord], cfg: &AuditSettings) -> Result<AuditReport> {
    if records.len() < 2 {
        return Err(Error::Contract(format!("audit needs at least 2 records, got {}", records.len())));
    }
    let first = &records[0];
    let nf = first.n as f64;
    let mut checks = Vec::new();

    // (a) F^2 - 2nt envelope
    let scale = first.f2m2nt_min.abs().max(first.f2m2nt_max.abs()).max(1.0);
    let mut env = Tracker::new();
    for w in records.windows(2) {
        env.see(w[0].f2m2nt_max - w[1].f2m2nt_max, w[1].t);
        env.see(w[1].f2m2nt_min - w[0].f2m2nt_min, w[1].t);
    }
    checks.push(env.finish(
        "a_envelope",
        cfg.rel_tol * scale,
        format!("max(F^2-2nt) non-increasing, min non-decreasing; tol {:e}", cfg.rel_tol * scale),
    ));

    // (b) (H/S) F^2 initial hull
    let hull_tol = cfg.hull_tol_per_n * nf;
    let mut hull = Tracker::new();
    for r in records {
        hull.see(r.hs_f2_min - first.hs_f2_min, r.t);
        hull.see(first.hs_f2_max - r.hs_f2_max, r.t);
    }
    checks.push(hull.finish(
        "b_hs_f2_hull",
        hull_tol,
        format!("(H/S)F^2 within [{}, {}] +- {hull_tol:e}", first.hs_f2_min, first.hs_f2_max),
    ));

    // (c) J bound
    let j_bound = first.j_max.max(nf - 1.0);
    let mut jb = Tracker::new();
    for r in records {
        jb.see(j_bound - r.j_max, r.t);
    }
    checks.push(jb.finish("c_j_bound", cfg.j_tol, format!("max J <= {j_bound}")));

    // (d) mean convexity
    let mut mc = Tracker::new();
    if first.h_min >= 0.0 {
        for r in records {
            mc.see(r.h_min, r.t);
        }
    }
    checks.push(mc.finish(
        "d_mean_convexity",
        cfg.h_tol,
        if first.h_min >= 0.0 {
            "min H >= 0 preserved".into()
        } else {
            "initial data not mean convex; check vacuous".into()
        },
    ));

    // (e) H F band. H F = (H/S) F^2 * sqrt(1 + J) and J <= j_bound.
    let stretch = (1.0 + j_bound).sqrt();
    let lo = first.hf_min.min(first.hs_f2_min).min(first.hs_f2_min * stretch) - hull_tol;
    let hi = first.hf_max.max(first.hs_f2_max).max(first.hs_f2_max * stretch) + hull_tol;
    let mut hf = Tracker::new();
    for r in records {
        hf.see(r.hf_min - lo, r.t);
        hf.see(hi - r.hf_max, r.t);
    }
    checks.push(hf.finish("e_hf_band", 0.0, format!("HF within [{lo}, {hi}]")));

    // (f) psi F band from the initial envelope constants.
    let radius = unit_area_radius(first);
    let (c1, c2) = (first.f2m2nt_min, first.f2m2nt_max);
    let band_lo = radius * (c1 / c2).sqrt();
    let band_hi = radius * (1.0 + j_bound).powf(1.0 / (2.0 * nf)) * (c2 / c1).sqrt();
    let mut band = Tracker::new();
    for r in records {
        band.see((r.psi * r.u_min - band_lo) / radius, r.t);
        band.see((band_hi - r.psi * r.u_max) / radius, r.t);
    }
    checks.push(band.finish(
        "f_psi_u_band",
        cfg.rel_tol,
        format!("psi u within [{band_lo}, {band_hi}]"),
    ));

    // (g) oscillation decay after the transient.
    let mut osc = Tracker::new();
    let late: Vec<&DiagnosticsRecord> = records.iter().filter(|r| r.t >= cfg.osc_from).collect();
    for w in late.windows(2) {
        if w[1].osc_psi_u < OSC_FLOOR {
            osc.see(0.0, w[1].t);
        } else {
            osc.see(w[0].osc_psi_u - w[1].osc_psi_u, w[1].t);
        }
    }
    let j_fit = fit_log_decay(records);
    let fit_note = match &j_fit {
        Some(f) => format!("; J fit a={:.6e} b={:.6e} R^2={:.4}", f.a, f.b, f.r_squared),
        None => "; J fit unavailable".into(),
    };
    checks.push(osc.finish(
        "g_osc_decay",
        0.0,
        format!("osc(psi u) non-increasing for t >= {}{fit_note}", cfg.osc_from),
    ));

    // Average of H F on mean-convex records. S >= F and int H S = n area
    // give n / sqrt(1 + max J) <= mean HF <= n.
    let mean_tol = cfg.mean_tol_per_n * nf;
    let mut mean = Tracker::new();
    for r in records.iter().filter(|r| r.h_min >= 0.0) {
        mean.see(r.mean_hf - nf / (1.0 + r.j_max).sqrt(), r.t);
        mean.see(nf - r.mean_hf, r.t);
    }
    checks.push(mean.finish(
        "h_mean_hf",
        mean_tol,
        format!("n / sqrt(1 + max J) <= mean HF <= n where H >= 0, tol {mean_tol:e}"),
    ));

    let passed = checks.iter().all(|c| c.passed);
    Ok(AuditReport { passed, checks, j_fit })
}

/// Fit `1/max J` against `log(b + 2nt)` over the last two decades of the
/// records, scanning `b` on a logarithmic grid.
pub fn fit_log_decay(records: &[DiagnosticsRecord]) -> Option<LogFit> {
    let t_last = records.last()?.t;
    fit_log_decay_between(records, t_last / 100.0, t_last)
}

pub fn fit_log_decay_between(records: &[DiagnosticsRecord], t_from: f64, t_to: f64) -> Option<LogFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t >= t_from && r.t <= t_to && r.j_max > 0.0 && r.t > 0.0)
        .map(|r| (2.0 * r.n as f64 * r.t, 1.0 / r.j_max))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let mut best: Option<LogFit> = None;
    for e in -60..=120 {
        let b = 10f64.powf(e as f64 / 10.0);
        // b must keep log(b + 2nt) positive over the window.
        if pts.iter().any(|p| b + p.0 <= 1.0) {
            continue;
        }
        let xs: Vec<f64> = pts.iter().map(|p| (b + p.0).ln()).collect();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&pts).map(|(x, p)| x * p.1).sum();
        let c = sxy / sxx;
        let ss_res: f64 = xs.iter().zip(&pts).map(|(x, p)| (p.1 - c * x).powi(2)).sum();
        let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
        if c > 0.0 && best.is_none_or(|f| r2 > f.r_squared) {
            best = Some(LogFit {
                a: 1.0 / c,
                b,
                r_squared: r2,
                samples: pts.len(),
                t_from,
                t_to,
            });
        }
    }
    best
}
