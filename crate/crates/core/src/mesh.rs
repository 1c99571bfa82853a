//! Polar finite-difference mesh over the chart domain `D`.
//!
//! Nodes sit on rings `s_i = (i + 1/2) ds` of a logical radius
//! `s in (0, 1]`, mapped to the chart by `X(s, theta) = s R(theta) e_r(theta)`
//! with `ds = 1 / (Nr - 1/2)`, so the innermost ring is offset from the
//! origin and the outermost ring lies on `dD`. Derivatives are centered
//! differences in `(s, theta)` pushed to Cartesian components through the
//! chain rule. Two ghost layers close the stencils:
//!
//! * across the origin, the ghost of ring 0 at angle `theta` is the
//!   antipodal value at `theta + pi`;
//! * outside `dD`, a ghost ring written by [`apply_neumann`] makes the
//!   centered conormal derivative vanish.
//!
//! The axisymmetric layout keeps only the radial line and serves every
//! dimension `n >= 2` on round cones.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::cone::{convexity_check, BoundarySample, ConeSpec};
use crate::error::{Error, Result};
use crate::geometry::{self, Jet, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Polar { nr: usize, ntheta: usize },
    Radial { nr: usize },
}

/// Chain-rule data of the logical map at one node.
#[derive(Debug, Clone, Copy, Default)]
struct ChartMap {
    /// `d(s, theta)/dx`, row = logical coordinate, column = Cartesian.
    jinv: [f64; 4],
    x_st: [f64; 2],
    x_tt: [f64; 2],
}

/// Ghost of ring 0 at column `j`: cubic interpolation along column `col`.
#[derive(Debug, Clone, Copy)]
struct Antipode {
    col: usize,
    weights: [f64; 4],
}

/// Per-ring projection onto angular modes `|m| <= keep`.
#[derive(Clone)]
struct AngularFilter {
    keep: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for AngularFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngularFilter").field("keep", &self.keep).finish()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub spec: ConeSpec,
    pub layout: Layout,
    /// Logical radial spacing (`Radial`: physical spacing).
    pub ds: f64,
    pub dtheta: f64,
    coords: Vec<f64>,
    weights: Vec<f64>,
    /// Cell integrals of the hyperbolic density `(1 - |x|^2)^{-(n+1)/2}`.
    hyperbolic_weights: Vec<f64>,
    /// Squared effective spacing used by the time-step limit.
    spacing2: Vec<f64>,
    inv_spacing2: Vec<f64>,
    maps: Vec<ChartMap>,
    antipodes: Vec<Antipode>,
    /// `c_theta / c_s` of the conormal in logical components, per boundary column.
    neumann_ratio: Vec<f64>,
    boundary: Vec<BoundarySample>,
    filter: Option<AngularFilter>,
}

/// Graph values at one time, plus the outer ghost layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub u: Vec<f64>,
    pub ghost: Vec<f64>,
    pub t: f64,
}

/// Allocation-free jet used by the flow kernels.
#[derive(Debug, Clone, Copy)]
pub struct RawJet {
    pub n: usize,
    pub x: [f64; MAX_DIM],
    pub u: f64,
    pub du: [f64; MAX_DIM],
    /// Row-major Hessian.
    pub d2u: [f64; MAX_DIM * MAX_DIM],
}

impl RawJet {
    pub fn x(&self) -> &[f64] {
        &self.x[..self.n]
    }
    pub fn du(&self) -> &[f64] {
        &self.du[..self.n]
    }
    pub fn d2u(&self) -> &[f64] {
        &self.d2u[..self.n * self.n]
    }

    pub fn to_jet(&self) -> Jet {
        let n = self.n;
        Jet::second_order(self.x(), self.u, self.du(), DMatrix::from_row_slice(n, n, self.d2u()))
    }
}

fn lagrange4(nodes: [f64; 4], at: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                w[a] *= (at - nodes[b]) / (nodes[a] - nodes[b]);
            }
        }
    }
    w
}

/// Largest angular mode resolved at ring `i` without making the angular
/// spacing finer than the radial one.
fn kept_modes(i: usize, ntheta: usize) -> usize {
    // Mode m on ring i has physical wavenumber m / r; keeping m <= 2r/h_s
    // bounds its difference symbol by the radial one.
    (2 * i + 1).clamp(1, ntheta / 2)
}

/// Polar mesh over `D` with `nr` rings and `ntheta` (even) rays.
pub fn build_mesh(spec: &ConeSpec, nr: usize, ntheta: usize) -> Result<Mesh> {
    spec.validate()?;
    if spec.n != 2 {
        return Err(Error::Domain(format!(
            "the polar mesh is two-dimensional; use the axisymmetric mesh for n = {}",
            spec.n
        )));
    }
    if !convexity_check(spec).convex {
        return Err(Error::Domain("the cone cross-section is not convex".into()));
    }
    if nr < 8 || ntheta < 8 || !ntheta.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "mesh needs Nr >= 8 and an even Ntheta >= 8, got {nr} x {ntheta}"
        )));
    }
    let ds = 1.0 / (nr as f64 - 0.5);
    let dtheta = 2.0 * PI / ntheta as f64;
    let count = nr * ntheta;
    let mut coords = Vec::with_capacity(2 * count);
    let mut weights = Vec::with_capacity(count);
    let mut hyperbolic_weights = Vec::with_capacity(count);
    let mut spacing2 = Vec::with_capacity(count);
    let mut maps = Vec::with_capacity(count);
    let mut boundary = Vec::with_capacity(ntheta);

    let radii: Vec<(f64, f64, f64)> = (0..ntheta)
        .map(|j| spec.radius_derivatives(j as f64 * dtheta))
        .collect();

    for i in 0..nr {
        let last = i == nr - 1;
        // The outermost ring is placed exactly at s = 1.
        let s = if last { 1.0 } else { (i as f64 + 0.5) * ds };
        let keep = kept_modes(i, ntheta);
        let ring_weight = if last {
            let inner = 1.0 - 0.5 * ds;
            0.5 * (1.0 - inner * inner)
        } else {
            s * ds
        };
        for (j, &(r, r1, r2)) in radii.iter().enumerate() {
            let theta = j as f64 * dtheta;
            let (sn, cs) = theta.sin_cos();
            let er = [cs, sn];
            let et = [-sn, cs];
            let x = [s * r * cs, s * r * sn];
            let x_s = [r * er[0], r * er[1]];
            let x_t = [s * (r1 * er[0] + r * et[0]), s * (r1 * er[1] + r * et[1])];
            let x_st = [r1 * er[0] + r * et[0], r1 * er[1] + r * et[1]];
            let x_tt = [
                s * ((r2 - r) * er[0] + 2.0 * r1 * et[0]),
                s * ((r2 - r) * er[1] + 2.0 * r1 * et[1]),
            ];
            let det = x_s[0] * x_t[1] - x_t[0] * x_s[1];
            let jinv = [x_t[1] / det, -x_t[0] / det, -x_s[1] / det, x_s[0] / det];
            maps.push(ChartMap { jinv, x_st, x_tt });
            coords.extend_from_slice(&x);
            weights.push(ring_weight * r * r * dtheta);
            // int s r^2 (1 - s^2 r^2)^{-3/2} ds over the ring's cell
            let (a, b) = if last { (1.0 - 0.5 * ds, 1.0) } else { (s - 0.5 * ds, s + 0.5 * ds) };
            let edge = |t: f64| 1.0 / (1.0 - t * t * r * r).sqrt();
            hyperbolic_weights.push((edge(b) - edge(a)) * dtheta);

            let h_s = r * ds;
            // Symbol of the five-point angular second difference at the
            // highest retained mode.
            let phi = (keep as f64 * dtheta / 2.0).sin();
            let h_t = (x_t[0].hypot(x_t[1])) * dtheta / phi;
            let boost = 1.0 + phi * phi / 3.0;
            spacing2.push(1.0 / (1.0 / (h_s * h_s) + boost / (h_t * h_t)));

            if last {
                boundary.push(spec.boundary_sample(&x)?);
            }
        }
    }

    let half = ntheta / 2;
    let s_rings: [f64; 4] = std::array::from_fn(|i| (i as f64 + 0.5) * ds);
    let antipodes = (0..ntheta)
        .map(|j| {
            let col = (j + half) % ntheta;
            let target = s_rings[0] * radii[j].0 / radii[col].0;
            let weights = if (target - s_rings[0]).abs() < 1e-14 {
                [1.0, 0.0, 0.0, 0.0]
            } else {
                lagrange4(s_rings, target)
            };
            Antipode { col, weights }
        })
        .collect();

    let neumann_ratio = (0..ntheta)
        .map(|j| {
            let k = (nr - 1) * ntheta + j;
            let m = &maps[k];
            let w = &boundary[j].w;
            let c_s = m.jinv[0] * w[0] + m.jinv[1] * w[1];
            let c_t = m.jinv[2] * w[0] + m.jinv[3] * w[1];
            c_t / c_s
        })
        .collect();

    let keep: Vec<usize> = (0..nr).map(|i| kept_modes(i, ntheta)).collect();
    let filter = if keep.iter().any(|&m| m < half) {
        let mut planner = FftPlanner::new();
        Some(AngularFilter {
            keep,
            forward: planner.plan_fft_forward(ntheta),
            inverse: planner.plan_fft_inverse(ntheta),
        })
    } else {
        None
    };

    Ok(Mesh {
        spec: spec.clone(),
        layout: Layout::Polar { nr, ntheta },
        ds,
        dtheta,
        coords,
        weights,
        hyperbolic_weights,
        inv_spacing2: spacing2.iter().map(|h| 1.0 / h).collect(),
        spacing2,
        maps,
        antipodes,
        neumann_ratio,
        boundary,
        filter,
    })
}

/// Radial line mesh for round cones in any dimension.
pub fn build_radial_mesh(spec: &ConeSpec, nr: usize) -> Result<Mesh> {
    spec.validate()?;
    if spec.n > MAX_DIM {
        return Err(Error::Domain(format!("n = {} exceeds the supported maximum {MAX_DIM}", spec.n)));
    }
    let rho = match spec.kind {
        crate::cone::ConeKind::Round { rho } => rho,
        _ => return Err(Error::Domain("the axisymmetric solver needs a round cone".into())),
    };
    if nr < 8 {
        return Err(Error::Domain(format!("mesh needs Nr >= 8, got {nr}")));
    }
    let n = spec.n;
    let dr = rho / (nr as f64 - 0.5);
    let omega = sphere_area(n - 1);
    let mut coords = Vec::with_capacity(n * nr);
    let mut weights = Vec::with_capacity(nr);
    let mut hyperbolic_weights = Vec::with_capacity(nr);
    let mut spacing2 = Vec::with_capacity(nr);
    let (gz, gw) = crate::geometry::gauss_legendre(16);
    for i in 0..nr {
        let last = i == nr - 1;
        let r = if last { rho } else { (i as f64 + 0.5) * dr };
        let (a, b) = (i as f64 * dr, if last { rho } else { (i as f64 + 1.0) * dr });
        let p = n as i32;
        weights.push(omega * (b.powi(p) - a.powi(p)) / n as f64);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let cell: f64 = gz
            .iter()
            .zip(&gw)
            .map(|(z, w)| {
                let t = mid + half * z;
                w * t.powi(p - 1) * (1.0 - t * t).powf(-(n as f64 + 1.0) / 2.0)
            })
            .sum();
        hyperbolic_weights.push(omega * half * cell);
        coords.push(r);
        coords.extend(std::iter::repeat_n(0.0, n - 1));
        spacing2.push(dr * dr);
    }
    let mut xb = vec![0.0; n];
    xb[0] = rho;
    let boundary = vec![spec.boundary_sample(&xb)?];
    Ok(Mesh {
        spec: spec.clone(),
        layout: Layout::Radial { nr },
        ds: dr,
        dtheta: 0.0,
        coords,
        weights,
        hyperbolic_weights,
        inv_spacing2: spacing2.iter().map(|h| 1.0 / h).collect(),
        spacing2,
        maps: Vec::new(),
        antipodes: Vec::new(),
        neumann_ratio: vec![0.0],
        boundary,
        filter: None,
    })
}

fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

impl Mesh {
    pub fn dim(&self) -> usize {
        self.spec.n
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn nr(&self) -> usize {
        match self.layout {
            Layout::Polar { nr, .. } | Layout::Radial { nr } => nr,
        }
    }

    /// Rays (1 for the radial layout).
    pub fn ntheta(&self) -> usize {
        match self.layout {
            Layout::Polar { ntheta, .. } => ntheta,
            Layout::Radial { .. } => 1,
        }
    }

    pub fn is_axisymmetric(&self) -> bool {
        matches!(self.layout, Layout::Radial { .. })
    }

    pub fn node_x(&self, k: usize) -> &[f64] {
        let n = self.dim();
        &self.coords[n * k..n * (k + 1)]
    }

    /// Quadrature weight of node `k` for integrals over `D`.
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `(1 - |x|^2)^{-(n+1)/2}` over the cell of node `k`.
    /// Hyperbolic integrals use it with the smooth remainder of the
    /// integrand sampled at the node, which keeps the quadrature accurate
    /// when `D` reaches close to the light cone.
    pub fn hyperbolic_weight(&self, k: usize) -> f64 {
        self.hyperbolic_weights[k]
    }

    pub fn spacing2(&self, k: usize) -> f64 {
        self.spacing2[k]
    }

    #[inline]
    pub fn inv_spacing2(&self, k: usize) -> f64 {
        self.inv_spacing2[k]
    }

    pub fn ring_of(&self, k: usize) -> usize {
        k / self.ntheta()
    }

    pub fn boundary_nodes(&self) -> std::ops::Range<usize> {
        let start = (self.nr() - 1) * self.ntheta();
        start..start + self.ntheta()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.boundary_nodes().contains(&k)
    }

    /// Boundary data of a boundary node.
    pub fn boundary_sample(&self, k: usize) -> &BoundarySample {
        &self.boundary[k - self.boundary_nodes().start]
    }

    /// Chart area of `D` as seen by the quadrature.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Field with `u(x)` sampled at the nodes, Neumann ghosts applied.
    pub fn field_from_fn(&self, t: f64, f: impl Fn(&[f64]) -> f64) -> Field {
        let u = (0..self.node_count()).map(|k| f(self.node_x(k))).collect();
        let mut field = Field {
            u,
            ghost: vec![0.0; self.ntheta()],
            t,
        };
        self.close_ghosts(&mut field);
        field
    }

    pub fn constant_field(&self, k: f64, t: f64) -> Field {
        self.field_from_fn(t, |_| k)
    }

    /// Rewrite the outer ghost layer from the interior values.
    pub fn close_ghosts(&self, field: &mut Field) {
        match self.layout {
            Layout::Radial { nr } => field.ghost[0] = field.u[nr - 2],
            Layout::Polar { nr, ntheta } => {
                let b = (nr - 1) * ntheta;
                let inner = (nr - 2) * ntheta;
                for j in 0..ntheta {
                    let ratio = self.neumann_ratio[j];
                    field.ghost[j] = if ratio == 0.0 {
                        field.u[inner + j]
                    } else {
                        let jp = (j + 1) % ntheta;
                        let jm = (j + ntheta - 1) % ntheta;
                        let u_t = (field.u[b + jp] - field.u[b + jm]) / (2.0 * self.dtheta);
                        field.u[inner + j] - 2.0 * self.ds * ratio * u_t
                    };
                }
            }
        }
    }

    #[inline]
    fn polar_value(&self, field: &Field, i: isize, j: usize, nr: usize, ntheta: usize) -> f64 {
        if i < 0 {
            let a = self.antipodes[j];
            a.weights
                .iter()
                .enumerate()
                .map(|(ring, w)| if *w == 0.0 { 0.0 } else { w * field.u[ring * ntheta + a.col] })
                .sum()
        } else if i as usize >= nr {
            field.ghost[j]
        } else {
            field.u[i as usize * ntheta + j]
        }
    }

    /// Values of ring `i` (which may be the antipodal or the ghost ring) at
    /// the given columns.
    #[inline]
    fn ring_values(&self, field: &Field, i: isize, cols: &[usize; 5], nr: usize, ntheta: usize) -> [f64; 5] {
        if i >= 0 && (i as usize) < nr {
            let row = &field.u[i as usize * ntheta..(i as usize + 1) * ntheta];
            cols.map(|c| row[c])
        } else if i >= 0 {
            cols.map(|c| field.ghost[c])
        } else {
            cols.map(|c| self.polar_value(field, i, c, nr, ntheta))
        }
    }

    /// Finite-difference jet at node `k`, written into `out`.
    pub fn raw_jet(&self, field: &Field, k: usize, out: &mut RawJet) {
        let n = self.dim();
        out.n = n;
        out.x[..n].copy_from_slice(self.node_x(k));
        out.u = field.u[k];
        match self.layout {
            Layout::Radial { nr } => {
                let r = out.x[0];
                let um = if k == 0 { field.u[0] } else { field.u[k - 1] };
                let up = if k + 1 == nr { field.ghost[0] } else { field.u[k + 1] };
                let h = self.ds;
                let u_r = (up - um) / (2.0 * h);
                let u_rr = (up - 2.0 * out.u + um) / (h * h);
                out.du[..n].fill(0.0);
                out.du[0] = u_r;
                out.d2u[..n * n].fill(0.0);
                out.d2u[0] = u_rr;
                for d in 1..n {
                    out.d2u[d * n + d] = u_r / r;
                }
            }
            Layout::Polar { nr, ntheta } => {
                let i = k / ntheta;
                let j = k % ntheta;
                let c = out.u;
                // Angular derivatives are fourth order: near the origin the
                // angular error is divided by r, so second order would
                // degrade the first ring to first-order accuracy.
                let cols = if j >= 2 && j + 2 < ntheta {
                    [j - 2, j - 1, j, j + 1, j + 2]
                } else {
                    let col = |d: isize| (j as isize + d).rem_euclid(ntheta as isize) as usize;
                    [col(-2), col(-1), j, col(1), col(2)]
                };
                let here = self.ring_values(field, i as isize, &cols, nr, ntheta);
                let north = self.ring_values(field, i as isize + 1, &cols, nr, ntheta);
                let south = self.ring_values(field, i as isize - 1, &cols, nr, ntheta);
                let d1 = |v: &[f64; 5]| v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4];
                let (ihs, iht) = (1.0 / self.ds, 1.0 / self.dtheta);
                let (n_, s_) = (north[2], south[2]);
                let g = [0.5 * (n_ - s_) * ihs, d1(&here) * (iht / 12.0)];
                let u_ss = (n_ - 2.0 * c + s_) * (ihs * ihs);
                let u_tt = (-here[0] + 16.0 * here[1] - 30.0 * c + 16.0 * here[3] - here[4]) * (iht * iht / 12.0);
                let u_st = (d1(&north) - d1(&south)) * (ihs * iht / 24.0);
                let m = &self.maps[k];
                let ji = &m.jinv;
                let du = [g[0] * ji[0] + g[1] * ji[2], g[0] * ji[1] + g[1] * ji[3]];
                let corr_st = du[0] * m.x_st[0] + du[1] * m.x_st[1];
                let corr_tt = du[0] * m.x_tt[0] + du[1] * m.x_tt[1];
                let mm = [u_ss, u_st - corr_st, u_st - corr_st, u_tt - corr_tt];
                // D2u = Jinv^T M Jinv
                for kk in 0..2 {
                    for ll in 0..2 {
                        let mut acc = 0.0;
                        for a in 0..2 {
                            for b in 0..2 {
                                acc += ji[2 * a + kk] * mm[2 * a + b] * ji[2 * b + ll];
                            }
                        }
                        out.d2u[2 * kk + ll] = acc;
                    }
                }
                out.du[..2].copy_from_slice(&du);
            }
        }
    }

    /// Project a per-node tendency onto the angular modes each ring resolves.
    pub fn filter_angular(&self, values: &mut [f64]) {
        let Some(filter) = &self.filter else { return };
        let ntheta = self.ntheta();
        let mut buf = vec![Complex::new(0.0, 0.0); ntheta];
        for (i, &keep) in filter.keep.iter().enumerate() {
            if keep >= ntheta / 2 {
                continue;
            }
            let ring = &mut values[i * ntheta..(i + 1) * ntheta];
            for (b, v) in buf.iter_mut().zip(ring.iter()) {
                *b = Complex::new(*v, 0.0);
            }
            filter.forward.process(&mut buf);
            for (m, b) in buf.iter_mut().enumerate() {
                let freq = m.min(ntheta - m);
                if freq > keep {
                    *b = Complex::new(0.0, 0.0);
                }
            }
            filter.inverse.process(&mut buf);
            let scale = 1.0 / ntheta as f64;
            for (v, b) in ring.iter_mut().zip(&buf) {
                *v = b.re * scale;
            }
        }
    }

    /// Chart gradient of a node scalar at a boundary node, using one-sided
    /// second-order differences from the interior in the radial direction.
    pub fn boundary_gradient(&self, q: &[f64], k: usize) -> Vec<f64> {
        let n = self.dim();
        match self.layout {
            Layout::Radial { nr } => {
                let h = self.ds;
                let mut g = vec![0.0; n];
                g[0] = (3.0 * q[nr - 1] - 4.0 * q[nr - 2] + q[nr - 3]) / (2.0 * h);
                g
            }
            Layout::Polar { nr, ntheta } => {
                let j = k % ntheta;
                let b = (nr - 1) * ntheta;
                let at = |i: usize, jj: usize| q[i * ntheta + jj];
                let q_s = (3.0 * at(nr - 1, j) - 4.0 * at(nr - 2, j) + at(nr - 3, j)) / (2.0 * self.ds);
                let jp = (j + 1) % ntheta;
                let jm = (j + ntheta - 1) % ntheta;
                let q_t = (q[b + jp] - q[b + jm]) / (2.0 * self.dtheta);
                let ji = &self.maps[k].jinv;
                vec![q_s * ji[0] + q_t * ji[2], q_s * ji[1] + q_t * ji[3]]
            }
        }
    }
}

/// Jet of the graph at node `k`; the outer ghosts must be current.
pub fn jet_at(mesh: &Mesh, field: &Field, k: usize) -> Result<Jet> {
    let mut raw = RawJet {
        n: 0,
        x: [0.0; MAX_DIM],
        u: 0.0,
        du: [0.0; MAX_DIM],
        d2u: [0.0; MAX_DIM * MAX_DIM],
    };
    mesh.raw_jet(field, k, &mut raw);
    let jet = raw.to_jet();
    geometry::gradient_function_v(&jet).map_err(|e| e.at_node(k))?;
    Ok(jet)
}

/// Copy of `field` with the Neumann ghost layer rewritten.
pub fn apply_neumann(mesh: &Mesh, field: &Field) -> Field {
    let mut out = field.clone();
    mesh.close_ghosts(&mut out);
    out
}

/// Area of the graph, `sum_k w_k sqrt(det g)` with the metric from
/// [`geometry::metric`].
pub fn area_graph(mesh: &Mesh, field: &Field) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..mesh.node_count() {
        let jet = jet_at(mesh, field, k)?;
        let g = geometry::metric(&jet).map_err(|e| e.at_node(k))?;
        total += mesh.weight(k) * g.determinant().sqrt();
    }
    Ok(total)
}

/// Same area through the unit hyperbolic plane:
/// `int_B u^n (1 + J)^{-1/2} dmu_{Y_1}`.
pub fn area_hyperbolic_chart(mesh: &Mesh, field: &Field) -> Result<f64> {
    let n = mesh.dim() as i32;
    let mut total = 0.0;
    for k in 0..mesh.node_count() {
        let jet = jet_at(mesh, field, k)?;
        let j = geometry::defect_j(&jet).map_err(|e| e.at_node(k))?;
        total += mesh.hyperbolic_weight(k) * jet.u.powi(n) / (1.0 + j).sqrt();
    }
    Ok(total)
}

/// Discrete area of the hyperbolic cap `B` cut out by the cone.
pub fn cap_area_discrete(mesh: &Mesh) -> f64 {
    mesh.hyperbolic_weights.iter().sum()
}
