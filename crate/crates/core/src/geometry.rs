//! Pointwise Minkowski and graph-chart geometry.
//!
//! A spacelike hypersurface inside the future light cone is written as a
//! graph over the height-one slice of the cone: a chart point `x` with
//! `|x| < 1` is sent along its ray to
//!
//! ```text
//! F(x) = u(x) (x + e_{n+1}) / sqrt(1 - |x|^2)
//! ```
//!
//! so that `-<F, F> = u^2`. Everything here is a function of a [`Jet`]
//! `(x, u, Du, D^2u)` at a single point; nothing knows about meshes.
//!
//! Sign conventions: the unit normal `nu` is future pointing, so
//! `<F, nu> = -S` with `S > 0`, and the second fundamental form is
//! `h_ij = -<d_ij F, nu>`, which makes the expanding hyperbolic plane
//! mean convex with `H = n / F`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest hypersurface dimension supported by the allocation-free kernels.
pub const MAX_DIM: usize = 8;

/// A point or vector in `R^{n+1}_1`; the last component is timelike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeVector(pub Vec<f64>);

impl SpacetimeVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    /// Basis vector `e_k` (zero based) in `R^{n+1}_1`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[k] = 1.0;
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn spatial(&self) -> &[f64] {
        &self.0[..self.0.len() - 1]
    }

    pub fn time(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// `(x, u, Du, D^2u)` at one chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub x: DVector<f64>,
    pub u: f64,
    pub du: DVector<f64>,
    pub d2u: Option<DMatrix<f64>>,
}

impl Jet {
    pub fn first_order(x: &[f64], u: f64, du: &[f64]) -> Self {
        Self {
            x: DVector::from_column_slice(x),
            u,
            du: DVector::from_column_slice(du),
            d2u: None,
        }
    }

    pub fn second_order(x: &[f64], u: f64, du: &[f64], d2u: DMatrix<f64>) -> Self {
        Self {
            d2u: Some(d2u),
            ..Self::first_order(x, u, du)
        }
    }

    /// The jet of the constant graph `u = k` at `x`: a slice of the
    /// hyperbolic plane of radius `k`.
    pub fn homothetic(x: &[f64], k: f64) -> Self {
        let n = x.len();
        Self::second_order(x, k, &vec![0.0; n], DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.dim();
        if self.du.len() != n {
            return Err(Error::Contract(format!(
                "jet gradient has {} components, expected {n}",
                self.du.len()
            )));
        }
        if let Some(h) = &self.d2u {
            if h.nrows() != n || h.ncols() != n {
                return Err(Error::Contract(format!(
                    "jet Hessian is {}x{}, expected {n}x{n}",
                    h.nrows(),
                    h.ncols()
                )));
            }
        }
        if !(self.u > 0.0) {
            return Err(Error::Contract(format!("graph value u = {} must be positive", self.u)));
        }
        light_cone_gap(self.x.as_slice()).map(|_| ())
    }
}

/// Everything [`node_geometry`] derives from a jet.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGeometry {
    /// `F^2 = -<F, F> = u^2`.
    pub f2: f64,
    pub v: f64,
    /// `S = -<F, nu>`.
    pub s: f64,
    pub metric: DMatrix<f64>,
    pub inv_metric: DMatrix<f64>,
    pub normal: SpacetimeVector,
    /// Mean curvature; `None` for first-order jets.
    pub h: Option<f64>,
    /// `|A|^2`; `None` for first-order jets.
    pub a2: Option<f64>,
    /// `(S^2 - F^2) / F^2`.
    pub j: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// `1 - |x|^2`, or a light-cone error.
pub fn light_cone_gap(x: &[f64]) -> Result<f64> {
    let r2 = dot(x, x);
    if !(r2 < 1.0) {
        return Err(Error::LightCone { norm: r2.sqrt() });
    }
    Ok(1.0 - r2)
}

pub fn minkowski_dot(a: &SpacetimeVector, b: &SpacetimeVector) -> Result<f64> {
    if a.dim() != b.dim() || a.dim() < 2 {
        return Err(Error::Contract(format!(
            "minkowski_dot on vectors of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let m = a.dim() - 1;
    Ok(dot(&a.0[..m], &b.0[..m]) - a.0[m] * b.0[m])
}

/// `F(x) = u (x + e_{n+1}) / sqrt(1 - |x|^2)`.
pub fn embed(x: &[f64], u: f64) -> Result<SpacetimeVector> {
    let gap = light_cone_gap(x)?;
    if !(u > 0.0) {
        return Err(Error::Contract(format!("graph value u = {u} must be positive")));
    }
    let scale = u / gap.sqrt();
    let mut c: Vec<f64> = x.iter().map(|xi| scale * xi).collect();
    c.push(scale);
    Ok(SpacetimeVector(c))
}

/// `v^2 = u^2/(1-|x|^2) + (Du.x)^2 - |Du|^2` without any validation.
#[inline]
pub fn v_squared_raw(x: &[f64], u: f64, du: &[f64], gap: f64) -> f64 {
    let dx = dot(du, x);
    u * u / gap + dx * dx - dot(du, du)
}

/// The gradient-like function `v`.
pub fn gradient_function_v(jet: &Jet) -> Result<f64> {
    jet.check()?;
    let gap = light_cone_gap(jet.x.as_slice())?;
    let v2 = v_squared_raw(jet.x.as_slice(), jet.u, jet.du.as_slice(), gap);
    if !(v2 > 0.0) {
        return Err(Error::NotSpacelike { v2, node: None });
    }
    Ok(v2.sqrt())
}

/// Induced metric `g_ij` in the chart.
pub fn metric(jet: &Jet) -> Result<DMatrix<f64>> {
    gradient_function_v(jet)?;
    let n = jet.dim();
    let gap = light_cone_gap(jet.x.as_slice())?;
    let c = jet.u * jet.u / gap;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        c * (delta + jet.x[i] * jet.x[j] / gap) - jet.du[i] * jet.du[j]
    }))
}

/// Inverse metric `g^ij`, evaluated from its closed form rather than by
/// inverting [`metric`].
pub fn inverse_metric(jet: &Jet) -> Result<DMatrix<f64>> {
    let v = gradient_function_v(jet)?;
    let n = jet.dim();
    let gap = light_cone_gap(jet.x.as_slice())?;
    let mut g = DMatrix::zeros(n, n);
    fill_inverse_metric(
        jet.x.as_slice(),
        jet.u,
        jet.du.as_slice(),
        gap,
        v * v,
        |i, j, val| g[(i, j)] = val,
    );
    Ok(g)
}

#[inline]
fn fill_inverse_metric(
    x: &[f64],
    u: f64,
    du: &[f64],
    gap: f64,
    v2: f64,
    mut put: impl FnMut(usize, usize, f64),
) {
    let n = x.len();
    let grad2 = dot(du, du);
    let dx = dot(du, x);
    let pre = gap / (u * u);
    let cxx = grad2 - u * u / gap;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let bracket = cxx * x[i] * x[j] + du[i] * du[j] - dx * (x[i] * du[j] + x[j] * du[i]);
            put(i, j, pre * (delta + bracket / v2));
        }
    }
}

/// Future-pointing unit timelike normal.
pub fn normal(jet: &Jet) -> Result<SpacetimeVector> {
    let v = gradient_function_v(jet)?;
    let gap = light_cone_gap(jet.x.as_slice())?;
    Ok(normal_raw(jet.x.as_slice(), jet.u, jet.du.as_slice(), gap, v))
}

fn normal_raw(x: &[f64], u: f64, du: &[f64], gap: f64, v: f64) -> SpacetimeVector {
    let denom = gap * v;
    let mut c: Vec<f64> = x
        .iter()
        .zip(du)
        .map(|(xi, di)| (gap * di + u * xi) / denom)
        .collect();
    c.push((dot(du, x) * gap + u) / denom);
    SpacetimeVector(c)
}

/// Support function `S = u^2 / (v sqrt(1 - |x|^2))`.
pub fn support_s(jet: &Jet) -> Result<f64> {
    let v = gradient_function_v(jet)?;
    let gap = light_cone_gap(jet.x.as_slice())?;
    Ok(jet.u * jet.u / (v * gap.sqrt()))
}

/// `J = (S^2 - F^2)/F^2`, evaluated as `(|Du|^2 - (Du.x)^2) / v^2`, which is
/// the same quantity without the cancellation.
pub fn defect_j(jet: &Jet) -> Result<f64> {
    let v = gradient_function_v(jet)?;
    let dx = jet.du.dot(&jet.x);
    Ok((jet.du.norm_squared() - dx * dx) / (v * v))
}

/// Second fundamental form `h_ij = -<d_ij F, nu>` in the chart.
pub fn second_fundamental_form(jet: &Jet) -> Result<DMatrix<f64>> {
    let d2u = jet
        .d2u
        .as_ref()
        .ok_or_else(|| Error::Contract("shape operator needs a Hessian".into()))?;
    let v = gradient_function_v(jet)?;
    let n = jet.dim();
    let gap = light_cone_gap(jet.x.as_slice())?;
    let x = jet.x.as_slice();
    let du = jet.du.as_slice();
    let u = jet.u;
    let nu = normal_raw(x, u, du, gap, v);
    let nu_s = nu.spatial();
    let nu_t = nu.time();

    let rs = gap.sqrt();
    let s12 = 1.0 / rs;
    let s32 = s12 / gap;
    let s52 = s32 / gap;
    // <x + e_{n+1}, nu>
    let q = dot(x, nu_s) - nu_t;
    let phi_nu = s12 * q;
    let dphi_nu: Vec<f64> = (0..n).map(|i| s12 * nu_s[i] + x[i] * s32 * q).collect();

    Ok(DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        let d2phi_nu = s32 * (nu_s[i] * x[j] + nu_s[j] * x[i]) + q * (delta * s32 + 3.0 * x[i] * x[j] * s52);
        let d2f_nu = d2u[(i, j)] * phi_nu + du[i] * dphi_nu[j] + du[j] * dphi_nu[i] + u * d2phi_nu;
        -d2f_nu
    }))
}

/// Mean curvature `H = g^ij h_ij` and `|A|^2 = g^ik g^jl h_ij h_kl`.
pub fn shape_operator(jet: &Jet) -> Result<(f64, f64)> {
    let h = second_fundamental_form(jet)?;
    let ginv = inverse_metric(jet)?;
    let w = &ginv * &h;
    let mean = w.trace();
    let a2 = (&w * &w).trace();
    Ok((mean, a2))
}

pub fn node_geometry(jet: &Jet) -> Result<NodeGeometry> {
    let v = gradient_function_v(jet)?;
    let gap = light_cone_gap(jet.x.as_slice())?;
    let (h, a2) = if jet.d2u.is_some() {
        let (h, a2) = shape_operator(jet)?;
        (Some(h), Some(a2))
    } else {
        (None, None)
    };
    Ok(NodeGeometry {
        f2: jet.u * jet.u,
        v,
        s: jet.u * jet.u / (v * gap.sqrt()),
        metric: metric(jet)?,
        inv_metric: inverse_metric(jet)?,
        normal: normal_raw(jet.x.as_slice(), jet.u, jet.du.as_slice(), gap, v),
        h,
        a2,
        j: defect_j(jet)?,
    })
}

/// Right-hand side of the graphical flow
///
/// ```text
/// u_t = g^ij D_ij u + (n+1)/u - (u/(1-|x|^2) + 2 Du.x) / v^2
/// ```
///
/// on raw slices; `d2u` is row-major `n x n`. Returns `(u_t, v)`.
#[inline]
pub fn graph_rhs_raw(x: &[f64], u: f64, du: &[f64], d2u: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    let gap = 1.0 - dot(x, x);
    if !(gap > 0.0) {
        return Err(Error::LightCone { norm: (1.0 - gap).sqrt() });
    }
    let v2 = v_squared_raw(x, u, du, gap);
    if !(v2 > 0.0) {
        return Err(Error::NotSpacelike { v2, node: None });
    }
    let mut diffusion = 0.0;
    fill_inverse_metric(x, u, du, gap, v2, |i, j, g| diffusion += g * d2u[i * n + j]);
    let dx = dot(du, x);
    let rhs = diffusion + (n as f64 + 1.0) / u - (u / gap + 2.0 * dx) / v2;
    Ok((rhs, v2.sqrt()))
}

/// [`graph_rhs_raw`] that also returns the largest eigenvalue of `g^ij`
/// (exact for `n = 2`, a Gershgorin bound otherwise, which is exact on
/// axisymmetric jets where `g^ij` is diagonal). Returns `(u_t, v, lambda)`.
#[inline]
pub fn graph_rhs_and_diffusivity(x: &[f64], u: f64, du: &[f64], d2u: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    let gap = 1.0 - dot(x, x);
    if !(gap > 0.0) {
        return Err(Error::LightCone { norm: (1.0 - gap).sqrt() });
    }
    let v2 = v_squared_raw(x, u, du, gap);
    if !(v2 > 0.0) {
        return Err(Error::NotSpacelike { v2, node: None });
    }
    if n == 2 {
        return Ok(rhs_and_diffusivity_2d(x, u, du, d2u, gap, v2));
    }
    let mut buf = [0.0; MAX_DIM * MAX_DIM];
    fill_inverse_metric(x, u, du, gap, v2, |i, j, g| buf[i * n + j] = g);
    let diffusion: f64 = buf[..n * n].iter().zip(&d2u[..n * n]).map(|(g, h)| g * h).sum();
    let dx = dot(du, x);
    let rhs = diffusion + (n as f64 + 1.0) / u - (u / gap + 2.0 * dx) / v2;
    let lambda = {
        (0..n)
            .map(|i| (0..n).map(|j| buf[i * n + j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    Ok((rhs, v2.sqrt(), lambda))
}

/// Unrolled `n = 2` case of [`graph_rhs_and_diffusivity`].
#[inline]
fn rhs_and_diffusivity_2d(x: &[f64], u: f64, du: &[f64], d2u: &[f64], gap: f64, v2: f64) -> (f64, f64, f64) {
    let (x0, x1, p0, p1) = (x[0], x[1], du[0], du[1]);
    let iu2 = 1.0 / (u * u);
    let iv2 = 1.0 / v2;
    let pre = gap * iu2;
    let dx = p0 * x0 + p1 * x1;
    let cxx = p0 * p0 + p1 * p1 - u * u / gap;
    let b00 = cxx * x0 * x0 + p0 * p0 - 2.0 * dx * x0 * p0;
    let b11 = cxx * x1 * x1 + p1 * p1 - 2.0 * dx * x1 * p1;
    let b01 = cxx * x0 * x1 + p0 * p1 - dx * (x0 * p1 + x1 * p0);
    let g00 = pre * (1.0 + b00 * iv2);
    let g11 = pre * (1.0 + b11 * iv2);
    let g01 = pre * b01 * iv2;
    let diffusion = g00 * d2u[0] + g01 * (d2u[1] + d2u[2]) + g11 * d2u[3];
    let rhs = diffusion + 3.0 / u - (u / gap + 2.0 * dx) * iv2;
    let half = 0.5 * (g00 - g11);
    let lambda = 0.5 * (g00 + g11) + (half * half + g01 * g01).sqrt();
    (rhs, v2.sqrt(), lambda)
}

/// Jet-based form of [`graph_rhs_raw`].
pub fn graph_rhs(jet: &Jet) -> Result<f64> {
    jet.check()?;
    let d2u = jet
        .d2u
        .as_ref()
        .ok_or_else(|| Error::Contract("flow right-hand side needs a Hessian".into()))?;
    let n = jet.dim();
    let row_major: Vec<f64> = (0..n * n).map(|k| d2u[(k / n, k % n)]).collect();
    graph_rhs_raw(jet.x.as_slice(), jet.u, jet.du.as_slice(), &row_major).map(|(r, _)| r)
}

/// Mean curvature recovered from the time derivative,
/// `H = u_t u / (v sqrt(1 - |x|^2))`.
pub fn mean_curvature_from_rhs(x: &[f64], u: f64, v: f64, rhs: f64) -> f64 {
    let gap = 1.0 - dot(x, x);
    rhs * u / (v * gap.sqrt())
}

/// Largest eigenvalue of `g^ij`, the diffusion coefficient that sets the
/// explicit time-step limit.
pub fn max_diffusivity(x: &[f64], u: f64, du: &[f64]) -> Result<f64> {
    let n = x.len();
    let gap = light_cone_gap(x)?;
    let v2 = v_squared_raw(x, u, du, gap);
    if !(v2 > 0.0) {
        return Err(Error::NotSpacelike { v2, node: None });
    }
    let mut buf = [0.0; MAX_DIM * MAX_DIM];
    fill_inverse_metric(x, u, du, gap, v2, |i, j, g| buf[i * n + j] = g);
    if n == 2 {
        let (a, b, d) = (buf[0], buf[1], buf[3]);
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        return Ok(mid + rad);
    }
    let m = DMatrix::from_row_slice(n, n, &buf[..n * n]);
    Ok(m.symmetric_eigenvalues().max())
}

/// Surface area of the unit sphere `S^{k}` in `R^{k+1}`.
fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

/// Hyperbolic volume of the region that the round cone with cross-section
/// radius `rho` cuts out of the unit hyperbolic plane `Y_1`.
///
/// Closed form for `n = 2`; Gauss-Legendre quadrature of the chart volume
/// density `(1 - r^2)^{-(n+1)/2}` otherwise.
pub fn hyperbolic_cap_area(rho: f64, n: usize) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("cap radius {rho} must lie in (0, 1)")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
    }
    if n == 2 {
        return Ok(2.0 * std::f64::consts::PI * (1.0 / (1.0 - rho * rho).sqrt() - 1.0));
    }
    Ok(cap_area_quadrature(rho, n))
}

/// Chart quadrature of the cap area, valid for every `n >= 2`.
pub fn cap_area_quadrature(rho: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(32);
    let exponent = -(n as f64 + 1.0) / 2.0;
    // Panels graded towards r = rho, where the density is steepest.
    let panels = 16;
    let mut edges = Vec::with_capacity(panels + 1);
    for k in 0..=panels {
        let t = k as f64 / panels as f64;
        edges.push(rho * (1.0 - (1.0 - t) * (1.0 - t)));
    }
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (z, wt) in nodes.iter().zip(&weights) {
            let r = mid + half * z;
            total += wt * half * r.powi(n as i32 - 1) * (1.0 - r * r).powf(exponent);
        }
    }
    sphere_area(n - 1) * total
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[order - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn jet2(x: [f64; 2], u: f64, du: [f64; 2]) -> Jet {
        Jet::first_order(&x, u, &du)
    }

    #[test]
    fn basis_vectors_have_expected_norms() {
        let e1 = SpacetimeVector::basis(2, 0);
        let et = SpacetimeVector::basis(2, 2);
        assert_eq!(minkowski_dot(&e1, &e1).unwrap(), 1.0);
        assert_eq!(minkowski_dot(&et, &et).unwrap(), -1.0);
        let a = SpacetimeVector::new(vec![0.57735, 0.0, 1.15470]);
        assert_relative_eq!(minkowski_dot(&a, &a).unwrap(), -1.0, epsilon = 1e-5);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = SpacetimeVector::basis(2, 0);
        let b = SpacetimeVector::basis(3, 0);
        assert!(matches!(minkowski_dot(&a, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn embedding_examples() {
        let f = embed(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!(f.0, vec![0.0, 0.0, 1.0]);
        let f = embed(&[0.5, 0.0], 1.0).unwrap();
        assert_relative_eq!(f.0[0], 0.577_350_269, epsilon = 1e-8);
        assert_relative_eq!(f.0[2], 1.154_700_538, epsilon = 1e-8);
        assert_relative_eq!(minkowski_dot(&f, &f).unwrap(), -1.0, epsilon = 1e-14);
        assert_eq!(embed(&[0.0, 0.0], 3.0).unwrap().0, vec![0.0, 0.0, 3.0]);
        assert!(matches!(embed(&[1.0, 0.0], 1.0), Err(Error::LightCone { .. })));
    }

    #[test]
    fn v_examples() {
        assert_eq!(gradient_function_v(&jet2([0.0, 0.0], 1.0, [0.0, 0.0])).unwrap(), 1.0);
        assert_relative_eq!(
            gradient_function_v(&jet2([0.5, 0.0], 1.0, [0.0, 0.0])).unwrap(),
            1.154_701,
            epsilon = 1e-6
        );
        assert!(matches!(
            gradient_function_v(&jet2([0.0, 0.0], 1.0, [1.5, 0.0])),
            Err(Error::NotSpacelike { .. })
        ));
    }

    #[test]
    fn metric_examples() {
        let g = metric(&jet2([0.0, 0.0], 1.0, [0.0, 0.0])).unwrap();
        assert_eq!(g, DMatrix::identity(2, 2));
        let g = metric(&jet2([0.5, 0.0], 1.0, [0.0, 0.0])).unwrap();
        assert_relative_eq!(g[(0, 0)], 1.777_778, epsilon = 1e-6);
        assert_relative_eq!(g[(1, 1)], 1.333_333, epsilon = 1e-6);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn normal_and_support_examples() {
        let nu = normal(&jet2([0.0, 0.0], 1.0, [0.0, 0.0])).unwrap();
        assert_eq!(nu.0, vec![0.0, 0.0, 1.0]);
        let nu = normal(&jet2([0.5, 0.0], 1.0, [0.0, 0.0])).unwrap();
        assert_relative_eq!(nu.0[0], 0.577_350, epsilon = 1e-6);
        assert_relative_eq!(nu.0[2], 1.154_700, epsilon = 1e-6);
        assert_eq!(support_s(&jet2([0.0, 0.0], 1.0, [0.0, 0.0])).unwrap(), 1.0);
        assert_relative_eq!(support_s(&jet2([0.5, 0.0], 1.0, [0.0, 0.0])).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(support_s(&jet2([0.0, 0.0], 2.0, [0.0, 0.0])).unwrap(), 2.0);
    }

    #[test]
    fn homothetic_curvatures() {
        let (h, a2) = shape_operator(&Jet::homothetic(&[0.0, 0.0], 1.0)).unwrap();
        assert_relative_eq!(h, 2.0, epsilon = 1e-12);
        assert_relative_eq!(a2, 2.0, epsilon = 1e-12);
        let (h, _) = shape_operator(&Jet::homothetic(&[0.5, 0.0], 1.0)).unwrap();
        assert_relative_eq!(h, 2.0, epsilon = 1e-10);
        for n in 2..5 {
            let x = vec![0.1; n];
            let (h, a2) = shape_operator(&Jet::homothetic(&x, 3.0)).unwrap();
            assert_relative_eq!(h * 3.0, n as f64, epsilon = 1e-10);
            assert_relative_eq!(a2 * 9.0, n as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn shape_operator_needs_hessian() {
        let jet = jet2([0.1, 0.0], 1.0, [0.0, 0.0]);
        assert!(matches!(shape_operator(&jet), Err(Error::Contract(_))));
    }

    #[test]
    fn rhs_on_constant_graphs() {
        for &(x, k) in &[([0.0, 0.0], 1.0), ([0.3, -0.2], 1.0), ([0.1, 0.4], 2.5)] {
            let jet = Jet::homothetic(&x, k);
            assert_relative_eq!(graph_rhs(&jet).unwrap(), 2.0 / k, epsilon = 1e-12);
        }
    }

    #[test]
    fn cap_area_closed_form_and_quadrature() {
        assert_relative_eq!(hyperbolic_cap_area(0.5, 2).unwrap(), 0.971_933, epsilon = 1e-4);
        let closed = 2.0 * std::f64::consts::PI * (1.0 / 0.75f64.sqrt() - 1.0);
        assert_relative_eq!(hyperbolic_cap_area(0.5, 2).unwrap(), closed, epsilon = 1e-14);
        assert_relative_eq!(cap_area_quadrature(0.5, 2), hyperbolic_cap_area(0.5, 2).unwrap(), epsilon = 1e-12);
        assert!(hyperbolic_cap_area(1e-6, 2).unwrap() < 1e-10);
        assert!(matches!(hyperbolic_cap_area(1.0, 2), Err(Error::Domain(_))));
        assert!(matches!(hyperbolic_cap_area(0.0, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (z, w) = gauss_legendre(5);
        let integral: f64 = z.iter().zip(&w).map(|(z, w)| w * z.powi(8)).sum();
        assert_relative_eq!(integral, 2.0 / 9.0, epsilon = 1e-14);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn unrolled_plane_rhs_matches_general_form() {
        let x = [0.1, -0.2];
        let du = [0.05, 0.02];
        let d2u = [0.3, 0.1, 0.1, -0.2];
        let (r, v) = graph_rhs_raw(&x, 1.3, &du, &d2u).unwrap();
        let (r2, v2, lam) = graph_rhs_and_diffusivity(&x, 1.3, &du, &d2u).unwrap();
        assert_relative_eq!(r, r2, epsilon = 1e-14);
        assert_relative_eq!(v, v2, epsilon = 1e-14);
        let jet = Jet::first_order(&x, 1.3, &du);
        let eig = inverse_metric(&jet).unwrap().symmetric_eigenvalues().max();
        assert_relative_eq!(lam, eig, epsilon = 1e-14);
    }
}
