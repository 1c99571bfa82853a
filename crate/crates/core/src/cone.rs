//! The boundary cone and its cross-section.
//!
//! The cone is the union of rays from the origin through `(p, 1)` for `p`
//! on a closed convex hypersurface inside the unit ball. Its cross-section
//! at height one is the flow domain `D` of the graph chart.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::SpacetimeVector;

/// Distance from the boundary radius within which a point counts as on `dD`.
pub const BOUNDARY_TOL: f64 = 1e-9;

const CONVEXITY_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConeKind {
    /// Circular cross-section of radius `rho`.
    Round { rho: f64 },
    /// Star-shaped plane curve `r = sum_k a_k cos(k theta)`; `n = 2` only.
    PolarGraph { coefficients: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub n: usize,
}

/// Boundary data attached to a point of `dD`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub x: Vec<f64>,
    /// Outward unit normal of `D`.
    pub gamma: Vec<f64>,
    /// Conormal direction `gamma - (gamma.x) x`.
    pub w: Vec<f64>,
    /// Nonzero eigenvalue of the cone's second fundamental form at height one.
    pub a_sigma_theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub convex: bool,
    pub min_curvature: f64,
    /// Polar angle of the minimum (0 for round cones).
    pub at_theta: f64,
}

impl ConeSpec {
    pub fn round(rho: f64, n: usize) -> Self {
        Self { kind: ConeKind::Round { rho }, n }
    }

    pub fn polar(coefficients: Vec<f64>) -> Self {
        Self {
            kind: ConeKind::PolarGraph { coefficients },
            n: 2,
        }
    }

    pub fn is_round(&self) -> bool {
        matches!(self.kind, ConeKind::Round { .. })
    }

    /// `(R, R', R'')` of the cross-section radius at polar angle `theta`.
    pub fn radius_derivatives(&self, theta: f64) -> (f64, f64, f64) {
        match &self.kind {
            ConeKind::Round { rho } => (*rho, 0.0, 0.0),
            ConeKind::PolarGraph { coefficients } => {
                let mut r = (0.0, 0.0, 0.0);
                for (k, a) in coefficients.iter().enumerate() {
                    let k = k as f64;
                    let (s, c) = (k * theta).sin_cos();
                    r.0 += a * c;
                    r.1 -= a * k * s;
                    r.2 -= a * k * k * c;
                }
                r
            }
        }
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.radius_derivatives(theta).0
    }

    /// Boundary radius in the direction of `x` (which must be nonzero).
    pub fn radius_towards(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ConeKind::Round { rho } => *rho,
            ConeKind::PolarGraph { .. } => self.radius(x[1].atan2(x[0])),
        }
    }

    /// Signed curvature of the cross-section boundary at `theta`.
    pub fn curvature(&self, theta: f64) -> f64 {
        let (r, r1, r2) = self.radius_derivatives(theta);
        (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1).powf(1.5)
    }

    /// Every problem with this spec; empty when it is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n < 2 {
            out.push(format!("dimension n = {} must be at least 2", self.n));
        }
        match &self.kind {
            ConeKind::Round { rho } => {
                if !(*rho > 0.0 && *rho < 1.0) {
                    out.push(format!(
                        "cross-section must lie in the open unit ball: rho = {rho} is not in (0, 1)"
                    ));
                }
            }
            ConeKind::PolarGraph { coefficients } => {
                if self.n != 2 {
                    out.push(format!("polar-graph cones require n = 2, got n = {}", self.n));
                }
                if coefficients.is_empty() {
                    out.push("polar-graph cone needs at least one coefficient".into());
                } else {
                    let (lo, hi) = (0..CONVEXITY_SAMPLES)
                        .map(|k| self.radius(2.0 * PI * k as f64 / CONVEXITY_SAMPLES as f64))
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
                    if !(lo > 0.0 && hi < 1.0) {
                        out.push(format!(
                            "cross-section must lie in the open unit ball: radius ranges over [{lo}, {hi}]"
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(v.join("; ")))
        }
    }

    /// Outward unit normal of `D` at boundary angle `theta` (`n = 2`).
    fn planar_normal(&self, theta: f64) -> [f64; 2] {
        let (r, r1, _) = self.radius_derivatives(theta);
        let (s, c) = theta.sin_cos();
        let nx = r1 * s + r * c;
        let ny = -r1 * c + r * s;
        let len = (nx * nx + ny * ny).sqrt();
        [nx / len, ny / len]
    }

    /// Boundary sample at `x`, which must lie on `dD`.
    pub fn boundary_sample(&self, x: &[f64]) -> Result<BoundarySample> {
        if x.len() != self.n {
            return Err(Error::Contract(format!(
                "boundary point has {} components, cone has n = {}",
                x.len(),
                self.n
            )));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(Error::Domain("the origin is not a boundary point".into()));
        }
        let target = self.radius_towards(x);
        if (r - target).abs() > BOUNDARY_TOL {
            return Err(Error::Domain(format!(
                "point at radius {r} is not on the boundary (boundary radius {target} in that direction)"
            )));
        }
        let (gamma, kappa) = match &self.kind {
            ConeKind::Round { rho } => (x.iter().map(|v| v / r).collect::<Vec<_>>(), 1.0 / rho),
            ConeKind::PolarGraph { .. } => {
                let theta = x[1].atan2(x[0]);
                (self.planar_normal(theta).to_vec(), self.curvature(theta))
            }
        };
        let gx: f64 = gamma.iter().zip(x).map(|(g, v)| g * v).sum();
        let w = gamma.iter().zip(x).map(|(g, v)| g - gx * v).collect();
        Ok(BoundarySample {
            x: x.to_vec(),
            gamma,
            w,
            a_sigma_theta: kappa / (1.0 - gx * gx).sqrt(),
        })
    }
}

/// Conormal direction `w = gamma - (gamma.x) x` at a boundary point.
pub fn conormal(spec: &ConeSpec, x: &[f64]) -> Result<Vec<f64>> {
    spec.boundary_sample(x).map(|b| b.w)
}

/// Unit spacelike outward normal `mu` of the cone at the boundary ray through `x`.
pub fn cone_normal(sample: &BoundarySample) -> SpacetimeVector {
    let gx: f64 = sample.gamma.iter().zip(&sample.x).map(|(g, v)| g * v).sum();
    let scale = 1.0 / (1.0 - gx * gx).sqrt();
    let mut c: Vec<f64> = sample.gamma.iter().map(|g| g * scale).collect();
    c.push(gx * scale);
    SpacetimeVector(c)
}

/// `A^Sigma(nu, nu)` for a vector `nu` tangent to the cone at the point
/// `embed(x, u)` over the boundary chart point `x`.
///
/// The vector is split as `alpha (x, 1) + W` with `W` horizontal; the ray
/// direction is a null direction of `A^Sigma`, and on horizontal tangent
/// vectors `A^Sigma` is the cross-section curvature scaled by
/// `1 / (l sqrt(1 - <x, gamma>^2))` at height `l`.
pub fn sigma_a_nu_nu(spec: &ConeSpec, x: &[f64], u: f64, nu: &SpacetimeVector) -> Result<f64> {
    let sample = spec.boundary_sample(x)?;
    sigma_a_nu_nu_at(&sample, u, nu)
}

pub fn sigma_a_nu_nu_at(sample: &BoundarySample, u: f64, nu: &SpacetimeVector) -> Result<f64> {
    let x = &sample.x;
    if nu.dim() != x.len() + 1 {
        return Err(Error::Contract("normal vector has the wrong dimension".into()));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let height = u / (1.0 - r2).sqrt();
    let alpha = nu.time();
    let w: Vec<f64> = nu.spatial().iter().zip(x).map(|(a, b)| a - alpha * b).collect();
    let along_gamma: f64 = w.iter().zip(&sample.gamma).map(|(a, g)| a * g).sum();
    let scale = nu.components().iter().map(|c| c.abs()).fold(1.0, f64::max);
    if along_gamma.abs() > 1e-8 * scale {
        return Err(Error::Contract(format!(
            "vector is not tangent to the cone (normal component {along_gamma:e})"
        )));
    }
    let w2: f64 = w.iter().map(|a| a * a).sum();
    Ok(w2 * sample.a_sigma_theta / height)
}

/// [`sigma_a_nu_nu_at`] for a vector that is tangent to the cone only up to
/// discretization error: the component of `W` along `gamma` is dropped
/// instead of rejected.
pub fn sigma_a_nu_nu_projected(sample: &BoundarySample, u: f64, nu: &SpacetimeVector) -> f64 {
    let x = &sample.x;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let height = u / (1.0 - r2).sqrt();
    let alpha = nu.time();
    let mut w: Vec<f64> = nu.spatial().iter().zip(x).map(|(a, b)| a - alpha * b).collect();
    let along: f64 = w.iter().zip(&sample.gamma).map(|(a, g)| a * g).sum();
    for (wi, g) in w.iter_mut().zip(&sample.gamma) {
        *wi -= along * g;
    }
    let w2: f64 = w.iter().map(|a| a * a).sum();
    w2 * sample.a_sigma_theta / height
}

pub fn convexity_check(spec: &ConeSpec) -> ConvexityReport {
    match &spec.kind {
        ConeKind::Round { rho } => ConvexityReport {
            convex: *rho > 0.0 && *rho < 1.0,
            min_curvature: 1.0 / rho,
            at_theta: 0.0,
        },
        ConeKind::PolarGraph { .. } => {
            let mut min = f64::INFINITY;
            let mut at = 0.0;
            for k in 0..CONVEXITY_SAMPLES {
                let theta = 2.0 * PI * k as f64 / CONVEXITY_SAMPLES as f64;
                let kappa = spec.curvature(theta);
                if kappa < min {
                    min = kappa;
                    at = theta;
                }
            }
            ConvexityReport {
                convex: min >= 0.0 && spec.violations().is_empty(),
                min_curvature: min,
                at_theta: at,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn round_conormal_is_radial() {
        let spec = ConeSpec::round(0.5, 2);
        let w = conormal(&spec, &[0.5, 0.0]).unwrap();
        assert_relative_eq!(w[0], 0.75, epsilon = 1e-14);
        assert_eq!(w[1], 0.0);
        let w = conormal(&spec, &[0.0, 0.5]).unwrap();
        assert_relative_eq!(w[1], 0.75, epsilon = 1e-14);
        assert!(matches!(conormal(&spec, &[0.3, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn sigma_curvature_examples() {
        let spec = ConeSpec::round(0.5, 2);
        // Height one over x = (0.5, 0) needs u = sqrt(1 - 0.25).
        let u1 = 0.75f64.sqrt();
        let ray = SpacetimeVector::new(vec![0.5, 0.0, 1.0]);
        assert_eq!(sigma_a_nu_nu(&spec, &[0.5, 0.0], u1, &ray).unwrap(), 0.0);
        let e_theta = SpacetimeVector::new(vec![0.0, 1.0, 0.0]);
        assert_relative_eq!(
            sigma_a_nu_nu(&spec, &[0.5, 0.0], u1, &e_theta).unwrap(),
            2.309_401,
            epsilon = 1e-6
        );
        assert_relative_eq!(
            sigma_a_nu_nu(&spec, &[0.5, 0.0], 2.0 * u1, &e_theta).unwrap(),
            1.154_701,
            epsilon = 1e-6
        );
        let radial = SpacetimeVector::new(vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            sigma_a_nu_nu(&spec, &[0.5, 0.0], u1, &radial),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn convexity_examples() {
        let r = convexity_check(&ConeSpec::round(0.5, 2));
        assert!(r.convex);
        assert_relative_eq!(r.min_curvature, 2.0);
        assert!(convexity_check(&ConeSpec::polar(vec![0.5, 0.0, 0.05])).convex);
        let bad = convexity_check(&ConeSpec::polar(vec![0.5, 0.0, 0.3]));
        assert!(!bad.convex);
        assert!(bad.min_curvature < 0.0);
    }

    #[test]
    fn polar_normal_matches_round_when_isotropic() {
        let spec = ConeSpec::polar(vec![0.4]);
        let b = spec.boundary_sample(&[0.0, -0.4]).unwrap();
        assert_relative_eq!(b.gamma[1], -1.0, epsilon = 1e-14);
        assert_relative_eq!(b.a_sigma_theta, 2.5 / (1.0 - 0.16f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn validation_catches_bad_cones() {
        assert!(!ConeSpec::round(1.2, 2).violations().is_empty());
        assert!(!ConeSpec::polar(vec![0.9, 0.0, 0.2]).violations().is_empty());
        let mut spec = ConeSpec::polar(vec![0.5]);
        spec.n = 3;
        assert!(!spec.violations().is_empty());
    }
}
