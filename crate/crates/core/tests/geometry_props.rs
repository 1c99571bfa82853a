//! Pointwise identities of the graph geometry on random spacelike jets.

use conemcf::geometry::{
    defect_j, embed, gradient_function_v, graph_rhs, inverse_metric, mean_curvature_from_rhs, metric, minkowski_dot,
    node_geometry, normal, shape_operator, support_s,
};
use conemcf::{Jet, SpacetimeVector};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// A jet at `|x| < 0.9` whose gradient is a fraction of the light-cone limit.
fn spacelike_jet() -> impl Strategy<Value = Jet> {
    (2usize..=3)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-1.0f64..1.0, n),
                0.0f64..0.9,
                0.3f64..3.0,
                prop::collection::vec(-1.0f64..1.0, n),
                0.0f64..0.8,
                prop::collection::vec(-2.0f64..2.0, n * n),
            )
        })
        .prop_filter_map("degenerate direction", |(dir, r, u, grad, frac, hess)| {
            let n = dir.len();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            let gnorm = grad.iter().map(|d| d * d).sum::<f64>().sqrt();
            if norm < 1e-3 || gnorm < 1e-3 {
                return None;
            }
            let x: Vec<f64> = dir.iter().map(|d| d * r / norm).collect();
            // |Du|^2 - (Du.x)^2 <= |Du|^2 < u^2 / (1 - |x|^2) keeps v^2 > 0.
            let limit = u / (1.0 - r * r).sqrt();
            let du: Vec<f64> = grad.iter().map(|g| g * frac * limit / gnorm).collect();
            let d2u = DMatrix::from_fn(n, n, |i, j| 0.5 * (hess[i * n + j] + hess[j * n + i]));
            Some(Jet::second_order(&x, u, &du, d2u))
        })
}

fn embed_at(jet: &Jet, y: &[f64]) -> SpacetimeVector {
    // Second-order Taylor model of u around the jet's base point.
    let n = jet.dim();
    let d: Vec<f64> = (0..n).map(|i| y[i] - jet.x[i]).collect();
    let h = jet.d2u.as_ref().unwrap();
    let mut u = jet.u;
    for i in 0..n {
        u += jet.du[i] * d[i];
        for j in 0..n {
            u += 0.5 * h[(i, j)] * d[i] * d[j];
        }
    }
    embed(y, u).unwrap()
}

fn shifted(jet: &Jet, moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y: Vec<f64> = jet.x.iter().copied().collect();
    for &(i, s) in moves {
        y[i] += s;
    }
    y
}

fn sub(a: &SpacetimeVector, b: &SpacetimeVector, scale: f64) -> SpacetimeVector {
    SpacetimeVector(a.0.iter().zip(&b.0).map(|(p, q)| (p - q) * scale).collect())
}

/// Centered difference of the embedding along `e_i`.
fn tangent(jet: &Jet, i: usize, h: f64) -> SpacetimeVector {
    sub(&embed_at(jet, &shifted(jet, &[(i, h)])), &embed_at(jet, &shifted(jet, &[(i, -h)])), 0.5 / h)
}

fn gram(jet: &Jet, h: f64) -> DMatrix<f64> {
    let n = jet.dim();
    let t: Vec<SpacetimeVector> = (0..n).map(|i| tangent(jet, i, h)).collect();
    DMatrix::from_fn(n, n, |i, j| minkowski_dot(&t[i], &t[j]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_metric_inverts_metric(jet in spacelike_jet()) {
        let g = metric(&jet).unwrap();
        let gi = inverse_metric(&jet).unwrap();
        let prod = &g * &gi;
        let scale = g.norm() * gi.norm();
        for i in 0..jet.dim() {
            for j in 0..jet.dim() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[(i, j)] - want).abs() < 1e-10 * scale, "{prod}");
            }
        }
    }

    #[test]
    fn metric_matches_difference_gram(jet in spacelike_jet()) {
        let g = metric(&jet).unwrap();
        let e1 = (gram(&jet, 1e-3) - &g).norm();
        let e2 = (gram(&jet, 5e-4) - &g).norm();
        // Second order in the step until rounding takes over.
        prop_assert!(e2 < 1e-6 * g.norm() || e1 / e2 > 3.5, "errors {e1:e} {e2:e}");
    }

    #[test]
    fn squared_position_gradient_identity(jet in spacelike_jet()) {
        let gi = inverse_metric(&jet).unwrap();
        let d = jet.du.map(|g| 2.0 * jet.u * g);
        let lhs = (d.transpose() * &gi * &d)[(0, 0)];
        let s = support_s(&jet).unwrap();
        let rhs = 4.0 * (s * s - jet.u * jet.u);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(jet.u * jet.u), "{lhs} vs {rhs}");
        let j = defect_j(&jet).unwrap();
        prop_assert!((j - (s * s - jet.u * jet.u) / (jet.u * jet.u)).abs() < 1e-8 * (1.0 + j));
    }

    #[test]
    fn normal_is_unit_future_and_orthogonal(jet in spacelike_jet()) {
        let nu = normal(&jet).unwrap();
        let scale = 1.0 + nu.0.iter().map(|c| c * c).sum::<f64>();
        prop_assert!((minkowski_dot(&nu, &nu).unwrap() + 1.0).abs() < 1e-10 * scale);
        prop_assert!(nu.time() > 0.0);
        let f = embed(jet.x.as_slice(), jet.u).unwrap();
        let s = support_s(&jet).unwrap();
        prop_assert!((minkowski_dot(&f, &nu).unwrap() + s).abs() < 1e-10 * scale * s);
        for i in 0..jet.dim() {
            let t = tangent(&jet, i, 1e-4);
            let tn = t.0.iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!(minkowski_dot(&t, &nu).unwrap().abs() < 1e-6 * tn * scale);
        }
    }

    #[test]
    fn curvature_norm_dominates_mean_curvature(jet in spacelike_jet()) {
        let (h, a2) = shape_operator(&jet).unwrap();
        let n = jet.dim() as f64;
        prop_assert!(a2 >= h * h / n - 1e-10 * (1.0 + a2));
    }

    #[test]
    fn mean_curvature_from_rhs_matches_shape_operator(jet in spacelike_jet()) {
        let (h, a2) = shape_operator(&jet).unwrap();
        let v = gradient_function_v(&jet).unwrap();
        let from_rhs = mean_curvature_from_rhs(jet.x.as_slice(), jet.u, v, graph_rhs(&jet).unwrap());
        prop_assert!((from_rhs - h).abs() < 1e-9 * (1.0 + a2.sqrt()), "{from_rhs} vs {h}");
    }

    #[test]
    fn second_fundamental_form_matches_embedding(jet in spacelike_jet()) {
        // h_ij = -<d_ij F, nu> with the second derivatives differenced.
        let geo = node_geometry(&jet).unwrap();
        let n = jet.dim();
        let step = 1e-3;
        let f0 = embed_at(&jet, &shifted(&jet, &[]));
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d2 = if i == j {
                    let p = embed_at(&jet, &shifted(&jet, &[(i, step)]));
                    let m = embed_at(&jet, &shifted(&jet, &[(i, -step)]));
                    SpacetimeVector(p.0.iter().zip(&m.0).zip(&f0.0).map(|((a, b), c)| (a + b - 2.0 * c) / (step * step)).collect())
                } else {
                    let pp = embed_at(&jet, &shifted(&jet, &[(i, step), (j, step)]));
                    let pm = embed_at(&jet, &shifted(&jet, &[(i, step), (j, -step)]));
                    let mp = embed_at(&jet, &shifted(&jet, &[(i, -step), (j, step)]));
                    let mm = embed_at(&jet, &shifted(&jet, &[(i, -step), (j, -step)]));
                    SpacetimeVector((0..=n).map(|k| (pp.0[k] - pm.0[k] - mp.0[k] + mm.0[k]) / (4.0 * step * step)).collect())
                };
                h[(i, j)] = -minkowski_dot(&d2, &geo.normal).unwrap();
            }
        }
        let mean = (&geo.inv_metric * &h).trace();
        let want = geo.h.unwrap();
        prop_assert!((mean - want).abs() < 1e-3 * (1.0 + geo.a2.unwrap().sqrt()), "{mean} vs {want}");
    }
}

#[test]
fn homothetic_jets_are_umbilic() {
    for &k in &[0.5, 1.0, 3.0] {
        let jet = Jet::homothetic(&[0.2, -0.3], k);
        let geo = node_geometry(&jet).unwrap();
        assert!((geo.h.unwrap() * k - 2.0).abs() < 1e-12);
        assert!((geo.a2.unwrap() * k * k - 2.0).abs() < 1e-12);
        assert_eq!(geo.j, 0.0);
    }
}
