//! Mesh and flow properties: Neumann closure, scaling, exact expanding
//! solutions, ordering of solutions.

use conemcf::flow::{self, StepControl};
use conemcf::mesh::{apply_neumann, area_graph, build_mesh, build_radial_mesh};
use conemcf::ConeSpec;
use proptest::prelude::*;

fn quiet(_: &conemcf::Field, _: &conemcf::ParabolicityReport) -> conemcf::Result<()> {
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn neumann_closure_is_idempotent(a in -0.05f64..0.05, b in -0.05f64..0.05, c2 in 0.0f64..0.08) {
        let spec = ConeSpec::polar(vec![0.6, 0.0, c2]);
        let m = build_mesh(&spec, 12, 16).unwrap();
        let f = m.field_from_fn(0.0, |x| 1.0 + a * x[0] + b * x[0] * x[1]);
        let once = apply_neumann(&m, &f);
        prop_assert_eq!(apply_neumann(&m, &once), once);
    }

    #[test]
    fn graph_area_scales_like_u_to_the_n(k in 0.2f64..20.0, rho in 0.1f64..0.95) {
        let m = build_mesh(&ConeSpec::round(rho, 2), 10, 12).unwrap();
        let base = area_graph(&m, &m.constant_field(1.0, 0.0)).unwrap();
        let scaled = area_graph(&m, &m.constant_field(k, 0.0)).unwrap() / (k * k);
        prop_assert!((scaled - base).abs() <= 1e-12 * base);
    }

    #[test]
    fn ordered_data_stay_ordered(a in 0.0f64..0.03, gap in 0.0f64..0.05) {
        // Comparison probe: lower data below upper data at every node.
        let m = build_mesh(&ConeSpec::round(0.5, 2), 12, 12).unwrap();
        let lower = m.field_from_fn(0.0, |x| 1.0 + a * (x[0] * x[0] + x[1] * x[1]));
        let upper = m.field_from_fn(0.0, |x| 1.0 + gap + 2.0 * a * x[0] * x[0] + a * x[1] * x[1]);
        let ctl = StepControl { t_end: 0.5, ..StepControl::default() };
        let lo = flow::run(&m, lower, &ctl, quiet).unwrap().into_field();
        let hi = flow::run(&m, upper, &ctl, quiet).unwrap().into_field();
        for (l, h) in lo.u.iter().zip(&hi.u) {
            prop_assert!(l <= &(h + 1e-12), "{l} > {h}");
        }
    }
}

#[test]
fn axisymmetric_three_dimensional_expanding_solution() {
    let m = build_radial_mesh(&ConeSpec::round(0.5, 3), 16).unwrap();
    let ctl = StepControl { t_end: 1.0, ..StepControl::default() };
    let out = flow::run_axisymmetric(&m, m.constant_field(1.0, 0.0), &ctl, quiet).unwrap().into_field();
    for u in &out.u {
        assert!((u - 7f64.sqrt()).abs() < 1e-6, "{u}");
    }
    assert!((7f64.sqrt() - 2.645751).abs() < 1e-6);
}

#[test]
fn radial_and_planar_constant_runs_agree() {
    let spec = ConeSpec::round(0.5, 2);
    let planar = build_mesh(&spec, 16, 16).unwrap();
    let radial = build_radial_mesh(&spec, 16).unwrap();
    let mut p = planar.constant_field(1.0, 0.0);
    let mut r = radial.constant_field(1.0, 0.0);
    // One fixed step for both meshes, stable on the finer planar one.
    let dt = flow::stable_dt(&planar, &p, &StepControl::default()).unwrap();
    for _ in 0..200 {
        p = flow::step(&planar, &p, dt).unwrap();
        r = flow::step(&radial, &r, dt).unwrap();
    }
    for (k, u) in p.u.iter().enumerate() {
        assert!((u - r.u[k / 16]).abs() < 1e-12, "node {k}: {u} vs {}", r.u[k / 16]);
    }
}

#[test]
fn parabolicity_stays_bounded_on_a_run() {
    let m = build_mesh(&ConeSpec::round(0.9, 2), 16, 16).unwrap();
    let f = m.field_from_fn(0.0, |x| 1.0 + 0.1 * (x[0] * x[0] - x[1] * x[1]));
    let ctl = StepControl { t_end: 4.0, t_first: 0.25, ..StepControl::default() };
    let mut worst = 0.0f64;
    flow::run(&m, f, &ctl, |_, rep| {
        assert!(rep.max_coefficient.is_finite() && rep.min_v > 0.0 && rep.min_u > 0.0);
        worst = worst.max(rep.max_coefficient);
        Ok(())
    })
    .unwrap();
    assert!(worst < 100.0, "{worst}");
}
