use criterion::{black_box, criterion_group, criterion_main, Criterion};

use conemcf::flow;
use conemcf::geometry::{cap_area_quadrature, hyperbolic_cap_area};
use conemcf::mesh::build_mesh;
use conemcf::ConeSpec;

fn solver(c: &mut Criterion) {
    let mesh = build_mesh(&ConeSpec::round(0.9, 2), 64, 64).unwrap();
    let field = mesh.field_from_fn(0.0, |x| 1.0 + 0.1 * (x[0] * x[0] - x[1] * x[1]));
    let dt = flow::stable_dt(&mesh, &field, &flow::StepControl::default()).unwrap();

    c.bench_function("rhs 64x64", |b| b.iter(|| flow::rhs(&mesh, black_box(&field)).unwrap()));
    c.bench_function("step 64x64", |b| b.iter(|| flow::step(&mesh, black_box(&field), dt).unwrap()));
    c.bench_function("cap area closed form", |b| b.iter(|| hyperbolic_cap_area(black_box(0.5), 2).unwrap()));
    c.bench_function("cap area quadrature n=3", |b| b.iter(|| cap_area_quadrature(black_box(0.5), 3)));
}

criterion_group!(benches, solver);
criterion_main!(benches);
