use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use lmi_core::flows::Lanes;
use lmi_core::fock::{build_hamiltonian, initial_state, FockBasis, Method, Propagator};
use lmi_core::gaussian::gaussian_series;
use lmi_core::liouville::quadrature::integrate;
use lmi_core::liouville::{DensityEvaluator, QuadratureGrid};
use lmi_core::{DensitySpec, FlowPlan, ModelKind, ModelSpec, PhasePoint};

fn rk4(c: &mut Criterion) {
    let plan = FlowPlan::rk4(ModelSpec::nelson(0.05), 1e-2);
    let start = PhasePoint::new(0.0, 0.3, -0.06, 0.0);
    c.bench_function("rk4 scalar, t = 1", |b| {
        b.iter(|| plan.integrate(black_box(start), 1.0))
    });
    let lanes: Lanes<8> =
        std::array::from_fn(|k| std::array::from_fn(|l| start.to_array()[k] + 1e-3 * l as f64));
    c.bench_function("rk4 8 lanes, t = 1", |b| {
        b.iter(|| {
            let mut x = black_box(lanes);
            plan.integrate_lanes(&mut x, 1.0)
        })
    });
}

fn quadrature(c: &mut Criterion) {
    let model = ModelSpec::nelson(0.05);
    let density = DensitySpec::gaussian(PhasePoint::new(0.0, 0.3, -0.06, 0.0));
    let ev = DensityEvaluator::new(density, FlowPlan::new(model).unwrap().with_rk4_dt(1e-2));
    let grid = QuadratureGrid::initial(&density, 0.05, 6.0, 16);
    let mut g = c.benchmark_group("quadrature");
    g.sample_size(10);
    g.bench_function("nelson 16^4, t = 0.5", |b| {
        b.iter(|| integrate(&ev, black_box(0.5), &grid))
    });
    g.finish();
}

fn fock(c: &mut Criterion) {
    let model = ModelSpec::nelson(0.05);
    let density = DensitySpec::gaussian(PhasePoint::new(0.0, 0.3, -0.06, 0.0));
    let mut g = c.benchmark_group("fock");
    g.sample_size(10);
    for (n1, n2, method) in [(40, 16, Method::Eigen), (100, 30, Method::Chebyshev)] {
        let basis = FockBasis::new(n1, n2);
        let h = build_hamiltonian(&model, basis).unwrap();
        let psi0 =
            initial_state(&density, (model.omega1, model.omega2), model.hbar, basis).unwrap();
        g.bench_function(format!("{method:?} ({n1}, {n2}), t = 1"), |b| {
            b.iter(|| {
                Propagator::new(&h, &psi0, method)
                    .unwrap()
                    .state(black_box(1.0))
            })
        });
    }
    g.finish();
}

fn gaussian(c: &mut Criterion) {
    let model = ModelSpec::new(ModelKind::Bilinear, 0.9).with_hbar(1.0);
    let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
    c.bench_function("gaussian series, 201 times", |b| {
        b.iter(|| {
            gaussian_series(
                &model,
                PhasePoint::new(0.3, 0.0, -0.2, 0.1),
                black_box(&times),
            )
        })
    });
}

criterion_group!(benches, rk4, quadrature, fock, gaussian);
criterion_main!(benches);
