use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use anisoflow::exact_solutions::Barenblatt;
use anisoflow::fokker_planck::{fp_step, stable_dtau};
use anisoflow::pde_solver::{stable_dt, step};
use anisoflow::ExponentSet;
use anisoflow_bench::{bump_field, rescaled_field};

fn pde_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("pde_step");
    for (label, p, nodes) in [("1d_801", vec![3.0], 801), ("2d_129", vec![3.0, 4.0], 129)] {
        let (e, u) = bump_field(&p, 4.0, nodes);
        let dt = stable_dt(&u, &e, 0.4, f64::INFINITY);
        g.bench_with_input(BenchmarkId::from_parameter(label), &u, |b, u| {
            b.iter(|| step(black_box(u), &e, dt).unwrap())
        });
    }
    g.finish();
}

fn fokker_planck_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("fp_step");
    for (label, p, nodes) in [("1d_801", vec![3.0], 801), ("2d_129", vec![3.0, 4.0], 129)] {
        let w = rescaled_field(&p, 4.0, nodes);
        let dtau = stable_dtau(&w, 0.4);
        g.bench_with_input(BenchmarkId::from_parameter(label), &w, |b, w| {
            b.iter(|| fp_step(black_box(w), dtau).unwrap())
        });
    }
    g.finish();
}

fn barenblatt_eval(c: &mut Criterion) {
    let e = ExponentSet::new(3, &[3.0, 3.0, 3.0]).unwrap();
    let bar = Barenblatt::new(&e).unwrap();
    let points: Vec<[f64; 3]> = (0..1000)
        .map(|k| {
            let s = k as f64 / 1000.0;
            [s - 0.5, 0.3 * s, 0.2 - s]
        })
        .collect();
    c.bench_function("barenblatt_3d_1000_points", |b| {
        b.iter(|| {
            points
                .iter()
                .map(|x| bar.value(black_box(x), 1.5))
                .sum::<f64>()
        })
    });
}

criterion_group!(benches, pde_step, fokker_planck_step, barenblatt_eval);
criterion_main!(benches);
