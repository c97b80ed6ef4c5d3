//! Hot kernels, each timed on one thread and on the default rayon pool.
//!
//! `cargo bench` compares the two; `cargo bench --no-default-features`
//! times the plain sequential build.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkGroup, Criterion};
use criterion::measurement::WallTime;

use aximhd::apweight::{ap_constant, ApProbe};
use aximhd::evolve::{rhs_omega, rhs_pi, Mode, RunConfig, Simulator};
use aximhd::grid::make_grid;
use aximhd::initial::{make_initial, InitialName, InitialParams};
use aximhd::poisson::StreamSolver;

fn variants(group: &mut BenchmarkGroup<'_, WallTime>, f: &(dyn Fn() + Sync)) {
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_function("one-thread", |b| b.iter(|| one.install(f)));
        group.bench_function(format!("pool-{}", rayon::current_num_threads()), |b| b.iter(f));
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(f));
}

fn kernels(c: &mut Criterion) {
    let n = 128;
    let grid = make_grid(n, n, 4.0, 4.0).unwrap();
    let (_, omega) = make_initial(InitialName::OpposingPair, &InitialParams::default(), &grid).unwrap();
    let (pi, _) = make_initial(InitialName::GaussianRing, &InitialParams::default(), &grid).unwrap();
    let config = RunConfig {
        mode: Mode::Resistive,
        t_end: 1.0,
        ..RunConfig::default()
    };
    let sim = Simulator::new(grid, config).unwrap();
    let state = sim.initial_state(pi, omega.clone()).unwrap();
    let solver = StreamSolver::new(grid);

    let mut g = c.benchmark_group("poisson-128");
    variants(&mut g, &|| {
        black_box(solver.solve_field(black_box(&omega)).unwrap());
    });
    g.finish();

    let mut g = c.benchmark_group("rhs-128");
    variants(&mut g, &|| {
        black_box(rhs_pi(&state, &config));
        black_box(rhs_omega(&state, &config));
    });
    g.finish();

    let mut g = c.benchmark_group("step-128");
    g.sample_size(20);
    variants(&mut g, &|| {
        black_box(sim.step(black_box(&state)).unwrap());
    });
    g.finish();

    let probe = ApProbe::new(2.0, 2.0, 100_000, 0).unwrap();
    let mut g = c.benchmark_group("ap-cell-1e5");
    g.sample_size(20);
    variants(&mut g, &|| {
        black_box(ap_constant(&probe, 0.5).unwrap());
    });
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
