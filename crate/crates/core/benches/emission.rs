use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use waveguide_pair::analysis::{EmissionOptions, GridWindow};
use waveguide_pair::model::ModelParams;
use waveguide_pair::par::{init_thread_pool, Parallelism};
use waveguide_pair::PairSystem;

fn emission(c: &mut Criterion) {
    init_thread_pool();
    let params = ModelParams::with_k0d(1.0, 1.1, 2e-2, 1.0).unwrap();
    let mut group = c.benchmark_group("emission");
    group.sample_size(10).measurement_time(Duration::from_secs(30));
    for (name, parallelism) in [("sequential", Parallelism::Sequential), ("rayon", Parallelism::Rayon)] {
        let opts = EmissionOptions { tol: 1e-5, parallelism, ..EmissionOptions::default() };
        group.bench_function(name, |b| {
            b.iter(|| {
                // a fresh system each time so the self-energy table is rebuilt in both modes
                let sys = PairSystem::new(&params).unwrap();
                sys.emission(&opts).unwrap().ratio
            })
        });
    }
    group.finish();
}

fn density_grid(c: &mut Criterion) {
    let sys = PairSystem::new(&ModelParams::with_k0d(1.0, 1.1, 1e-2, 1.0).unwrap()).unwrap();
    let k0 = sys.on_shell().k0;
    let window = GridWindow::square(-1.5 * k0, 1.5 * k0);
    let mut group = c.benchmark_group("density_grid");
    group.sample_size(10);
    for (name, parallelism) in [("sequential", Parallelism::Sequential), ("rayon", Parallelism::Rayon)] {
        group.bench_function(name, |b| b.iter(|| sys.density_grid(window, (48, 48), parallelism).unwrap().max));
    }
    group.finish();
}

criterion_group!(benches, emission, density_grid);
criterion_main!(benches);
