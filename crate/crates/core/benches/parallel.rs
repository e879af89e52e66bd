use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pce_hinf::eval::{norm_samples, simulate_monte_carlo, SimConfig};
use pce_hinf::plant::{benchmark, Gain};
use pce_hinf::synth::stability_post_analysis_with;
use pce_hinf::Execution;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn norm_grid(c: &mut Criterion) {
    let plant = benchmark::plant();
    let k = Gain::row(&benchmark::K_NOMINAL_P2).unwrap();
    let mut g = c.benchmark_group("norm_grid_1000");
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| norm_samples(&plant, &k, 1000, exec).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let plant = benchmark::plant();
    let k = Gain::row(&benchmark::K_NOMINAL_P2).unwrap();
    let mut g = c.benchmark_group("monte_carlo_1000");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        let cfg = SimConfig { t_end: 2.0, dt: 1e-3, n_mc: 1000, execution: exec, ..SimConfig::default() };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| simulate_monte_carlo(&plant, &k, &[1.0, 1.0], cfg).unwrap())
        });
    }
    g.finish();
}

fn stability_sweep(c: &mut Criterion) {
    let plant = benchmark::plant();
    let k = Gain::row(&benchmark::K_WORST_CASE).unwrap();
    let mut g = c.benchmark_group("stability_grid_1001");
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| stability_post_analysis_with(&plant, &k, 1001, 1e-6, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, norm_grid, monte_carlo, stability_sweep);
criterion_main!(benches);
