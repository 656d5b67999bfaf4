use std::hint::black_box;

use cmtwist::rankdist::{MarkovOperator, RankDistribution, DEFAULT_R_MAX};
use cmtwist::twistsim::{self, prime_count, FanLadder, PlaceModel, SimConfig, StepModel};
use cmtwist::{FieldParams, HermitianSpace, LocalPlane};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn stationary(c: &mut Criterion) {
    let mut g = c.benchmark_group("stationary");
    for field in [
        FieldParams::symplectic(2).unwrap(),
        FieldParams::unitary(13).unwrap(),
    ] {
        let id = format!("{}-{}", field.flavor(), field.p());
        g.bench_function(BenchmarkId::new("build", &id), |b| {
            b.iter(|| RankDistribution::stationary(black_box(field), DEFAULT_R_MAX))
        });
        let d = RankDistribution::stationary(field, DEFAULT_R_MAX);
        let op = MarkovOperator::new(field, DEFAULT_R_MAX);
        g.bench_function(BenchmarkId::new("apply", &id), |b| {
            b.iter(|| op.apply(black_box(&d)).unwrap())
        });
    }
    g.finish();
}

fn isotropic(c: &mut Criterion) {
    let field = FieldParams::unitary(7).unwrap();
    c.bench_function("isotropic_lines/uni-7", |b| {
        b.iter(|| {
            HermitianSpace::hyperbolic_plane(black_box(field))
                .enumerate_isotropic_lines()
                .unwrap()
        })
    });
    c.bench_function("local_plane/uni-7", |b| {
        b.iter(|| LocalPlane::build(black_box(field)))
    });
}

fn simulate(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    let samples = 1 << 16;
    g.throughput(Throughput::Elements(samples));
    for (name, step) in [
        ("closed", StepModel::ClosedForm),
        ("micro", StepModel::MicroModel),
    ] {
        let mut config = SimConfig::new(FieldParams::symplectic(3).unwrap(), 20, samples, 7);
        config.step_model = step;
        g.bench_function(BenchmarkId::new("k20", name), |b| {
            b.iter(|| twistsim::simulate(black_box(&config)).unwrap())
        });
    }
    g.finish();
}

fn places(c: &mut Criterion) {
    c.bench_function("prime_count/1e10", |b| {
        b.iter(|| prime_count(black_box(10_000_000_000)))
    });
    let model = PlaceModel::build(100_000.0, 1.0, 0).unwrap();
    let ladder = FanLadder::new(2.0).unwrap();
    c.bench_function("stratum_size/k2-x40", |b| {
        b.iter(|| twistsim::stratum_size(&model, &ladder, 2, black_box(40.0), u128::MAX).unwrap())
    });
}

criterion_group!(benches, stationary, isotropic, simulate, places);
criterion_main!(benches);
