use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aeqs_core::aeqs::decide;
use aeqs_core::compilers::{from_moqfa, random::random_moqfa};
use aeqs_core::evolve::{evolve_final, EvolveSettings, Method, Schedule};
use aeqs_core::gallery;
use aeqs_core::linalg::{hermitian_eig, DenseMatrix, EigenSettings, C64};

fn random_hermitian(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let a = DenseMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    DenseMatrix::from_fn(n, n, |r, c| (a[(r, c)] + a[(c, r)].conj()) * 0.5)
}

fn jacobi(c: &mut Criterion) {
    let settings = EigenSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("jacobi");
    for n in [16, 64, 128] {
        let h = random_hermitian(n, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| hermitian_eig(black_box(h), &settings).unwrap()));
    }
    group.finish();
}

fn gallery_decide(c: &mut Criterion) {
    let settings = EigenSettings::default();
    let mut group = c.benchmark_group("decide");
    group.sample_size(20);
    for (name, input) in [("l_prefix", "010110"), ("equal", "aaabbb"), ("sym_coin", "abba"), ("pal_marked", "ab#ba")] {
        let family = gallery::build(name).unwrap().family;
        group.bench_function(format!("{name}/{input}"), |b| b.iter(|| family.decide(black_box(input), &settings).unwrap()));
    }
    group.finish();
}

fn lanczos_path(c: &mut Criterion) {
    let settings = EigenSettings { dense_max: 64, ..EigenSettings::default() };
    let instance = gallery::build("sym_coin").unwrap().family.build("abab").unwrap();
    c.bench_function("decide/sym_coin/abab/lanczos", |b| b.iter(|| decide(black_box(&instance), &settings).unwrap()));
}

fn evolution(c: &mut Criterion) {
    let settings = EvolveSettings::default();
    let instance = gallery::build("equal").unwrap().family.build("ab").unwrap();
    let mut group = c.benchmark_group("evolve_final");
    for method in [Method::Midpoint, Method::Trotter, Method::Phase] {
        let schedule = Schedule::new(8.0, 512).unwrap();
        group.bench_function(method.to_string(), |b| b.iter(|| evolve_final(&instance, black_box(&schedule), method, &settings).unwrap()));
    }
    group.finish();
}

fn compile_moqfa(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = random_moqfa(4, &['a', 'b'], &mut rng).unwrap();
    let family = from_moqfa(&spec).unwrap();
    let settings = EigenSettings::default();
    c.bench_function("from_moqfa/decide/abba", |b| b.iter(|| family.decide(black_box("abba"), &settings).unwrap()));
}

criterion_group!(benches, jacobi, gallery_decide, lanczos_path, evolution, compile_moqfa);
criterion_main!(benches);
