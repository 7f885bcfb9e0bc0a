use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussprg_core::field_hash::{derive_source, PrimeField};
use gaussprg_core::poly::{gradient_norm, to_hermite};
use gaussprg_core::prg::expand_seed;
use gaussprg_core::ptf::random_family;
use gaussprg_core::{derive_params, generate, ParamOverrides};

fn eval_index(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval_index");
    for exponent in [56u32, 96] {
        let field = PrimeField::smallest_at_least_pow2(exponent);
        let seed = vec![0xa5u8; 64 * 16];
        let src = derive_source(&seed, 32, 0, &field).unwrap();
        group.bench_with_input(BenchmarkId::new("t32", field.bit_width()), &src, |b, src| {
            b.iter(|| src.eval_index(black_box(12345)).unwrap())
        });
    }
    group.finish();
}

fn generate_desk(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    for n in [4usize, 64] {
        let params = derive_params(2, 2, 0.1, n, &ParamOverrides::desk()).unwrap();
        let seed = expand_seed(b"bench", &params);
        group.bench_with_input(BenchmarkId::new("desk", n), &seed, |b, seed| {
            b.iter(|| generate(&params, black_box(seed)).unwrap())
        });
    }
    group.finish();
}

fn polynomials(c: &mut Criterion) {
    let family = random_family(5, 4, 4, 1, true).unwrap();
    let p = &family.polys()[0];
    let x = [0.3, -1.2, 0.8, 2.0];
    c.bench_function("gradient_norm/n4_d4_t2", |b| b.iter(|| gradient_norm(p, black_box(&x), 2).unwrap()));
    c.bench_function("to_hermite/n4_d4", |b| b.iter(|| to_hermite(black_box(p))));
}

criterion_group!(benches, eval_index, generate_desk, polynomials);
criterion_main!(benches);
