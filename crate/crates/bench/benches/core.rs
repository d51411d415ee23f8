use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use syz_bench::{dense_series, lines, retraction_with_m3};
use syz_core::fukaya_oh::fo_category;
use syz_core::mirror::{mirror_compare, theta_multiply, LineBundleObj};
use syz_core::rational::qi;
use syz_core::transfer::transfer_structure;
use syz_core::trees::enumerate;

fn trees(c: &mut Criterion) {
    let mut g = c.benchmark_group("trees/enumerate");
    for n in [5usize, 7, 8] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| enumerate(black_box(n), 2)));
    }
    g.finish();
}

fn transfer(c: &mut Criterion) {
    let r = retraction_with_m3(7);
    let mut g = c.benchmark_group("transfer/structure");
    for arity in [3usize, 4, 5] {
        g.bench_with_input(BenchmarkId::from_parameter(arity), &arity, |b, &k| {
            b.iter(|| transfer_structure(black_box(&r), k).unwrap())
        });
    }
    g.finish();
}

fn novikov(c: &mut Criterion) {
    let x = dense_series(40);
    let y = dense_series(30);
    c.bench_function("novikov/mul_40x30", |b| b.iter(|| black_box(&x).mul(black_box(&y))));
    c.bench_function("novikov/inv_40", |b| b.iter(|| black_box(&x).inv().unwrap()));
}

fn theta(c: &mut Criterion) {
    let ls = lines(&[0, 1, 3]);
    let e1 = LineBundleObj::hom(&LineBundleObj::of(&ls[0]), &LineBundleObj::of(&ls[1]));
    let e2 = LineBundleObj::hom(&LineBundleObj::of(&ls[1]), &LineBundleObj::of(&ls[2]));
    let mut g = c.benchmark_group("theta/multiply");
    for cutoff in [10i64, 25, 50] {
        g.bench_with_input(BenchmarkId::from_parameter(cutoff), &cutoff, |b, &l| {
            b.iter(|| theta_multiply(black_box(&e1), black_box(&e2), &qi(l)).unwrap())
        });
    }
    g.finish();
    c.bench_function("mirror/compare_0_1_3_cut25", |b| b.iter(|| mirror_compare(&ls[0], &ls[1], &ls[2], &qi(25)).unwrap()));
    let quad = lines(&[0, 1, 2, 3]);
    c.bench_function("fo/category_0123_cut20", |b| b.iter(|| fo_category(black_box(&quad), &qi(20)).unwrap()));
}

criterion_group!(benches, trees, transfer, novikov, theta);
criterion_main!(benches);
