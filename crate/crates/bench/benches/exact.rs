use criterion::{black_box, criterion_group, criterion_main, Criterion};

use rls_bench::{profile, sl4_tuple, so6_twisted};
use rls_core::convolution::{jordan_profile, middle_convolution};
use rls_core::corpus::{run_case, Fixtures};
use rls_core::isogeny::spin_class;
use rls_core::katz::{realize, reduce};
use rls_core::{CyclotomicNumber, JordanClass, RootOfUnity};

fn arithmetic(c: &mut Criterion) {
    let a: CyclotomicNumber = "1 + 2*zeta(24) - 3/5*zeta(24)^7".parse().unwrap();
    let b: CyclotomicNumber = "zeta(8) - 1/2*zeta(3)".parse().unwrap();
    c.bench_function("cyclotomic mul Q(zeta24)", |bench| {
        bench.iter(|| black_box(&a) * black_box(&b))
    });
    c.bench_function("cyclotomic inv Q(zeta24)", |bench| {
        bench.iter(|| black_box(&a).inv().unwrap())
    });
}

fn matrices(c: &mut Criterion) {
    let sl4 = sl4_tuple();
    let so6 = so6_twisted();
    c.bench_function("jordan_profile SL4", |b| {
        b.iter(|| jordan_profile(black_box(&sl4), Some(12)).unwrap())
    });
    c.bench_function("middle_convolution rank 6", |b| {
        b.iter(|| middle_convolution(black_box(&so6), RootOfUnity::MINUS_ONE).unwrap())
    });
}

fn katz(c: &mut Criterion) {
    let sl4 = profile("dwork_sl4.json");
    let gl5 = profile("dwork_gl5.json");
    c.bench_function("reduce SL4 profile", |b| {
        b.iter(|| reduce(black_box(&sl4)).unwrap())
    });
    c.bench_function("realize SL4 profile", |b| {
        b.iter(|| realize(black_box(&sl4)).unwrap())
    });
    c.bench_function("realize GL5 profile", |b| {
        b.iter(|| realize(black_box(&gl5)).unwrap())
    });
}

fn classes(c: &mut Criterion) {
    let u7 = JordanClass::unipotent(7);
    c.bench_function("spin_class U(7)", |b| {
        b.iter(|| spin_class(black_box(&u7), 3).unwrap())
    });
}

fn cases(c: &mut Criterion) {
    let fx = Fixtures::bundled();
    let mut group = c.benchmark_group("cases");
    group.sample_size(10);
    for name in ["so7", "so7bis", "dwork"] {
        group.bench_function(name, |b| {
            b.iter(|| assert!(run_case(name, &fx).unwrap().passed))
        });
    }
    group.finish();
}

criterion_group!(benches, arithmetic, matrices, katz, classes, cases);
criterion_main!(benches);
