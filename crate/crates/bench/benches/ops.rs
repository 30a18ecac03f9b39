use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nomrec_core::corecursors::random_env;
use nomrec_core::examples::size_model;
use nomrec_core::gen::{default_pool, random_term, rng};
use nomrec_core::infinitary::{co_alpha_eq, co_swap, psubst, random_coterm, EqMode};
use nomrec_core::recursors::rec;
use nomrec_core::{alpha_eq, Term, Var};

fn terms(seed: u64, n: usize, size: usize) -> Vec<Term> {
    let mut r = rng(seed);
    let pool = default_pool();
    (0..n).map(|_| random_term(&mut r, &pool, size)).collect()
}

fn finitary(c: &mut Criterion) {
    let ts = terms(1, 64, 40);
    let ss = terms(2, 64, 12);
    let variants: Vec<Term> = ts.iter().map(|t| t.refresh_binders(50)).collect();
    c.bench_function("subst", |b| b.iter(|| ts.iter().zip(&ss).map(|(t, s)| t.subst(s, Var(1)).size()).sum::<usize>()));
    c.bench_function("swap", |b| b.iter(|| ts.iter().map(|t| t.swap(Var(0), Var(3)).size()).sum::<usize>()));
    c.bench_function("alpha_eq", |b| b.iter(|| ts.iter().zip(&variants).filter(|(t, v)| alpha_eq(t, v)).count()));
    let r = rec(4, &size_model()).unwrap();
    c.bench_function("rec", |b| b.iter(|| ts.iter().map(|t| r.eval(black_box(t))).sum::<u64>()));
}

fn infinitary(c: &mut Criterion) {
    let pool = default_pool();
    let mut r = rng(3);
    let cs: Vec<_> = (0..32).map(|_| random_coterm(&mut r, &pool)).collect();
    let swapped: Vec<_> = cs.iter().map(|t| co_swap(&co_swap(t, Var(0), Var(1)), Var(0), Var(1))).collect();
    let envs: Vec<_> = (0..32).map(|_| random_env(&mut r, &pool)).collect();
    c.bench_function("co_alpha_eq", |b| {
        b.iter(|| cs.iter().zip(&swapped).filter(|(t, u)| co_alpha_eq(t, u, EqMode::Exact).unwrap()).count())
    });
    c.bench_function("psubst", |b| {
        b.iter(|| cs.iter().zip(&envs).filter(|(t, e)| psubst(t, e).unwrap().is_regular()).count())
    });
}

criterion_group!(benches, finitary, infinitary);
criterion_main!(benches);
