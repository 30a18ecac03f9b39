//! Seeded random generation of variables, terms and permutations.

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::perm::{Perm, Var};
use crate::term::Term;

pub type Rng = ChaCha8Rng;

/// Default number of variables drawn from when sampling.
pub const POOL_SIZE: u32 = 6;
/// Default bound on the number of constructors in a sampled term.
pub const MAX_SIZE: usize = 12;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a labelled sub-task.
pub fn sub_rng(seed: u64, label: &str) -> Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

pub fn default_pool() -> Vec<Var> {
    (0..POOL_SIZE).map(Var).collect()
}

pub fn pick_var(rng: &mut Rng, pool: &[Var]) -> Var {
    *pool.choose(rng).expect("variable pool is empty")
}

/// A term with at most `max_size` constructors. The target size is drawn
/// geometrically; constructors are weighted 2:2:1 (Vr:Ap:Lm).
pub fn random_term(rng: &mut Rng, pool: &[Var], max_size: usize) -> Term {
    let mut target = 1;
    while target < max_size && rng.gen_bool(0.8) {
        target += 1;
    }
    build(rng, pool, target)
}

fn build(rng: &mut Rng, pool: &[Var], budget: usize) -> Term {
    if budget <= 1 {
        return Term::vr(pick_var(rng, pool));
    }
    match rng.gen_range(0..5) {
        0 | 1 => Term::vr(pick_var(rng, pool)),
        2 | 3 if budget >= 3 => {
            let left = rng.gen_range(1..budget - 1);
            Term::ap(build(rng, pool, left), build(rng, pool, budget - 1 - left))
        }
        _ => Term::lm(pick_var(rng, pool), build(rng, pool, budget - 1)),
    }
}

/// A random permutation moving a random subset of the pool.
pub fn random_perm(rng: &mut Rng, pool: &[Var]) -> Perm {
    let k = rng.gen_range(0..=pool.len().min(4));
    let mut dom: Vec<Var> = pool.to_vec();
    dom.shuffle(rng);
    dom.truncate(k);
    let mut img = dom.clone();
    img.shuffle(rng);
    Perm::from_pairs(dom.into_iter().zip(img)).expect("shuffle is a bijection")
}

/// A permutation whose moved variables all come from `vars`.
pub fn random_perm_on(rng: &mut Rng, vars: &[Var]) -> Perm {
    let mut dom: Vec<Var> = vars.to_vec();
    dom.shuffle(rng);
    let mut img = dom.clone();
    img.shuffle(rng);
    Perm::from_pairs(dom.into_iter().zip(img)).expect("shuffle is a bijection")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_respect_bounds() {
        let mut r = rng(1);
        let pool = default_pool();
        for _ in 0..500 {
            let t = random_term(&mut r, &pool, MAX_SIZE);
            assert!(t.size() <= MAX_SIZE);
            assert!(t.all_names().iter().all(|v| pool.contains(v)));
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let pool = default_pool();
        let a: Vec<String> =
            (0..20).map(|_| 0).scan(rng(9), |r, _| Some(random_term(r, &pool, 12).to_string())).collect();
        let b: Vec<String> =
            (0..20).map(|_| 0).scan(rng(9), |r, _| Some(random_term(r, &pool, 12).to_string())).collect();
        assert_eq!(a, b);
    }
}
