use nomrec_core::corecursors::{check_coterm_property, corec, iterm_comodel, psubst_corec, random_env};
use nomrec_core::gen::{default_pool, random_term, rng, MAX_SIZE};
use nomrec_core::infinitary::{
    co_alpha_eq, co_fresh, co_fv, co_lm, co_subst, co_swap, co_vr, embed, eta_spine, fix, psubst, random_coterm,
    random_regular, rebind, CoTerm, Env, EqMode, Shape,
};
use nomrec_core::models::CheckCfg;
use nomrec_core::{alpha_eq, Term, Var};
use proptest::prelude::*;

const DEPTH: usize = 20;

fn exact(a: &CoTerm, b: &CoTerm) -> bool {
    co_alpha_eq(a, b, EqMode::Exact).unwrap()
}

fn finite(seed: u64) -> Term {
    random_term(&mut rng(seed), &default_pool(), MAX_SIZE)
}

fn var() -> impl Strategy<Value = Var> {
    (0..default_pool().len() as u32).prop_map(Var)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn embedding_preserves_free_variables(seed in any::<u64>()) {
        let t = finite(seed);
        prop_assert_eq!(co_fv(&embed(&t)).unwrap(), t.fv_set());
    }

    #[test]
    fn embedding_commutes_with_swap(seed in any::<u64>(), a in var(), b in var()) {
        let t = finite(seed);
        prop_assert!(exact(&co_swap(&embed(&t), a, b), &embed(&t.swap(a, b))));
    }

    #[test]
    fn embedding_commutes_with_subst(s1 in any::<u64>(), s2 in any::<u64>(), z in var()) {
        let (t, s) = (finite(s1), finite(s2));
        let got = co_subst(&embed(&t), &embed(&s), z).unwrap();
        prop_assert!(exact(&got, &embed(&t.subst(&s, z))));
    }

    #[test]
    fn embedding_reflects_alpha_equality(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (t, s) = (finite(s1), finite(s2));
        prop_assert_eq!(exact(&embed(&t), &embed(&s)), alpha_eq(&t, &s));
        prop_assert!(exact(&embed(&t), &embed(&t.refresh_binders(40))));
    }

    #[test]
    fn bounded_and_exact_equality_agree_on_regular_terms(s1 in any::<u64>(), s2 in any::<u64>()) {
        let pool = default_pool();
        let t = random_coterm(&mut rng(s1), &pool);
        let u = random_coterm(&mut rng(s2), &pool);
        if exact(&t, &u) {
            prop_assert!(co_alpha_eq(&t, &u, EqMode::Depth(DEPTH)).unwrap());
        }
        prop_assert!(co_alpha_eq(&t, &co_swap(&co_swap(&t, Var(0), Var(1)), Var(0), Var(1)), EqMode::Exact).unwrap());
    }

    #[test]
    fn psubst_by_the_identity_is_the_identity(seed in any::<u64>()) {
        let t = random_coterm(&mut rng(seed), &default_pool());
        prop_assert!(exact(&psubst(&t, &Env::identity()).unwrap(), &t));
    }

    #[test]
    fn psubst_is_swap_equivariant(seed in any::<u64>(), a in var(), b in var()) {
        let pool = default_pool();
        let mut r = rng(seed);
        let t = random_coterm(&mut r, &pool);
        let rho = random_env(&mut r, &pool);
        let lhs = co_swap(&psubst(&t, &rho).unwrap(), a, b);
        let rhs = psubst(&co_swap(&t, a, b), &rho.swap(a, b)).unwrap();
        prop_assert!(co_alpha_eq(&lhs, &rhs, EqMode::Depth(DEPTH)).unwrap());
    }

    #[test]
    fn psubst_preserves_freshness(seed in any::<u64>(), x in var()) {
        let pool = default_pool();
        let mut r = rng(seed);
        let t = random_coterm(&mut r, &pool);
        let rho = random_env(&mut r, &pool);
        let fresh_everywhere = co_fresh(x, &t).unwrap()
            && !rho.supp().unwrap().contains(&x)
            && rho.modified().all(|(_, u)| co_fresh(x, u).unwrap());
        prop_assume!(fresh_everywhere);
        prop_assert!(co_fresh(x, &psubst(&t, &rho).unwrap()).unwrap());
    }

    #[test]
    fn corecursor_into_iterms_is_the_identity(seed in any::<u64>(), k in 0usize..8) {
        let i = [1, 2, 3, 5, 6, 7, 8, 9][k];
        let cm = iterm_comodel(30);
        let t = random_coterm(&mut rng(seed), &default_pool());
        prop_assert!(exact(&corec(i, &cm).unwrap().apply(&t), &t));
    }

    #[test]
    fn psubst_corecursion_agrees_with_psubst(seed in any::<u64>()) {
        let pool = default_pool();
        let mut r = rng(seed);
        let t = random_coterm(&mut r, &pool);
        let rho = random_env(&mut r, &pool);
        let got = psubst_corec(&t, &rho, DEPTH).unwrap();
        prop_assert!(co_alpha_eq(&got, &psubst(&t, &rho).unwrap(), EqMode::Depth(DEPTH)).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    // Two names and few states: binders shadow along almost every cycle.
    #[test]
    fn exact_bisimulation_under_cyclic_shadowing(s1 in any::<u64>(), s2 in any::<u64>()) {
        let pool = [Var(0), Var(1)];
        let t = random_regular(&mut rng(s1), &pool, 4);
        let u = random_regular(&mut rng(s2), &pool, 4);
        prop_assert_eq!(exact(&t, &u), co_alpha_eq(&t, &u, EqMode::Depth(64)).unwrap());
        let v = rebind(&t, &pool.into());
        prop_assert!(exact(&t, &v));
        prop_assert!(co_alpha_eq(&t, &v, EqMode::Depth(64)).unwrap());
    }
}

#[test]
fn infinite_unfoldings() {
    let (x, y) = (Var(0), Var(1));
    assert!(co_fv(&fix()).unwrap().is_empty());
    let spine = eta_spine(x);
    assert!(co_fv(&spine).unwrap().is_empty());
    assert!(exact(&co_swap(&spine, x, y), &spine));
    assert!(exact(&spine, &eta_spine(y)));
    // μs. Lm x (Ap s (Vr y)): y free at every depth
    let open = CoTerm::from_table(vec![Shape::L(x, 1), Shape::A(0, 2), Shape::V(y)], 0).unwrap();
    assert_eq!(co_fv(&open).unwrap(), [y].into());
    let moved = co_swap(&open, y, Var(2));
    assert!(!exact(&moved, &open));
    assert!(exact(&co_subst(&open, &co_vr(Var(2)), y).unwrap(), &moved));
    // substituting the bound name's own variable must not capture
    let captured = co_subst(&open, &co_vr(x), y).unwrap();
    assert_eq!(co_fv(&captured).unwrap(), [x].into());
    assert!(exact(&co_lm(x, &co_vr(x)), &co_lm(y, &co_vr(y))));
}

#[test]
fn coterm_laws_hold_on_iterms() {
    let cfg = CheckCfg::with_seed(7, 200);
    for name in ["SwLm∞", "FrLm∞", "PmLm∞", "RnLm1∞", "SwBvr∞"] {
        let line = check_coterm_property(name, &cfg, 30).unwrap();
        assert!(line.passed(), "{line}");
    }
}

#[test]
fn the_second_renaming_lambda_law_is_refuted() {
    let line = check_coterm_property("RnLm2∞", &CheckCfg::with_seed(7, 300), 30).unwrap();
    assert!(!line.passed(), "{line}");
    assert!(line.cex.is_some());
}
