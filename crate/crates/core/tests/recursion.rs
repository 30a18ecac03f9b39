use nomrec_core::counterexamples::{index_of, t_index};
use nomrec_core::examples::{noccs, noccs_model, size_model, subst_via_r1};
use nomrec_core::gen::{default_pool, random_term, rng, MAX_SIZE};
use nomrec_core::models::term_model;
use nomrec_core::recursors::{rec, Mode};
use nomrec_core::transforms::{edge, lockstep_check, to_kernel};
use nomrec_core::{alpha_eq, Term, Var};
use proptest::prelude::*;

fn finite(seed: u64) -> Term {
    random_term(&mut rng(seed), &default_pool(), MAX_SIZE)
}

fn var() -> impl Strategy<Value = Var> {
    (0..default_pool().len() as u32).prop_map(Var)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn recursion_into_terms_is_the_identity(seed in any::<u64>(), i in 1usize..=9) {
        let t = finite(seed);
        let r = rec(i, &term_model(i).unwrap()).unwrap().with_mode(Mode::Checked);
        prop_assert!(alpha_eq(&r.apply(&t).unwrap(), &t));
    }

    #[test]
    fn recursion_respects_alpha_classes(seed in any::<u64>(), start in 10u32..40) {
        let t = finite(seed);
        let r = rec(4, &size_model()).unwrap();
        prop_assert_eq!(r.eval(&t), r.eval(&t.refresh_binders(start)));
    }

    #[test]
    fn occurrence_count_is_swap_invariant(seed in any::<u64>(), x in var(), a in var(), b in var()) {
        let t = finite(seed);
        prop_assert_eq!(noccs(&t.swap(a, b), x.swapped(a, b)), noccs(&t, x));
    }

    #[test]
    fn substitution_by_recursion(s1 in any::<u64>(), s2 in any::<u64>(), y in var()) {
        let (t, s) = (finite(s1), finite(s2));
        prop_assert!(alpha_eq(&subst_via_r1(&t, &s, y), &t.subst(&s, y)));
    }

    #[test]
    fn edges_preserve_the_recursion_image(seed in any::<u64>(), k in 0usize..8) {
        let (j, i) = nomrec_core::transforms::EDGES[k];
        let t = finite(seed);
        let m = term_model(j).unwrap();
        let moved = edge(j, i, &m).unwrap();
        prop_assert!(alpha_eq(&rec(j, &m).unwrap().eval(&t), &rec(i, &moved).unwrap().eval(&t)));
    }

    #[test]
    fn indexed_terms_round_trip(i in 0usize..40) {
        prop_assert_eq!(index_of(&t_index(i)), Some(i));
        prop_assert_eq!(index_of(&t_index(i).refresh_binders(7)), Some(i));
    }
}

#[test]
fn every_recursor_reaches_a_kernel() {
    for i in 1..=9 {
        let (k, m) = to_kernel(i, &term_model(i).unwrap()).unwrap();
        assert!(k == 6 || k == 9, "r{i} -> r{k}");
        let t = finite(i as u64);
        assert!(alpha_eq(&rec(k, &m).unwrap().eval(&t), &t));
    }
}

#[test]
fn submodel_operations_stay_in_lockstep() {
    for i in 1..=9 {
        let line = lockstep_check(i, &term_model(i).unwrap(), 100, 3).unwrap();
        assert!(line.passed(), "r{i}: {line}");
    }
    assert!(lockstep_check(6, &noccs_model(), 100, 3).unwrap().passed());
}

#[test]
fn unknown_recursors_are_rejected() {
    assert!(rec(0, &term_model(1).unwrap()).is_err());
    assert!(term_model(10).is_err());
}
