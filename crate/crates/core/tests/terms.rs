use std::collections::BTreeSet;

use nomrec_core::term::{alpha_eq_by_swap, Node};
use nomrec_core::{alpha_eq, parse_with, Names, Perm, Term, Var};
use proptest::prelude::*;

const POOL: u32 = 6;

fn var() -> impl Strategy<Value = Var> {
    (0..POOL).prop_map(Var)
}

fn term() -> impl Strategy<Value = Term> {
    var().prop_map(Term::vr).prop_recursive(6, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::ap(a, b)),
            (var(), inner).prop_map(|(x, b)| Term::lm(x, b)),
        ]
    })
}

fn perm() -> impl Strategy<Value = Perm> {
    prop::collection::vec((var(), var()), 0..5)
        .prop_map(|ts| ts.into_iter().fold(Perm::id(), |p, (a, b)| p.compose(&Perm::transposition(a, b))))
}

/// Locally nameless mirror: bound occurrences as indices, free ones as names.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Ln {
    F(Var),
    B(usize),
    A(Box<Ln>, Box<Ln>),
    L(Box<Ln>),
}

fn ln(t: &Term) -> Ln {
    fn go(t: &Term, ctx: &mut Vec<Var>) -> Ln {
        match t.node() {
            Node::Vr(x) => match ctx.iter().rev().position(|y| y == x) {
                Some(i) => Ln::B(i),
                None => Ln::F(*x),
            },
            Node::Ap(a, b) => Ln::A(Box::new(go(a, ctx)), Box::new(go(b, ctx))),
            Node::Lm(x, b) => {
                ctx.push(*x);
                let r = go(b, ctx);
                ctx.pop();
                Ln::L(Box::new(r))
            }
        }
    }
    go(t, &mut Vec::new())
}

fn ln_subst(t: &Ln, s: &Ln, y: Var) -> Ln {
    match t {
        Ln::F(x) if *x == y => s.clone(),
        Ln::F(_) | Ln::B(_) => t.clone(),
        Ln::A(a, b) => Ln::A(Box::new(ln_subst(a, s, y)), Box::new(ln_subst(b, s, y))),
        Ln::L(b) => Ln::L(Box::new(ln_subst(b, s, y))),
    }
}

fn ln_fv(t: &Ln, out: &mut BTreeSet<Var>) {
    match t {
        Ln::F(x) => {
            out.insert(*x);
        }
        Ln::B(_) => {}
        Ln::A(a, b) => {
            ln_fv(a, out);
            ln_fv(b, out);
        }
        Ln::L(b) => ln_fv(b, out),
    }
}

fn fv(t: &Term) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    ln_fv(&ln(t), &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn swap_is_an_involution(t in term(), a in var(), b in var()) {
        prop_assert!(t.swap(a, b).swap(a, b).same_representative(&t));
    }

    #[test]
    fn swap_is_a_transposition(t in term(), a in var(), b in var()) {
        prop_assert!(t.swap(a, b).same_representative(&t.permute(&Perm::transposition(a, b))));
    }

    #[test]
    fn refreshing_binders_keeps_the_class(t in term(), start in POOL..POOL + 20) {
        let r = t.refresh_binders(start);
        prop_assert!(alpha_eq(&t, &r));
        prop_assert_eq!(ln(&t), ln(&r));
    }

    #[test]
    fn alpha_eq_matches_the_nameless_mirror(t in term(), s in term()) {
        let want = ln(&t) == ln(&s);
        prop_assert_eq!(alpha_eq(&t, &s), want);
        prop_assert_eq!(alpha_eq_by_swap(&t, &s), want);
    }

    #[test]
    fn alpha_variants_agree_under_both_deciders(t in term(), a in var(), b in var()) {
        let r = t.refresh_binders(POOL).swap(a, b).swap(a, b);
        prop_assert!(alpha_eq_by_swap(&t, &r));
    }

    #[test]
    fn subst_matches_the_nameless_mirror(t in term(), s in term(), y in var()) {
        prop_assert_eq!(ln(&t.subst(&s, y)), ln_subst(&ln(&t), &ln(&s), y));
    }

    #[test]
    fn subst_for_a_fresh_variable_is_a_no_op(t in term(), s in term(), y in var()) {
        prop_assume!(t.fresh(y));
        prop_assert!(alpha_eq(&t.subst(&s, y), &t));
    }

    #[test]
    fn free_variables_of_a_substitution(t in term(), s in term(), y in var()) {
        let mut want = fv(&t);
        if want.remove(&y) {
            want.extend(fv(&s));
        }
        prop_assert_eq!(t.subst(&s, y).fv_set(), want);
        prop_assert_eq!(t.fv_set(), fv(&t));
    }

    #[test]
    fn freshness_is_non_membership(t in term(), x in var()) {
        prop_assert_eq!(t.fresh(x), !fv(&t).contains(&x));
    }

    #[test]
    fn perm_compose_applies_right_first(p in perm(), q in perm(), x in var()) {
        prop_assert_eq!(p.compose(&q).apply(x), p.apply(q.apply(x)));
    }

    #[test]
    fn perm_inverse_cancels(p in perm(), x in var()) {
        prop_assert_eq!(p.inverse().apply(p.apply(x)), x);
        prop_assert!(p.compose(&p.inverse()).is_id());
    }

    #[test]
    fn perm_decomposes_into_transpositions(p in perm()) {
        prop_assert_eq!(Perm::from_transpositions(&p.decompose()), p);
    }

    #[test]
    fn permute_respects_composition(t in term(), p in perm(), q in perm()) {
        prop_assert!(t.permute(&p.compose(&q)).same_representative(&t.permute(&q).permute(&p)));
    }

    #[test]
    fn permute_moves_free_variables(t in term(), p in perm()) {
        let want: BTreeSet<Var> = fv(&t).into_iter().map(|x| p.apply(x)).collect();
        prop_assert_eq!(t.permute(&p).fv_set(), want);
    }

    #[test]
    fn permute_preserves_alpha_classes(t in term(), p in perm(), start in POOL..POOL + 20) {
        prop_assert!(alpha_eq(&t.permute(&p), &t.refresh_binders(start).permute(&p)));
    }
}

#[test]
fn capture_is_avoided() {
    let mut names = Names::new();
    let t = parse_with("\\x. y", &mut names).unwrap();
    let s = parse_with("x", &mut names).unwrap();
    let (x, y) = (names.lookup("x").unwrap(), names.lookup("y").unwrap());
    let r = t.subst(&s, y);
    assert_eq!(r.fv_set(), BTreeSet::from([x]));
    assert!(matches!(r.node(), Node::Lm(b, body) if *b != x && body.same_representative(&Term::vr(x))));
}
