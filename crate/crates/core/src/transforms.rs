//! Model transformations between recursor signatures, minimal submodels
//! carrying witness terms, and the factorization checks built on them.

use std::collections::BTreeSet;

use rand::Rng as _;

use crate::error::NomError;
use crate::gen::{default_pool, random_term, sub_rng, Rng, MAX_SIZE};
use crate::models::{sig_of, Model, Sym};
use crate::perm::{least_unused, Perm, Var};
use crate::recursors::rec;
use crate::report::{PropLine, PropReport};
use crate::term::Term;

/// Adds `sw` as permutation by a transposition.
pub fn swap_from_perm<C: Clone + Send + Sync + 'static>(m: &Model<C>) -> Model<C> {
    let pm = m.pm.clone().expect("swap_from_perm needs pm");
    m.clone().with_sw(move |c, x, y| pm(c, &Perm::transposition(x, y)))
}

/// Adds `pm` by folding `sw` over a transposition decomposition.
pub fn perm_from_swap<C: Clone + Send + Sync + 'static>(m: &Model<C>) -> Model<C> {
    perm_from_swap_with(m, |p: &Perm| p.decompose())
}

/// As [`perm_from_swap`], with a caller-chosen decomposition. The list must
/// compose left to right to the permutation, so it is applied right to left.
pub fn perm_from_swap_with<C: Clone + Send + Sync + 'static>(
    m: &Model<C>,
    decompose: impl Fn(&Perm) -> Vec<(Var, Var)> + Send + Sync + 'static,
) -> Model<C> {
    let sw = m.sw.clone().expect("perm_from_swap needs sw");
    m.clone().with_pm(move |c, p| decompose(p).iter().rev().fold(c.clone(), |acc, (a, b)| sw(&acc, *a, *b)))
}

/// Adds `fr` as non-membership in `fv`.
pub fn fresh_from_fv<C: Clone + Send + Sync + 'static>(m: &Model<C>) -> Model<C> {
    let fv = m.fv.clone().expect("fresh_from_fv needs fv");
    m.clone().with_fr(move |x, c| !fv(c).contains(x))
}

/// Adds `ren` as substitution of a variable.
pub fn rename_from_subst<C: Clone + Send + Sync + 'static>(m: &Model<C>) -> Model<C> {
    let sb = m.sb.clone().expect("rename_from_subst needs sb");
    let vr = m.vr.clone().expect("rename_from_subst needs vr");
    m.clone().with_ren(move |c, y, x| sb(c, &vr(y), x))
}

/// Adds `fr`: `x` is fresh for `c` when renaming `x` to each of `probes`
/// variables outside `supp(c) ∪ {x}` leaves `c` unchanged.
pub fn fresh_from_rename<C: Clone + Send + Sync + 'static>(m: &Model<C>, probes: usize) -> Result<Model<C>, NomError> {
    let supp = m.supp.clone().ok_or_else(|| NomError::MissingSupport(m.name.clone()))?;
    let ren = m.ren.clone().ok_or_else(|| NomError::MissingOp {
        model: m.name.clone(),
        op: "ren",
        needed_by: "fresh_from_rename".into(),
    })?;
    let eq = m.eq.clone();
    Ok(m.clone().with_fr(move |x, c| {
        let mut avoid = supp(c);
        avoid.insert(x);
        crate::models::probes_outside(&avoid, probes.max(1)).into_iter().all(|y| eq(&ren(c, y, x), c))
    }))
}

fn restricted<C: Clone + 'static>(m: Model<C>, i: usize) -> Result<Model<C>, NomError> {
    let sig = sig_of(i)?;
    m.require(sig, &format!("target r{i}"))?;
    Ok(m.restrict(sig))
}

/// The transform along an expressiveness edge: a model for recursor `j`
/// becomes a model for recursor `i`.
pub fn edge<C: Clone + Send + Sync + 'static>(j: usize, i: usize, m: &Model<C>) -> Result<Model<C>, NomError> {
    m.require(sig_of(j)?, &format!("source r{j}"))?;
    let out = match (j, i) {
        (1, 2) | (5, 6) => m.clone(),
        (2, 4) | (1, 3) => swap_from_perm(m),
        (4, 5) => fresh_from_fv(m),
        (3, 1) => perm_from_swap(m),
        (7, 9) => rename_from_subst(m),
        (8, 9) => fresh_from_rename(m, 3)?,
        _ => return Err(NomError::Unsupported(format!("no transform from r{j} to r{i}"))),
    };
    restricted(out, i).map(|o| o.named(format!("{}>r{i}", m.name)))
}

/// The edges implemented by [`edge`].
pub const EDGES: [(usize, usize); 8] = [(1, 2), (2, 4), (4, 5), (5, 6), (3, 1), (1, 3), (7, 9), (8, 9)];

/// Walks edges from recursor `i` to a kernel (6 or 9).
pub fn to_kernel<C: Clone + Send + Sync + 'static>(i: usize, m: &Model<C>) -> Result<(usize, Model<C>), NomError> {
    let path: &[usize] = match i {
        6 | 9 => &[],
        5 => &[6],
        4 => &[5, 6],
        2 => &[4, 5, 6],
        1 => &[2, 4, 5, 6],
        3 => &[1, 2, 4, 5, 6],
        7 | 8 => &[9],
        _ => return Err(NomError::BadRecursor(i)),
    };
    let mut cur = restricted(m.clone(), i)?;
    let mut at = i;
    for &next in path {
        cur = edge(at, next, &cur)?;
        at = next;
    }
    Ok((at, cur))
}

/// The submodel generated by the constructors, over `(witness, value)`
/// pairs. Freshness, free variables and support come from the witness;
/// equality compares values only.
pub fn min_submodel<C: Clone + Send + Sync + 'static>(i: usize, m: &Model<C>) -> Result<Model<(Term, C)>, NomError> {
    let r = rec(i, m)?;
    let eq = m.eq.clone();
    let show = m.show.clone();
    let r2 = r.clone();
    let pool = default_pool();
    let mut s: Model<(Term, C)> = Model::new(
        format!("sub{i}({})", m.name),
        move |a: &(Term, C), b: &(Term, C)| eq(&a.1, &b.1),
        move |rng: &mut Rng| {
            let t = random_term(rng, &pool, MAX_SIZE);
            let c = r2.eval(&t);
            (t, c)
        },
        move |p: &(Term, C)| format!("({} , {})", p.0, show(&p.1)),
    );
    let (vr, ap, lm) = (m.vr.clone().unwrap(), m.ap.clone().unwrap(), m.lm.clone().unwrap());
    s = s
        .with_vr(move |x| (Term::vr(x), vr(x)))
        .with_ap(move |a, b| (Term::ap(a.0.clone(), b.0.clone()), ap(&a.1, &b.1)))
        .with_lm(move |x, a| (Term::lm(x, a.0.clone()), lm(x, &a.1)))
        .with_fr(|x, a| a.0.fresh(x))
        .with_fv(|a| a.0.fv())
        .with_supp(|a| a.0.fv_set());
    if let Some(f) = m.pm.clone() {
        s = s.with_pm(move |a, p| (a.0.permute(p), f(&a.1, p)));
    }
    if let Some(f) = m.sw.clone() {
        s = s.with_sw(move |a, x, y| (a.0.swap(x, y), f(&a.1, x, y)));
    }
    if let Some(f) = m.sb.clone() {
        s = s.with_sb(move |a, b, x| (a.0.subst(&b.0, x), f(&a.1, &b.1, x)));
    }
    if let Some(f) = m.ren.clone() {
        s = s.with_ren(move |a, y, x| (a.0.rename(y, x), f(&a.1, y, x)));
    }
    Ok(s)
}

/// The `k`-th least variable outside `{z1, z2} ∪ FV t`.
fn pick_fresh(t: &Term, z1: Var, z2: Var, k: usize) -> Var {
    let mut avoid: BTreeSet<Var> = t.fv_set();
    avoid.insert(z1);
    avoid.insert(z2);
    let mut v = least_unused(&avoid);
    for _ in 0..k {
        avoid.insert(v);
        v = least_unused(&avoid);
    }
    v
}

/// Swapping on a renaming submodel as `d[y/z1][z1/z2][z2/y]` with `y` fresh
/// for the witness.
pub fn swap_from_rename_in_submodel<C: Clone + Send + Sync + 'static>(s: &Model<(Term, C)>) -> Model<(Term, C)> {
    swap_from_rename_choice(s, 0)
}

/// As [`swap_from_rename_in_submodel`] using the `k`-th fresh candidate.
pub fn swap_from_rename_choice<C: Clone + Send + Sync + 'static>(s: &Model<(Term, C)>, k: usize) -> Model<(Term, C)> {
    let ren = s.ren.clone().expect("submodel needs ren");
    s.clone().with_sw(move |d, z1, z2| {
        let y = pick_fresh(&d.0, z1, z2, k);
        let d1 = ren(d, y, z1);
        let d2 = ren(&d1, z1, z2);
        ren(&d2, z2, y)
    })
}

/// Builds the model the strong recursor runs on, from a weak-recursor model.
fn strong_model<C: Clone + Send + Sync + 'static>(
    i_strong: usize,
    i_weak: usize,
    m: &Model<C>,
) -> Result<Model<(Term, C)>, NomError> {
    let sub = min_submodel(i_weak, m)?;
    let out = match (i_strong, i_weak) {
        (3, 6) => sub,
        (8, 9) => sub,
        (6, 8) => swap_from_rename_in_submodel(&sub),
        _ => return Err(NomError::Unsupported(format!("no quasi-strength construction for ({i_strong},{i_weak})"))),
    };
    restricted(out, i_strong)
}

/// Checks that the weak recursor factors through the strong recursor run on
/// the constructed submodel: both agree on the value component.
pub fn quasi_definability_check<C: Clone + Send + Sync + 'static>(
    i_strong: usize,
    i_weak: usize,
    m: &Model<C>,
    n: usize,
    seed: u64,
) -> Result<PropReport, NomError> {
    let weak = rec(i_weak, m)?;
    let sm = strong_model(i_strong, i_weak, m)?;
    let strong = rec(i_strong, &sm)?;
    let mut rng = sub_rng(seed, "quasi");
    let pool = default_pool();
    let mut cex = None;
    for _ in 0..n {
        let t = random_term(&mut rng, &pool, MAX_SIZE);
        let (w, (_, s)) = (weak.eval(&t), strong.eval(&t));
        if !m.equal(&w, &s) {
            cex = Some(format!("t={t}"));
            break;
        }
    }
    let mut r = PropReport::new(format!("factorization r{i_strong} over r{i_weak} on {}", m.name));
    r.push(PropLine::new(format!("Factor{i_strong}_{i_weak}"), cex.is_none(), n, n).with_cex(cex));
    Ok(r)
}

/// The triple-rename swap does not depend on which fresh variable is used.
pub fn triple_rename_choice_check<C: Clone + Send + Sync + 'static>(
    m: &Model<C>,
    n: usize,
    seed: u64,
) -> Result<PropLine, NomError> {
    let sub = min_submodel(8, m)?;
    let a = swap_from_rename_choice(&sub, 0);
    let b = swap_from_rename_choice(&sub, 1);
    let mut rng = sub_rng(seed, "choice");
    let pool = default_pool();
    let mut cex = None;
    for _ in 0..n {
        let d = sub.draw(&mut rng);
        let (z1, z2) = (pool[rng.gen_range(0..pool.len())], pool[rng.gen_range(0..pool.len())]);
        if !sub.equal(&a.sw(&d, z1, z2), &b.sw(&d, z1, z2)) {
            cex = Some(format!("t={} z1={z1} z2={z2}", d.0));
            break;
        }
    }
    Ok(PropLine::new("SwapChoice", cex.is_none(), n, n).with_cex(cex))
}

/// Spot-checks that applying submodel operations keeps the value equal to
/// the recursion image of the witness.
pub fn lockstep_check<C: Clone + Send + Sync + 'static>(
    i: usize,
    m: &Model<C>,
    n: usize,
    seed: u64,
) -> Result<PropLine, NomError> {
    let r = rec(i, m)?;
    let sub = min_submodel(i, m)?;
    let sig = sub.signature();
    let mut rng = sub_rng(seed, "lockstep");
    let pool = default_pool();
    let mut cex = None;
    for _ in 0..n {
        let (a, b) = (sub.draw(&mut rng), sub.draw(&mut rng));
        let x = pool[rng.gen_range(0..pool.len())];
        let y = pool[rng.gen_range(0..pool.len())];
        let mut outs = vec![sub.ap(&a, &b), sub.lm(x, &a), sub.vr(x)];
        if sig.contains(Sym::Sw) {
            outs.push(sub.sw(&a, x, y));
        }
        if sig.contains(Sym::Ren) {
            outs.push(sub.ren(&a, x, y));
        }
        if sig.contains(Sym::Pm) {
            outs.push(sub.pm(&a, &Perm::transposition(x, y)));
        }
        if sig.contains(Sym::Sb) {
            outs.push(sub.sb(&a, &b, y));
        }
        if let Some(bad) = outs.iter().find(|(t, c)| !m.equal(c, &r.eval(t))) {
            cex = Some(format!("witness={}", bad.0));
            break;
        }
    }
    Ok(PropLine::new(format!("Lockstep{i}"), cex.is_none(), n, n).with_cex(cex))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{check_props, props_of, term_model, CheckCfg};
    use crate::term::alpha_eq;

    #[test]
    fn edges_preserve_term_model_laws() {
        let cfg = CheckCfg::with_seed(9, 80);
        for (j, i) in EDGES {
            let m = edge(j, i, &term_model(j).unwrap()).unwrap();
            let r = check_props(&m, &props_of(i).unwrap(), &cfg).unwrap();
            assert!(r.ok(), "edge {j}->{i}: {r}");
        }
    }

    #[test]
    fn perm_from_swap_matches_permute() {
        let m = perm_from_swap(&term_model(3).unwrap());
        let mut rng = crate::gen::rng(4);
        let pool = default_pool();
        for _ in 0..50 {
            let t = random_term(&mut rng, &pool, MAX_SIZE);
            let p = crate::gen::random_perm(&mut rng, &pool);
            assert!(alpha_eq(&m.pm(&t, &p), &t.permute(&p)));
        }
    }

    #[test]
    fn fresh_from_rename_needs_support() {
        let mut m = term_model(8).unwrap();
        m.supp = None;
        assert!(matches!(fresh_from_rename(&m, 3), Err(NomError::MissingSupport(_))));
    }

    #[test]
    fn quasi_pairs_on_term_models() {
        for (s, w) in [(3, 6), (8, 9), (6, 8)] {
            let r = quasi_definability_check(s, w, &term_model(w).unwrap(), 60, 2).unwrap();
            assert!(r.ok(), "{r}");
        }
    }
}
