//! Folds out of the term model.
//!
//! Two kernels exist: the swap/fresh fold and the renaming/fresh fold. Both
//! recurse on the stored representative. Every other recursor reaches a kernel
//! through the model transforms in [`crate::transforms`].

use std::collections::{BTreeSet, HashMap};

use rand::Rng as _;

use crate::error::NomError;
use crate::gen::{default_pool, random_term, sub_rng, MAX_SIZE};
use crate::models::{sig_of, EnhancedModel, Model, Sym};
use crate::perm::Var;
use crate::report::{PropLine, PropReport};
use crate::term::{DestView, Node, Term};
use crate::transforms;
use crate::varset::VarSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Plain,
    /// Also folds a binder-refreshed α-variant and compares the results.
    Checked,
}

/// The function out of terms determined by a model.
pub struct Recursion<C> {
    pub source: usize,
    /// The kernel model actually folded over.
    pub kernel: Model<C>,
    pub mode: Mode,
}

impl<C> Clone for Recursion<C> {
    fn clone(&self) -> Self {
        Recursion { source: self.source, kernel: self.kernel.clone(), mode: self.mode }
    }
}

fn fold<C: Clone + 'static>(m: &Model<C>, t: &Term, memo: &mut HashMap<Term, C>) -> C {
    if let Some(c) = memo.get(t) {
        return c.clone();
    }
    let c = match t.node() {
        Node::Vr(x) => m.vr(*x),
        Node::Ap(a, b) => {
            let (ga, gb) = (fold(m, a, memo), fold(m, b, memo));
            m.ap(&ga, &gb)
        }
        Node::Lm(x, b) => {
            let gb = fold(m, b, memo);
            m.lm(*x, &gb)
        }
    };
    memo.insert(t.clone(), c.clone());
    c
}

fn refresh_start(t: &Term, extra: &BTreeSet<Var>) -> u32 {
    t.all_names().iter().chain(extra).map(|v| v.0 + 1).max().unwrap_or(0)
}

impl<C: Clone + 'static> Recursion<C> {
    /// Plain fold, ignoring the mode.
    pub fn eval(&self, t: &Term) -> C {
        fold(&self.kernel, t, &mut HashMap::new())
    }

    pub fn apply(&self, t: &Term) -> Result<C, NomError> {
        let c = self.eval(t);
        if self.mode == Mode::Checked {
            let variant = t.refresh_binders(refresh_start(t, &BTreeSet::new()));
            let c2 = self.eval(&variant);
            if !self.kernel.equal(&c, &c2) {
                return Err(NomError::AlphaInstability(t.to_string()));
            }
        }
        Ok(c)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }
}

fn kernel<C: Clone + 'static>(source: usize, kind: usize, m: Model<C>) -> Result<Recursion<C>, NomError> {
    let sig = sig_of(kind)?;
    m.require(sig, &format!("recursor {kind}"))?;
    Ok(Recursion { source, kernel: m.restrict(sig), mode: Mode::Plain })
}

/// The swap/fresh fold.
pub fn rec6<C: Clone + 'static>(m: &Model<C>) -> Result<Recursion<C>, NomError> {
    kernel(6, 6, m.clone())
}

/// The renaming/fresh fold.
pub fn rec9<C: Clone + 'static>(m: &Model<C>) -> Result<Recursion<C>, NomError> {
    kernel(9, 9, m.clone())
}

/// Recursor `i`: transforms `m` to the nearest kernel signature and folds.
pub fn rec<C: Clone + Send + Sync + 'static>(i: usize, m: &Model<C>) -> Result<Recursion<C>, NomError> {
    m.require(sig_of(i)?, &format!("recursor {i}"))?;
    let (k, km) = transforms::to_kernel(i, m)?;
    let mut r = kernel(i, k, km)?;
    r.source = i;
    Ok(r)
}

fn line(name: &str, n: usize, hits: usize, cex: Option<String>) -> PropLine {
    PropLine::new(name, cex.is_none(), n, hits).with_cex(cex)
}

/// Checks that `g` commutes with every operation of `m` on sampled terms.
/// Binders and swapped variables avoid the model's `X`.
pub fn morphism_report_with<C: Clone + 'static>(
    m: &Model<C>,
    g: &dyn Fn(&Term) -> C,
    n: usize,
    seed: u64,
) -> PropReport {
    let sig = m.signature();
    let x_set = m.avoided();
    let vpool = m.pool();
    let mut tpool = default_pool();
    tpool.extend(x_set.iter().copied());
    let mut rng = sub_rng(seed, &format!("morphism:{}", m.name));
    let mut r = PropReport::new(format!("morphism laws for {} (seed={seed}, samples={n})", m.label()));
    let show = |t: &Term| t.to_string();

    let mut clauses: Vec<(&str, usize, Option<String>)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut(&mut crate::gen::Rng) -> Option<Option<String>>| {
        let mut hits = 0;
        let mut cex = None;
        for _ in 0..n {
            if let Some(res) = f(&mut rng) {
                hits += 1;
                if cex.is_none() {
                    cex = res;
                }
            }
        }
        clauses.push((name, hits, cex));
    };
    let pick = |rng: &mut crate::gen::Rng, p: &[Var]| p[rng.gen_range(0..p.len())];
    let bad = |ok: bool, msg: String| if ok { None } else { Some(msg) };

    run("MorVr", &mut |rng| {
        let x = pick(rng, &tpool);
        Some(bad(m.equal(&g(&Term::vr(x)), &m.vr(x)), format!("x={x}")))
    });
    run("MorAp", &mut |rng| {
        let (a, b) = (random_term(rng, &tpool, MAX_SIZE), random_term(rng, &tpool, MAX_SIZE));
        let ok = m.equal(&g(&Term::ap(a.clone(), b.clone())), &m.ap(&g(&a), &g(&b)));
        Some(bad(ok, format!("t1={} t2={}", show(&a), show(&b))))
    });
    run("MorLm", &mut |rng| {
        let t = random_term(rng, &tpool, MAX_SIZE);
        let x = pick(rng, &vpool);
        let ok = m.equal(&g(&Term::lm(x, t.clone())), &m.lm(x, &g(&t)));
        Some(bad(ok, format!("x={x} t={}", show(&t))))
    });
    if sig.contains(Sym::Sw) {
        run("MorSw", &mut |rng| {
            let t = random_term(rng, &tpool, MAX_SIZE);
            let (x, y) = (pick(rng, &vpool), pick(rng, &vpool));
            let ok = m.equal(&g(&t.swap(x, y)), &m.sw(&g(&t), x, y));
            Some(bad(ok, format!("t={} x={x} y={y}", show(&t))))
        });
    }
    if sig.contains(Sym::Pm) {
        run("MorPm", &mut |rng| {
            let t = random_term(rng, &tpool, MAX_SIZE);
            let p = crate::gen::random_perm(rng, &vpool);
            let ok = m.equal(&g(&t.permute(&p)), &m.pm(&g(&t), &p));
            Some(bad(ok, format!("t={} perm={p}", show(&t))))
        });
    }
    if sig.contains(Sym::Sb) {
        run("MorSb", &mut |rng| {
            let t = random_term(rng, &tpool, MAX_SIZE);
            let s = random_term(rng, &tpool, MAX_SIZE / 2);
            let y = pick(rng, &vpool);
            let ok = m.equal(&g(&t.subst(&s, y)), &m.sb(&g(&t), &g(&s), y));
            Some(bad(ok, format!("t={} s={} y={y}", show(&t), show(&s))))
        });
    }
    if sig.contains(Sym::Ren) {
        run("MorRn", &mut |rng| {
            let t = random_term(rng, &tpool, MAX_SIZE);
            let (x, y) = (pick(rng, &vpool), pick(rng, &vpool));
            let ok = m.equal(&g(&t.rename(x, y)), &m.ren(&g(&t), x, y));
            Some(bad(ok, format!("t={} x={x} y={y}", show(&t))))
        });
    }
    if sig.contains(Sym::Fr) {
        run("MorFr", &mut |rng| {
            let t = random_term(rng, &tpool, MAX_SIZE);
            let x = if rng.gen_bool(0.5) {
                let fv = t.fv_set();
                let c: Vec<Var> = vpool.iter().copied().filter(|v| !fv.contains(v)).collect();
                if c.is_empty() {
                    return None;
                }
                pick(rng, &c)
            } else {
                pick(rng, &vpool)
            };
            if !t.fresh(x) {
                return None;
            }
            Some(bad(m.fr(x, &g(&t)), format!("x={x} t={}", show(&t))))
        });
    }
    if sig.contains(Sym::Fv) {
        run("MorFv", &mut |rng| {
            let t = random_term(rng, &tpool, MAX_SIZE);
            let bound = t.fv().union(&VarSet::Finite(x_set.clone()));
            Some(bad(m.fv(&g(&t)).is_subset(&bound), format!("t={}", show(&t))))
        });
    }
    for (name, hits, cex) in clauses {
        r.push(line(name, n, hits, cex));
    }
    r
}

/// The morphism laws of recursor `i`'s signature for `r`.
pub fn morphism_report<C: Clone + 'static>(
    i: usize,
    m: &Model<C>,
    r: &Recursion<C>,
    n: usize,
    seed: u64,
) -> PropReport {
    let mut rep = morphism_report_with(m, &|t| r.eval(t), n, seed);
    rep.title = format!("r{i} {}", rep.title);
    rep
}

/// Pointwise agreement of two functions on sampled terms. Sampling can only
/// refute uniqueness; the line is labelled accordingly.
pub fn uniqueness_check<C: Clone + 'static>(
    i: usize,
    m: &Model<C>,
    g1: &dyn Fn(&Term) -> C,
    g2: &dyn Fn(&Term) -> C,
    n: usize,
    seed: u64,
) -> PropReport {
    let mut rng = sub_rng(seed, "agreement");
    let pool = default_pool();
    let mut cex = None;
    for _ in 0..n {
        let t = random_term(&mut rng, &pool, MAX_SIZE);
        if !m.equal(&g1(&t), &g2(&t)) {
            cex = Some(format!("t={t}"));
            break;
        }
    }
    let mut r = PropReport::new(format!("r{i} sampled agreement on {} (seed={seed})", m.label()));
    r.push(line("Agree", n, n, cex).with_note("sampled-agreement"));
    r
}

/// A fold over an enhanced model; binders are refreshed away from `X`.
pub struct EnhancedRecursion<C> {
    pub source: usize,
    pub model: EnhancedModel<C>,
    pub mode: Mode,
}

impl<C: Clone + Send + Sync + 'static> EnhancedRecursion<C> {
    fn fold(&self, t: &Term, memo: &mut HashMap<Term, C>) -> C {
        if let Some(c) = memo.get(t) {
            return c.clone();
        }
        let m = &self.model;
        let c = match t.dest() {
            DestView::V(x) => (m.vr.as_ref().expect("vr"))(x),
            DestView::A(a, b) => {
                let (ga, gb) = (self.fold(&a, memo), self.fold(&b, memo));
                (m.ap.as_ref().expect("ap"))(&(a, ga), &(b, gb))
            }
            DestView::L(h) => {
                let (x, body) = h.extract(&m.x);
                let gb = self.fold(&body, memo);
                (m.lm.as_ref().expect("lm"))(x, &(body, gb))
            }
        };
        memo.insert(t.clone(), c.clone());
        c
    }

    pub fn eval(&self, t: &Term) -> C {
        self.fold(t, &mut HashMap::new())
    }

    pub fn apply(&self, t: &Term) -> Result<C, NomError> {
        let c = self.eval(t);
        if self.mode == Mode::Checked {
            let variant = t.refresh_binders(refresh_start(t, &self.model.x));
            if !(self.model.eq)(&c, &self.eval(&variant)) {
                return Err(NomError::AlphaInstability(t.to_string()));
            }
        }
        Ok(c)
    }
}

/// Full-fledged recursion for recursor `i` over an enhanced model.
pub fn rec_enhanced<C: Clone + Send + Sync + 'static>(
    i: usize,
    m: &EnhancedModel<C>,
) -> Result<EnhancedRecursion<C>, NomError> {
    let pm = m.as_pair_model();
    pm.require(sig_of(i)?, &format!("enhanced recursor {i}"))?;
    Ok(EnhancedRecursion { source: i, model: m.clone(), mode: Mode::Plain })
}

/// The morphism laws for an enhanced fold, read on term/value pairs.
pub fn morphism_report_enhanced<C: Clone + Send + Sync + 'static>(
    m: &EnhancedModel<C>,
    r: &EnhancedRecursion<C>,
    n: usize,
    seed: u64,
) -> PropReport {
    let pm = m.as_pair_model();
    morphism_report_with(&pm, &|t| (t.clone(), r.eval(t)), n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::term_model;
    use crate::term::{alpha_eq, parse};

    #[test]
    fn term_model_fold_is_identity() {
        for i in 1..=9 {
            let m = term_model(i).unwrap();
            let r = rec(i, &m).unwrap();
            for src in ["\\x. x y", "(\\x. x) z", "\\x y. y (x z)"] {
                let t = parse(src).unwrap();
                assert!(alpha_eq(&r.eval(&t), &t), "r{i} on {src}");
            }
        }
    }

    #[test]
    fn checked_mode_detects_broken_lm() {
        let m = term_model(6).unwrap().with_lm(|_, t: &Term| t.clone());
        let r = rec6(&m).unwrap().with_mode(Mode::Checked);
        let t = parse("\\x. x").unwrap();
        assert!(matches!(r.apply(&t), Err(NomError::AlphaInstability(_))));
    }

    #[test]
    fn wrong_signature_is_rejected() {
        let m = term_model(8).unwrap();
        assert!(rec6(&m).is_err());
    }

    #[test]
    fn term_morphism_report_passes() {
        let m = term_model(7).unwrap();
        let r = rec(7, &m).unwrap();
        let rep = morphism_report(7, &m, &r, 100, 1);
        assert!(rep.ok(), "{rep}");
        assert!(rep.line("MorSb").is_some());
    }
}
