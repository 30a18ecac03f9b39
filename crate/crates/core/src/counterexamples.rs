//! Two separation models and the proof obstructions that make them
//! unreachable from the weaker recursors.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng as _;

use crate::gen::{default_pool, pick_var, random_perm, random_term, sub_rng, Rng, MAX_SIZE};
use crate::models::Model;
use crate::perm::{Perm, Var};
use crate::report::{PropLine, PropReport};
use crate::term::{alpha_eq, Node, Term};
use crate::varset::{Prog, VarSet};

/// A stream of variables: a finite prefix followed by the affine tail
/// `k ↦ var(a·(n0 + k) + b)`, kept normalized.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarStream {
    prefix: Vec<Var>,
    a: u32,
    b: u32,
    n0: u32,
}

impl VarStream {
    pub fn new(prefix: Vec<Var>, a: u32, b: u32, n0: u32) -> VarStream {
        assert!(a >= 1, "tail step must be positive");
        VarStream { prefix, a, b, n0 }.normalized()
    }

    /// The stream `var(a·i + b)` for `i ≥ 0`.
    pub fn affine(a: u32, b: u32) -> VarStream {
        VarStream::new(vec![], a, b, 0)
    }

    pub fn prefix(&self) -> &[Var] {
        &self.prefix
    }

    /// `(a, b, n0)` of the tail.
    pub fn tail(&self) -> (u32, u32, u32) {
        (self.a, self.b, self.n0)
    }

    fn tail_at(&self, k: u32) -> Var {
        Var(self.a * (self.n0 + k) + self.b)
    }

    pub fn get(&self, i: usize) -> Var {
        match self.prefix.get(i) {
            Some(v) => *v,
            None => self.tail_at((i - self.prefix.len()) as u32),
        }
    }

    /// Overrides position `i`.
    pub fn patch(&self, i: usize, v: Var) -> VarStream {
        let mut s = self.clone();
        while s.prefix.len() <= i {
            s.prefix.push(s.tail_at(0));
            s.n0 += 1;
        }
        s.prefix[i] = v;
        s.normalized()
    }

    pub fn normalized(mut self) -> VarStream {
        while self.b >= self.a {
            self.b -= self.a;
            self.n0 += 1;
        }
        while self.n0 > 0 && self.prefix.last() == Some(&Var(self.a * (self.n0 - 1) + self.b)) {
            self.prefix.pop();
            self.n0 -= 1;
        }
        self
    }

    /// Moves tail elements into the prefix until the tail is above `bound`.
    fn unfold_past(&mut self, bound: u32) {
        while self.tail_at(0).0 <= bound {
            self.prefix.push(self.tail_at(0));
            self.n0 += 1;
        }
    }

    pub fn map(&self, sigma: &Perm) -> VarStream {
        let mut s = self.clone();
        if let Some(top) = sigma.support().iter().next_back() {
            s.unfold_past(top.0);
        }
        s.prefix = s.prefix.iter().map(|v| sigma.apply(*v)).collect();
        s.normalized()
    }

    /// Deletes every occurrence of `y`.
    pub fn rem(&self, y: Var) -> VarStream {
        let mut s = self.clone();
        s.unfold_past(y.0);
        s.prefix.retain(|v| *v != y);
        s.normalized()
    }

    pub fn vars(&self) -> VarSet {
        VarSet::progression(Prog::new(self.a, self.b, self.n0))
            .union(&VarSet::Finite(self.prefix.iter().copied().collect()))
    }

    /// First position holding `v`, if any.
    pub fn position(&self, v: Var) -> Option<usize> {
        if let Some(i) = self.prefix.iter().position(|w| *w == v) {
            return Some(i);
        }
        let p = Prog::new(self.a, self.b, self.n0);
        p.contains(v).then(|| self.prefix.len() + ((v.0 - p.nth(0).0) / self.a) as usize)
    }

    pub fn random(rng: &mut Rng) -> VarStream {
        let pool = default_pool();
        let prefix = (0..rng.gen_range(0..4)).map(|_| pick_var(rng, &pool)).collect();
        let a: u32 = rng.gen_range(2..=3);
        let b = rng.gen_range(0..a);
        let n0 = (8u32 - b).div_ceil(a) + rng.gen_range(0..2);
        VarStream::new(prefix, a, b, n0)
    }
}

impl fmt::Display for VarStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown: Vec<String> = (0..self.prefix.len() + 3).map(|i| self.get(i).to_string()).collect();
        write!(f, "[{}, ...]", shown.join(", "))
    }
}

/// Terms plus variable streams.
#[derive(Clone, Debug)]
pub enum StreamElem {
    T(Term),
    S(VarStream),
}

impl fmt::Display for StreamElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamElem::T(t) => write!(f, "{t}"),
            StreamElem::S(s) => write!(f, "{s}"),
        }
    }
}

const X: Var = Var(0);

/// `(Lm x)^(i+1) (Vr x)`: closed and pairwise distinct.
pub fn t_index(i: usize) -> Term {
    (0..=i).fold(Term::vr(X), |t, _| Term::lm(X, t))
}

/// `Some(i)` when `t` is α-equivalent to `t_index(i)`.
pub fn index_of(t: &Term) -> Option<usize> {
    let mut cur = t;
    let mut k = 0;
    let mut last = None;
    while let Node::Lm(x, b) = cur.node() {
        last = Some(*x);
        k += 1;
        cur = b;
    }
    match cur.node() {
        Node::Vr(v) if Some(*v) == last => Some(k - 1),
        _ => None,
    }
}

fn stream_eq(a: &StreamElem, b: &StreamElem) -> bool {
    match (a, b) {
        (StreamElem::T(s), StreamElem::T(t)) => alpha_eq(s, t),
        (StreamElem::S(s), StreamElem::S(t)) => s == t,
        _ => false,
    }
}

fn stream_ap(a: &StreamElem, b: &StreamElem) -> StreamElem {
    use StreamElem::*;
    match (a, b) {
        (T(s), T(t)) => T(Term::ap(s.clone(), t.clone())),
        (S(xs), T(t)) => match index_of(t) {
            Some(i) => T(Term::vr(xs.get(i))),
            None => T(t_index(0)),
        },
        _ => T(t_index(0)),
    }
}

/// Perm/free model on terms and variable streams in which application
/// projects stream positions.
pub fn stream_model() -> Model<StreamElem> {
    use StreamElem::*;
    let pool = default_pool();
    Model::new(
        "streams",
        stream_eq,
        move |rng: &mut Rng| match rng.gen_range(0..10) {
            0..=3 => S(VarStream::random(rng)),
            4..=6 => T(t_index(rng.gen_range(0..4))),
            _ => T(random_term(rng, &pool, MAX_SIZE)),
        },
        |e: &StreamElem| e.to_string(),
    )
    .with_vr(|x| T(Term::vr(x)))
    .with_ap(stream_ap)
    .with_lm(|y, e| match e {
        T(t) => T(Term::lm(y, t.clone())),
        S(xs) => S(xs.rem(y)),
    })
    .with_pm(|e, p| match e {
        T(t) => T(t.permute(p)),
        S(xs) => S(xs.map(p)),
    })
    .with_fv(|e| match e {
        T(t) => t.fv(),
        S(xs) => xs.vars(),
    })
}

/// Terms plus one extra element that behaves as `Vr x` under every operation
/// except free variables, where it has all of them.
#[derive(Clone, Debug)]
pub enum AdjElem {
    T(Term),
    A,
}

impl AdjElem {
    fn term(&self) -> Term {
        match self {
            AdjElem::T(t) => t.clone(),
            AdjElem::A => Term::vr(X),
        }
    }
}

impl fmt::Display for AdjElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdjElem::T(t) => write!(f, "{t}"),
            AdjElem::A => write!(f, "a"),
        }
    }
}

/// Swap/free model on terms plus the element `a`.
pub fn adjoin_model() -> Model<AdjElem> {
    use AdjElem::*;
    let pool = default_pool();
    Model::new(
        "adjoin",
        |a: &AdjElem, b: &AdjElem| match (a, b) {
            (T(s), T(t)) => alpha_eq(s, t),
            (A, A) => true,
            _ => false,
        },
        move |rng: &mut Rng| if rng.gen_bool(0.3) { A } else { T(random_term(rng, &pool, MAX_SIZE)) },
        |e: &AdjElem| e.to_string(),
    )
    .with_vr(|x| T(Term::vr(x)))
    .with_ap(|a, b| T(Term::ap(a.term(), b.term())))
    .with_lm(|y, e| T(Term::lm(y, e.term())))
    .with_sw(|e, z1, z2| T(e.term().swap(z1, z2)))
    .with_fv(|e| match e {
        T(t) => t.fv(),
        A => VarSet::all(),
    })
}

/// Proof steps showing that the stream model admits no perm/free structure
/// satisfying the finite-support and freshness-for-binders laws.
pub fn obstruction_r1(n: usize, seed: u64) -> PropReport {
    obstruction_r1_with(n, seed, 8)
}

pub fn obstruction_r1_with(n: usize, seed: u64, candidates: usize) -> PropReport {
    let m = stream_model();
    let pool = default_pool();
    let mut rep = PropReport::new(format!("obstruction r1 over {} (seed={seed}, samples={n})", m.name));

    // (a) PmAp at `Ap xs t_i` fixes position i of any permuted stream.
    let mut rng = sub_rng(seed, "step-a");
    let mut cex = None;
    for _ in 0..n {
        let xs = VarStream::random(&mut rng);
        let sigma = random_perm(&mut rng, &pool);
        let i = rng.gen_range(0..8);
        let forced = Term::vr(xs.get(i)).permute(&sigma);
        let mapped = xs.map(&sigma);
        let via_model = stream_ap(&StreamElem::S(mapped.clone()), &StreamElem::T(t_index(i)));
        let ok = mapped.get(i) == sigma.apply(xs.get(i)) && stream_eq(&via_model, &StreamElem::T(forced));
        if !ok && cex.is_none() {
            cex = Some(format!("xs={xs} sigma={sigma} i={i}"));
        }
    }
    rep.push(
        PropLine::new("a:PmAp-forces-map", cex.is_none(), n, n)
            .with_cex(cex)
            .with_note("any permutation action on streams is pointwise"),
    );

    // (b) Every variable is forced into FV' of every stream: by FvAp for
    // members, by FvDPm for non-members (each tail member z gives a
    // different `map_{z<->y} xs`, and the tail is infinite).
    let mut rng = sub_rng(seed, "step-b");
    let (mut member, mut nonmember) = (0, 0);
    let mut cex = None;
    for _ in 0..n {
        let xs = VarStream::random(&mut rng);
        let y = Var(rng.gen_range(0..24));
        let ok = match xs.position(y) {
            Some(i) => {
                member += 1;
                let got = stream_ap(&StreamElem::S(xs.clone()), &StreamElem::T(t_index(i)));
                stream_eq(&got, &StreamElem::T(Term::vr(y)))
            }
            None => {
                nonmember += 1;
                let len = xs.prefix().len();
                (len..len + 10).all(|i| {
                    let z = xs.get(i);
                    xs.map(&Perm::transposition(z, y)) != xs
                })
            }
        };
        if !ok && cex.is_none() {
            cex = Some(format!("xs={xs} y={y}"));
        }
    }
    rep.push(
        PropLine::new("b:FvAp+FvDPm-force-all-vars", cex.is_none(), n, n)
            .with_cex(cex)
            .with_note(format!("members={member},nonmembers={nonmember},witnesses=first-10-tail,in-family")),
    );

    // (c) FCB needs some x with x outside FV'(Lm x xs) for all xs; FV' is
    // everything, so every candidate fails.
    let mut rng = sub_rng(seed, "step-c");
    let xs = VarStream::random(&mut rng);
    let cands: Vec<Var> = (0..candidates).map(|_| Var(rng.gen_range(0..32))).collect();
    let refuted = cands
        .iter()
        .filter(|x| {
            let body = xs.rem(**x);
            // FV' of any stream is all of Var by (b); the removed variable is in it.
            let forced_fv = VarSet::all();
            forced_fv.contains(**x) && !body.vars().contains(**x)
        })
        .count();
    let shown: Vec<String> = cands.iter().map(|v| v.to_string()).collect();
    rep.push(
        PropLine::new("c:FCB", refuted < cands.len(), cands.len(), refuted)
            .with_cex(Some(format!("xs={xs} candidates={}", shown.join(","))))
            .with_note(format!("refuted={refuted}/{}", cands.len()))
            .expect_fail(),
    );
    if rep.ok() {
        rep.trailer.push("SEPARATION WITNESSED".into());
    }
    rep
}

/// Proof steps showing that the adjoin model admits no perm/free structure.
pub fn obstruction_r2(n: usize, seed: u64) -> PropReport {
    let pool = default_pool();
    let mut rep = PropReport::new(format!("obstruction r2 over adjoin (seed={seed}, samples={n})"));

    // (1) On terms, PmVr/PmAp/PmLm determine the action by structural recursion.
    fn forced(t: &Term, p: &Perm) -> Term {
        match t.node() {
            Node::Vr(x) => Term::vr(p.apply(*x)),
            Node::Ap(a, b) => Term::ap(forced(a, p), forced(b, p)),
            Node::Lm(x, b) => Term::lm(p.apply(*x), forced(b, p)),
        }
    }
    let mut rng = sub_rng(seed, "step-1");
    let mut cex = None;
    for _ in 0..n {
        let t = random_term(&mut rng, &pool, MAX_SIZE);
        let p = random_perm(&mut rng, &pool);
        if !alpha_eq(&forced(&t, &p), &t.permute(&p)) && cex.is_none() {
            cex = Some(format!("t={t} sigma={p}"));
        }
    }
    rep.push(PropLine::new("1:PmVr+PmAp+PmLm-force-terms", cex.is_none(), n, n).with_cex(cex));

    // (2) PmId+PmCp make every action bijective; its restriction to terms is
    // already onto terms, so `a` can only go to `a`: any term image c has the
    // term preimage c[σ⁻¹] besides `a`.
    let mut rng = sub_rng(seed, "step-2");
    let mut cex = None;
    for _ in 0..n {
        let c = random_term(&mut rng, &pool, MAX_SIZE);
        let p = random_perm(&mut rng, &pool);
        let pre = c.permute(&p.inverse());
        if !alpha_eq(&pre.permute(&p), &c) && cex.is_none() {
            cex = Some(format!("c={c} sigma={p}"));
        }
    }
    rep.push(
        PropLine::new("2:PmId+PmCp-fix-a", cex.is_none(), n, n)
            .with_cex(cex)
            .with_note("every term candidate for a[sigma] has a second preimage"),
    );

    // (3) PmAp with a[σ] = a forces (Ap a a)[σ] = Ap a a, i.e. the swap of
    // `Ap (Vr x) (Vr x)` would be fixed.
    let sigma = Perm::transposition(X, Var(1));
    let aa = Term::ap(Term::vr(X), Term::vr(X));
    let moved = aa.permute(&sigma);
    let holds = alpha_eq(&moved, &aa);
    rep.push(
        PropLine::new("3:PmAp", holds, 1, 1)
            .with_cex(Some(format!("sigma={sigma} (Ap a a)[sigma]={moved} expected={aa}")))
            .expect_fail(),
    );
    if rep.ok() {
        rep.trailer.push("SEPARATION WITNESSED".into());
    }
    rep
}

/// Variables of the stream below `limit`, for display and tests.
pub fn stream_vars_below(xs: &VarStream, limit: u32) -> BTreeSet<Var> {
    xs.vars().members_below(limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{check_props, props_of, CheckCfg};

    #[test]
    fn normalization_absorbs_prefix() {
        let s = VarStream::new(vec![Var(0), Var(2)], 2, 0, 2);
        assert_eq!(s, VarStream::affine(2, 0));
        assert_eq!(s.clone().normalized(), s);
    }

    #[test]
    fn map_and_rem_clauses() {
        let xs = VarStream::affine(1, 0);
        let m = xs.map(&Perm::transposition(Var(0), Var(1)));
        let first: Vec<u32> = (0..5).map(|i| m.get(i).0).collect();
        assert_eq!(first, vec![1, 0, 2, 3, 4]);
        let r = VarStream::affine(3, 1).rem(Var(1));
        let first: Vec<u32> = (0..5).map(|i| r.get(i).0).collect();
        assert_eq!(first, vec![4, 7, 10, 13, 16]);
        assert_eq!(VarStream::affine(3, 1).rem(Var(2)), VarStream::affine(3, 1));
    }

    #[test]
    fn projection_clause() {
        let xs = VarStream::affine(2, 1);
        let got = stream_ap(&StreamElem::S(xs), &StreamElem::T(t_index(2)));
        assert!(stream_eq(&got, &StreamElem::T(Term::vr(Var(5)))));
        let got = stream_ap(&StreamElem::T(Term::vr(Var(3))), &StreamElem::S(VarStream::affine(1, 0)));
        assert!(stream_eq(&got, &StreamElem::T(t_index(0))));
    }

    #[test]
    fn separation_models_pass_their_suites() {
        let cfg = CheckCfg::with_seed(3, 150);
        let r = check_props(&stream_model(), &props_of(2).unwrap(), &cfg).unwrap();
        assert!(r.ok(), "{r}");
        let r = check_props(&adjoin_model(), &props_of(4).unwrap(), &cfg).unwrap();
        assert!(r.ok(), "{r}");
    }

    #[test]
    fn obstructions_witness_separation() {
        let r = obstruction_r1(100, 0);
        assert!(r.ok(), "{r}");
        assert!(r.to_string().contains("SEPARATION WITNESSED"));
        let r = obstruction_r2(100, 0);
        assert!(r.ok(), "{r}");
    }
}
