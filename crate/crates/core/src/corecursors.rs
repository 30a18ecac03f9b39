//! Comodels over arbitrary state types, their destructor-based law suites,
//! and corecursion into infinitary terms.
//!
//! A [`CoModel`] pairs a [`Model`] (the operations of its co-signature) with
//! a destructor. An abstraction step stores one binder/body pair; the full
//! pair set is given by an optional membership predicate, or else by
//! re-binding the stored pair through the operation the suite is about
//! (permutation, swapping, renaming or substitution).
//!
//! Only corecursor 2 is implemented directly, as an unfold over the
//! destructor. Every other corecursor transforms its comodel into a cr2
//! comodel first.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::NomError;
use crate::gen::{random_perm, sub_rng, Rng, POOL_SIZE};
use crate::infinitary::{
    co_alpha_eq, co_ap, co_dest, co_fresh_auto, co_fv, co_fv_upto, co_lm, co_perm, co_rename, co_subst, co_swap, co_vr,
    random_coterm, truncate, unfold, unfold_lazy, CoDest, CoTerm, Env, EqMode, Shape, Step, DEFAULT_DEPTH,
};
use crate::models::{check_prop, probes_outside, CheckCfg, Model, PropId, Signature, Sym};
use crate::perm::{Perm, Var};
use crate::report::{PropLine, PropReport};
use crate::transforms::{fresh_from_fv, fresh_from_rename, perm_from_swap, rename_from_subst, swap_from_perm};
use crate::varset::VarSet;

type DestFn<S> = Arc<dyn Fn(&S) -> Shape<S> + Send + Sync>;
type MemberFn<S> = Arc<dyn Fn(&S, Var, &S) -> bool + Send + Sync>;
type KeyFn<S> = Arc<dyn Fn(&S) -> Vec<u64> + Send + Sync>;

/// A model of a corecursor signature.
pub struct CoModel<S> {
    pub base: Model<S>,
    pub dest: DestFn<S>,
    /// `member(m, x, s)`: whether `(x, s)` is in the pair set of `m`'s
    /// abstraction step.
    pub member: Option<MemberFn<S>>,
    /// State identity for sharing during corecursion. Without it results are
    /// unfolded lazily and never regular.
    pub key: Option<KeyFn<S>>,
}

impl<S> Clone for CoModel<S> {
    fn clone(&self) -> Self {
        CoModel { base: self.base.clone(), dest: self.dest.clone(), member: self.member.clone(), key: self.key.clone() }
    }
}

impl<S: Clone + 'static> CoModel<S> {
    pub fn new(base: Model<S>, dest: impl Fn(&S) -> Shape<S> + Send + Sync + 'static) -> CoModel<S> {
        CoModel { base, dest: Arc::new(dest), member: None, key: None }
    }

    pub fn with_member(mut self, f: impl Fn(&S, Var, &S) -> bool + Send + Sync + 'static) -> Self {
        self.member = Some(Arc::new(f));
        self
    }

    pub fn with_key(mut self, f: impl Fn(&S) -> Vec<u64> + Send + Sync + 'static) -> Self {
        self.key = Some(Arc::new(f));
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.base.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.base.name
    }

    pub fn dest(&self, s: &S) -> Shape<S> {
        (self.dest)(s)
    }

    fn with_base(&self, base: Model<S>) -> CoModel<S> {
        CoModel { base, ..self.clone() }
    }
}

/// How a stored abstraction pair is re-bound to another binder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rebind {
    Perm,
    Swap,
    Ren,
    Subst,
}

impl Rebind {
    pub fn of(i: usize) -> Result<Rebind, NomError> {
        Ok(match i {
            1 | 2 => Rebind::Perm,
            3 | 5 | 6 => Rebind::Swap,
            7 => Rebind::Subst,
            8 | 9 => Rebind::Ren,
            _ => return Err(NomError::BadCorecursor(i)),
        })
    }

    fn syms(self) -> &'static [Sym] {
        match self {
            Rebind::Perm => &[Sym::Pm],
            Rebind::Swap => &[Sym::Sw],
            Rebind::Ren => &[Sym::Ren],
            Rebind::Subst => &[Sym::Sb, Sym::Vr],
        }
    }

    /// The body of binder `x` re-bound to `y`.
    pub fn apply<S: Clone + 'static>(self, m: &Model<S>, t: &S, y: Var, x: Var) -> S {
        match self {
            Rebind::Perm => m.pm(t, &Perm::transposition(y, x)),
            Rebind::Swap => m.sw(t, y, x),
            Rebind::Ren => m.ren(t, y, x),
            Rebind::Subst => m.sb(t, &m.vr(y), x),
        }
    }
}

/// Operations besides the destructor in the signature of corecursor `i`.
pub fn co_sig_of(i: usize) -> Result<Signature, NomError> {
    use Sym::*;
    Ok(match i {
        1 | 2 => Signature::of(&[Pm, Fv]),
        3 => Signature::of(&[Sw, Fv]),
        5 | 6 => Signature::of(&[Sw, Fr]),
        7 => Signature::of(&[Sb, Fr, Vr]),
        8 | 9 => Signature::of(&[Ren, Fr]),
        _ => return Err(NomError::BadCorecursor(i)),
    })
}

// ------------------------------------------------------------------ laws

macro_rules! dprops {
    ($($id:ident = $name:literal, $ascii:literal : [$($s:ident),*];)*) => {
        /// Destructor-based laws.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum DProp { $($id),* }

        impl DProp {
            pub const ALL: &'static [DProp] = &[$(DProp::$id),*];

            pub fn name(self) -> &'static str {
                match self { $(DProp::$id => $name),* }
            }

            pub fn ascii(self) -> &'static str {
                match self { $(DProp::$id => $ascii),* }
            }

            pub fn syms(self) -> Signature {
                match self { $(DProp::$id => Signature::of(&[$(Sym::$s),*])),* }
            }
        }
    };
}

dprops! {
    SwVr = "SwVr∞", "SwVr_inf": [Sw];
    SwAp = "SwAp∞", "SwAp_inf": [Sw];
    SwLm = "SwLm∞", "SwLm_inf": [Sw];
    SwCg = "SwCg∞", "SwCg_inf": [Sw];
    SwBvr = "SwBvr∞", "SwBvr_inf": [Sw];
    SwBvr2 = "SwBvr∞,2", "SwBvr_inf2": [Sw, Fv];
    PmVr = "PmVr∞", "PmVr_inf": [Pm];
    PmAp = "PmAp∞", "PmAp_inf": [Pm];
    PmLm = "PmLm∞", "PmLm_inf": [Pm];
    PmBvr = "PmBvr∞", "PmBvr_inf": [Pm, Fv];
    PmBvrP = "PmBvr'∞", "PmBvr'_inf": [Pm];
    RnVr = "RnVr∞", "RnVr_inf": [Ren];
    RnAp = "RnAp∞", "RnAp_inf": [Ren];
    RnLm1 = "RnLm1∞", "RnLm1_inf": [Ren];
    RnLm2 = "RnLm2∞", "RnLm2_inf": [Ren];
    RnCg = "RnCg∞", "RnCg_inf": [Ren];
    RnBvr = "RnBvr∞", "RnBvr_inf": [Ren];
    RnBvrP = "RnBvr'∞", "RnBvr'_inf": [Ren];
    SbVr = "SbVr∞", "SbVr_inf": [Sb];
    SbAp = "SbAp∞", "SbAp_inf": [Sb];
    SbLm = "SbLm∞", "SbLm_inf": [Sb];
    SbBvr = "SbBvr∞", "SbBvr_inf": [Sb, Vr];
    SbBvrP = "SbBvr'∞", "SbBvr'_inf": [Sb, Vr];
    FrVr = "FrVr∞", "FrVr_inf": [];
    FrAp = "FrAp∞", "FrAp_inf": [];
    FrLm = "FrLm∞", "FrLm_inf": [];
    FvVr = "FvVr∞", "FvVr_inf": [Fv];
    FvAp = "FvAp∞", "FvAp_inf": [Fv];
    FvLm = "FvLm∞", "FvLm_inf": [Fv];
    FSupFv = "FSupFv∞", "FSupFv_inf": [Fv];
    FvDPm = "FvDPm∞", "FvDPm_inf": [Pm, Fv];
    FvDSw = "FvDSw∞", "FvDSw_inf": [Sw, Fv];
    FSupFr = "FSupFr∞", "FSupFr_inf": [];
    FrDSw = "FrDSw∞", "FrDSw_inf": [Sw, Fr];
    FrDRn = "FrDRn∞", "FrDRn_inf": [Ren, Fr];
    VrInv = "VrInv", "VrInv": [Vr];
}

impl DProp {
    fn needs_support(self) -> bool {
        use DProp::*;
        matches!(self, FvDPm | FvDSw | FSupFr | FrDSw | FrDRn)
    }

    /// Freshness is read through `fr`, `fv` or the support oracle, whichever
    /// the comodel has.
    fn needs_fresh(self) -> bool {
        use DProp::*;
        matches!(
            self,
            SwCg | SwBvr | RnCg | RnBvr | RnBvrP | SbLm | SbBvr | SbBvrP | PmBvrP | FrVr | FrAp | FrLm | FSupFr
        )
    }
}

/// A corecursion-relevant law: destructor-based or algebraic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoProp {
    D(DProp),
    Alg(PropId),
}

impl CoProp {
    pub fn name(self) -> &'static str {
        match self {
            CoProp::D(d) => d.name(),
            CoProp::Alg(p) => p.name(),
        }
    }

    /// Accepts `∞` or `_inf` spellings, case-insensitively.
    pub fn from_name(s: &str) -> Result<CoProp, NomError> {
        let norm = |x: &str| x.replace('∞', "_inf").replace("_inf,2", "_inf2").to_ascii_lowercase();
        let key = norm(s);
        if let Some(d) = DProp::ALL.iter().find(|d| norm(d.name()) == key || d.ascii().to_ascii_lowercase() == key) {
            return Ok(CoProp::D(*d));
        }
        PropId::from_name(s).map(CoProp::Alg)
    }
}

impl fmt::Display for CoProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The law suite of corecursor `i`.
pub fn coprops_of(i: usize) -> Result<Vec<CoProp>, NomError> {
    use CoProp::{Alg, D};
    use DProp as Dp;
    use PropId as P;
    Ok(match i {
        1 => vec![D(Dp::PmVr), D(Dp::PmAp), D(Dp::PmLm), Alg(P::PmId), Alg(P::PmCp), D(Dp::FvDPm), D(Dp::PmBvr)],
        2 => vec![
            D(Dp::PmVr),
            D(Dp::PmAp),
            D(Dp::PmLm),
            Alg(P::PmId),
            Alg(P::PmCp),
            Alg(P::PmFv),
            D(Dp::PmBvr),
            D(Dp::FvVr),
            D(Dp::FvAp),
            D(Dp::FvLm),
        ],
        3 => vec![
            D(Dp::SwVr),
            D(Dp::SwAp),
            D(Dp::SwLm),
            Alg(P::SwId),
            Alg(P::SwIv),
            Alg(P::SwCp),
            D(Dp::FvDSw),
            D(Dp::SwBvr2),
        ],
        5 => vec![
            D(Dp::SwVr),
            D(Dp::SwAp),
            D(Dp::SwLm),
            Alg(P::SwId),
            Alg(P::SwIv),
            Alg(P::SwCp),
            Alg(P::SwFr),
            D(Dp::SwBvr),
            D(Dp::FrVr),
            D(Dp::FrAp),
            D(Dp::FrLm),
        ],
        6 => vec![
            D(Dp::SwVr),
            D(Dp::SwAp),
            D(Dp::SwLm),
            Alg(P::SwId),
            Alg(P::SwIv),
            Alg(P::SwCp),
            Alg(P::SwFr),
            Alg(P::FrSw),
            D(Dp::SwCg),
            D(Dp::FrVr),
            D(Dp::FrAp),
            D(Dp::FrLm),
        ],
        7 => vec![
            D(Dp::SbVr),
            D(Dp::SbAp),
            D(Dp::SbLm),
            Alg(P::SbId),
            Alg(P::SbChFr),
            Alg(P::SbCm),
            Alg(P::SbFr),
            Alg(P::FrSb),
            D(Dp::SbBvr),
            D(Dp::SbBvrP),
            D(Dp::FSupFr),
            D(Dp::FrVr),
            D(Dp::FrAp),
            D(Dp::FrLm),
            D(Dp::VrInv),
            Alg(P::FrVr),
        ],
        8 => vec![
            D(Dp::RnVr),
            D(Dp::RnAp),
            D(Dp::RnLm1),
            Alg(P::RnId),
            Alg(P::RnIm),
            Alg(P::RnCh),
            Alg(P::RnCm),
            D(Dp::FrDRn),
            D(Dp::RnBvr),
            D(Dp::RnBvrP),
            D(Dp::FSupFr),
            Alg(P::FrRn2),
        ],
        9 => vec![
            D(Dp::RnVr),
            D(Dp::RnAp),
            D(Dp::RnLm1),
            Alg(P::RnId),
            Alg(P::RnChFr),
            Alg(P::RnCm),
            Alg(P::RnFr),
            Alg(P::FrRn),
            D(Dp::RnBvr),
            D(Dp::RnBvrP),
            D(Dp::FSupFr),
            D(Dp::FrVr),
            D(Dp::FrAp),
            D(Dp::FrLm),
        ],
        _ => return Err(NomError::BadCorecursor(i)),
    })
}

// --------------------------------------------------------------- checker

struct Ctx<'a, S> {
    cm: &'a CoModel<S>,
    kind: Rebind,
    pool: Vec<Var>,
    probes: usize,
    rng: Rng,
}

type Res = Option<Result<(), String>>;

fn is_v<S>(sh: &Shape<S>, x: Var) -> bool {
    matches!(sh, Shape::V(y) if *y == x)
}

fn verdict(b: bool, cex: impl FnOnce() -> String) -> Res {
    Some(if b { Ok(()) } else { Err(cex()) })
}

impl<S: Clone + 'static> Ctx<'_, S> {
    fn m(&self) -> &Model<S> {
        &self.cm.base
    }
    fn show(&self, s: &S) -> String {
        self.m().show(s)
    }
    fn eq(&self, a: &S, b: &S) -> bool {
        self.m().equal(a, b)
    }
    fn fresh(&self, x: Var, s: &S) -> bool {
        self.m().fresh(x, s)
    }
    fn var(&mut self) -> Var {
        self.pool[self.rng.gen_range(0..self.pool.len())]
    }
    /// Pool variables plus a few beyond it, so fresh binders turn up.
    fn wide_var(&mut self) -> Var {
        Var(self.rng.gen_range(0..POOL_SIZE + 4))
    }
    fn elem(&mut self) -> S {
        let cm = self.cm;
        cm.base.draw(&mut self.rng)
    }

    fn member(&self, m: &S, x: Var, s: &S) -> bool {
        member(self.cm, self.kind, m, x, s)
    }

    /// The stored pair plus a few re-bound pairs confirmed by membership.
    fn pairs(&mut self, m: &S) -> Option<Vec<(Var, S)>> {
        let Shape::L(x, t) = self.cm.dest(m) else { return None };
        let mut out = vec![(x, t.clone())];
        let mut cands: Vec<Var> = (0..POOL_SIZE + 4).map(Var).filter(|y| *y != x).collect();
        cands.shuffle(&mut self.rng);
        for y in cands {
            if out.len() >= 3 {
                break;
            }
            if self.fresh(y, &t) {
                let s = self.kind.apply(self.m(), &t, y, x);
                if self.member(m, y, &s) {
                    out.push((y, s));
                }
            }
        }
        Some(out)
    }

    fn pick<T: Clone>(&mut self, v: &[T]) -> T {
        v[self.rng.gen_range(0..v.len())].clone()
    }

    fn support(&self, s: &S) -> BTreeSet<Var> {
        (self.m().supp.as_ref().expect("supp"))(s)
    }

    fn probes_for(&self, s: &S, x: Var) -> Vec<Var> {
        let mut avoid = self.support(s);
        avoid.insert(x);
        probes_outside(&avoid, self.probes.max(1))
    }

    /// Same destructor step: equal leaves, equal children, or mutually
    /// admitted abstraction pairs.
    fn same_dest(&self, a: &S, b: &S) -> bool {
        match (self.cm.dest(a), self.cm.dest(b)) {
            (Shape::V(x), Shape::V(y)) => x == y,
            (Shape::A(a1, a2), Shape::A(b1, b2)) => self.eq(&a1, &b1) && self.eq(&a2, &b2),
            (Shape::L(x, t), Shape::L(y, s)) => self.member(a, y, &s) && self.member(b, x, &t),
            _ => false,
        }
    }

    fn show_shape(&self, sh: &Shape<S>) -> String {
        match sh {
            Shape::V(x) => format!("V {x}"),
            Shape::A(a, b) => format!("A({}, {})", self.show(a), self.show(b)),
            Shape::L(x, t) => format!("L({x}, {})", self.show(t)),
        }
    }

    fn commute_v(&mut self, m: &S, op: &dyn Fn(&S) -> S, var: &dyn Fn(Var) -> Var, what: &str) -> Res {
        let Shape::V(x) = self.cm.dest(m) else { return None };
        let r = op(m);
        let d = self.cm.dest(&r);
        verdict(is_v(&d, var(x)), || format!("{what} t={} dest={}", self.show(m), self.show_shape(&d)))
    }

    fn commute_a(&mut self, m: &S, op: &dyn Fn(&S) -> S, what: &str) -> Res {
        let Shape::A(a, b) = self.cm.dest(m) else { return None };
        let r = op(m);
        let ok = match self.cm.dest(&r) {
            Shape::A(a2, b2) => self.eq(&a2, &op(&a)) && self.eq(&b2, &op(&b)),
            _ => false,
        };
        verdict(ok, || format!("{what} t={}", self.show(m)))
    }

    /// Every admitted pair, filtered by `keep`, maps into the image's pairs.
    fn commute_l(
        &mut self,
        m: &S,
        op: &dyn Fn(&S) -> S,
        var: &dyn Fn(Var) -> Var,
        keep: &dyn Fn(&Self, Var) -> bool,
        what: &str,
    ) -> Res {
        let ps = self.pairs(m)?;
        let ps: Vec<_> = ps.into_iter().filter(|(x, _)| keep(self, *x)).collect();
        if ps.is_empty() {
            return None;
        }
        let r = op(m);
        if !matches!(self.cm.dest(&r), Shape::L(..)) {
            return verdict(false, || format!("{what} t={} not an abstraction after op", self.show(m)));
        }
        for (x, t) in ps {
            if !self.member(&r, var(x), &op(&t)) {
                return verdict(false, || format!("{what} t={} pair=({x}, {})", self.show(m), self.show(&t)));
            }
        }
        Some(Ok(()))
    }

    fn congruence(&mut self, m: &S, ren: bool) -> Res {
        let ps = self.pairs(m)?;
        let (x1, t1) = self.pick(&ps);
        let (x2, t2) = self.pick(&ps);
        let mut cands = vec![x1, x2];
        cands.extend((0..POOL_SIZE + 4).map(Var));
        let mm = self.m();
        let ok = cands.into_iter().any(|z| {
            (z == x1 || self.fresh(z, &t1))
                && (z == x2 || self.fresh(z, &t2))
                && if ren {
                    self.eq(&mm.ren(&t1, z, x1), &mm.ren(&t2, z, x2))
                } else {
                    self.eq(&mm.sw(&t1, z, x1), &mm.sw(&t2, z, x2))
                }
        });
        verdict(ok, || format!("pairs ({x1}, {}) ({x2}, {})", self.show(&t1), self.show(&t2)))
    }

    /// Two pairs relate by re-binding, with freshness of the new binder.
    fn bvr(&mut self, m: &S, kind: Rebind, fresh: &dyn Fn(&Self, Var, &S) -> bool) -> Res {
        let ps = self.pairs(m)?;
        let (x, t) = self.pick(&ps);
        let (xp, tp) = self.pick(&ps);
        let ok = (xp == x || fresh(self, xp, &t)) && self.eq(&tp, &kind.apply(self.m(), &t, xp, x));
        verdict(ok, || format!("pairs ({x}, {}) ({xp}, {})", self.show(&t), self.show(&tp)))
    }

    /// Any fresh binder re-binds an admitted pair into another admitted pair.
    fn bvr_closed(&mut self, m: &S, kind: Rebind) -> Res {
        let ps = self.pairs(m)?;
        let (x, t) = self.pick(&ps);
        let xp = self.wide_var();
        if !self.fresh(xp, &t) {
            return None;
        }
        let s = kind.apply(self.m(), &t, xp, x);
        verdict(self.member(m, xp, &s), || format!("pair ({x}, {}) x'={xp}", self.show(&t)))
    }

    /// Membership in FV agrees with the probe test: `x` is free iff some
    /// probe outside the support moves the state.
    fn fv_by_probes(&mut self, m: &S, op: &dyn Fn(&S, Var, Var) -> S) -> Res {
        let mut cands = self.pool.clone();
        cands.extend(self.support(m));
        let x = self.pick(&cands);
        let moved = self.probes_for(m, x).into_iter().any(|y| !self.eq(&op(m, x, y), m));
        let free = self.m().fv(m).contains(x);
        verdict(free == moved, || format!("x={x} t={} free={free} moved={moved}", self.show(m)))
    }

    fn fr_by_probes(&mut self, m: &S, op: &dyn Fn(&S, Var, Var) -> S) -> Res {
        let mut cands = self.pool.clone();
        cands.extend(self.support(m));
        let x = self.pick(&cands);
        let fixed = self.probes_for(m, x).into_iter().all(|y| self.eq(&op(m, x, y), m));
        let fr = self.m().fr(x, m);
        verdict(fr == fixed, || format!("x={x} t={} fresh={fr} fixed={fixed}", self.show(m)))
    }

    fn eval(&mut self, p: DProp) -> Res {
        use DProp::*;
        let m = self.elem();
        let mm = self.cm.base.clone();
        match p {
            SwVr | SwAp | SwLm => {
                let (z1, z2) = (self.var(), self.var());
                let op = |c: &S| mm.sw(c, z1, z2);
                let var = move |x: Var| x.swapped(z1, z2);
                match p {
                    SwVr => self.commute_v(&m, &op, &var, &format!("[{z1}∧{z2}]")),
                    SwAp => self.commute_a(&m, &op, &format!("[{z1}∧{z2}]")),
                    _ => self.commute_l(&m, &op, &var, &|_, _| true, &format!("[{z1}∧{z2}]")),
                }
            }
            PmVr | PmAp | PmLm => {
                let sigma = random_perm(&mut self.rng, &self.pool);
                let s2 = sigma.clone();
                let op = move |c: &S| mm.pm(c, &s2);
                let s3 = sigma.clone();
                let var = move |x: Var| s3.apply(x);
                let what = format!("[{sigma}]");
                match p {
                    PmVr => self.commute_v(&m, &op, &var, &what),
                    PmAp => self.commute_a(&m, &op, &what),
                    _ => self.commute_l(&m, &op, &var, &|_, _| true, &what),
                }
            }
            RnVr | RnAp | RnLm1 => {
                let (y, z) = (self.var(), self.var());
                let op = |c: &S| mm.ren(c, y, z);
                let var = move |x: Var| x.renamed(y, z);
                let what = format!("[{y}/{z}]");
                match p {
                    RnVr => self.commute_v(&m, &op, &var, &what),
                    RnAp => self.commute_a(&m, &op, &what),
                    _ => self.commute_l(&m, &op, &|x| x, &|_, x| x != y && x != z, &what),
                }
            }
            RnLm2 => {
                let ps = self.pairs(&m)?;
                let (x, t) = self.pick(&ps);
                let z = self.var();
                verdict(self.eq(&mm.ren(&m, x, z), &t), || {
                    format!("t={} pair=({x}, {}) z={z}", self.show(&m), self.show(&t))
                })
            }
            SbVr => {
                let Shape::V(x) = self.cm.dest(&m) else { return None };
                let s = self.elem();
                let z = if self.rng.gen_bool(0.5) { x } else { self.var() };
                let r = mm.sb(&m, &s, z);
                let ok = if x == z { self.same_dest(&r, &s) } else { is_v(&self.cm.dest(&r), x) };
                verdict(ok, || format!("t={} s={} z={z}", self.show(&m), self.show(&s)))
            }
            SbAp | SbLm => {
                let s = self.elem();
                let z = self.var();
                let s2 = s.clone();
                let op = |c: &S| mm.sb(c, &s2, z);
                let what = format!("[{}/{z}]", self.show(&s));
                if p == SbAp {
                    self.commute_a(&m, &op, &what)
                } else {
                    self.commute_l(&m, &op, &|x| x, &|c, x| x != z && c.fresh(x, &s), &what)
                }
            }
            SwCg => self.congruence(&m, false),
            RnCg => self.congruence(&m, true),
            SwBvr => self.bvr(&m, Rebind::Swap, &|c, x, t| c.fresh(x, t)),
            SwBvr2 => self.bvr(&m, Rebind::Swap, &|c, x, t| !c.m().fv(t).contains(x)),
            PmBvr => self.bvr(&m, Rebind::Perm, &|c, x, t| !c.m().fv(t).contains(x)),
            RnBvr => self.bvr(&m, Rebind::Ren, &|c, x, t| c.fresh(x, t)),
            SbBvr => self.bvr(&m, Rebind::Subst, &|c, x, t| c.fresh(x, t)),
            PmBvrP => self.bvr_closed(&m, Rebind::Perm),
            RnBvrP => self.bvr_closed(&m, Rebind::Ren),
            SbBvrP => self.bvr_closed(&m, Rebind::Subst),
            FrVr => {
                let Shape::V(x) = self.cm.dest(&m) else { return None };
                let z = if self.rng.gen_bool(0.5) { x } else { self.wide_var() };
                if !self.fresh(z, &m) {
                    return None;
                }
                verdict(z != x, || format!("t={} z={z}", self.show(&m)))
            }
            FrAp => {
                let Shape::A(a, b) = self.cm.dest(&m) else { return None };
                let z = self.wide_var();
                if !self.fresh(z, &m) {
                    return None;
                }
                verdict(self.fresh(z, &a) && self.fresh(z, &b), || format!("t={} z={z}", self.show(&m)))
            }
            FrLm => {
                let ps = self.pairs(&m)?;
                let (x, t) = self.pick(&ps);
                let z = self.wide_var();
                if !self.fresh(z, &m) {
                    return None;
                }
                verdict(z == x || self.fresh(z, &t), || {
                    format!("t={} pair=({x}, {}) z={z}", self.show(&m), self.show(&t))
                })
            }
            FvVr => {
                let Shape::V(x) = self.cm.dest(&m) else { return None };
                verdict(mm.fv(&m).contains(x), || format!("t={}", self.show(&m)))
            }
            FvAp => {
                let Shape::A(a, b) = self.cm.dest(&m) else { return None };
                let ok = mm.fv(&a).union(&mm.fv(&b)).is_subset(&mm.fv(&m));
                verdict(ok, || format!("t={}", self.show(&m)))
            }
            FvLm => {
                let ps = self.pairs(&m)?;
                let (x, t) = self.pick(&ps);
                verdict(mm.fv(&t).remove(x).is_subset(&mm.fv(&m)), || {
                    format!("t={} pair=({x}, {})", self.show(&m), self.show(&t))
                })
            }
            FSupFv => verdict(mm.fv(&m).is_finite(), || format!("t={}", self.show(&m))),
            FvDPm => self.fv_by_probes(&m, &|c, x, y| mm.pm(c, &Perm::transposition(x, y))),
            FvDSw => self.fv_by_probes(&m, &|c, x, y| mm.sw(c, x, y)),
            FrDSw => self.fr_by_probes(&m, &|c, x, y| mm.sw(c, x, y)),
            FrDRn => self.fr_by_probes(&m, &|c, x, y| mm.ren(c, y, x)),
            FSupFr => {
                let supp = self.support(&m);
                let outside = probes_outside(&supp, self.probes.max(1)).into_iter().all(|y| self.fresh(y, &m));
                let inside = self.pool.iter().all(|x| self.fresh(*x, &m) || supp.contains(x));
                verdict(outside && inside, || format!("t={}", self.show(&m)))
            }
            VrInv => {
                let x = self.var();
                let v = mm.vr(x);
                let leaf_ok = is_v(&self.cm.dest(&v), x);
                let back_ok = match self.cm.dest(&m) {
                    Shape::V(y) => self.eq(&m, &mm.vr(y)),
                    _ => !self.eq(&m, &v),
                };
                verdict(leaf_ok && back_ok, || format!("t={} x={x}", self.show(&m)))
            }
        }
    }
}

/// Membership in an abstraction step's pair set.
pub fn member<S: Clone + 'static>(cm: &CoModel<S>, kind: Rebind, m: &S, x: Var, s: &S) -> bool {
    if let Some(f) = &cm.member {
        return f(m, x, s);
    }
    match cm.dest(m) {
        Shape::L(x0, t) => (x == x0 || cm.base.fresh(x, &t)) && cm.base.equal(s, &kind.apply(&cm.base, &t, x, x0)),
        _ => false,
    }
}

fn precheck_d<S: Clone + 'static>(cm: &CoModel<S>, p: DProp, kind: Rebind) -> Result<(), NomError> {
    cm.base.require(p.syms(), p.name())?;
    let b = &cm.base;
    if p.needs_support() && b.supp.is_none() {
        return Err(NomError::MissingSupport(b.name.clone()));
    }
    if p.needs_fresh() && b.fr.is_none() && b.fv.is_none() && b.supp.is_none() {
        return Err(NomError::MissingOp { model: b.name.clone(), op: "fr", needed_by: p.name().into() });
    }
    if cm.member.is_none() {
        b.require(Signature::of(kind.syms()), "abstraction membership")?;
    }
    Ok(())
}

/// Evaluates one law on sampled states.
pub fn check_coprop<S: Clone + 'static>(
    cm: &CoModel<S>,
    p: CoProp,
    kind: Rebind,
    cfg: &CheckCfg,
) -> Result<PropLine, NomError> {
    let d = match p {
        CoProp::Alg(a) => return check_prop(&cm.base, a, cfg),
        CoProp::D(d) => d,
    };
    precheck_d(cm, d, kind)?;
    let mut ctx = Ctx { cm, kind, pool: cm.base.pool(), probes: cfg.probes, rng: sub_rng(cfg.seed, d.ascii()) };
    let budget = cfg.samples.max(1) * cfg.budget_factor.max(1);
    let (mut n, mut hits) = (0, 0);
    let mut cex = None;
    while n < budget && (n < cfg.samples || hits < cfg.min_hits) {
        n += 1;
        match ctx.eval(d) {
            None => {}
            Some(Ok(())) => hits += 1,
            Some(Err(c)) => {
                hits += 1;
                cex.get_or_insert(c);
            }
        }
    }
    let pass = cex.is_none() && hits >= cfg.min_hits;
    let mut line = PropLine::new(d.name(), pass, n, hits);
    if cex.is_none() && hits < cfg.min_hits {
        line = line.with_note("insufficient-hits");
    }
    Ok(line.with_cex(cex))
}

/// Checks a list of laws, re-binding abstraction pairs per `kind`.
pub fn check_coprop_list<S: Clone + 'static>(
    cm: &CoModel<S>,
    suite: &[CoProp],
    kind: Rebind,
    cfg: &CheckCfg,
    title: String,
) -> Result<PropReport, NomError> {
    for p in suite {
        match p {
            CoProp::D(d) => precheck_d(cm, *d, kind)?,
            CoProp::Alg(a) => cm.base.require(a.syms(), a.name())?,
        }
    }
    let mut r = PropReport::new(title);
    for p in suite {
        r.push(check_coprop(cm, *p, kind, cfg)?);
    }
    Ok(r)
}

/// Checks the suite of corecursor `i`.
pub fn check_coprops<S: Clone + 'static>(cm: &CoModel<S>, i: usize, cfg: &CheckCfg) -> Result<PropReport, NomError> {
    let title = format!("colaws of {} as cr{i} (seed={}, samples={})", cm.name(), cfg.seed, cfg.samples);
    check_coprop_list(cm, &coprops_of(i)?, Rebind::of(i)?, cfg, title)
}

/// Evaluates one law on sampled iterms at depth `depth`.
pub fn check_coterm_property(name: &str, cfg: &CheckCfg, depth: usize) -> Result<PropLine, NomError> {
    let p = CoProp::from_name(name)?;
    let cm = iterm_comodel(depth);
    let kind = match p {
        CoProp::D(d) if d.name().starts_with("Pm") => Rebind::Perm,
        CoProp::D(d) if d.name().starts_with("Rn") => Rebind::Ren,
        CoProp::D(d) if d.name().starts_with("Sb") => Rebind::Subst,
        _ => Rebind::Swap,
    };
    Ok(check_coprop(&cm, p, kind, cfg)?.with_note(format!("eq=auto,depth-{depth}")))
}

// -------------------------------------------------------------- iterms

fn co_eq(depth: usize) -> impl Fn(&CoTerm, &CoTerm) -> bool + Send + Sync + Clone {
    move |a, b| co_alpha_eq(a, b, EqMode::auto(&[a, b], depth)).unwrap_or(false)
}

fn co_fv_any(t: &CoTerm, depth: usize) -> BTreeSet<Var> {
    co_fv(t).unwrap_or_else(|_| co_fv_upto(t, depth))
}

/// Substitution needs a regular replacement; non-regular ones are cut.
fn co_sb(t: &CoTerm, s: &CoTerm, z: Var) -> CoTerm {
    co_subst(t, s, z).expect("regular replacement")
}

/// Iterms with every operation of every corecursor signature; equality is
/// exact on regular coterms and depth-bounded otherwise.
pub fn iterm_comodel(depth: usize) -> CoModel<CoTerm> {
    let pool = crate::gen::default_pool();
    let base =
        Model::new("iterm", co_eq(depth), move |r: &mut Rng| random_coterm(r, &pool), |t: &CoTerm| truncate(t, 6))
            .with_vr(co_vr)
            .with_pm(co_perm)
            .with_sw(co_swap)
            .with_sb(co_sb)
            .with_ren(|t, y, x| co_rename(t, y, x).expect("variable replacement"))
            .with_fv(move |t| VarSet::Finite(co_fv_any(t, depth)))
            .with_fr(move |x, t| co_fresh_auto(x, t, depth))
            .with_supp(move |t| co_fv_any(t, depth));
    CoModel::new(base, |t: &CoTerm| t.shape())
        .with_member(move |t, y, s| match co_dest(t) {
            CoDest::L(h) => h.admits(y, s, EqMode::auto(&[t, s], depth)).unwrap_or(false),
            _ => false,
        })
        .with_key(CoTerm::pres_key)
}

/// Iterms whose swapping leaves abstraction bodies untouched: a comodel
/// that breaks the swapping laws.
pub fn broken_swap_comodel(depth: usize) -> CoModel<CoTerm> {
    let good = iterm_comodel(depth);
    let base = good.base.clone().with_sw(|t: &CoTerm, a, b| match t.shape() {
        Shape::L(x, body) => co_lm(x.swapped(a, b), &body),
        _ => co_swap(t, a, b),
    });
    CoModel { base, member: None, ..good }.named("broken-sw")
}

// ------------------------------------------------------- corecursion

#[derive(Clone)]
struct Keyed<S> {
    key: Vec<u64>,
    s: S,
}

impl<S> PartialEq for Keyed<S> {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key
    }
}
impl<S> Eq for Keyed<S> {}
impl<S> Hash for Keyed<S> {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.key.hash(h)
    }
}

/// The corecursor into iterms, reading only the stored abstraction pair.
pub fn corec2<S: Clone + Send + Sync + 'static>(cm: &CoModel<S>, s: &S) -> CoTerm {
    let dest = cm.dest.clone();
    match cm.key.clone() {
        Some(key) => {
            let k2 = key.clone();
            unfold(Keyed { key: key(s), s: s.clone() }, move |st: &Keyed<S>| {
                Step::Shape(dest(&st.s).map(|c| Keyed { key: k2(&c), s: c }))
            })
        }
        None => unfold_lazy(s.clone(), move |st: &S| Step::Shape(dest(st))),
    }
}

fn missing(cm_name: &str, op: &'static str, by: &str) -> NomError {
    NomError::MissingOp { model: cm_name.to_string(), op, needed_by: by.to_string() }
}

/// Swapping via renaming through a variable outside the support and both
/// swapped names.
fn swap_from_rename<S: Clone + Send + Sync + 'static>(m: &Model<S>) -> Result<Model<S>, NomError> {
    let supp = m.supp.clone().ok_or_else(|| NomError::MissingSupport(m.name.clone()))?;
    let ren = m.ren.clone().ok_or_else(|| missing(&m.name, "ren", "swap from renaming"))?;
    Ok(m.clone().with_sw(move |c, z1, z2| {
        if z1 == z2 {
            return c.clone();
        }
        let mut avoid = supp(c);
        avoid.extend([z1, z2]);
        let y = probes_outside(&avoid, 1)[0];
        let c1 = ren(c, y, z1);
        let c2 = ren(&c1, z1, z2);
        ren(&c2, z2, y)
    }))
}

/// Free variables as the non-fresh part of the support.
fn fv_from_fresh<S: Clone + Send + Sync + 'static>(m: &Model<S>) -> Result<Model<S>, NomError> {
    let supp = m.supp.clone().ok_or_else(|| NomError::MissingSupport(m.name.clone()))?;
    let fr = m.fr.clone().ok_or_else(|| missing(&m.name, "fr", "fv from freshness"))?;
    Ok(m.clone().with_fv(move |c| VarSet::Finite(supp(c).into_iter().filter(|x| !fr(*x, c)).collect())))
}

/// One step towards corecursor 2, returning the next corecursor id.
pub fn co_edge<S: Clone + Send + Sync + 'static>(i: usize, cm: &CoModel<S>) -> Result<(usize, CoModel<S>), NomError> {
    cm.base.require(co_sig_of(i)?, &format!("source cr{i}"))?;
    let b = &cm.base;
    let (j, base) = match i {
        1 => (3, swap_from_perm(b)),
        3 => (6, fresh_from_fv(b)),
        6 => (5, b.clone()),
        5 => (2, fv_from_fresh(&perm_from_swap(b))?),
        9 => (5, swap_from_rename(b)?),
        8 if b.fr.is_some() => (9, b.clone()),
        8 => (9, fresh_from_rename(b, 3)?),
        7 => (9, rename_from_subst(b)),
        _ => return Err(NomError::BadCorecursor(i)),
    };
    let name = format!("{}>cr{j}", b.name);
    Ok((j, cm.with_base(base.restrict(co_sig_of(j)?)).named(name)))
}

/// A corecursor instance: the comodel after transformation to cr2.
pub struct Corecursion<S> {
    pub path: Vec<usize>,
    pub cm2: CoModel<S>,
}

impl<S: Clone + Send + Sync + 'static> Corecursion<S> {
    pub fn apply(&self, s: &S) -> CoTerm {
        corec2(&self.cm2, s)
    }
}

/// Corecursor `i` applied to `cm`.
pub fn corec<S: Clone + Send + Sync + 'static>(i: usize, cm: &CoModel<S>) -> Result<Corecursion<S>, NomError> {
    co_sig_of(i)?;
    let mut path = vec![i];
    let mut cur = cm.clone();
    let mut k = i;
    while k != 2 {
        let (j, next) = co_edge(k, &cur)?;
        path.push(j);
        cur = next;
        k = j;
    }
    Ok(Corecursion { path, cm2: cur })
}

/// Checks that `g` is a comodel morphism into iterms for the signature of
/// corecursor `i`: destructor commutation for each step shape, commutation
/// with the operations, and preservation of freshness and free variables.
pub fn comorphism_report<S: Clone + Send + Sync + 'static>(
    i: usize,
    cm: &CoModel<S>,
    g: &dyn Fn(&S) -> CoTerm,
    cfg: &CheckCfg,
    depth: usize,
) -> Result<PropReport, NomError> {
    let sig = co_sig_of(i)?;
    let kind = Rebind::of(i)?;
    let b = &cm.base;
    let same = |a: &CoTerm, c: &CoTerm| co_alpha_eq(a, c, EqMode::auto(&[a, c], depth)).unwrap_or(false);
    let pool = b.pool();
    let mut rep =
        PropReport::new(format!("comorphism cr{i} from {} (seed={}, samples={})", b.name, cfg.seed, cfg.samples));

    // name, sampler returning None for vacuous draws or Some(failure text)
    type Case<'a, S> = Box<dyn FnMut(&S, &mut Rng) -> Option<Option<String>> + 'a>;
    let mut cases: Vec<(&str, Case<S>)> = Vec::new();
    cases.push((
        "dest-V",
        Box::new(|s, _| match cm.dest(s) {
            Shape::V(x) => Some((!same(&g(s), &co_vr(x))).then(|| format!("x={x} s={}", b.show(s)))),
            _ => None,
        }),
    ));
    cases.push((
        "dest-A",
        Box::new(|s, _| match cm.dest(s) {
            Shape::A(a, c) => Some((!same(&g(s), &co_ap(&g(&a), &g(&c)))).then(|| format!("s={}", b.show(s)))),
            _ => None,
        }),
    ));
    cases.push((
        "dest-L",
        Box::new(|s, rng| {
            let Shape::L(x, t) = cm.dest(s) else { return None };
            let ys: Vec<Var> = (0..POOL_SIZE + 4).map(Var).filter(|&y| y != x && b.fresh(y, &t)).collect();
            let (y, t) = if let Some(&y) = ys.get(rng.gen_range(0..=ys.len())) {
                let t2 = kind.apply(b, &t, y, x);
                if !member(cm, kind, s, y, &t2) {
                    return None;
                }
                (y, t2)
            } else {
                (x, t)
            };
            Some((!same(&g(s), &co_lm(y, &g(&t)))).then(|| format!("s={} pair=({y}, {})", b.show(s), b.show(&t))))
        }),
    ));
    if sig.contains(Sym::Pm) {
        let pool = pool.clone();
        cases.push((
            "comm-pm",
            Box::new(move |s, rng| {
                let p = random_perm(rng, &pool);
                Some((!same(&g(&b.pm(s, &p)), &co_perm(&g(s), &p))).then(|| format!("s={} σ={p}", b.show(s))))
            }),
        ));
    }
    if sig.contains(Sym::Sw) {
        let pool = pool.clone();
        cases.push((
            "comm-sw",
            Box::new(move |s, rng| {
                let (z1, z2) = (pool[rng.gen_range(0..pool.len())], pool[rng.gen_range(0..pool.len())]);
                Some(
                    (!same(&g(&b.sw(s, z1, z2)), &co_swap(&g(s), z1, z2)))
                        .then(|| format!("s={} [{z1}∧{z2}]", b.show(s))),
                )
            }),
        ));
    }
    if sig.contains(Sym::Ren) {
        let pool = pool.clone();
        cases.push((
            "comm-ren",
            Box::new(move |s, rng| {
                let (y, z) = (pool[rng.gen_range(0..pool.len())], pool[rng.gen_range(0..pool.len())]);
                let rhs = co_rename(&g(s), y, z).ok()?;
                Some((!same(&g(&b.ren(s, y, z)), &rhs)).then(|| format!("s={} [{y}/{z}]", b.show(s))))
            }),
        ));
    }
    if sig.contains(Sym::Sb) {
        let pool = pool.clone();
        cases.push((
            "comm-sb",
            Box::new(move |s, rng| {
                let s2 = b.draw(rng);
                let z = pool[rng.gen_range(0..pool.len())];
                let rhs = co_subst(&g(s), &g(&s2), z).ok()?;
                Some((!same(&g(&b.sb(s, &s2, z)), &rhs)).then(|| format!("s={} [{}/{z}]", b.show(s), b.show(&s2))))
            }),
        ));
    }
    if sig.contains(Sym::Vr) {
        let pool = pool.clone();
        cases.push((
            "comm-vr",
            Box::new(move |_, rng| {
                let x = pool[rng.gen_range(0..pool.len())];
                Some((!same(&g(&b.vr(x)), &co_vr(x))).then(|| format!("x={x}")))
            }),
        ));
    }
    if sig.contains(Sym::Fr) {
        cases.push((
            "fresh-pres",
            Box::new(move |s, rng| {
                let x = Var(rng.gen_range(0..POOL_SIZE + 4));
                if !b.fr(x, s) {
                    return None;
                }
                Some((!co_fresh_auto(x, &g(s), depth)).then(|| format!("x={x} s={}", b.show(s))))
            }),
        ));
    }
    if sig.contains(Sym::Fv) {
        cases.push((
            "fv-pres",
            Box::new(move |s, _| {
                let fv = b.fv(s);
                let img = co_fv_any(&g(s), depth);
                Some((!img.iter().all(|x| fv.contains(*x))).then(|| format!("s={}", b.show(s))))
            }),
        ));
    }
    let budget = cfg.samples.max(1) * cfg.budget_factor.max(1);
    for (name, mut case) in cases {
        let mut rng = sub_rng(cfg.seed, name);
        let (mut n, mut hits) = (0, 0);
        let mut cex = None;
        while n < budget && (n < cfg.samples || hits < cfg.min_hits) {
            n += 1;
            let s = b.draw(&mut rng);
            if let Some(r) = case(&s, &mut rng) {
                hits += 1;
                if let Some(c) = r {
                    cex.get_or_insert(c);
                }
            }
        }
        let pass = cex.is_none() && hits >= cfg.min_hits;
        rep.push(PropLine::new(name, pass, n, hits).with_cex(cex));
    }
    Ok(rep)
}

// --------------------------------------------------- full corecursion

/// A destructor step that may exit to a finished iterm.
pub enum FullStep<S> {
    In(Shape<S>),
    Exit(CoTerm),
}

/// A cr5 comodel whose destructor may exit.
pub struct FullCoModel<S> {
    pub base: Model<S>,
    pub dest: Arc<dyn Fn(&S) -> FullStep<S> + Send + Sync>,
    pub member: Option<MemberFn<S>>,
    pub key: Option<KeyFn<S>>,
}

impl<S> Clone for FullCoModel<S> {
    fn clone(&self) -> Self {
        FullCoModel {
            base: self.base.clone(),
            dest: self.dest.clone(),
            member: self.member.clone(),
            key: self.key.clone(),
        }
    }
}

/// States of a full comodel, or finished iterms.
#[derive(Clone)]
pub enum Sum<S> {
    In(S),
    Done(CoTerm),
}

impl<S: fmt::Debug> fmt::Debug for Sum<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sum::In(s) => write!(f, "In({s:?})"),
            Sum::Done(t) => write!(f, "Done({t})"),
        }
    }
}

/// The sum of a full comodel with the iterm comodel: exits continue as the
/// iterm's own destructor.
pub fn sum_comodel<S: Clone + Send + Sync + 'static>(fc: &FullCoModel<S>, depth: usize) -> CoModel<Sum<S>> {
    let b = fc.base.clone();
    let it = iterm_comodel(depth);
    let (b1, b2, b3, b4, b5) = (b.clone(), b.clone(), b.clone(), b.clone(), b.clone());
    let (i1, i2, i3, i4) = (it.base.clone(), it.base.clone(), it.base.clone(), it.base.clone());
    let base = Model::new(
        format!("{}+iterm", b.name),
        move |x: &Sum<S>, y: &Sum<S>| match (x, y) {
            (Sum::In(a), Sum::In(c)) => b1.equal(a, c),
            (Sum::Done(a), Sum::Done(c)) => i1.equal(a, c),
            _ => false,
        },
        move |r: &mut Rng| {
            if r.gen_bool(0.85) {
                Sum::In(b2.draw(r))
            } else {
                Sum::Done(i2.draw(r))
            }
        },
        move |x: &Sum<S>| match x {
            Sum::In(a) => b3.show(a),
            Sum::Done(t) => format!("done {}", truncate(t, 5)),
        },
    )
    .with_sw(move |x, z1, z2| match x {
        Sum::In(a) => Sum::In(b4.sw(a, z1, z2)),
        Sum::Done(t) => Sum::Done(co_swap(t, z1, z2)),
    })
    .with_fr(move |v, x| match x {
        Sum::In(a) => b5.fresh(v, a),
        Sum::Done(t) => i3.fr(v, t),
    });
    let base = match b.supp.clone() {
        Some(sp) => base.with_supp(move |x| match x {
            Sum::In(a) => sp(a),
            Sum::Done(t) => i4.supp.as_ref().expect("iterm supp")(t),
        }),
        None => base,
    };
    let d = fc.dest.clone();
    let dest = move |x: &Sum<S>| match x {
        Sum::In(a) => match d(a) {
            FullStep::In(sh) => sh.map(Sum::In),
            FullStep::Exit(t) => t.shape().map(Sum::Done),
        },
        Sum::Done(t) => t.shape().map(Sum::Done),
    };
    let mut cm = CoModel::new(base, dest);
    if let Some(mem) = fc.member.clone() {
        let d = fc.dest.clone();
        cm = cm.with_member(move |x, y, s| {
            let handle = |t: &CoTerm, s: &Sum<S>| match (co_dest(t), s) {
                (CoDest::L(h), Sum::Done(u)) => h.admits(y, u, EqMode::auto(&[t, u], depth)).unwrap_or(false),
                _ => false,
            };
            match x {
                Sum::In(a) => match (d(a), s) {
                    (FullStep::In(Shape::L(..)), Sum::In(c)) => mem(a, y, c),
                    (FullStep::Exit(t), _) => handle(&t, s),
                    _ => false,
                },
                Sum::Done(t) => handle(t, s),
            }
        });
    }
    if let Some(k) = fc.key.clone() {
        cm = cm.with_key(move |x| match x {
            Sum::In(a) => {
                let mut v = vec![0];
                v.extend(k(a));
                v
            }
            Sum::Done(t) => {
                let mut v = vec![1];
                v.extend(t.pres_key());
                v
            }
        });
    }
    cm
}

/// Full corecursion for cr5: corecursion over the sum comodel, started on
/// the left summand.
pub fn full_corec5<S: Clone + Send + Sync + 'static>(
    fc: &FullCoModel<S>,
    depth: usize,
) -> Result<impl Fn(&S) -> CoTerm, NomError> {
    let c = corec(5, &sum_comodel(fc, depth))?;
    Ok(move |s: &S| c.apply(&Sum::In(s.clone())))
}

/// A state of the parallel-substitution comodel: an iterm under an
/// environment, with the environment's support cached.
#[derive(Clone)]
pub struct PsState {
    pub t: CoTerm,
    pub rho: Env,
    supp: Arc<BTreeSet<Var>>,
}

impl PsState {
    pub fn new(t: CoTerm, rho: Env) -> Result<PsState, NomError> {
        let supp = Arc::new(rho.supp()?);
        Ok(PsState { t, rho, supp })
    }

    pub fn env_supp(&self) -> &BTreeSet<Var> {
        &self.supp
    }

    fn swap(&self, a: Var, b: Var) -> PsState {
        PsState {
            t: co_swap(&self.t, a, b),
            rho: self.rho.swap(a, b),
            supp: Arc::new(self.supp.iter().map(|x| x.swapped(a, b)).collect()),
        }
    }

    fn with_term(&self, t: CoTerm) -> PsState {
        PsState { t, ..self.clone() }
    }
}

impl fmt::Debug for PsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", truncate(&self.t, 5), self.rho)
    }
}

/// A random environment binding up to two pool variables to regular iterms.
pub fn random_env(rng: &mut Rng, pool: &[Var]) -> Env {
    let mut rho = Env::identity();
    for _ in 0..rng.gen_range(0..=2) {
        let x = pool[rng.gen_range(0..pool.len())];
        rho = rho.with(x, random_coterm(rng, pool));
    }
    rho
}

/// The full cr5 comodel computing parallel substitution: variables exit to
/// their image, abstractions pick a binder outside the environment's
/// support.
pub fn psubst_comodel(depth: usize) -> FullCoModel<PsState> {
    let pool = crate::gen::default_pool();
    let eq = co_eq(depth);
    let base = Model::new(
        "psubst",
        move |a: &PsState, b: &PsState| eq(&a.t, &b.t) && a.rho.alpha_eq(&b.rho, EqMode::Exact).unwrap_or(false),
        move |r: &mut Rng| {
            let t = random_coterm(r, &pool);
            PsState::new(t, random_env(r, &pool)).expect("regular images")
        },
        |s: &PsState| format!("{s:?}"),
    )
    .with_sw(|s: &PsState, a, b| s.swap(a, b))
    .with_fr(move |x, s: &PsState| !s.supp.contains(&x) && co_fresh_auto(x, &s.t, depth))
    .with_supp(move |s: &PsState| {
        let mut out = co_fv_any(&s.t, depth);
        out.extend(s.supp.iter().copied());
        out
    });
    let dest = |s: &PsState| match co_dest(&s.t) {
        CoDest::V(x) => FullStep::Exit(s.rho.get(x)),
        CoDest::A(a, b) => FullStep::In(Shape::A(s.with_term(a), s.with_term(b))),
        CoDest::L(h) => {
            let (x, b) = h.extract(&s.supp);
            FullStep::In(Shape::L(x, s.with_term(b)))
        }
    };
    let member = move |s: &PsState, y: Var, c: &PsState| match co_dest(&s.t) {
        CoDest::L(h) => {
            !s.supp.contains(&y)
                && s.rho.alpha_eq(&c.rho, EqMode::Exact).unwrap_or(false)
                && h.admits(y, &c.t, EqMode::auto(&[&s.t, &c.t], depth)).unwrap_or(false)
        }
        _ => false,
    };
    let key = |s: &PsState| {
        let mut k = s.t.pres_key();
        for (x, t) in s.rho.modified() {
            k.push(u64::MAX);
            k.push(x.0 as u64);
            k.extend(t.pres_key());
        }
        k
    };
    FullCoModel { base, dest: Arc::new(dest), member: Some(Arc::new(member)), key: Some(Arc::new(key)) }
}

/// Parallel substitution by full corecursion.
pub fn psubst_corec(t: &CoTerm, rho: &Env, depth: usize) -> Result<CoTerm, NomError> {
    let f = full_corec5(&psubst_comodel(depth), depth)?;
    Ok(f(&PsState::new(t.clone(), rho.clone())?))
}

/// Default depth re-exported for callers that do not pick one.
pub const DEPTH: usize = DEFAULT_DEPTH;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infinitary::{embed, fix, psubst};

    fn cfg(n: usize) -> CheckCfg {
        CheckCfg::with_seed(7, n)
    }

    #[test]
    fn suites_have_pinned_lengths() {
        let lens: Vec<usize> = [1, 2, 3, 5, 6, 7, 8, 9].iter().map(|i| coprops_of(*i).unwrap().len()).collect();
        assert_eq!(lens, vec![7, 10, 8, 11, 12, 16, 12, 14]);
        assert_eq!(coprops_of(4), Err(NomError::BadCorecursor(4)));
    }

    #[test]
    fn names_round_trip() {
        for d in DProp::ALL {
            assert_eq!(CoProp::from_name(d.name()).unwrap(), CoProp::D(*d));
            assert_eq!(CoProp::from_name(d.ascii()).unwrap(), CoProp::D(*d));
        }
        assert_eq!(CoProp::from_name("SwBvr∞,2").unwrap(), CoProp::D(DProp::SwBvr2));
        assert_eq!(CoProp::from_name("PmId").unwrap(), CoProp::Alg(PropId::PmId));
    }

    #[test]
    fn iterms_satisfy_cr5() {
        let r = check_coprops(&iterm_comodel(DEPTH), 5, &cfg(60)).unwrap();
        assert!(r.ok(), "{r}");
    }

    #[test]
    fn corec_over_iterms_is_identity() {
        let cm = iterm_comodel(DEPTH);
        let mut rng = crate::gen::rng(3);
        for i in [1, 2, 3, 5, 6, 7, 8, 9] {
            let c = corec(i, &cm).unwrap();
            for _ in 0..10 {
                let t = cm.base.draw(&mut rng);
                let g = c.apply(&t);
                assert!(g.is_regular());
                assert!(co_alpha_eq(&g, &t, EqMode::Exact).unwrap(), "cr{i} {t}");
            }
        }
    }

    #[test]
    fn corec_paths() {
        let cm = iterm_comodel(DEPTH);
        assert_eq!(corec(7, &cm).unwrap().path, vec![7, 9, 5, 2]);
        assert_eq!(corec(1, &cm).unwrap().path, vec![1, 3, 6, 5, 2]);
        assert!(matches!(corec(4, &cm), Err(NomError::BadCorecursor(4))));
    }

    #[test]
    fn broken_swap_fails() {
        let cm = broken_swap_comodel(DEPTH);
        let l = check_coprop(&cm, CoProp::D(DProp::SwLm), Rebind::Swap, &cfg(200)).unwrap();
        assert!(!l.passed(), "{l}");
    }

    #[test]
    fn psubst_routes_agree() {
        let mut rng = crate::gen::rng(11);
        let pool = crate::gen::default_pool();
        for _ in 0..20 {
            let t = random_coterm(&mut rng, &pool);
            let rho = random_env(&mut rng, &pool);
            let a = psubst(&t, &rho).unwrap();
            let b = psubst_corec(&t, &rho, 20).unwrap();
            assert!(co_alpha_eq(&a, &b, EqMode::Depth(20)).unwrap(), "{t} {rho}");
        }
        let s = embed(&crate::term::parse("\\x. y x").unwrap());
        assert!(co_alpha_eq(&psubst_corec(&fix(), &Env::identity(), 20).unwrap(), &fix(), EqMode::Exact).unwrap());
        let _ = s;
    }
}
