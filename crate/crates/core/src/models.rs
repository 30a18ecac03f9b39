//! Signatures, model bundles over arbitrary carriers, the per-recursor law
//! suites, and a seeded sampling checker.
//!
//! A [`Model`] carries optional operations; its signature is the set of
//! operations present. Laws are checked by sampling instances, counting the
//! instances whose side conditions hold ("hits"), and keeping the first
//! counterexample as a replayable [`Instance`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::Rng as _;

use crate::error::NomError;
use crate::gen::{random_perm, random_perm_on, random_term, sub_rng, Rng, MAX_SIZE, POOL_SIZE};
use crate::perm::{Perm, Var};
use crate::report::{PropLine, PropReport};
use crate::term::{alpha_eq, Term};
use crate::varset::VarSet;

/// Operation and relation symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Vr,
    Ap,
    Lm,
    Pm,
    Sw,
    Sb,
    Ren,
    Fv,
    Fr,
}

impl Sym {
    pub const ALL: [Sym; 9] = [Sym::Vr, Sym::Ap, Sym::Lm, Sym::Pm, Sym::Sw, Sym::Sb, Sym::Ren, Sym::Fv, Sym::Fr];

    pub fn name(self) -> &'static str {
        match self {
            Sym::Vr => "vr",
            Sym::Ap => "ap",
            Sym::Lm => "lm",
            Sym::Pm => "pm",
            Sym::Sw => "sw",
            Sym::Sb => "sb",
            Sym::Ren => "ren",
            Sym::Fv => "fv",
            Sym::Fr => "fr",
        }
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

/// A subset of [`Sym`], stored as a bit set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Signature(u16);

impl Signature {
    pub fn of(syms: &[Sym]) -> Signature {
        Signature(syms.iter().fold(0, |acc, s| acc | s.bit()))
    }

    /// `{vr, ap, lm}` plus `extra`.
    pub fn ctor_plus(extra: &[Sym]) -> Signature {
        Signature::of(&[Sym::Vr, Sym::Ap, Sym::Lm]).union(Signature::of(extra))
    }

    pub fn contains(self, s: Sym) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn union(self, o: Signature) -> Signature {
        Signature(self.0 | o.0)
    }

    pub fn with(self, s: Sym) -> Signature {
        Signature(self.0 | s.bit())
    }

    pub fn without(self, s: Sym) -> Signature {
        Signature(self.0 & !s.bit())
    }

    pub fn is_subset(self, o: Signature) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn syms(self) -> Vec<Sym> {
        Sym::ALL.iter().copied().filter(|s| self.contains(*s)).collect()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.syms().into_iter().map(Sym::name).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Signature of recursor `i`.
pub fn sig_of(i: usize) -> Result<Signature, NomError> {
    use Sym::*;
    Ok(match i {
        1 | 2 => Signature::ctor_plus(&[Pm, Fv]),
        3 | 4 => Signature::ctor_plus(&[Sw, Fv]),
        5 | 6 => Signature::ctor_plus(&[Sw, Fr]),
        7 => Signature::ctor_plus(&[Sb, Fr]),
        8 => Signature::ctor_plus(&[Ren]),
        9 => Signature::ctor_plus(&[Ren, Fr]),
        _ => return Err(NomError::BadRecursor(i)),
    })
}

macro_rules! props {
    ($($id:ident = $name:literal : [$($s:ident),*];)*) => {
        /// The recursion-relevant laws, by name.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum PropId { $($id),* }

        impl PropId {
            pub const ALL: &'static [PropId] = &[$(PropId::$id),*];

            pub fn name(self) -> &'static str {
                match self { $(PropId::$id => $name),* }
            }

            /// Symbols the law mentions.
            pub fn syms(self) -> Signature {
                match self { $(PropId::$id => Signature::of(&[$(Sym::$s),*])),* }
            }
        }
    };
}

props! {
    SwVr = "SwVr": [Vr, Sw];
    SwAp = "SwAp": [Ap, Sw];
    SwLm = "SwLm": [Lm, Sw];
    SwId = "SwId": [Sw];
    SwCp = "SwCp": [Sw];
    SwIv = "SwIv": [Sw];
    SwFr = "SwFr": [Sw, Fr];
    FrSw = "FrSw": [Sw, Fr];
    SwFv = "SwFv": [Sw, Fv];
    FvSw = "FvSw": [Sw, Fv];
    SwCg = "SwCg": [Lm, Sw, Fr];
    SwBvr = "SwBvr": [Lm, Sw, Fr];
    PmVr = "PmVr": [Vr, Pm];
    PmAp = "PmAp": [Ap, Pm];
    PmLm = "PmLm": [Lm, Pm];
    PmId = "PmId": [Pm];
    PmCp = "PmCp": [Pm];
    PmFv = "PmFv": [Pm, Fv];
    FvPm = "FvPm": [Pm, Fv];
    PmBvr = "PmBvr": [Lm, Pm, Fv];
    RnVr = "RnVr": [Vr, Ren];
    RnAp = "RnAp": [Ap, Ren];
    RnLm1 = "RnLm1": [Lm, Ren];
    RnLm2 = "RnLm2": [Lm, Ren];
    RnCg = "RnCg": [Lm, Ren, Fr];
    RnBvr = "RnBvr": [Lm, Ren, Fr];
    RnBvr2 = "RnBvr2": [Lm, Ren];
    RnId = "RnId": [Ren];
    RnIm = "RnIm": [Ren];
    RnCh = "RnCh": [Ren];
    RnCm = "RnCm": [Ren];
    RnFr = "RnFr": [Ren, Fr];
    FrRn = "FrRn": [Ren, Fr];
    FrRn2 = "FrRn2": [Ren, Fr];
    RnChFr = "RnChFr": [Ren, Fr];
    SbVr = "SbVr": [Vr, Sb];
    SbAp = "SbAp": [Ap, Sb];
    SbLm = "SbLm": [Lm, Sb, Fr];
    SbCg = "SbCg": [Vr, Lm, Sb, Fr];
    SbBvr = "SbBvr": [Vr, Lm, Sb, Fr];
    SbId = "SbId": [Vr, Sb];
    SbIm = "SbIm": [Vr, Sb];
    SbCh = "SbCh": [Vr, Sb];
    SbCm = "SbCm": [Sb, Fr];
    SbFr = "SbFr": [Sb, Fr];
    FrSb = "FrSb": [Sb, Fr];
    SbChFr = "SbChFr": [Vr, Sb, Fr];
    FrVr = "FrVr": [Vr, Fr];
    FrAp = "FrAp": [Ap, Fr];
    FrLm = "FrLm": [Lm, Fr];
    FvVr = "FvVr": [Vr, Fv];
    FvAp = "FvAp": [Ap, Fv];
    FvLm = "FvLm": [Lm, Fv];
    FSupFv = "FSupFv": [Fv];
    FvDPm = "FvDPm": [Pm, Fv];
    FvDSw = "FvDSw": [Sw, Fv];
    FCB = "FCB": [Lm, Fv];
    FSupFr = "FSupFr": [Fr];
    FrDSw = "FrDSw": [Sw, Fr];
    FrDRn = "FrDRn": [Ren, Fr];
}

impl PropId {
    pub fn from_name(s: &str) -> Result<PropId, NomError> {
        PropId::ALL
            .iter()
            .copied()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| NomError::UnknownProperty(s.to_string()))
    }

    /// Laws whose evaluation consults the support oracle.
    pub fn needs_support(self) -> bool {
        use PropId::*;
        matches!(self, FvDPm | FvDSw | FSupFr | FrDSw | FrDRn)
    }
}

impl fmt::Display for PropId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The law suite of recursor `i`.
pub fn props_of(i: usize) -> Result<Vec<PropId>, NomError> {
    use PropId::*;
    Ok(match i {
        1 => vec![PmVr, PmAp, PmLm, PmId, PmCp, FvDPm, FCB],
        2 => vec![PmVr, PmAp, PmLm, PmId, PmCp, PmFv, FvVr, FvAp, FvLm],
        3 => vec![SwVr, SwAp, SwLm, SwId, SwIv, SwCp, FvDSw, FCB],
        4 => vec![SwVr, SwAp, SwLm, SwFv, FvVr, FvAp, FvLm],
        5 => vec![SwVr, SwAp, SwLm, SwBvr, FrVr, FrAp, FrLm],
        6 => vec![SwVr, SwAp, SwLm, SwCg, FrVr, FrAp, FrLm],
        7 => vec![SbVr, SbAp, SbLm, SbBvr, FrVr, FrAp, FrLm],
        8 => vec![RnVr, RnAp, RnLm1, RnLm2, RnBvr2, RnId, RnIm, RnCh, RnCm],
        9 => vec![RnVr, RnAp, RnLm1, RnBvr, FrVr, FrAp, FrLm],
        _ => return Err(NomError::BadRecursor(i)),
    })
}

type Eq<C> = Arc<dyn Fn(&C, &C) -> bool + Send + Sync>;
type Sample<C> = Arc<dyn Fn(&mut Rng) -> C + Send + Sync>;
type Show<C> = Arc<dyn Fn(&C) -> String + Send + Sync>;
type VrOp<C> = Arc<dyn Fn(Var) -> C + Send + Sync>;
type ApOp<C> = Arc<dyn Fn(&C, &C) -> C + Send + Sync>;
type LmOp<C> = Arc<dyn Fn(Var, &C) -> C + Send + Sync>;
type PmOp<C> = Arc<dyn Fn(&C, &Perm) -> C + Send + Sync>;
type SwOp<C> = Arc<dyn Fn(&C, Var, Var) -> C + Send + Sync>;
type SbOp<C> = Arc<dyn Fn(&C, &C, Var) -> C + Send + Sync>;
type FvOp<C> = Arc<dyn Fn(&C) -> VarSet + Send + Sync>;
type FrOp<C> = Arc<dyn Fn(Var, &C) -> bool + Send + Sync>;
type SuppOp<C> = Arc<dyn Fn(&C) -> BTreeSet<Var> + Send + Sync>;

/// Hypothesis readings for models that avoid a variable set `X`.
pub struct Enhancement<C> {
    pub x: BTreeSet<Var>,
    pub hyp_eq: Eq<C>,
    pub hyp_fresh: FrOp<C>,
}

impl<C> Clone for Enhancement<C> {
    fn clone(&self) -> Self {
        Enhancement { x: self.x.clone(), hyp_eq: self.hyp_eq.clone(), hyp_fresh: self.hyp_fresh.clone() }
    }
}

/// An operation bundle over carrier `C`.
///
/// `sw(c, x, y)` is `c[x ∧ y]`, `sb(c, s, x)` is `c[s/x]` and
/// `ren(c, y, x)` is `c[y/x]`.
pub struct Model<C> {
    pub name: String,
    pub eq: Eq<C>,
    pub sample: Sample<C>,
    pub show: Show<C>,
    pub vr: Option<VrOp<C>>,
    pub ap: Option<ApOp<C>>,
    pub lm: Option<LmOp<C>>,
    pub pm: Option<PmOp<C>>,
    pub sw: Option<SwOp<C>>,
    pub sb: Option<SbOp<C>>,
    pub ren: Option<SwOp<C>>,
    pub fv: Option<FvOp<C>>,
    pub fr: Option<FrOp<C>>,
    pub supp: Option<SuppOp<C>>,
    pub enh: Option<Enhancement<C>>,
    /// Equality is only sampled; reports say so.
    pub approx: bool,
}

impl<C> Clone for Model<C> {
    fn clone(&self) -> Self {
        Model {
            name: self.name.clone(),
            eq: self.eq.clone(),
            sample: self.sample.clone(),
            show: self.show.clone(),
            vr: self.vr.clone(),
            ap: self.ap.clone(),
            lm: self.lm.clone(),
            pm: self.pm.clone(),
            sw: self.sw.clone(),
            sb: self.sb.clone(),
            ren: self.ren.clone(),
            fv: self.fv.clone(),
            fr: self.fr.clone(),
            supp: self.supp.clone(),
            enh: self.enh.clone(),
            approx: self.approx,
        }
    }
}

impl<C: 'static> Model<C> {
    pub fn new(
        name: impl Into<String>,
        eq: impl Fn(&C, &C) -> bool + Send + Sync + 'static,
        sample: impl Fn(&mut Rng) -> C + Send + Sync + 'static,
        show: impl Fn(&C) -> String + Send + Sync + 'static,
    ) -> Model<C> {
        Model {
            name: name.into(),
            eq: Arc::new(eq),
            sample: Arc::new(sample),
            show: Arc::new(show),
            vr: None,
            ap: None,
            lm: None,
            pm: None,
            sw: None,
            sb: None,
            ren: None,
            fv: None,
            fr: None,
            supp: None,
            enh: None,
            approx: false,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
    pub fn approximate(mut self) -> Self {
        self.approx = true;
        self
    }
    /// Model name for report titles.
    pub fn label(&self) -> String {
        if self.approx {
            format!("{} [approximate]", self.name)
        } else {
            self.name.clone()
        }
    }
    pub fn with_vr(mut self, f: impl Fn(Var) -> C + Send + Sync + 'static) -> Self {
        self.vr = Some(Arc::new(f));
        self
    }
    pub fn with_ap(mut self, f: impl Fn(&C, &C) -> C + Send + Sync + 'static) -> Self {
        self.ap = Some(Arc::new(f));
        self
    }
    pub fn with_lm(mut self, f: impl Fn(Var, &C) -> C + Send + Sync + 'static) -> Self {
        self.lm = Some(Arc::new(f));
        self
    }
    pub fn with_pm(mut self, f: impl Fn(&C, &Perm) -> C + Send + Sync + 'static) -> Self {
        self.pm = Some(Arc::new(f));
        self
    }
    pub fn with_sw(mut self, f: impl Fn(&C, Var, Var) -> C + Send + Sync + 'static) -> Self {
        self.sw = Some(Arc::new(f));
        self
    }
    pub fn with_sb(mut self, f: impl Fn(&C, &C, Var) -> C + Send + Sync + 'static) -> Self {
        self.sb = Some(Arc::new(f));
        self
    }
    pub fn with_ren(mut self, f: impl Fn(&C, Var, Var) -> C + Send + Sync + 'static) -> Self {
        self.ren = Some(Arc::new(f));
        self
    }
    pub fn with_fv(mut self, f: impl Fn(&C) -> VarSet + Send + Sync + 'static) -> Self {
        self.fv = Some(Arc::new(f));
        self
    }
    pub fn with_fr(mut self, f: impl Fn(Var, &C) -> bool + Send + Sync + 'static) -> Self {
        self.fr = Some(Arc::new(f));
        self
    }
    pub fn with_supp(mut self, f: impl Fn(&C) -> BTreeSet<Var> + Send + Sync + 'static) -> Self {
        self.supp = Some(Arc::new(f));
        self
    }
    pub fn with_sample(mut self, f: impl Fn(&mut Rng) -> C + Send + Sync + 'static) -> Self {
        self.sample = Arc::new(f);
        self
    }

    /// The symbols whose operations are present.
    pub fn signature(&self) -> Signature {
        let mut s = Signature::default();
        let pairs: [(bool, Sym); 9] = [
            (self.vr.is_some(), Sym::Vr),
            (self.ap.is_some(), Sym::Ap),
            (self.lm.is_some(), Sym::Lm),
            (self.pm.is_some(), Sym::Pm),
            (self.sw.is_some(), Sym::Sw),
            (self.sb.is_some(), Sym::Sb),
            (self.ren.is_some(), Sym::Ren),
            (self.fv.is_some(), Sym::Fv),
            (self.fr.is_some(), Sym::Fr),
        ];
        for (present, sym) in pairs {
            if present {
                s = s.with(sym);
            }
        }
        s
    }

    /// Drops every operation outside `sig`.
    pub fn restrict(&self, sig: Signature) -> Model<C> {
        let mut m = self.clone();
        if !sig.contains(Sym::Vr) {
            m.vr = None;
        }
        if !sig.contains(Sym::Ap) {
            m.ap = None;
        }
        if !sig.contains(Sym::Lm) {
            m.lm = None;
        }
        if !sig.contains(Sym::Pm) {
            m.pm = None;
        }
        if !sig.contains(Sym::Sw) {
            m.sw = None;
        }
        if !sig.contains(Sym::Sb) {
            m.sb = None;
        }
        if !sig.contains(Sym::Ren) {
            m.ren = None;
        }
        if !sig.contains(Sym::Fv) {
            m.fv = None;
        }
        if !sig.contains(Sym::Fr) {
            m.fr = None;
        }
        m
    }

    pub fn require(&self, sig: Signature, needed_by: &str) -> Result<(), NomError> {
        let have = self.signature();
        for s in sig.syms() {
            if !have.contains(s) {
                return Err(NomError::MissingOp {
                    model: self.name.clone(),
                    op: s.name(),
                    needed_by: needed_by.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn equal(&self, a: &C, b: &C) -> bool {
        (self.eq)(a, b)
    }
    pub fn show(&self, c: &C) -> String {
        (self.show)(c)
    }
    pub fn draw(&self, rng: &mut Rng) -> C {
        (self.sample)(rng)
    }
    pub fn vr(&self, x: Var) -> C {
        (self.vr.as_ref().expect("vr"))(x)
    }
    pub fn ap(&self, a: &C, b: &C) -> C {
        (self.ap.as_ref().expect("ap"))(a, b)
    }
    pub fn lm(&self, x: Var, c: &C) -> C {
        (self.lm.as_ref().expect("lm"))(x, c)
    }
    pub fn pm(&self, c: &C, s: &Perm) -> C {
        (self.pm.as_ref().expect("pm"))(c, s)
    }
    pub fn sw(&self, c: &C, x: Var, y: Var) -> C {
        (self.sw.as_ref().expect("sw"))(c, x, y)
    }
    pub fn sb(&self, c: &C, s: &C, x: Var) -> C {
        (self.sb.as_ref().expect("sb"))(c, s, x)
    }
    pub fn ren(&self, c: &C, y: Var, x: Var) -> C {
        (self.ren.as_ref().expect("ren"))(c, y, x)
    }
    pub fn fv(&self, c: &C) -> VarSet {
        (self.fv.as_ref().expect("fv"))(c)
    }
    pub fn fr(&self, x: Var, c: &C) -> bool {
        (self.fr.as_ref().expect("fr"))(x, c)
    }

    /// Freshness as the model sees it: `fr` if present, else `fv`, else the
    /// support oracle.
    pub fn fresh(&self, x: Var, c: &C) -> bool {
        if let Some(fr) = &self.fr {
            fr(x, c)
        } else if let Some(fv) = &self.fv {
            !fv(c).contains(x)
        } else if let Some(s) = &self.supp {
            !s(c).contains(&x)
        } else {
            false
        }
    }

    /// Freshness in hypothesis position.
    pub fn hyp_fresh(&self, x: Var, c: &C) -> bool {
        match &self.enh {
            Some(e) => (e.hyp_fresh)(x, c),
            None => self.fresh(x, c),
        }
    }

    /// Equality in hypothesis position.
    pub fn hyp_eq(&self, a: &C, b: &C) -> bool {
        match &self.enh {
            Some(e) => (e.hyp_eq)(a, b),
            None => self.equal(a, b),
        }
    }

    /// The avoided set `X` (empty for plain models).
    pub fn avoided(&self) -> BTreeSet<Var> {
        self.enh.as_ref().map(|e| e.x.clone()).unwrap_or_default()
    }

    /// The first [`POOL_SIZE`] variables outside `X`.
    pub fn pool(&self) -> Vec<Var> {
        let x = self.avoided();
        (0..).map(Var).filter(|v| !x.contains(v)).take(POOL_SIZE as usize).collect()
    }
}

/// A law instance: the variables, carrier elements and permutations it was
/// instantiated with.
#[derive(Clone, Debug)]
pub struct Instance<C> {
    pub vars: Vec<Var>,
    pub elems: Vec<C>,
    pub perms: Vec<Perm>,
}

impl<C> Instance<C> {
    pub fn new(vars: Vec<Var>, elems: Vec<C>) -> Instance<C> {
        Instance { vars, elems, perms: Vec::new() }
    }

    pub fn render(&self, show: &dyn Fn(&C) -> String) -> String {
        let vs: Vec<String> = self.vars.iter().map(|v| v.to_string()).collect();
        let es: Vec<String> = self.elems.iter().map(show).collect();
        let ps: Vec<String> = self.perms.iter().map(|p| p.to_string()).collect();
        let mut s = format!("vars=[{}] elems=[{}]", vs.join(","), es.join(" | "));
        if !ps.is_empty() {
            s.push_str(&format!(" perms=[{}]", ps.join(",")));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Side conditions did not hold.
    Vacuous,
    Holds,
    Fails,
}

impl Outcome {
    fn of(b: bool) -> Outcome {
        if b {
            Outcome::Holds
        } else {
            Outcome::Fails
        }
    }

    fn guard(hyp: bool, concl: impl FnOnce() -> bool) -> Outcome {
        if hyp {
            Outcome::of(concl())
        } else {
            Outcome::Vacuous
        }
    }
}

/// Sampling parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckCfg {
    pub seed: u64,
    pub samples: usize,
    pub min_hits: usize,
    pub fcb_candidates: usize,
    pub probes: usize,
    /// Extra sampling rounds allowed, as a multiple of `samples`, when hits
    /// stay below `min_hits`.
    pub budget_factor: usize,
}

impl Default for CheckCfg {
    fn default() -> Self {
        CheckCfg { seed: 0, samples: 300, min_hits: 20, fcb_candidates: 8, probes: 3, budget_factor: 20 }
    }
}

impl CheckCfg {
    pub fn with_seed(seed: u64, samples: usize) -> CheckCfg {
        CheckCfg { seed, samples, ..Default::default() }
    }
}

/// `k` least variables outside `avoid`.
pub(crate) fn probes_outside(avoid: &BTreeSet<Var>, k: usize) -> Vec<Var> {
    (0..).map(Var).filter(|v| !avoid.contains(v)).take(k).collect()
}

struct Gen<'a, C> {
    m: &'a Model<C>,
    pool: Vec<Var>,
    x: BTreeSet<Var>,
    rng: Rng,
}

impl<C: Clone + 'static> Gen<'_, C> {
    fn var(&mut self) -> Var {
        self.pool[self.rng.gen_range(0..self.pool.len())]
    }

    fn var_not(&mut self, avoid: &[Var]) -> Option<Var> {
        let c: Vec<Var> = self.pool.iter().copied().filter(|v| !avoid.contains(v)).collect();
        if c.is_empty() {
            None
        } else {
            Some(c[self.rng.gen_range(0..c.len())])
        }
    }

    fn elem(&mut self) -> C {
        self.m.draw(&mut self.rng)
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// A variable outside `avoid ∪ X` that is hypothesis-fresh for all `cs`.
    fn fresh(&mut self, avoid: &[Var], cs: &[&C]) -> Option<Var> {
        let top = self.pool.iter().map(|v| v.0).max().unwrap_or(0) + 12;
        let cands: Vec<Var> = (0..=top)
            .map(Var)
            .filter(|v| !avoid.contains(v) && !self.x.contains(v))
            .filter(|v| cs.iter().all(|c| self.m.hyp_fresh(*v, c)))
            .collect();
        if cands.is_empty() {
            return None;
        }
        // Prefer pool variables so that fresh choices collide with others.
        let in_pool: Vec<Var> = cands.iter().copied().filter(|v| self.pool.contains(v)).collect();
        let from = if !in_pool.is_empty() && self.coin(0.7) { in_pool } else { cands };
        Some(from[self.rng.gen_range(0..from.len())])
    }

    fn perm(&mut self) -> Perm {
        let pool = self.pool.clone();
        random_perm(&mut self.rng, &pool)
    }
}

impl PropId {
    fn gen<C: Clone + 'static>(self, g: &mut Gen<'_, C>) -> Option<Instance<C>> {
        use PropId::*;
        let m = g.m;
        let inst = |vars: Vec<Var>, elems: Vec<C>| Some(Instance::new(vars, elems));
        match self {
            SwVr | PmVr | RnVr | SbVr | FrVr | FvVr => {
                let (a, b, c) = (g.var(), g.var(), g.var());
                let mut i = Instance::new(vec![a, b, c], vec![]);
                if matches!(self, SbVr) {
                    i.elems.push(g.elem());
                }
                if matches!(self, PmVr) {
                    i.perms.push(g.perm());
                }
                Some(i)
            }
            SwAp | PmAp | RnAp | SbAp | FvAp => {
                let (s, t) = (g.elem(), g.elem());
                let (a, b) = (g.var(), g.var());
                let mut i = Instance::new(vec![a, b], vec![s, t]);
                if matches!(self, SbAp) {
                    i.elems.push(g.elem());
                }
                if matches!(self, PmAp) {
                    i.perms.push(g.perm());
                }
                Some(i)
            }
            SwLm | PmLm | FvLm | RnLm2 => {
                let t = g.elem();
                let (x, a, b) = (g.var(), g.var(), g.var());
                let mut i = Instance::new(vec![x, a, b], vec![t]);
                if matches!(self, PmLm) {
                    i.perms.push(g.perm());
                }
                Some(i)
            }
            SwId | SwIv | RnId | SbId | FSupFv | FSupFr => {
                let t = g.elem();
                let (a, b) = (g.var(), g.var());
                inst(vec![a, b], vec![t])
            }
            SwCp => {
                let t = g.elem();
                inst(vec![g.var(), g.var(), g.var(), g.var()], vec![t])
            }
            PmId => inst(vec![], vec![g.elem()]),
            PmCp => {
                let t = g.elem();
                let mut i = Instance::new(vec![], vec![t]);
                i.perms = vec![g.perm(), g.perm()];
                Some(i)
            }
            SwFr | SwFv => {
                let t = g.elem();
                let (x, y) = if g.coin(0.8) {
                    let x = g.fresh(&[], &[&t])?;
                    (x, g.fresh(&[], &[&t])?)
                } else {
                    (g.var(), g.var())
                };
                inst(vec![x, y], vec![t])
            }
            FrSw | FvSw | FvPm => {
                let t = g.elem();
                let mut i = Instance::new(vec![g.var(), g.var(), g.var()], vec![t]);
                if matches!(self, FvPm) {
                    i.perms.push(g.perm());
                }
                Some(i)
            }
            SwCg | RnCg | SbCg => {
                let t1 = g.elem();
                if g.coin(0.15) {
                    let t2 = g.elem();
                    return inst(vec![g.var(), g.var(), g.var()], vec![t1, t2]);
                }
                let z = g.fresh(&[], &[&t1])?;
                let x1 = g.var_not(&[z])?;
                let x2 = if g.coin(0.4) { x1 } else { g.fresh(&[z], &[&t1]).unwrap_or(x1) };
                let t2 = match self {
                    SwCg => m.sw(&m.sw(&t1, z, x1), z, x2),
                    RnCg => m.ren(&m.ren(&t1, z, x1), x2, z),
                    _ => m.sb(&m.sb(&t1, &m.vr(z), x1), &m.vr(x2), z),
                };
                inst(vec![z, x1, x2], vec![t1, t2])
            }
            SwBvr | PmBvr | RnBvr | SbBvr | RnChFr | SbChFr | RnFr | SbFr => {
                let t = g.elem();
                let x = g.var();
                let xp = if g.coin(0.85) { g.fresh(&[x], &[&t])? } else { g.var() };
                let mut i = Instance::new(vec![x, xp, g.var()], vec![t]);
                if matches!(self, SbChFr | SbFr) {
                    i.elems.push(g.elem());
                }
                Some(i)
            }
            PmFv => {
                let t = g.elem();
                let mut fresh = Vec::new();
                for _ in 0..3 {
                    if let Some(v) = g.fresh(&fresh, &[&t]) {
                        fresh.push(v);
                    }
                }
                let mut i = Instance::new(vec![], vec![t]);
                let p = if g.coin(0.85) { random_perm_on(&mut g.rng, &fresh) } else { g.perm() };
                i.perms.push(p);
                Some(i)
            }
            RnLm1 => {
                let t = g.elem();
                let y = g.var();
                let z = g.var();
                let x = if g.coin(0.85) { g.var_not(&[y, z])? } else { g.var() };
                inst(vec![x, y, z], vec![t])
            }
            RnBvr2 => {
                let t = g.elem();
                inst(vec![g.var(), g.var(), g.var()], vec![t])
            }
            RnIm | SbIm | RnCh | SbCh | RnCm => {
                let t = g.elem();
                let mut i = Instance::new(vec![g.var(), g.var(), g.var(), g.var()], vec![t]);
                if matches!(self, SbIm | SbCh) {
                    i.elems.push(g.elem());
                }
                Some(i)
            }
            FrRn | FrRn2 | FrSb => {
                let t = g.elem();
                let mut i = Instance::new(vec![g.var(), g.var(), g.var()], vec![t]);
                if matches!(self, FrSb) {
                    i.elems.push(g.elem());
                }
                Some(i)
            }
            SbLm => {
                let (t, s) = (g.elem(), g.elem());
                let z = g.var();
                let x = if g.coin(0.85) { g.fresh(&[z], &[&s])? } else { g.var() };
                inst(vec![x, z], vec![t, s])
            }
            SbCm => {
                let (t, s, u) = (g.elem(), g.elem(), g.elem());
                let (x, y) = if g.coin(0.85) {
                    let y = g.fresh(&[], &[&s])?;
                    (g.fresh(&[y], &[&u])?, y)
                } else {
                    (g.var(), g.var())
                };
                inst(vec![x, y], vec![t, s, u])
            }
            FrAp => {
                let (s, t) = (g.elem(), g.elem());
                let z = if g.coin(0.8) { g.fresh(&[], &[&s, &t])? } else { g.var() };
                inst(vec![z], vec![s, t])
            }
            FrLm => {
                let t = g.elem();
                let x = g.var();
                let z = match g.rng.gen_range(0..3) {
                    0 => x,
                    1 => g.fresh(&[], &[&t])?,
                    _ => g.var(),
                };
                inst(vec![z, x], vec![t])
            }
            FvDPm | FvDSw | FrDSw | FrDRn => {
                let t = g.elem();
                let supp: Vec<Var> = match &m.supp {
                    Some(s) => s(&t).into_iter().filter(|v| !g.x.contains(v)).collect(),
                    None => Vec::new(),
                };
                let x = if !supp.is_empty() && g.coin(0.5) { supp[g.rng.gen_range(0..supp.len())] } else { g.var() };
                inst(vec![x], vec![t])
            }
            FCB => inst(vec![g.var()], vec![g.elem()]),
        }
    }

    fn eval<C: Clone + 'static>(self, m: &Model<C>, i: &Instance<C>, probes: usize) -> Outcome {
        use PropId::*;
        let v = &i.vars;
        let e = &i.elems;
        let eq = |a: &C, b: &C| m.equal(a, b);
        let x_set = m.avoided();
        match self {
            SwVr => Outcome::of(eq(&m.sw(&m.vr(v[0]), v[1], v[2]), &m.vr(v[0].swapped(v[1], v[2])))),
            SwAp => {
                let l = m.sw(&m.ap(&e[0], &e[1]), v[0], v[1]);
                let r = m.ap(&m.sw(&e[0], v[0], v[1]), &m.sw(&e[1], v[0], v[1]));
                Outcome::of(eq(&l, &r))
            }
            SwLm => {
                let (x, a, b) = (v[0], v[1], v[2]);
                let l = m.sw(&m.lm(x, &e[0]), a, b);
                let r = m.lm(x.swapped(a, b), &m.sw(&e[0], a, b));
                Outcome::of(eq(&l, &r))
            }
            SwId => Outcome::of(eq(&m.sw(&e[0], v[0], v[0]), &e[0])),
            SwCp => {
                let (x, y, z1, z2) = (v[0], v[1], v[2], v[3]);
                let l = m.sw(&m.sw(&e[0], x, y), z1, z2);
                let r = m.sw(&m.sw(&e[0], z1, z2), x.swapped(z1, z2), y.swapped(z1, z2));
                Outcome::of(eq(&l, &r))
            }
            SwIv => Outcome::of(eq(&m.sw(&m.sw(&e[0], v[0], v[1]), v[0], v[1]), &e[0])),
            SwFr | SwFv => Outcome::guard(m.hyp_fresh(v[0], &e[0]) && m.hyp_fresh(v[1], &e[0]), || {
                eq(&m.sw(&e[0], v[0], v[1]), &e[0])
            }),
            FrSw => {
                let (z, x, y) = (v[0], v[1], v[2]);
                Outcome::of(m.fr(z, &m.sw(&e[0], x, y)) == m.fr(z.swapped(x, y), &e[0]))
            }
            FvSw => {
                let (z, x, y) = (v[0], v[1], v[2]);
                Outcome::of(m.fv(&m.sw(&e[0], x, y)).contains(z) == m.fv(&e[0]).contains(z.swapped(x, y)))
            }
            SwCg | RnCg | SbCg => {
                let (z, x1, x2) = (v[0], v[1], v[2]);
                let (t1, t2) = (&e[0], &e[1]);
                let hyp = z != x1
                    && z != x2
                    && m.hyp_fresh(z, t1)
                    && m.hyp_fresh(z, t2)
                    && match self {
                        SwCg => m.hyp_eq(&m.sw(t1, z, x1), &m.sw(t2, z, x2)),
                        RnCg => m.hyp_eq(&m.ren(t1, z, x1), &m.ren(t2, z, x2)),
                        _ => m.hyp_eq(&m.sb(t1, &m.vr(z), x1), &m.sb(t2, &m.vr(z), x2)),
                    };
                Outcome::guard(hyp, || eq(&m.lm(x1, t1), &m.lm(x2, t2)))
            }
            SwBvr | PmBvr | RnBvr | SbBvr => {
                let (x, xp) = (v[0], v[1]);
                let t = &e[0];
                let hyp = xp != x
                    && match self {
                        PmBvr => !m.fv(t).contains(xp) && (m.enh.is_none() || m.hyp_fresh(xp, t)),
                        _ => m.hyp_fresh(xp, t),
                    };
                Outcome::guard(hyp, || {
                    let body = match self {
                        SwBvr => m.sw(t, xp, x),
                        PmBvr => m.pm(t, &Perm::transposition(xp, x)),
                        RnBvr => m.ren(t, xp, x),
                        _ => m.sb(t, &m.vr(xp), x),
                    };
                    eq(&m.lm(x, t), &m.lm(xp, &body))
                })
            }
            PmVr => Outcome::of(eq(&m.pm(&m.vr(v[0]), &i.perms[0]), &m.vr(i.perms[0].apply(v[0])))),
            PmAp => {
                let p = &i.perms[0];
                let l = m.pm(&m.ap(&e[0], &e[1]), p);
                let r = m.ap(&m.pm(&e[0], p), &m.pm(&e[1], p));
                Outcome::of(eq(&l, &r))
            }
            PmLm => {
                let p = &i.perms[0];
                let l = m.pm(&m.lm(v[0], &e[0]), p);
                let r = m.lm(p.apply(v[0]), &m.pm(&e[0], p));
                Outcome::of(eq(&l, &r))
            }
            PmId => Outcome::of(eq(&m.pm(&e[0], &Perm::id()), &e[0])),
            PmCp => {
                let (s, t) = (&i.perms[0], &i.perms[1]);
                Outcome::of(eq(&m.pm(&m.pm(&e[0], s), t), &m.pm(&e[0], &t.compose(s))))
            }
            PmFv => {
                let p = &i.perms[0];
                let fv = m.fv(&e[0]);
                let hyp = p.support().iter().all(|z| !fv.contains(*z) && m.hyp_fresh(*z, &e[0]));
                Outcome::guard(hyp, || eq(&m.pm(&e[0], p), &e[0]))
            }
            FvPm => {
                let p = &i.perms[0];
                let z = v[0];
                let l = !m.fv(&m.pm(&e[0], p)).contains(z);
                let r = !m.fv(&e[0]).contains(p.inverse().apply(z));
                Outcome::of(l == r)
            }
            RnVr => Outcome::of(eq(&m.ren(&m.vr(v[0]), v[1], v[2]), &m.vr(v[0].renamed(v[1], v[2])))),
            RnAp => {
                let l = m.ren(&m.ap(&e[0], &e[1]), v[0], v[1]);
                let r = m.ap(&m.ren(&e[0], v[0], v[1]), &m.ren(&e[1], v[0], v[1]));
                Outcome::of(eq(&l, &r))
            }
            RnLm1 => {
                let (x, y, z) = (v[0], v[1], v[2]);
                Outcome::guard(x != y && x != z, || eq(&m.ren(&m.lm(x, &e[0]), y, z), &m.lm(x, &m.ren(&e[0], y, z))))
            }
            RnLm2 => {
                let (x, z) = (v[0], v[1]);
                let l = m.lm(x, &e[0]);
                Outcome::of(eq(&m.ren(&l, z, x), &l))
            }
            RnBvr2 => {
                let (x, xp, y) = (v[0], v[1], v[2]);
                Outcome::guard(y != xp, || {
                    let u = m.ren(&e[0], y, xp);
                    eq(&m.lm(x, &u), &m.lm(xp, &m.ren(&u, xp, x)))
                })
            }
            RnId => Outcome::of(eq(&m.ren(&e[0], v[0], v[0]), &e[0])),
            RnIm => {
                let (x1, x2, y) = (v[0], v[1], v[2]);
                Outcome::guard(x1 != y, || {
                    let a = m.ren(&e[0], x1, y);
                    eq(&m.ren(&a, x2, y), &a)
                })
            }
            RnCh => {
                let (y, x1, x2, x3) = (v[0], v[1], v[2], v[3]);
                Outcome::guard(y != x2, || {
                    let a = m.ren(&e[0], y, x2);
                    eq(&m.ren(&m.ren(&a, x2, x1), x3, x2), &m.ren(&a, x3, x1))
                })
            }
            RnCm => {
                let (x1, x2, y1, y2) = (v[0], v[1], v[2], v[3]);
                Outcome::guard(x2 != y1 && y1 != x1 && x1 != y2, || {
                    let l = m.ren(&m.ren(&e[0], x2, x1), y2, y1);
                    let r = m.ren(&m.ren(&e[0], y2, y1), x2, x1);
                    eq(&l, &r)
                })
            }
            RnFr | SbFr => {
                let y = v[1];
                Outcome::guard(m.hyp_fresh(y, &e[0]), || {
                    let r = if self == RnFr { m.ren(&e[0], v[2], y) } else { m.sb(&e[0], &e[1], y) };
                    eq(&r, &e[0])
                })
            }
            FrRn => {
                let (z, x, y) = (v[0], v[1], v[2]);
                let t = &e[0];
                let l = m.fr(z, &m.ren(t, x, y));
                let r = (z == y || m.fr(z, t)) && (m.fr(y, t) || x != z);
                Outcome::of(l == r)
            }
            FrRn2 => {
                let (z, x, y) = (v[0], v[1], v[2]);
                let t = &e[0];
                Outcome::guard(m.hyp_fresh(z.renamed(x, y), &m.ren(t, x, y)), || m.fr(z, t))
            }
            RnChFr | SbChFr => {
                let (x1, x2, x3) = (v[0], v[1], v[2]);
                let t = &e[0];
                Outcome::guard(m.hyp_fresh(x2, t), || {
                    if self == RnChFr {
                        eq(&m.ren(&m.ren(t, x2, x1), x3, x2), &m.ren(t, x3, x1))
                    } else {
                        eq(&m.sb(&m.sb(t, &m.vr(x2), x1), &e[1], x2), &m.sb(t, &e[1], x1))
                    }
                })
            }
            SbVr => {
                let (x, z) = (v[0], v[1]);
                let s = &e[0];
                let r = if x == z { s.clone() } else { m.vr(x) };
                Outcome::of(eq(&m.sb(&m.vr(x), s, z), &r))
            }
            SbAp => {
                let s = &e[2];
                let l = m.sb(&m.ap(&e[0], &e[1]), s, v[0]);
                let r = m.ap(&m.sb(&e[0], s, v[0]), &m.sb(&e[1], s, v[0]));
                Outcome::of(eq(&l, &r))
            }
            SbLm => {
                let (x, z) = (v[0], v[1]);
                let (t, s) = (&e[0], &e[1]);
                Outcome::guard(x != z && m.hyp_fresh(x, s), || eq(&m.sb(&m.lm(x, t), s, z), &m.lm(x, &m.sb(t, s, z))))
            }
            SbId => Outcome::of(eq(&m.sb(&e[0], &m.vr(v[0]), v[0]), &e[0])),
            SbIm => {
                let (x1, y) = (v[0], v[1]);
                Outcome::guard(x1 != y, || {
                    let a = m.sb(&e[0], &m.vr(x1), y);
                    eq(&m.sb(&a, &e[1], y), &a)
                })
            }
            SbCh => {
                let (y, x1, x2) = (v[0], v[1], v[2]);
                let s = &e[1];
                Outcome::guard(y != x2, || {
                    let a = m.sb(&e[0], &m.vr(y), x2);
                    let l = m.sb(&m.sb(&a, &m.vr(x2), x1), s, x2);
                    eq(&l, &m.sb(&a, s, x1))
                })
            }
            SbCm => {
                let (x, y) = (v[0], v[1]);
                let (t, s, u) = (&e[0], &e[1], &e[2]);
                Outcome::guard(x != y && m.hyp_fresh(y, s) && m.hyp_fresh(x, u), || {
                    eq(&m.sb(&m.sb(t, s, x), u, y), &m.sb(&m.sb(t, u, y), s, x))
                })
            }
            FrSb => {
                let (z, y) = (v[0], v[1]);
                let (t, s) = (&e[0], &e[1]);
                let l = m.fr(z, &m.sb(t, s, y));
                let r = (z == y || m.fr(z, t)) && (m.fr(y, t) || m.fr(z, s));
                Outcome::of(l == r)
            }
            FrVr => Outcome::guard(v[0] != v[1], || m.fr(v[0], &m.vr(v[1]))),
            FrAp => {
                Outcome::guard(m.hyp_fresh(v[0], &e[0]) && m.hyp_fresh(v[0], &e[1]), || m.fr(v[0], &m.ap(&e[0], &e[1])))
            }
            FrLm => {
                let (z, x) = (v[0], v[1]);
                Outcome::guard(z == x || m.hyp_fresh(z, &e[0]), || m.fr(z, &m.lm(x, &e[0])))
            }
            FvVr => {
                let bound = VarSet::Finite(x_set.clone()).insert(v[0]);
                Outcome::of(m.fv(&m.vr(v[0])).is_subset(&bound))
            }
            FvAp => {
                let bound = VarSet::Finite(x_set.clone()).union(&m.fv(&e[0])).union(&m.fv(&e[1]));
                Outcome::of(m.fv(&m.ap(&e[0], &e[1])).is_subset(&bound))
            }
            FvLm => {
                let x = v[0];
                let bound = m.fv(&e[0]).remove(x).union(&VarSet::Finite(x_set.clone()));
                Outcome::of(m.fv(&m.lm(x, &e[0])).is_subset(&bound))
            }
            FSupFv => Outcome::of(m.fv(&e[0]).is_finite()),
            FvDPm | FvDSw => {
                let x = v[0];
                let c = &e[0];
                let finite = probe_finite(m, c, x, probes, |y| {
                    if self == FvDPm {
                        m.pm(c, &Perm::transposition(x, y))
                    } else {
                        m.sw(c, x, y)
                    }
                });
                Outcome::of(m.fv(c).contains(x) == !finite)
            }
            FrDSw | FrDRn => {
                let x = v[0];
                let c = &e[0];
                let finite =
                    probe_finite(m, c, x, probes, |y| if self == FrDSw { m.sw(c, x, y) } else { m.ren(c, y, x) });
                Outcome::of(m.fr(x, c) == finite)
            }
            FSupFr => {
                let c = &e[0];
                let mut avoid = support(m, c);
                avoid.extend(x_set.iter().copied());
                Outcome::of(probes_outside(&avoid, probes).into_iter().all(|y| m.fr(y, c)))
            }
            FCB => {
                let x = v[0];
                Outcome::of(!m.fv(&m.lm(x, &e[0])).contains(x))
            }
        }
    }
}

fn support<C: 'static>(m: &Model<C>, c: &C) -> BTreeSet<Var> {
    (m.supp.as_ref().expect("supp"))(c)
}

/// Decides "`{y | f(y) ≠ c}` is finite" by checking that `f(y) = c` for the
/// least `probes` variables outside `supp(c) ∪ {x} ∪ X`.
fn probe_finite<C: 'static>(m: &Model<C>, c: &C, x: Var, probes: usize, f: impl Fn(Var) -> C) -> bool {
    let mut avoid = support(m, c);
    avoid.insert(x);
    avoid.extend(m.avoided());
    probes_outside(&avoid, probes).into_iter().all(|y| m.equal(&f(y), c))
}

/// A law check result together with the first counterexample, if any.
pub struct Checked<C> {
    pub line: PropLine,
    pub cex: Option<Instance<C>>,
}

fn precheck<C: 'static>(m: &Model<C>, p: PropId) -> Result<(), NomError> {
    m.require(p.syms(), p.name())?;
    if p.needs_support() && m.supp.is_none() {
        return Err(NomError::MissingSupport(m.name.clone()));
    }
    Ok(())
}

/// Evaluates one law on sampled instances.
pub fn check_prop_detailed<C: Clone + 'static>(
    m: &Model<C>,
    p: PropId,
    cfg: &CheckCfg,
) -> Result<Checked<C>, NomError> {
    precheck(m, p)?;
    if p == PropId::FCB {
        return Ok(check_fcb(m, cfg));
    }
    let mut g = Gen { m, pool: m.pool(), x: m.avoided(), rng: sub_rng(cfg.seed, p.name()) };
    let budget = cfg.samples.max(1) * cfg.budget_factor.max(1);
    let (mut n, mut hits) = (0, 0);
    let mut cex = None;
    while n < budget && (n < cfg.samples || hits < cfg.min_hits) {
        n += 1;
        let Some(inst) = p.gen(&mut g) else { continue };
        match p.eval(m, &inst, cfg.probes) {
            Outcome::Vacuous => {}
            Outcome::Holds => hits += 1,
            Outcome::Fails => {
                hits += 1;
                if cex.is_none() {
                    cex = Some(inst);
                }
            }
        }
    }
    let pass = cex.is_none() && hits >= cfg.min_hits;
    let mut line = PropLine::new(p.name(), pass, n, hits).with_cex(cex.as_ref().map(|i| i.render(&*m.show)));
    if cex.is_none() && hits < cfg.min_hits {
        line = line.with_note("insufficient-hits");
    }
    Ok(Checked { line, cex })
}

/// Candidates are drawn outside the union of the finite free-variable sets
/// observed on the samples; the law passes if one candidate survives.
fn check_fcb<C: Clone + 'static>(m: &Model<C>, cfg: &CheckCfg) -> Checked<C> {
    let mut rng = sub_rng(cfg.seed, "FCB");
    let per = (cfg.samples / cfg.fcb_candidates.max(1)).max(cfg.min_hits);
    let samples: Vec<C> = (0..per).map(|_| m.draw(&mut rng)).collect();
    let mut seen = m.avoided();
    for c in &samples {
        if let Some(f) = m.fv(c).as_finite() {
            seen.extend(f.iter().copied());
        }
    }
    let cands = probes_outside(&seen, cfg.fcb_candidates);
    let (mut n, mut hits) = (0, 0);
    let mut first_cex = None;
    let mut survivor = None;
    for x in cands {
        let mut ok = true;
        for c in &samples {
            n += 1;
            hits += 1;
            if m.fv(&m.lm(x, c)).contains(x) {
                ok = false;
                if first_cex.is_none() {
                    first_cex = Some(Instance::new(vec![x], vec![c.clone()]));
                }
                break;
            }
        }
        if ok {
            survivor = Some(x);
            break;
        }
    }
    let pass = survivor.is_some();
    let note = match survivor {
        Some(x) => format!("heuristic,witness={x}"),
        None => format!("heuristic,refuted={}", cfg.fcb_candidates),
    };
    let cex = if pass { None } else { first_cex };
    let line = PropLine::new("FCB", pass, n, hits).with_cex(cex.as_ref().map(|i| i.render(&*m.show))).with_note(note);
    Checked { line, cex }
}

pub fn check_prop<C: Clone + 'static>(m: &Model<C>, p: PropId, cfg: &CheckCfg) -> Result<PropLine, NomError> {
    Ok(check_prop_detailed(m, p, cfg)?.line)
}

/// Checks every law of `suite`, in suite order.
pub fn check_props<C: Clone + 'static>(m: &Model<C>, suite: &[PropId], cfg: &CheckCfg) -> Result<PropReport, NomError> {
    for p in suite {
        precheck(m, *p)?;
    }
    let mut r = PropReport::new(format!("laws of {} (seed={}, samples={})", m.label(), cfg.seed, cfg.samples));
    for p in suite {
        r.push(check_prop(m, *p, cfg)?);
    }
    Ok(r)
}

/// Re-evaluates a stored instance.
pub fn replay<C: Clone + 'static>(m: &Model<C>, p: PropId, inst: &Instance<C>, probes: usize) -> Outcome {
    if p == PropId::FCB {
        return PropId::FCB.eval(m, inst, probes);
    }
    p.eval(m, inst, probes)
}

/// Evaluates a law instance at the term model with every operation.
pub fn check_term_property(p: PropId, inst: &Instance<Term>) -> bool {
    replay(&term_model_full(), p, inst, 3) != Outcome::Fails
}

fn term_sampler() -> impl Fn(&mut Rng) -> Term + Send + Sync + 'static {
    let pool = crate::gen::default_pool();
    move |rng: &mut Rng| random_term(rng, &pool, MAX_SIZE)
}

/// Terms with every operation and the free-variable support oracle.
pub fn term_model_full() -> Model<Term> {
    Model::new("term", alpha_eq, term_sampler(), |t: &Term| t.to_string())
        .with_vr(Term::vr)
        .with_ap(|a: &Term, b: &Term| Term::ap(a.clone(), b.clone()))
        .with_lm(|x, t: &Term| Term::lm(x, t.clone()))
        .with_pm(|t: &Term, s| t.permute(s))
        .with_sw(|t: &Term, x, y| t.swap(x, y))
        .with_sb(|t: &Term, s: &Term, x| t.subst(s, x))
        .with_ren(|t: &Term, y, x| t.rename(y, x))
        .with_fv(|t: &Term| t.fv())
        .with_fr(|x, t: &Term| t.fresh(x))
        .with_supp(|t: &Term| t.fv_set())
}

/// The term model restricted to the signature of recursor `i`.
pub fn term_model(i: usize) -> Result<Model<Term>, NomError> {
    Ok(term_model_full().restrict(sig_of(i)?).named(format!("term{i}")))
}

/// A model whose operations take term/value pairs and which avoids the
/// variables in `x`.
pub struct EnhancedModel<C> {
    pub name: String,
    pub x: BTreeSet<Var>,
    pub eq: Eq<C>,
    pub show: Show<C>,
    /// Draws from the domain.
    pub sample: Sample<(Term, C)>,
    pub vr: Option<VrOp<C>>,
    pub ap: Option<Arc<dyn Fn(&(Term, C), &(Term, C)) -> C + Send + Sync>>,
    pub lm: Option<Arc<dyn Fn(Var, &(Term, C)) -> C + Send + Sync>>,
    pub pm: Option<Arc<dyn Fn(&(Term, C), &Perm) -> C + Send + Sync>>,
    pub sw: Option<Arc<dyn Fn(&(Term, C), Var, Var) -> C + Send + Sync>>,
    pub sb: Option<Arc<dyn Fn(&(Term, C), &(Term, C), Var) -> C + Send + Sync>>,
    pub ren: Option<Arc<dyn Fn(&(Term, C), Var, Var) -> C + Send + Sync>>,
    pub fv: Option<Arc<dyn Fn(&(Term, C)) -> VarSet + Send + Sync>>,
    pub fr: Option<Arc<dyn Fn(Var, &(Term, C)) -> bool + Send + Sync>>,
    pub supp: Option<Arc<dyn Fn(&(Term, C)) -> BTreeSet<Var> + Send + Sync>>,
}

impl<C> Clone for EnhancedModel<C> {
    fn clone(&self) -> Self {
        EnhancedModel {
            name: self.name.clone(),
            x: self.x.clone(),
            eq: self.eq.clone(),
            show: self.show.clone(),
            sample: self.sample.clone(),
            vr: self.vr.clone(),
            ap: self.ap.clone(),
            lm: self.lm.clone(),
            pm: self.pm.clone(),
            sw: self.sw.clone(),
            sb: self.sb.clone(),
            ren: self.ren.clone(),
            fv: self.fv.clone(),
            fr: self.fr.clone(),
            supp: self.supp.clone(),
        }
    }
}

impl<C: Clone + Send + Sync + 'static> EnhancedModel<C> {
    pub fn new(
        name: impl Into<String>,
        x: BTreeSet<Var>,
        eq: impl Fn(&C, &C) -> bool + Send + Sync + 'static,
        sample: impl Fn(&mut Rng) -> (Term, C) + Send + Sync + 'static,
        show: impl Fn(&C) -> String + Send + Sync + 'static,
    ) -> Self {
        EnhancedModel {
            name: name.into(),
            x,
            eq: Arc::new(eq),
            show: Arc::new(show),
            sample: Arc::new(sample),
            vr: None,
            ap: None,
            lm: None,
            pm: None,
            sw: None,
            sb: None,
            ren: None,
            fv: None,
            fr: None,
            supp: None,
        }
    }

    pub fn signature(&self) -> Signature {
        self.as_pair_model().signature()
    }

    /// The same structure as a plain model over pairs. Conclusions compare
    /// the value component; hypotheses are read on both components.
    pub fn as_pair_model(&self) -> Model<(Term, C)> {
        let eq = self.eq.clone();
        let show = self.show.clone();
        let sample = self.sample.clone();
        let mut m: Model<(Term, C)> = Model::new(
            self.name.clone(),
            move |a: &(Term, C), b: &(Term, C)| eq(&a.1, &b.1),
            move |rng: &mut Rng| sample(rng),
            move |p: &(Term, C)| format!("({} , {})", p.0, show(&p.1)),
        );
        if let Some(f) = self.vr.clone() {
            m = m.with_vr(move |x| (Term::vr(x), f(x)));
        }
        if let Some(f) = self.ap.clone() {
            m = m.with_ap(move |a, b| (Term::ap(a.0.clone(), b.0.clone()), f(a, b)));
        }
        if let Some(f) = self.lm.clone() {
            m = m.with_lm(move |x, a| (Term::lm(x, a.0.clone()), f(x, a)));
        }
        if let Some(f) = self.pm.clone() {
            m = m.with_pm(move |a, s| (a.0.permute(s), f(a, s)));
        }
        if let Some(f) = self.sw.clone() {
            m = m.with_sw(move |a, x, y| (a.0.swap(x, y), f(a, x, y)));
        }
        if let Some(f) = self.sb.clone() {
            m = m.with_sb(move |a, s, x| (a.0.subst(&s.0, x), f(a, s, x)));
        }
        if let Some(f) = self.ren.clone() {
            m = m.with_ren(move |a, y, x| (a.0.rename(y, x), f(a, y, x)));
        }
        if let Some(f) = self.fv.clone() {
            m = m.with_fv(move |a| f(a));
        }
        if let Some(f) = self.fr.clone() {
            m = m.with_fr(move |x, a| f(x, a));
        }
        if let Some(f) = self.supp.clone() {
            m = m.with_supp(move |a| f(a));
        }
        let eqc = self.eq.clone();
        let x = self.x.clone();
        let (fr, fv) = (self.fr.clone(), self.fv.clone());
        let xs = x.clone();
        m.enh = Some(Enhancement {
            x,
            hyp_eq: Arc::new(move |a, b| alpha_eq(&a.0, &b.0) && eqc(&a.1, &b.1)),
            hyp_fresh: Arc::new(move |z, a| {
                if !a.0.fresh(z) {
                    return false;
                }
                // Every variable outside X that is fresh for the term must be
                // fresh for the pair.
                if let Some(fr) = &fr {
                    let names = a.0.all_names();
                    let top = names.iter().map(|v| v.0).max().unwrap_or(0).max(POOL_SIZE) + 3;
                    (0..=top).map(Var).filter(|v| !xs.contains(v) && a.0.fresh(*v)).all(|v| fr(v, a))
                } else if let Some(fv) = &fv {
                    let bound = VarSet::Finite(xs.clone()).union(&a.0.fv());
                    fv(a).is_subset(&bound)
                } else {
                    true
                }
            }),
        });
        m
    }
}

/// Checks a suite on an enhanced model, reading every law in its
/// `X`-avoiding form.
pub fn check_enhanced_props<C: Clone + Send + Sync + 'static>(
    m: &EnhancedModel<C>,
    suite: &[PropId],
    cfg: &CheckCfg,
) -> Result<PropReport, NomError> {
    check_props(&m.as_pair_model(), suite, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_pinned() {
        let names = |i| props_of(i).unwrap().iter().map(|p| p.name()).collect::<Vec<_>>().join(",");
        assert_eq!(names(1), "PmVr,PmAp,PmLm,PmId,PmCp,FvDPm,FCB");
        assert_eq!(names(6), "SwVr,SwAp,SwLm,SwCg,FrVr,FrAp,FrLm");
        assert_eq!(names(8), "RnVr,RnAp,RnLm1,RnLm2,RnBvr2,RnId,RnIm,RnCh,RnCm");
        assert!(props_of(0).is_err());
        assert!(props_of(10).is_err());
    }

    #[test]
    fn there_are_sixty_laws() {
        assert_eq!(PropId::ALL.len(), 60);
        for p in PropId::ALL {
            assert_eq!(PropId::from_name(p.name()).unwrap(), *p);
        }
    }

    #[test]
    fn suite_symbols_fit_signatures() {
        for i in 1..=9 {
            let sig = sig_of(i).unwrap();
            for p in props_of(i).unwrap() {
                assert!(p.syms().is_subset(sig), "{p} in r{i}");
            }
        }
    }

    #[test]
    fn signature_follows_ops() {
        let m = term_model(6).unwrap();
        assert_eq!(m.signature().to_string(), "{vr,ap,lm,sw,fr}");
        assert!(m.restrict(Signature::ctor_plus(&[])).sw.is_none());
    }

    #[test]
    fn missing_op_is_reported() {
        let m = term_model(8).unwrap();
        let e = check_prop(&m, PropId::SwVr, &CheckCfg::default()).unwrap_err();
        assert!(matches!(e, NomError::MissingOp { op: "sw", .. }));
    }

    #[test]
    fn missing_support_is_reported() {
        let mut m = term_model(1).unwrap();
        m.supp = None;
        let e = check_prop(&m, PropId::FvDPm, &CheckCfg::default()).unwrap_err();
        assert!(matches!(e, NomError::MissingSupport(_)));
    }

    #[test]
    fn swcg_worked_instance() {
        let inst = Instance::new(vec![Var(2), Var(0), Var(1)], vec![Term::vr(Var(0)), Term::vr(Var(1))]);
        assert!(check_term_property(PropId::SwCg, &inst));
        assert_eq!(replay(&term_model_full(), PropId::SwCg, &inst, 3), Outcome::Holds);
    }

    #[test]
    fn full_term_model_passes_everything() {
        let cfg = CheckCfg::with_seed(3, 120);
        let r = check_props(&term_model_full(), PropId::ALL, &cfg).unwrap();
        assert!(r.ok(), "{r}");
    }

    #[test]
    fn deterministic_given_seed() {
        let m = term_model(6).unwrap();
        let cfg = CheckCfg::with_seed(11, 60);
        let a = check_props(&m, &props_of(6).unwrap(), &cfg).unwrap();
        let b = check_props(&m, &props_of(6).unwrap(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn broken_model_fails_and_replays() {
        let m = term_model(6).unwrap().with_lm(|_, t: &Term| t.clone()).named("broken");
        let c = check_prop_detailed(&m, PropId::FrLm, &CheckCfg::with_seed(5, 200)).unwrap();
        assert!(!c.line.passed());
        let inst = c.cex.unwrap();
        assert_eq!(replay(&m, PropId::FrLm, &inst, 3), Outcome::Fails);
    }
}
