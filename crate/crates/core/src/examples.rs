//! Worked definitions, each obtained from a recursor applied to a concrete
//! model, plus two law-breaking control models.
//!
//! Every exposed function checks its model's law suite once, on first use.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use rand::Rng as _;

use crate::gen::{default_pool, pick_var, random_term, rng, Rng, MAX_SIZE};
use crate::models::{check_enhanced_props, check_props, props_of, term_model, CheckCfg, EnhancedModel, Model};
use crate::perm::{least_unused, Perm, Var};
use crate::recursors::{rec, rec_enhanced, EnhancedRecursion, Recursion};
use crate::term::{alpha_eq, DestView, Node, Term};
use crate::transforms::min_submodel;
use crate::varset::VarSet;

fn self_check<C: Clone + 'static>(i: usize, m: &Model<C>) {
    let r = check_props(m, &props_of(i).expect("suite"), &CheckCfg::with_seed(0, 300)).expect("signature");
    assert!(r.ok(), "self-test of {} failed:\n{r}", m.name);
}

// ---------------------------------------------------------------- noccs

/// Free-occurrence counts; absent keys count zero.
pub type Occ = BTreeMap<Var, u32>;

fn show_occ(m: &Occ) -> String {
    let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    format!("{{{}}}", parts.join(","))
}

fn sample_occ(rng: &mut Rng) -> Occ {
    let pool = default_pool();
    let mut m = Occ::new();
    for _ in 0..rng.gen_range(0..4) {
        *m.entry(pick_var(rng, &pool)).or_insert(0) += rng.gen_range(1..4);
    }
    m
}

fn occ_add(a: &Occ, b: &Occ) -> Occ {
    let mut m = a.clone();
    for (k, v) in b {
        *m.entry(*k).or_insert(0) += v;
    }
    m
}

/// Swap/fresh model counting free occurrences of every variable.
pub fn noccs_model() -> Model<Occ> {
    Model::new("noccs", |a: &Occ, b: &Occ| a == b, sample_occ, show_occ)
        .with_vr(|x| Occ::from([(x, 1)]))
        .with_ap(occ_add)
        .with_lm(|x, m: &Occ| {
            let mut m = m.clone();
            m.remove(&x);
            m
        })
        .with_sw(|m: &Occ, x, y| m.iter().map(|(k, v)| (k.swapped(x, y), *v)).collect())
        .with_fr(|x, m: &Occ| !m.contains_key(&x))
        .with_supp(|m: &Occ| m.keys().copied().collect())
}

/// The same counts with renaming: `m[y/x]` moves the count of `x` onto `y`.
pub fn noccs_ren_model() -> Model<Occ> {
    let base = noccs_model();
    Model { sw: None, ..base }.named("noccs-ren").with_ren(|m: &Occ, y, x| {
        if y == x {
            return m.clone();
        }
        let mut out = m.clone();
        if let Some(c) = out.remove(&x) {
            *out.entry(y).or_insert(0) += c;
        }
        out
    })
}

fn noccs_rec() -> &'static Recursion<Occ> {
    static R: OnceLock<Recursion<Occ>> = OnceLock::new();
    R.get_or_init(|| {
        let m = noccs_model();
        self_check(6, &m);
        rec(6, &m).expect("noccs signature")
    })
}

/// Number of free occurrences of `x` in `t`.
pub fn noccs(t: &Term, x: Var) -> u32 {
    noccs_rec().eval(t).get(&x).copied().unwrap_or(0)
}

// ----------------------------------------------------------------- size

/// Swap/free model computing the number of constructors.
pub fn size_model() -> Model<u64> {
    Model::new("size", |a: &u64, b: &u64| a == b, |rng: &mut Rng| rng.gen_range(1..40), |n: &u64| n.to_string())
        .with_vr(|_| 1)
        .with_ap(|a, b| a + b + 1)
        .with_lm(|_, a| a + 1)
        .with_sw(|a, _, _| *a)
        .with_fv(|_| VarSet::empty())
}

pub fn size_of(t: &Term) -> u64 {
    static R: OnceLock<Recursion<u64>> = OnceLock::new();
    R.get_or_init(|| {
        let m = size_model();
        self_check(4, &m);
        rec(4, &m).expect("size signature")
    })
    .eval(t)
}

// ------------------------------------------------------------------ enf

fn enf_lm(x: Var, t: &Term, b: bool) -> bool {
    let eta = match t.node() {
        Node::Ap(l, r) => matches!(r.node(), Node::Vr(v) if *v == x) && l.fresh(x),
        _ => false,
    };
    b && !eta
}

/// Full-fledged swap/free model deciding η-normal form, with empty `X`.
pub fn enf_model() -> EnhancedModel<bool> {
    let pool = default_pool();
    let mut m = EnhancedModel::new(
        "enf",
        BTreeSet::new(),
        |a: &bool, b: &bool| a == b,
        move |rng: &mut Rng| (random_term(rng, &pool, MAX_SIZE), rng.gen_bool(0.5)),
        |b: &bool| b.to_string(),
    );
    m.vr = Some(Arc::new(|_| true));
    m.ap = Some(Arc::new(|a: &(Term, bool), b: &(Term, bool)| a.1 && b.1));
    m.lm = Some(Arc::new(|x, p: &(Term, bool)| enf_lm(x, &p.0, p.1)));
    m.sw = Some(Arc::new(|p: &(Term, bool), _, _| p.1));
    m.fv = Some(Arc::new(|_: &(Term, bool)| VarSet::empty()));
    m
}

/// Whether `t` is in η-normal form.
pub fn enf(t: &Term) -> bool {
    static R: OnceLock<EnhancedRecursion<bool>> = OnceLock::new();
    R.get_or_init(|| {
        let m = enf_model();
        let r = check_enhanced_props(&m, &props_of(4).unwrap(), &CheckCfg::with_seed(0, 300)).unwrap();
        assert!(r.ok(), "self-test of enf failed:\n{r}");
        rec_enhanced(4, &m).expect("enf signature")
    })
    .eval(t)
}

// ------------------------------------------------------------------ hoas

/// Terms extended with constant leaves.
#[derive(Clone, Debug)]
pub struct ExtTerm(Arc<ENode>);

#[derive(Clone, Debug)]
pub enum ENode {
    Vr(Var),
    Ct(&'static str),
    Ap(ExtTerm, ExtTerm),
    Lm(Var, ExtTerm),
}

/// The constant pool.
pub const CONSTANTS: [&str; 4] = ["ap", "lm", "c0", "c1"];

impl ExtTerm {
    pub fn vr(x: Var) -> ExtTerm {
        ExtTerm(Arc::new(ENode::Vr(x)))
    }
    pub fn ct(c: &'static str) -> ExtTerm {
        ExtTerm(Arc::new(ENode::Ct(c)))
    }
    pub fn ap(a: ExtTerm, b: ExtTerm) -> ExtTerm {
        ExtTerm(Arc::new(ENode::Ap(a, b)))
    }
    pub fn lm(x: Var, b: ExtTerm) -> ExtTerm {
        ExtTerm(Arc::new(ENode::Lm(x, b)))
    }
    pub fn node(&self) -> &ENode {
        &self.0
    }

    /// Constant-free extended term with the same shape.
    pub fn from_term(t: &Term) -> ExtTerm {
        match t.node() {
            Node::Vr(x) => ExtTerm::vr(*x),
            Node::Ap(a, b) => ExtTerm::ap(ExtTerm::from_term(a), ExtTerm::from_term(b)),
            Node::Lm(x, b) => ExtTerm::lm(*x, ExtTerm::from_term(b)),
        }
    }

    pub fn fresh(&self, x: Var) -> bool {
        match self.node() {
            ENode::Vr(y) => *y != x,
            ENode::Ct(_) => true,
            ENode::Ap(a, b) => a.fresh(x) && b.fresh(x),
            ENode::Lm(y, b) => *y == x || b.fresh(x),
        }
    }

    pub fn fv_set(&self) -> BTreeSet<Var> {
        match self.node() {
            ENode::Vr(y) => BTreeSet::from([*y]),
            ENode::Ct(_) => BTreeSet::new(),
            ENode::Ap(a, b) => {
                let mut s = a.fv_set();
                s.extend(b.fv_set());
                s
            }
            ENode::Lm(y, b) => {
                let mut s = b.fv_set();
                s.remove(y);
                s
            }
        }
    }

    pub fn swap(&self, a: Var, b: Var) -> ExtTerm {
        match self.node() {
            ENode::Vr(y) => ExtTerm::vr(y.swapped(a, b)),
            ENode::Ct(_) => self.clone(),
            ENode::Ap(l, r) => ExtTerm::ap(l.swap(a, b), r.swap(a, b)),
            ENode::Lm(y, t) => ExtTerm::lm(y.swapped(a, b), t.swap(a, b)),
        }
    }

    /// Capture-avoiding `self[s/y]`.
    pub fn subst(&self, s: &ExtTerm, y: Var) -> ExtTerm {
        match self.node() {
            ENode::Vr(x) if *x == y => s.clone(),
            ENode::Vr(_) | ENode::Ct(_) => self.clone(),
            ENode::Ap(a, b) => ExtTerm::ap(a.subst(s, y), b.subst(s, y)),
            ENode::Lm(x, b) => {
                if *x == y || b.fresh(y) {
                    self.clone()
                } else if s.fresh(*x) {
                    ExtTerm::lm(*x, b.subst(s, y))
                } else {
                    let mut avoid = s.fv_set();
                    avoid.extend(b.fv_set());
                    avoid.insert(y);
                    avoid.insert(*x);
                    let x2 = least_unused(&avoid);
                    ExtTerm::lm(x2, b.swap(*x, x2).subst(s, y))
                }
            }
        }
    }

    fn canon(&self, env: &mut Vec<Var>, out: &mut String) {
        match self.node() {
            ENode::Vr(x) => match env.iter().rev().position(|b| b == x) {
                Some(i) => out.push_str(&format!("#{i} ")),
                None => out.push_str(&format!("{x} ")),
            },
            ENode::Ct(c) => out.push_str(&format!("'{c} ")),
            ENode::Ap(a, b) => {
                out.push_str("( ");
                a.canon(env, out);
                b.canon(env, out);
                out.push_str(") ");
            }
            ENode::Lm(x, b) => {
                out.push_str("L ");
                env.push(*x);
                b.canon(env, out);
                env.pop();
            }
        }
    }

    /// Nameless form; equal exactly for α-equivalent extended terms.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        self.canon(&mut Vec::new(), &mut s);
        s
    }
}

impl PartialEq for ExtTerm {
    fn eq(&self, o: &ExtTerm) -> bool {
        self.canonical() == o.canonical()
    }
}
impl Eq for ExtTerm {}
impl Hash for ExtTerm {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.canonical().hash(h)
    }
}

impl fmt::Display for ExtTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            ENode::Vr(x) => write!(f, "{x}"),
            ENode::Ct(c) => write!(f, "#{c}"),
            ENode::Ap(a, b) => {
                match a.node() {
                    ENode::Lm(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                match b.node() {
                    ENode::Ap(..) | ENode::Lm(..) => write!(f, " ({b})"),
                    _ => write!(f, " {b}"),
                }
            }
            ENode::Lm(x, b) => write!(f, "\\{x}. {b}"),
        }
    }
}

fn random_ext(rng: &mut Rng, pool: &[Var], budget: usize) -> ExtTerm {
    if budget <= 1 {
        return if rng.gen_bool(0.25) {
            ExtTerm::ct(CONSTANTS[rng.gen_range(0..CONSTANTS.len())])
        } else {
            ExtTerm::vr(pick_var(rng, pool))
        };
    }
    match rng.gen_range(0..5) {
        0 => random_ext(rng, pool, 1),
        1 | 2 if budget >= 3 => {
            let l = rng.gen_range(1..budget - 1);
            ExtTerm::ap(random_ext(rng, pool, l), random_ext(rng, pool, budget - 1 - l))
        }
        _ => ExtTerm::lm(pick_var(rng, pool), random_ext(rng, pool, budget - 1)),
    }
}

/// Subst/fresh model over extended terms encoding binders by a constant.
pub fn hoas_model() -> Model<ExtTerm> {
    let pool = default_pool();
    Model::new(
        "hoas",
        |a: &ExtTerm, b: &ExtTerm| a == b,
        move |rng: &mut Rng| {
            let n = rng.gen_range(1..=MAX_SIZE);
            random_ext(rng, &pool, n)
        },
        |e: &ExtTerm| e.to_string(),
    )
    .with_vr(ExtTerm::vr)
    .with_ap(|a, b| ExtTerm::ap(ExtTerm::ap(ExtTerm::ct("ap"), a.clone()), b.clone()))
    .with_lm(|x, e| ExtTerm::ap(ExtTerm::ct("lm"), ExtTerm::lm(x, e.clone())))
    .with_sb(|e, s, x| e.subst(s, x))
    .with_fr(|x, e| e.fresh(x))
    .with_supp(|e| e.fv_set())
}

pub fn hoas_encode(t: &Term) -> ExtTerm {
    static R: OnceLock<Recursion<ExtTerm>> = OnceLock::new();
    R.get_or_init(|| {
        let m = hoas_model();
        self_check(7, &m);
        rec(7, &m).expect("hoas signature")
    })
    .eval(t)
}

// ------------------------------------------------------------------- sem

/// Values of the semantic domain, the integers mod 5.
pub type D = u8;
const MOD: u8 = 5;

/// Application in the domain.
pub fn ap_d(a: D, b: D) -> D {
    (a + 2 * b + 1) % MOD
}

/// Abstraction in the domain, from a function on values.
pub fn lm_d(f: &dyn Fn(D) -> D) -> D {
    (f(0) + 2 * f(1) + f(4)) % MOD
}

/// An environment: a default value plus finitely many overrides.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Env {
    pub default: D,
    pub map: BTreeMap<Var, D>,
}

impl Env {
    pub fn constant(d: D) -> Env {
        Env { default: d % MOD, map: BTreeMap::new() }
    }
    pub fn get(&self, x: Var) -> D {
        self.map.get(&x).copied().unwrap_or(self.default)
    }
    pub fn set(&self, x: Var, d: D) -> Env {
        let mut e = self.clone();
        e.map.insert(x, d % MOD);
        e
    }
    /// `ξ ∘ σ`.
    pub fn after(&self, p: &Perm) -> Env {
        let mut keys: BTreeSet<Var> = self.map.keys().copied().collect();
        keys.extend(p.support());
        let map = keys.into_iter().map(|v| (v, self.get(p.apply(v)))).collect();
        Env { default: self.default, map }
    }
    pub fn random(rng: &mut Rng, vars: u32) -> Env {
        let mut e = Env::constant(rng.gen_range(0..MOD));
        for v in 0..vars {
            if rng.gen_bool(0.7) {
                e = e.set(Var(v), rng.gen_range(0..MOD));
            }
        }
        e
    }
}

/// A function from environments to values.
#[derive(Clone)]
pub struct Interp(pub Arc<dyn Fn(&Env) -> D + Send + Sync>);

impl Interp {
    pub fn at(&self, e: &Env) -> D {
        (self.0)(e)
    }
}

impl fmt::Debug for Interp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", show_interp(self))
    }
}

/// Number of variables inspected by the dependence probes.
pub const PROBE_VARS: u32 = 16;

fn probe_envs() -> &'static [Env] {
    static E: OnceLock<Vec<Env>> = OnceLock::new();
    E.get_or_init(|| {
        let mut r = rng(0x5e3);
        (0..24).map(|_| Env::random(&mut r, 12)).collect()
    })
}

/// Pointwise equality on a fixed set of sampled environments (approximate).
pub fn interp_eq(a: &Interp, b: &Interp) -> bool {
    probe_envs().iter().all(|e| a.at(e) == b.at(e))
}

fn show_interp(i: &Interp) -> String {
    let vals: Vec<String> = probe_envs().iter().take(4).map(|e| i.at(e).to_string()).collect();
    format!("interp[{}]", vals.join(","))
}

/// Variables the interpretation visibly depends on (approximate).
pub fn interp_fv(i: &Interp) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for v in 0..PROBE_VARS {
        let x = Var(v);
        let depends = probe_envs().iter().take(4).any(|e| {
            let base = i.at(e);
            (0..MOD).any(|d| d != e.get(x) && i.at(&e.set(x, d)) != base)
        });
        if depends {
            out.insert(x);
        }
    }
    out
}

fn sem_vr(x: Var) -> Interp {
    Interp(Arc::new(move |e| e.get(x)))
}
fn sem_ap(a: &Interp, b: &Interp) -> Interp {
    let (a, b) = (a.clone(), b.clone());
    Interp(Arc::new(move |e| ap_d(a.at(e), b.at(e))))
}
fn sem_lm(x: Var, i: &Interp) -> Interp {
    let i = i.clone();
    Interp(Arc::new(move |e| lm_d(&|d| i.at(&e.set(x, d)))))
}
fn sem_pm(i: &Interp, p: &Perm) -> Interp {
    let (i, p) = (i.clone(), p.clone());
    Interp(Arc::new(move |e| i.at(&e.after(&p))))
}

/// Reference interpretation by direct structural recursion.
pub fn sem_reference(t: &Term) -> Interp {
    match t.node() {
        Node::Vr(x) => sem_vr(*x),
        Node::Ap(a, b) => sem_ap(&sem_reference(a), &sem_reference(b)),
        Node::Lm(x, b) => sem_lm(*x, &sem_reference(b)),
    }
}

/// Perm/free model over interpretations.
pub fn sem_model() -> Model<Interp> {
    let pool = default_pool();
    Model::new("sem", interp_eq, move |rng: &mut Rng| sem_reference(&random_term(rng, &pool, MAX_SIZE)), show_interp)
        .with_vr(sem_vr)
        .with_ap(sem_ap)
        .with_lm(sem_lm)
        .with_pm(sem_pm)
        .with_fv(|i| VarSet::Finite(interp_fv(i)))
        .with_supp(interp_fv)
        .approximate()
}

/// Pairs of a witness term and its interpretation; free variables are the
/// witness variables the interpretation depends on, support is the witness
/// free variables.
pub fn pitts_submodel() -> Model<(Term, Interp)> {
    let pool = default_pool();
    Model::new(
        "sem-sub",
        |a: &(Term, Interp), b: &(Term, Interp)| interp_eq(&a.1, &b.1),
        move |rng: &mut Rng| {
            let t = random_term(rng, &pool, MAX_SIZE);
            let i = sem_reference(&t);
            (t, i)
        },
        |p: &(Term, Interp)| format!("({} , {})", p.0, show_interp(&p.1)),
    )
    .with_vr(|x| (Term::vr(x), sem_vr(x)))
    .with_ap(|a, b| (Term::ap(a.0.clone(), b.0.clone()), sem_ap(&a.1, &b.1)))
    .with_lm(|x, a| (Term::lm(x, a.0.clone()), sem_lm(x, &a.1)))
    .with_pm(|a, p| (a.0.permute(p), sem_pm(&a.1, p)))
    .with_fv(|a| {
        let dep = interp_fv(&a.1);
        VarSet::Finite(a.0.fv_set().into_iter().filter(|v| dep.contains(v)).collect())
    })
    .with_supp(|a| a.0.fv_set())
    .approximate()
}

fn sem2() -> &'static Recursion<Interp> {
    static R: OnceLock<Recursion<Interp>> = OnceLock::new();
    R.get_or_init(|| {
        let m = sem_model();
        self_check(2, &m);
        rec(2, &m).expect("sem signature")
    })
}

fn sem1() -> &'static Recursion<(Term, Interp)> {
    static R: OnceLock<Recursion<(Term, Interp)>> = OnceLock::new();
    R.get_or_init(|| {
        let m = pitts_submodel();
        self_check(1, &m);
        rec(1, &m).expect("sem submodel signature")
    })
}

/// `sem t ξ` through the perm/free variant recursor.
pub fn sem_direct(t: &Term, env: &Env) -> D {
    sem2().eval(t).at(env)
}

/// `sem t ξ` through the perm/free recursor on the witness submodel.
pub fn sem_via_submodel(t: &Term, env: &Env) -> D {
    sem1().eval(t).1.at(env)
}

pub fn sem_interp(t: &Term) -> Interp {
    sem2().eval(t)
}

// ---------------------------------------------------------------- subst

/// Perm/free model with `X = FV s ∪ {y}` whose fold is `t ↦ t[s/y]`.
pub fn subst_model(s: &Term, y: Var) -> EnhancedModel<Term> {
    let mut x = s.fv_set();
    x.insert(y);
    let pool: Vec<Var> = default_pool().into_iter().chain(x.iter().copied()).collect();
    let mut m = EnhancedModel::new(
        format!("subst[{s}/{y}]"),
        x,
        alpha_eq,
        move |rng: &mut Rng| (random_term(rng, &pool, MAX_SIZE), random_term(rng, &pool, MAX_SIZE)),
        |t: &Term| t.to_string(),
    );
    let s = s.clone();
    m.vr = Some(Arc::new(move |x| if x == y { s.clone() } else { Term::vr(x) }));
    m.ap = Some(Arc::new(|a: &(Term, Term), b: &(Term, Term)| Term::ap(a.1.clone(), b.1.clone())));
    m.lm = Some(Arc::new(|x, a: &(Term, Term)| Term::lm(x, a.1.clone())));
    m.pm = Some(Arc::new(|a: &(Term, Term), p: &Perm| a.1.permute(p)));
    m.fv = Some(Arc::new(|a: &(Term, Term)| a.1.fv()));
    m.supp = Some(Arc::new(|a: &(Term, Term)| a.1.fv_set()));
    m
}

/// `t[s/y]` through the enhanced perm/free recursor.
pub fn subst_via_r1(t: &Term, s: &Term, y: Var) -> Term {
    let m = subst_model(s, y);
    rec_enhanced(1, &m).expect("subst signature").eval(t)
}

/// Runs the suite of the subst model for a given `(s, y)`.
pub fn subst_model_check(s: &Term, y: Var, cfg: &CheckCfg) -> crate::report::PropReport {
    check_enhanced_props(&subst_model(s, y), &props_of(1).unwrap(), cfg).expect("signature")
}

// ------------------------------------------------------- negative controls

/// Swap/fresh term model whose abstraction forgets the binder.
pub fn broken_lm_model() -> Model<Term> {
    term_model(6).expect("r6").with_lm(|_, t: &Term| t.clone()).named("broken-lm")
}

/// Renaming/fresh model on raw representatives, with renaming as identity.
pub fn raw_ren_model() -> Model<Term> {
    term_model(9)
        .expect("r9")
        .named("raw-ren")
        .with_ren(|t: &Term, _, _| t.clone())
        .with_supp(|t: &Term| t.all_names())
        .with_fr(|x, t: &Term| t.fresh(x))
        .with_sample({
            let pool = default_pool();
            move |rng: &mut Rng| random_term(rng, &pool, MAX_SIZE)
        })
        .with_eq_same_representative()
}

impl Model<Term> {
    fn with_eq_same_representative(mut self) -> Self {
        self.eq = Arc::new(|a: &Term, b: &Term| a.same_representative(b));
        self
    }
}

/// The submodel of the renaming counts, used by the factorization checks.
pub fn noccs_ren_submodel() -> Model<(Term, Occ)> {
    min_submodel(9, &noccs_ren_model()).expect("noccs-ren")
}

/// `(x, t')` with `t = Lm x t'` if `t` is an abstraction.
pub fn as_abstraction(t: &Term) -> Option<(Var, Term)> {
    match t.dest() {
        DestView::L(h) => Some(h.stored()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse;

    #[test]
    fn noccs_clauses() {
        let t = parse("\\y. y x").unwrap();
        assert_eq!(noccs(&t, Var(1)), 1);
        assert_eq!(noccs(&t, Var(0)), 0);
        assert_eq!(noccs(&Term::vr(Var(3)), Var(3)), 1);
    }

    #[test]
    fn size_clauses() {
        assert_eq!(size_of(&parse("x").unwrap()), 1);
        assert_eq!(size_of(&parse("\\x. x").unwrap()), 2);
        assert_eq!(size_of(&parse("x y").unwrap()), 3);
    }

    #[test]
    fn enf_clauses() {
        assert!(enf(&parse("x").unwrap()));
        assert!(!enf(&parse("\\x. y x").unwrap()));
        assert!(enf(&parse("\\x. x x").unwrap()));
    }

    #[test]
    fn hoas_clauses() {
        let e = hoas_encode(&parse("x y").unwrap());
        assert_eq!(e.to_string(), "#ap v0 v1");
        let e = hoas_encode(&parse("\\x. x").unwrap());
        assert_eq!(e.to_string(), "#lm (\\v0. v0)");
    }

    #[test]
    fn sem_routes_agree_on_small_terms() {
        let env = Env::constant(2).set(Var(1), 3);
        for src in ["x", "x y", "\\x. x y", "\\x y. y (x y)"] {
            let t = parse(src).unwrap();
            assert_eq!(sem_direct(&t, &env), sem_via_submodel(&t, &env), "{src}");
        }
        assert_eq!(sem_direct(&parse("x").unwrap(), &env), 2);
    }

    #[test]
    fn subst_binder_avoids_x() {
        let t = parse("\\x. x y").unwrap();
        let s = parse("x x").unwrap();
        let out = subst_via_r1(&t, &s, Var(1));
        assert!(alpha_eq(&out, &t.subst(&s, Var(1))));
        let (b, _) = as_abstraction(&out).unwrap();
        assert!(b != Var(0) && b != Var(1));
    }
}
