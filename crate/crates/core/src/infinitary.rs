//! Infinitary λ-terms as states of a coalgebra.
//!
//! A [`CoTerm`] is a graph, a state and a pending permutation applied to
//! every name read from the graph. Graphs built from finite tables are
//! regular: their reachable state set is finite and enumerable, so
//! α-bisimilarity, freshness and free variables are decided exactly. Graphs
//! given by arbitrary destructor functions get depth-bounded answers.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use rand::Rng as _;

use crate::error::NomError;
use crate::gen::{pick_var, random_term, Rng};
use crate::perm::{least_unused, Perm, Var};
use crate::term::{Names, Node, Term};

/// Default depth for bounded comparisons.
pub const DEFAULT_DEPTH: usize = 30;

/// Largest state set materialized into a table by [`unfold`].
pub const STATE_CAP: usize = 4096;

/// One destructor step.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Shape<S> {
    V(Var),
    A(S, S),
    L(Var, S),
}

impl<S> Shape<S> {
    pub fn map<T>(self, mut f: impl FnMut(S) -> T) -> Shape<T> {
        match self {
            Shape::V(x) => Shape::V(x),
            Shape::A(a, b) => {
                let a = f(a);
                Shape::A(a, f(b))
            }
            Shape::L(x, b) => Shape::L(x, f(b)),
        }
    }
}

/// A coalgebra on `usize` states.
pub trait Graph: Send + Sync {
    fn shape(&self, s: usize) -> Shape<usize>;
}

struct Table(Vec<Shape<usize>>);

impl Graph for Table {
    fn shape(&self, s: usize) -> Shape<usize> {
        self.0[s].clone()
    }
}

struct FnGraph<F>(F);

impl<F: Fn(usize) -> Shape<usize> + Send + Sync> Graph for FnGraph<F> {
    fn shape(&self, s: usize) -> Shape<usize> {
        (self.0)(s)
    }
}

/// An infinitary term.
#[derive(Clone)]
pub struct CoTerm {
    g: Arc<dyn Graph>,
    state: usize,
    perm: Perm,
    regular: bool,
}

impl CoTerm {
    /// A regular coterm from a table of shapes; children must index the table.
    pub fn from_table(nodes: Vec<Shape<usize>>, root: usize) -> Result<CoTerm, NomError> {
        let n = nodes.len();
        let bad = |s: usize| s >= n;
        if bad(root)
            || nodes.iter().any(|s| match s {
                Shape::V(_) => false,
                Shape::A(a, b) => bad(*a) || bad(*b),
                Shape::L(_, b) => bad(*b),
            })
        {
            return Err(NomError::Spec("state index out of range".into()));
        }
        Ok(CoTerm { g: Arc::new(Table(nodes)), state: root, perm: Perm::id(), regular: true })
    }

    /// A coterm given by an arbitrary destructor function; treated as
    /// non-regular.
    pub fn from_fn(root: usize, f: impl Fn(usize) -> Shape<usize> + Send + Sync + 'static) -> CoTerm {
        CoTerm { g: Arc::new(FnGraph(f)), state: root, perm: Perm::id(), regular: false }
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    fn at(&self, s: usize) -> CoTerm {
        CoTerm { g: self.g.clone(), state: s, perm: self.perm.clone(), regular: self.regular }
    }

    /// The destructor step with the pending permutation applied.
    pub fn shape(&self) -> Shape<CoTerm> {
        match self.g.shape(self.state) {
            Shape::V(x) => Shape::V(self.perm.apply(x)),
            Shape::A(a, b) => Shape::A(self.at(a), self.at(b)),
            Shape::L(x, b) => Shape::L(self.perm.apply(x), self.at(b)),
        }
    }

    fn key(&self) -> Pres {
        Pres(self.clone())
    }

    fn require_regular(&self) -> Result<(), NomError> {
        if self.regular {
            Ok(())
        } else {
            Err(NomError::NotRegular)
        }
    }

    /// Reachable graph states.
    pub fn states(&self) -> Result<Vec<usize>, NomError> {
        self.require_regular()?;
        let mut seen = HashSet::from([self.state]);
        let mut order = vec![self.state];
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            i += 1;
            let kids = match self.g.shape(s) {
                Shape::V(_) => vec![],
                Shape::A(a, b) => vec![a, b],
                Shape::L(_, b) => vec![b],
            };
            for k in kids {
                if seen.insert(k) {
                    order.push(k);
                }
            }
        }
        Ok(order)
    }

    /// Every name mentioned by a reachable state.
    pub fn names(&self) -> Result<BTreeSet<Var>, NomError> {
        let mut out = BTreeSet::new();
        for s in self.states()? {
            match self.g.shape(s) {
                Shape::V(x) | Shape::L(x, _) => {
                    out.insert(self.perm.apply(x));
                }
                Shape::A(..) => {}
            }
        }
        Ok(out)
    }

    /// Names mentioned within `depth` layers.
    pub fn names_upto(&self, depth: usize) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        let mut seen = HashMap::new();
        let mut stack = vec![(self.state, depth)];
        while let Some((s, d)) = stack.pop() {
            if d == 0 || seen.get(&s).is_some_and(|&k| k >= d) {
                continue;
            }
            seen.insert(s, d);
            match self.g.shape(s) {
                Shape::V(x) => {
                    out.insert(self.perm.apply(x));
                }
                Shape::A(a, b) => {
                    stack.push((a, d - 1));
                    stack.push((b, d - 1));
                }
                Shape::L(x, b) => {
                    out.insert(self.perm.apply(x));
                    stack.push((b, d - 1));
                }
            }
        }
        out
    }

    /// Presentation identity as a hashable key: graph, state and pending
    /// permutation. Equal keys denote the same coterm.
    pub fn pres_key(&self) -> Vec<u64> {
        let mut k = vec![Arc::as_ptr(&self.g) as *const u8 as usize as u64, self.state as u64];
        for (a, b) in self.perm.pairs() {
            k.push(a.0 as u64);
            k.push(b.0 as u64);
        }
        k
    }

    /// Names to avoid when picking a fresh one: exact on regular coterms.
    fn avoid_names(&self) -> BTreeSet<Var> {
        self.names().unwrap_or_else(|_| self.names_upto(DEFAULT_DEPTH))
    }
}

impl fmt::Debug for CoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", truncate(self, 6))
    }
}

impl fmt::Display for CoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", truncate(self, 8))
    }
}

/// Presentation identity: same graph, state and pending permutation.
#[derive(Clone)]
struct Pres(CoTerm);

impl PartialEq for Pres {
    fn eq(&self, o: &Pres) -> bool {
        Arc::ptr_eq(&self.0.g, &o.0.g) && self.0.state == o.0.state && self.0.perm == o.0.perm
    }
}
impl Eq for Pres {}
impl Hash for Pres {
    fn hash<H: Hasher>(&self, h: &mut H) {
        (Arc::as_ptr(&self.0.g) as *const u8 as usize).hash(h);
        self.0.state.hash(h);
        self.0.perm.hash(h);
    }
}

// ------------------------------------------------------------------ unfold

/// One step of an anamorphism: a destructor shape over further states, or an
/// exit to an existing coterm.
pub enum Step<S> {
    Shape(Shape<S>),
    Exit(CoTerm),
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Key<S> {
    In(S),
    Out(Pres),
}

type StepFn<S> = dyn Fn(&S) -> Step<S> + Send + Sync;

fn expand<S: Clone>(step: &StepFn<S>, k: &Key<S>) -> Shape<Key<S>> {
    match k {
        Key::In(s) => match step(s) {
            Step::Shape(sh) => sh.map(Key::In),
            Step::Exit(c) => c.shape().map(|c| Key::Out(Pres(c))),
        },
        Key::Out(p) => p.0.shape().map(|c| Key::Out(Pres(c))),
    }
}

struct Lazy<S> {
    step: Arc<StepFn<S>>,
    tab: Mutex<(HashMap<Key<S>, usize>, Vec<Key<S>>)>,
}

impl<S: Clone + Eq + Hash + Send + Sync> Graph for Lazy<S> {
    fn shape(&self, s: usize) -> Shape<usize> {
        let key = self.tab.lock().expect("coterm table").1[s].clone();
        let sh = expand(&*self.step, &key);
        let mut tab = self.tab.lock().expect("coterm table");
        sh.map(|k| intern(&mut tab, k))
    }
}

fn intern<S: Eq + Hash + Clone>(tab: &mut (HashMap<Key<S>, usize>, Vec<Key<S>>), k: Key<S>) -> usize {
    if let Some(i) = tab.0.get(&k) {
        return *i;
    }
    let i = tab.1.len();
    tab.0.insert(k.clone(), i);
    tab.1.push(k);
    i
}

/// The unique coterm whose destructor follows `step` from `root`.
/// Materialized as a regular table when at most [`STATE_CAP`] states are
/// reachable; otherwise kept lazy.
pub fn unfold<S>(root: S, step: impl Fn(&S) -> Step<S> + Send + Sync + 'static) -> CoTerm
where
    S: Clone + Eq + Hash + Send + Sync + 'static,
{
    let step: Arc<StepFn<S>> = Arc::new(step);
    let mut tab = (HashMap::new(), Vec::new());
    intern(&mut tab, Key::In(root));
    let mut nodes: Vec<Shape<usize>> = Vec::new();
    let mut i = 0;
    // Exits into non-regular coterms cannot be materialized.
    let mut finite = true;
    while i < tab.1.len() {
        if tab.1.len() > STATE_CAP {
            finite = false;
            break;
        }
        let k = tab.1[i].clone();
        if let Key::Out(p) = &k {
            if !p.0.regular {
                finite = false;
                break;
            }
        }
        let sh = expand(&*step, &k);
        nodes.push(sh.map(|c| intern(&mut tab, c)));
        i += 1;
    }
    if finite {
        return CoTerm::from_table(nodes, 0).expect("materialized table is closed");
    }
    let lazy =
        Lazy { step, tab: Mutex::new((HashMap::from([(Key::In(tab.1[0].clone_in()), 0)]), vec![tab.1[0].clone()])) };
    CoTerm { g: Arc::new(lazy), state: 0, perm: Perm::id(), regular: false }
}

impl<S: Clone> Key<S> {
    fn clone_in(&self) -> S {
        match self {
            Key::In(s) => s.clone(),
            Key::Out(_) => unreachable!("root key is always internal"),
        }
    }
}

/// As [`unfold`] for states without a usable identity: no sharing, so the
/// result is never regular.
pub fn unfold_lazy<S>(root: S, step: impl Fn(&S) -> Step<S> + Send + Sync + 'static) -> CoTerm
where
    S: Clone + Send + Sync + 'static,
{
    CoTerm {
        g: Arc::new(Tree { step: Arc::new(step), states: Mutex::new(vec![TreeKey::In(root)]) }),
        state: 0,
        perm: Perm::id(),
        regular: false,
    }
}

#[derive(Clone)]
enum TreeKey<S> {
    In(S),
    Out(CoTerm),
}

struct Tree<S> {
    step: Arc<StepFn<S>>,
    states: Mutex<Vec<TreeKey<S>>>,
}

impl<S: Clone + Send + Sync> Graph for Tree<S> {
    fn shape(&self, s: usize) -> Shape<usize> {
        let key = self.states.lock().expect("coterm tree")[s].clone();
        let sh = match key {
            TreeKey::In(st) => match (self.step)(&st) {
                Step::Shape(sh) => sh.map(TreeKey::In),
                Step::Exit(c) => c.shape().map(TreeKey::Out),
            },
            TreeKey::Out(c) => c.shape().map(TreeKey::Out),
        };
        let mut states = self.states.lock().expect("coterm tree");
        sh.map(|k| {
            states.push(k);
            states.len() - 1
        })
    }
}

// ------------------------------------------------------------- destructor

/// The destructor view of a coterm.
#[derive(Clone, Debug)]
pub enum CoDest {
    V(Var),
    A(CoTerm, CoTerm),
    L(CoHandle),
}

/// Handle on an abstraction: any `(x', t')` with `t = Lm x' t'` is available.
#[derive(Clone, Debug)]
pub struct CoHandle {
    x: Var,
    body: CoTerm,
}

impl CoHandle {
    pub fn stored(&self) -> (Var, CoTerm) {
        (self.x, self.body.clone())
    }

    /// A pair with binder outside `avoid`; the stored binder when allowed,
    /// otherwise the least name outside `avoid`, the body's names and `x`.
    pub fn extract(&self, avoid: &BTreeSet<Var>) -> (Var, CoTerm) {
        if !avoid.contains(&self.x) {
            return self.stored();
        }
        let mut av = avoid.clone();
        av.extend(self.body.avoid_names());
        av.insert(self.x);
        let y = least_unused(&av);
        (y, co_swap(&self.body, self.x, y))
    }

    /// Whether `(y, s)` belongs to the abstraction's pair set.
    pub fn admits(&self, y: Var, s: &CoTerm, mode: EqMode) -> Result<bool, NomError> {
        let fresh = y == self.x || fresh_in(y, &self.body, mode)?;
        Ok(fresh && co_alpha_eq(s, &co_swap(&self.body, self.x, y), mode)?)
    }
}

pub fn co_dest(t: &CoTerm) -> CoDest {
    match t.shape() {
        Shape::V(x) => CoDest::V(x),
        Shape::A(a, b) => CoDest::A(a, b),
        Shape::L(x, b) => CoDest::L(CoHandle { x, body: b }),
    }
}

// ------------------------------------------------------------- constructors

fn leaf(sh: Shape<CoTerm>) -> CoTerm {
    unfold(None::<Pres>, move |s: &Option<Pres>| match s {
        None => Step::Shape(sh.clone().map(|c| Some(Pres(c)))),
        Some(p) => Step::Exit(p.0.clone()),
    })
}

pub fn co_vr(x: Var) -> CoTerm {
    CoTerm::from_table(vec![Shape::V(x)], 0).expect("one state")
}

pub fn co_ap(a: &CoTerm, b: &CoTerm) -> CoTerm {
    leaf(Shape::A(a.clone(), b.clone()))
}

pub fn co_lm(x: Var, b: &CoTerm) -> CoTerm {
    leaf(Shape::L(x, b.clone()))
}

/// The finite term as a regular coterm.
pub fn embed(t: &Term) -> CoTerm {
    fn go(t: &Term, nodes: &mut Vec<Shape<usize>>) -> usize {
        let i = nodes.len();
        nodes.push(Shape::V(Var(0)));
        nodes[i] = match t.node() {
            Node::Vr(x) => Shape::V(*x),
            Node::Ap(a, b) => {
                let a = go(a, nodes);
                Shape::A(a, go(b, nodes))
            }
            Node::Lm(x, b) => Shape::L(*x, go(b, nodes)),
        };
        i
    }
    let mut nodes = Vec::new();
    go(t, &mut nodes);
    CoTerm::from_table(nodes, 0).expect("embedded term")
}

/// The first `depth` constructor layers, with `…` at the cut.
pub fn truncate(t: &CoTerm, depth: usize) -> String {
    truncate_with(t, depth, &|x| x.to_string())
}

/// As [`truncate`], naming variables with `name`.
pub fn truncate_with(t: &CoTerm, depth: usize, name: &dyn Fn(Var) -> String) -> String {
    fn go(t: &CoTerm, d: usize, name: &dyn Fn(Var) -> String, out: &mut String) {
        if d == 0 {
            out.push('…');
            return;
        }
        match t.shape() {
            Shape::V(x) => out.push_str(&name(x)),
            Shape::A(a, b) => {
                out.push('(');
                go_arg(&a, d - 1, name, out);
                out.push(' ');
                go_arg(&b, d - 1, name, out);
                out.push(')');
            }
            Shape::L(x, b) => {
                out.push_str(&format!("\\{}. ", name(x)));
                go(&b, d - 1, name, out);
            }
        }
    }
    fn go_arg(t: &CoTerm, d: usize, name: &dyn Fn(Var) -> String, out: &mut String) {
        if d > 0 && matches!(t.shape(), Shape::L(..)) {
            out.push('(');
            go(t, d, name, out);
            out.push(')');
        } else {
            go(t, d, name, out);
        }
    }
    let mut s = String::new();
    go(t, depth, name, &mut s);
    s
}

// ------------------------------------------------------------ α-bisimulation

/// Exact comparison on regular coterms, or comparison of the first `k` layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqMode {
    Exact,
    Depth(usize),
}

impl EqMode {
    /// Exact when all inputs are regular, depth-bounded otherwise.
    pub fn auto(ts: &[&CoTerm], k: usize) -> EqMode {
        if ts.iter().all(|t| t.regular) {
            EqMode::Exact
        } else {
            EqMode::Depth(k)
        }
    }

    pub fn label(self) -> String {
        match self {
            EqMode::Exact => "exact".into(),
            EqMode::Depth(k) => format!("depth-{k}"),
        }
    }
}

/// Bound-name correspondence: most recent binder pairs, kept as a bijection.
type Corr = BTreeMap<Var, Var>;

fn corr_bind(c: &Corr, x: Var, y: Var) -> Corr {
    let mut out: Corr = c.iter().filter(|(a, b)| **a != x && **b != y).map(|(a, b)| (*a, *b)).collect();
    out.insert(x, y);
    out
}

fn corr_match(c: &Corr, x: Var, y: Var) -> bool {
    match c.get(&x) {
        Some(z) => *z == y,
        None => x == y && !c.values().any(|v| *v == y),
    }
}

/// α-bisimilarity.
pub fn co_alpha_eq(t: &CoTerm, s: &CoTerm, mode: EqMode) -> Result<bool, NomError> {
    if mode == EqMode::Exact {
        t.require_regular()?;
        s.require_regular()?;
    }
    let limit = match mode {
        EqMode::Exact => usize::MAX,
        EqMode::Depth(k) => k,
    };
    // Searching for a reachable mismatch: the correspondence is determined by
    // the path, so the bisimulation candidate is unique.
    let mut seen: HashMap<(Pres, Pres, Corr), usize> = HashMap::new();
    let mut stack = vec![(t.clone(), s.clone(), Corr::new(), limit)];
    while let Some((a, b, c, d)) = stack.pop() {
        if d == 0 {
            continue;
        }
        let key = (a.key(), b.key(), c.clone());
        if seen.get(&key).is_some_and(|&k| k >= d) {
            continue;
        }
        seen.insert(key, d);
        let d2 = if d == usize::MAX { d } else { d - 1 };
        match (a.shape(), b.shape()) {
            (Shape::V(x), Shape::V(y)) => {
                if !corr_match(&c, x, y) {
                    return Ok(false);
                }
            }
            (Shape::A(a1, a2), Shape::A(b1, b2)) => {
                stack.push((a1, b1, c.clone(), d2));
                stack.push((a2, b2, c, d2));
            }
            (Shape::L(x, a1), Shape::L(y, b1)) => {
                let c2 = corr_bind(&c, x, y);
                stack.push((a1, b1, c2, d2));
            }
            _ => return Ok(false),
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------- freshness

/// Exact freshness on a regular coterm: no path reaches `V x` without
/// crossing a binder of `x`.
pub fn co_fresh(x: Var, t: &CoTerm) -> Result<bool, NomError> {
    t.require_regular()?;
    Ok(fresh_search(x, t, usize::MAX))
}

/// Freshness judged on the first `k` layers.
pub fn co_fresh_upto(x: Var, t: &CoTerm, k: usize) -> bool {
    fresh_search(x, t, k)
}

fn fresh_in(x: Var, t: &CoTerm, mode: EqMode) -> Result<bool, NomError> {
    match mode {
        EqMode::Exact => co_fresh(x, t),
        EqMode::Depth(k) => Ok(co_fresh_upto(x, t, k)),
    }
}

/// Freshness, exact when `t` is regular.
pub fn co_fresh_auto(x: Var, t: &CoTerm, k: usize) -> bool {
    fresh_search(x, t, if t.regular { usize::MAX } else { k })
}

fn fresh_search(x: Var, t: &CoTerm, limit: usize) -> bool {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut stack = vec![(t.state, limit)];
    while let Some((s, d)) = stack.pop() {
        if d == 0 || seen.get(&s).is_some_and(|&k| k >= d) {
            continue;
        }
        seen.insert(s, d);
        let d2 = if d == usize::MAX { d } else { d - 1 };
        match t.g.shape(s) {
            Shape::V(y) => {
                if t.perm.apply(y) == x {
                    return false;
                }
            }
            Shape::A(a, b) => {
                stack.push((a, d2));
                stack.push((b, d2));
            }
            Shape::L(y, b) => {
                if t.perm.apply(y) != x {
                    stack.push((b, d2));
                }
            }
        }
    }
    true
}

/// Free variables of a regular coterm.
pub fn co_fv(t: &CoTerm) -> Result<BTreeSet<Var>, NomError> {
    let names = t.names()?;
    Ok(names.into_iter().filter(|x| !fresh_search(*x, t, usize::MAX)).collect())
}

/// Free variables visible in the first `k` layers.
pub fn co_fv_upto(t: &CoTerm, k: usize) -> BTreeSet<Var> {
    t.names_upto(k).into_iter().filter(|x| !fresh_search(*x, t, k)).collect()
}

// ------------------------------------------------------------ permutations

pub fn co_perm(t: &CoTerm, sigma: &Perm) -> CoTerm {
    CoTerm { perm: sigma.compose(&t.perm), ..t.clone() }
}

pub fn co_swap(t: &CoTerm, z1: Var, z2: Var) -> CoTerm {
    co_perm(t, &Perm::transposition(z1, z2))
}

// ------------------------------------------------------------ environments

/// Variable-to-coterm environment: identity outside finitely many keys.
#[derive(Clone, Debug, Default)]
pub struct Env {
    map: BTreeMap<Var, CoTerm>,
}

impl Env {
    pub fn identity() -> Env {
        Env::default()
    }

    pub fn single(x: Var, t: CoTerm) -> Env {
        Env::identity().with(x, t)
    }

    pub fn with(mut self, x: Var, t: CoTerm) -> Env {
        self.map.insert(x, t);
        self
    }

    pub fn get(&self, x: Var) -> CoTerm {
        self.map.get(&x).cloned().unwrap_or_else(|| co_vr(x))
    }

    pub fn modified(&self) -> impl Iterator<Item = (&Var, &CoTerm)> {
        self.map.iter()
    }

    /// Keys changed by the environment together with their images' free
    /// variables.
    pub fn supp(&self) -> Result<BTreeSet<Var>, NomError> {
        let mut out = BTreeSet::new();
        for (x, t) in &self.map {
            if co_alpha_eq(t, &co_vr(*x), EqMode::Exact)? {
                continue;
            }
            out.insert(*x);
            out.extend(co_fv(t)?);
        }
        Ok(out)
    }

    /// `λx. ρ(x[z1∧z2])[z1∧z2]`.
    pub fn swap(&self, z1: Var, z2: Var) -> Env {
        Env { map: self.map.iter().map(|(k, v)| (k.swapped(z1, z2), co_swap(v, z1, z2))).collect() }
    }

    pub fn alpha_eq(&self, o: &Env, mode: EqMode) -> Result<bool, NomError> {
        let keys: BTreeSet<Var> = self.map.keys().chain(o.map.keys()).copied().collect();
        for k in keys {
            if !co_alpha_eq(&self.get(k), &o.get(k), mode)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.map.iter().map(|(k, v)| format!("{k}:={}", truncate(v, 4))).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

// ------------------------------------------------------------ substitution

/// Parallel capture-avoiding substitution; binders in `supp ρ` are renamed
/// before descending and variables exit to their image.
pub fn psubst(t: &CoTerm, rho: &Env) -> Result<CoTerm, NomError> {
    let supp = rho.supp()?;
    let rho = rho.clone();
    Ok(unfold(t.key(), move |p: &Pres| match co_dest(&p.0) {
        CoDest::V(x) => Step::Exit(rho.get(x)),
        CoDest::A(a, b) => Step::Shape(Shape::A(a.key(), b.key())),
        CoDest::L(h) => {
            let (x, b) = h.extract(&supp);
            Step::Shape(Shape::L(x, b.key()))
        }
    }))
}

/// `t[s/z]`.
pub fn co_subst(t: &CoTerm, s: &CoTerm, z: Var) -> Result<CoTerm, NomError> {
    psubst(t, &Env::single(z, s.clone()))
}

/// `t[x/y]`.
pub fn co_rename(t: &CoTerm, x: Var, y: Var) -> Result<CoTerm, NomError> {
    co_subst(t, &co_vr(x), y)
}

/// An α-variant whose binders avoid `avoid`.
pub fn rebind(t: &CoTerm, avoid: &BTreeSet<Var>) -> CoTerm {
    let avoid = avoid.clone();
    unfold(t.key(), move |p: &Pres| match co_dest(&p.0) {
        CoDest::V(x) => Step::Shape(Shape::V(x)),
        CoDest::A(a, b) => Step::Shape(Shape::A(a.key(), b.key())),
        CoDest::L(h) => {
            let (x, b) = h.extract(&avoid);
            Step::Shape(Shape::L(x, b.key()))
        }
    })
}

// ------------------------------------------------------------ spec format

/// Parses the line format `state N = V x | A N N | L x N` plus `root N`.
/// Variable names are interned into `names`.
pub fn parse_spec_with(src: &str, names: &mut Names) -> Result<CoTerm, NomError> {
    enum Raw {
        V(Var),
        A(String, String),
        L(Var, String),
    }
    let mut defs: Vec<(String, Raw)> = Vec::new();
    let mut root = None;
    for (ln, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| NomError::Spec(format!("line {}: {m}", ln + 1));
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["root", n] => root = Some(n.to_string()),
            ["state", n, "=", "V", x] => defs.push((n.to_string(), Raw::V(names.intern(x)))),
            ["state", n, "=", "A", a, b] => defs.push((n.to_string(), Raw::A(a.to_string(), b.to_string()))),
            ["state", n, "=", "L", x, b] => defs.push((n.to_string(), Raw::L(names.intern(x), b.to_string()))),
            _ => return Err(err("expected `state N = V x | A N N | L x N` or `root N`")),
        }
    }
    let mut index = HashMap::new();
    for (i, (n, _)) in defs.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(NomError::Spec(format!("state `{n}` defined twice")));
        }
    }
    let look = |n: &str| index.get(n).copied().ok_or_else(|| NomError::Spec(format!("undefined state `{n}`")));
    let mut nodes = Vec::with_capacity(defs.len());
    for (_, r) in &defs {
        nodes.push(match r {
            Raw::V(x) => Shape::V(*x),
            Raw::A(a, b) => Shape::A(look(a)?, look(b)?),
            Raw::L(x, b) => Shape::L(*x, look(b)?),
        });
    }
    let root = root.ok_or_else(|| NomError::Spec("missing `root` line".into()))?;
    CoTerm::from_table(nodes, look(&root)?)
}

pub fn parse_spec(src: &str) -> Result<CoTerm, NomError> {
    parse_spec_with(src, &mut Names::new())
}

// ------------------------------------------------------------ samplers

/// A random regular coterm with up to `max_states` states, possibly cyclic.
pub fn random_regular(rng: &mut Rng, pool: &[Var], max_states: usize) -> CoTerm {
    let n = rng.gen_range(1..=max_states.max(1));
    let nodes = (0..n)
        .map(|i| {
            // The last state is a leaf so that some finite paths exist.
            if i + 1 == n && rng.gen_bool(0.5) {
                return Shape::V(pick_var(rng, pool));
            }
            match rng.gen_range(0..8) {
                0 | 1 => Shape::V(pick_var(rng, pool)),
                2..=4 => Shape::A(rng.gen_range(0..n), rng.gen_range(0..n)),
                _ => Shape::L(pick_var(rng, pool), rng.gen_range(0..n)),
            }
        })
        .collect();
    CoTerm::from_table(nodes, 0).expect("in range")
}

/// Regular coterm sample: a cyclic graph or an embedded finite term.
pub fn random_coterm(rng: &mut Rng, pool: &[Var]) -> CoTerm {
    if rng.gen_bool(0.35) {
        embed(&random_term(rng, pool, 10))
    } else {
        random_regular(rng, pool, 5)
    }
}

/// `μs. Ap s s`.
pub fn fix() -> CoTerm {
    CoTerm::from_table(vec![Shape::A(0, 0)], 0).expect("one state")
}

/// `μs. Lm x (Ap s (Vr x))`.
pub fn eta_spine(x: Var) -> CoTerm {
    CoTerm::from_table(vec![Shape::L(x, 1), Shape::A(0, 2), Shape::V(x)], 0).expect("three states")
}

/// Breadth-first list of the first `limit` shapes, for display.
pub fn describe(t: &CoTerm, limit: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut q = VecDeque::from([t.clone()]);
    let mut seen = HashSet::new();
    while let Some(c) = q.pop_front() {
        if out.len() >= limit || !seen.insert(c.key()) {
            continue;
        }
        let line = match c.shape() {
            Shape::V(x) => format!("V {x}"),
            Shape::A(a, b) => {
                q.push_back(a);
                q.push_back(b);
                "A".into()
            }
            Shape::L(x, b) => {
                q.push_back(b);
                format!("L {x}")
            }
        };
        out.push(line);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse;

    fn v(i: u32) -> Var {
        Var(i)
    }

    #[test]
    fn fix_and_truncate() {
        let f = fix();
        assert!(matches!(co_dest(&f), CoDest::A(..)));
        assert_eq!(truncate(&f, 2), "((… …) (… …))");
        assert_eq!(truncate(&embed(&parse("\\x. x").unwrap()), 5), "\\v0. v0");
        assert!(co_fv(&f).unwrap().is_empty());
    }

    #[test]
    fn eta_spine_variants() {
        let a = eta_spine(v(0));
        let b = eta_spine(v(7));
        assert!(co_alpha_eq(&a, &b, EqMode::Exact).unwrap());
        assert!(!co_alpha_eq(&a, &fix(), EqMode::Exact).unwrap());
        assert!(co_fresh(v(0), &a).unwrap());
        let CoDest::L(h) = co_dest(&a) else { panic!() };
        let (y, body) = h.extract(&BTreeSet::from([v(0)]));
        assert_ne!(y, v(0));
        assert!(co_alpha_eq(&co_lm(y, &body), &a, EqMode::Depth(10)).unwrap());
    }

    #[test]
    fn fv_of_cycle() {
        let mut names = Names::new();
        let t = parse_spec_with("state s = A a l\nstate a = V y\nstate l = L x s\nroot s", &mut names).unwrap();
        let y = names.lookup("y").unwrap();
        assert_eq!(co_fv(&t).unwrap(), BTreeSet::from([y]));
    }

    #[test]
    fn spec_errors() {
        assert!(parse_spec("state a = A a b\nroot a").is_err());
        assert!(parse_spec("state a = V x").is_err());
        assert!(parse_spec("nonsense").is_err());
    }

    #[test]
    fn subst_on_embedded() {
        let t = parse("\\x. y x").unwrap();
        let s = parse("x").unwrap();
        let got = co_subst(&embed(&t), &embed(&s), v(1)).unwrap();
        let want = embed(&t.subst(&s, v(1)));
        assert!(co_alpha_eq(&got, &want, EqMode::Exact).unwrap());
        assert!(co_alpha_eq(&co_subst(&fix(), &embed(&s), v(1)).unwrap(), &fix(), EqMode::Exact).unwrap());
    }

    #[test]
    fn psubst_spine_into_fix() {
        // μs. Lm x (Ap s (Vr y)) with y := fix.
        let mut names = Names::new();
        let t = parse_spec_with("state l = L x a\nstate a = A l b\nstate b = V y\nroot l", &mut names).unwrap();
        let y = names.lookup("y").unwrap();
        let x = names.lookup("x").unwrap();
        let got = psubst(&t, &Env::single(y, fix())).unwrap();
        let want = CoTerm::from_table(vec![Shape::L(x, 1), Shape::A(0, 2), Shape::A(2, 2)], 0).unwrap();
        assert!(co_alpha_eq(&got, &want, EqMode::Depth(15)).unwrap());
        assert!(got.is_regular());
    }

    #[test]
    fn non_regular_is_depth_bounded() {
        // State n is Lm v(n) over state n+1.
        let t = CoTerm::from_fn(0, |n| Shape::L(Var(n as u32), n + 1));
        assert_eq!(co_alpha_eq(&t, &t, EqMode::Exact), Err(NomError::NotRegular));
        assert!(co_alpha_eq(&t, &t, EqMode::Depth(20)).unwrap());
        assert!(co_fresh_upto(v(3), &t, 10));
    }
}
