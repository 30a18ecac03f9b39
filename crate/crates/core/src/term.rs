//! Finitary λ-terms modulo α-equivalence.
//!
//! A [`Term`] stores a named representative. Equality is α-equivalence,
//! computed by a simultaneous traversal that pairs binders positionally.
//! Hashing and ordering go through the nameless (de Bruijn) form, so α-equal
//! terms collide in hash maps.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::ParseError;
use crate::perm::{is_ident, least_unused, Perm, Var};
use crate::varset::VarSet;

#[derive(Debug)]
pub enum Node {
    Vr(Var),
    Ap(Term, Term),
    Lm(Var, Term),
}

/// A λ-term, compared up to α-equivalence.
#[derive(Clone, Debug)]
pub struct Term(Arc<Node>);

impl Term {
    pub fn vr(x: Var) -> Term {
        Term(Arc::new(Node::Vr(x)))
    }

    pub fn ap(t1: Term, t2: Term) -> Term {
        Term(Arc::new(Node::Ap(t1, t2)))
    }

    pub fn lm(x: Var, t: Term) -> Term {
        Term(Arc::new(Node::Lm(x, t)))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Vr(_) => 1,
            Node::Ap(a, b) => a.size() + b.size() + 1,
            Node::Lm(_, b) => b.size() + 1,
        }
    }

    /// Every variable name occurring anywhere, binders included.
    pub fn all_names(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<Var>) {
        match self.node() {
            Node::Vr(x) => {
                out.insert(*x);
            }
            Node::Ap(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Node::Lm(x, b) => {
                out.insert(*x);
                b.collect_names(out);
            }
        }
    }

    pub fn fv_set(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_fv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_fv(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self.node() {
            Node::Vr(x) => {
                if !bound.contains(x) {
                    out.insert(*x);
                }
            }
            Node::Ap(a, b) => {
                a.collect_fv(bound, out);
                b.collect_fv(bound, out);
            }
            Node::Lm(x, b) => {
                bound.push(*x);
                b.collect_fv(bound, out);
                bound.pop();
            }
        }
    }

    /// Free variables, always a finite set.
    pub fn fv(&self) -> VarSet {
        VarSet::Finite(self.fv_set())
    }

    /// `x # t`: `x` does not occur free.
    pub fn fresh(&self, x: Var) -> bool {
        match self.node() {
            Node::Vr(y) => *y != x,
            Node::Ap(a, b) => a.fresh(x) && b.fresh(x),
            Node::Lm(y, b) => *y == x || b.fresh(x),
        }
    }

    /// Applies `f` to every variable occurrence, binders included.
    fn map_names(&self, f: &dyn Fn(Var) -> Var) -> Term {
        match self.node() {
            Node::Vr(x) => Term::vr(f(*x)),
            Node::Ap(a, b) => Term::ap(a.map_names(f), b.map_names(f)),
            Node::Lm(x, b) => Term::lm(f(*x), b.map_names(f)),
        }
    }

    /// `t[z1 ∧ z2]`.
    pub fn swap(&self, z1: Var, z2: Var) -> Term {
        if z1 == z2 {
            return self.clone();
        }
        self.map_names(&|v| v.swapped(z1, z2))
    }

    /// `t[σ]`.
    pub fn permute(&self, sigma: &Perm) -> Term {
        if sigma.is_id() {
            return self.clone();
        }
        self.map_names(&|v| sigma.apply(v))
    }

    /// Capture-avoiding substitution `t[s/y]`.
    pub fn subst(&self, s: &Term, y: Var) -> Term {
        let fv_s = s.fv_set();
        self.subst_with(s, &fv_s, y)
    }

    fn subst_with(&self, s: &Term, fv_s: &BTreeSet<Var>, y: Var) -> Term {
        match self.node() {
            Node::Vr(x) => {
                if *x == y {
                    s.clone()
                } else {
                    self.clone()
                }
            }
            Node::Ap(a, b) => Term::ap(a.subst_with(s, fv_s, y), b.subst_with(s, fv_s, y)),
            Node::Lm(x, b) => {
                if *x == y || b.fresh(y) {
                    self.clone()
                } else if !fv_s.contains(x) {
                    Term::lm(*x, b.subst_with(s, fv_s, y))
                } else {
                    let mut avoid = fv_s.clone();
                    avoid.extend(b.fv_set());
                    avoid.insert(y);
                    avoid.insert(*x);
                    let x2 = least_unused(&avoid);
                    Term::lm(x2, b.swap(*x, x2).subst_with(s, fv_s, y))
                }
            }
        }
    }

    /// Capture-avoiding renaming `t[x/y]`: replace free `y` by `x`.
    pub fn rename(&self, x: Var, y: Var) -> Term {
        self.subst(&Term::vr(x), y)
    }

    /// Destructor view.
    pub fn dest(&self) -> DestView {
        match self.node() {
            Node::Vr(x) => DestView::V(*x),
            Node::Ap(a, b) => DestView::A(a.clone(), b.clone()),
            Node::Lm(x, b) => DestView::L(LHandle { x: *x, body: b.clone() }),
        }
    }

    pub fn is_ap(&self) -> bool {
        matches!(self.node(), Node::Ap(..))
    }

    /// Renames every binder to a distinct variable starting at index `start`,
    /// producing an α-variant whose binders are disjoint from all names below
    /// `start`.
    pub fn refresh_binders(&self, start: u32) -> Term {
        let mut next = start;
        self.refresh(&mut Vec::new(), &mut next)
    }

    fn refresh(&self, env: &mut Vec<(Var, Var)>, next: &mut u32) -> Term {
        match self.node() {
            Node::Vr(x) => {
                let y = env.iter().rev().find(|(a, _)| a == x).map(|(_, b)| *b).unwrap_or(*x);
                Term::vr(y)
            }
            Node::Ap(a, b) => Term::ap(a.refresh(env, next), b.refresh(env, next)),
            Node::Lm(x, b) => {
                let y = Var(*next);
                *next += 1;
                env.push((*x, y));
                let body = b.refresh(env, next);
                env.pop();
                Term::lm(y, body)
            }
        }
    }

    /// Representative identity (not α-equality).
    pub fn same_representative(&self, other: &Term) -> bool {
        match (self.node(), other.node()) {
            (Node::Vr(x), Node::Vr(y)) => x == y,
            (Node::Ap(a, b), Node::Ap(c, d)) => a.same_representative(c) && b.same_representative(d),
            (Node::Lm(x, a), Node::Lm(y, b)) => x == y && a.same_representative(b),
            _ => false,
        }
    }

    fn canon_tokens(&self, env: &mut Vec<Var>, out: &mut Vec<u64>) {
        match self.node() {
            Node::Vr(x) => match env.iter().rev().position(|b| b == x) {
                Some(i) => {
                    out.push(1);
                    out.push(i as u64);
                }
                None => {
                    out.push(0);
                    out.push(x.0 as u64);
                }
            },
            Node::Ap(a, b) => {
                out.push(2);
                a.canon_tokens(env, out);
                b.canon_tokens(env, out);
            }
            Node::Lm(x, b) => {
                out.push(3);
                env.push(*x);
                b.canon_tokens(env, out);
                env.pop();
            }
        }
    }

    /// Nameless canonical form as a token sequence.
    pub fn canonical(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.canon_tokens(&mut Vec::new(), &mut out);
        out
    }

    /// Renders with the given naming function for variables.
    pub fn render(&self, name: &dyn Fn(Var) -> String) -> String {
        let mut s = String::new();
        self.render_into(name, &mut s, false);
        s
    }

    fn render_into(&self, name: &dyn Fn(Var) -> String, out: &mut String, arg_pos: bool) {
        match self.node() {
            Node::Vr(x) => out.push_str(&name(*x)),
            Node::Lm(x, b) => {
                if arg_pos {
                    out.push('(');
                }
                out.push('\\');
                out.push_str(&name(*x));
                out.push_str(". ");
                b.render_into(name, out, false);
                if arg_pos {
                    out.push(')');
                }
            }
            Node::Ap(a, b) => {
                if arg_pos {
                    out.push('(');
                }
                match a.node() {
                    Node::Lm(..) => {
                        out.push('(');
                        a.render_into(name, out, false);
                        out.push(')');
                    }
                    _ => a.render_into(name, out, false),
                }
                out.push(' ');
                b.render_into(name, out, true);
                if arg_pos {
                    out.push(')');
                }
            }
        }
    }
}

/// α-equivalence by simultaneous traversal carrying the binder stacks.
pub fn alpha_eq(t: &Term, s: &Term) -> bool {
    fn go(t: &Term, s: &Term, e1: &mut Vec<Var>, e2: &mut Vec<Var>) -> bool {
        match (t.node(), s.node()) {
            (Node::Vr(x), Node::Vr(y)) => {
                let i = e1.iter().rev().position(|b| b == x);
                let j = e2.iter().rev().position(|b| b == y);
                match (i, j) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Node::Ap(a, b), Node::Ap(c, d)) => go(a, c, e1, e2) && go(b, d, e1, e2),
            (Node::Lm(x, a), Node::Lm(y, b)) => {
                e1.push(*x);
                e2.push(*y);
                let r = go(a, b, e1, e2);
                e1.pop();
                e2.pop();
                r
            }
            _ => false,
        }
    }
    Arc::ptr_eq(&t.0, &s.0) || go(t, s, &mut Vec::new(), &mut Vec::new())
}

/// α-equivalence via the swapping-based bound-variable rule; a slower second
/// oracle used for cross-checking [`alpha_eq`].
pub fn alpha_eq_by_swap(t: &Term, s: &Term) -> bool {
    match (t.node(), s.node()) {
        (Node::Vr(x), Node::Vr(y)) => x == y,
        (Node::Ap(a, b), Node::Ap(c, d)) => alpha_eq_by_swap(a, c) && alpha_eq_by_swap(b, d),
        (Node::Lm(x, a), Node::Lm(y, b)) => (x == y || a.fresh(*y)) && alpha_eq_by_swap(&a.swap(*y, *x), b),
        _ => false,
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        alpha_eq(self, other)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical().hash(state)
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Term) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Term) -> Ordering {
        self.canonical().cmp(&other.canonical())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|v| v.to_string()))
    }
}

/// The destructor view of a term.
#[derive(Clone, Debug)]
pub enum DestView {
    V(Var),
    A(Term, Term),
    L(LHandle),
}

/// An abstraction handle: any `(x, t')` with `t = Lm x t'` can be extracted.
#[derive(Clone, Debug)]
pub struct LHandle {
    x: Var,
    body: Term,
}

impl LHandle {
    /// The stored binder and body.
    pub fn stored(&self) -> (Var, Term) {
        (self.x, self.body.clone())
    }

    /// A pair `(x, t')` with `x ∉ avoid`. The stored binder is kept when
    /// allowed; otherwise the least variable outside `avoid ∪ FV t' ∪ {x}`.
    pub fn extract(&self, avoid: &BTreeSet<Var>) -> (Var, Term) {
        if !avoid.contains(&self.x) {
            return self.stored();
        }
        let mut av = avoid.clone();
        av.extend(self.body.fv_set());
        av.insert(self.x);
        let x2 = least_unused(&av);
        (x2, self.body.swap(self.x, x2))
    }

    /// Whether `t = Lm y s` for the abstraction `t` behind this handle.
    pub fn admits(&self, y: Var, s: &Term) -> bool {
        alpha_eq(&Term::lm(self.x, self.body.clone()), &Term::lm(y, s.clone()))
    }
}

/// Interning table from identifiers to variables, in first-seen order.
#[derive(Clone, Debug, Default)]
pub struct Names {
    names: Vec<String>,
}

impl Names {
    pub fn new() -> Names {
        Names::default()
    }

    pub fn intern(&mut self, s: &str) -> Var {
        if let Some(i) = self.names.iter().position(|n| n == s) {
            return Var(i as u32);
        }
        self.names.push(s.to_string());
        Var(self.names.len() as u32 - 1)
    }

    pub fn lookup(&self, s: &str) -> Option<Var> {
        self.names.iter().position(|n| n == s).map(|i| Var(i as u32))
    }

    /// User name for interned variables; `v<i>` otherwise, primed until it
    /// does not clash with a user name.
    pub fn name(&self, v: Var) -> String {
        match self.names.get(v.0 as usize) {
            Some(n) => n.clone(),
            None => {
                let mut s = v.to_string();
                while self.names.contains(&s) {
                    s.push('\'');
                }
                s
            }
        }
    }

    pub fn show(&self, t: &Term) -> String {
        t.render(&|v| self.name(v))
    }
}

/// Parses with a fresh interning table.
pub fn parse(src: &str) -> Result<Term, ParseError> {
    parse_with(src, &mut Names::new())
}

/// Parses `src`, interning identifiers into `names`.
///
/// Grammar: `t ::= \x. t | lam x. t | t t | x | (t)`; application is
/// left-associative and binders extend as far right as possible. `\x y. t`
/// abbreviates `\x. \y. t`.
pub fn parse_with(src: &str, names: &mut Names) -> Result<Term, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, names, end: src.len() };
    let t = p.term()?;
    if p.i < p.toks.len() {
        return Err(ParseError::new(p.toks[p.i].0, "unexpected input after term"));
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lam,
    Dot,
    LParen,
    RParen,
    Ident(String),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let cs: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < cs.len() {
        let (pos, c) = cs[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '\\' | 'λ' => {
                out.push((pos, Tok::Lam));
                i += 1;
            }
            '.' => {
                out.push((pos, Tok::Dot));
                i += 1;
            }
            '(' => {
                out.push((pos, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((pos, Tok::RParen));
                i += 1;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < cs.len() && (cs[i].1.is_alphanumeric() || cs[i].1 == '_' || cs[i].1 == '\'') {
                    i += 1;
                }
                let end = if i < cs.len() { cs[i].0 } else { src.len() };
                let word = &src[pos..end];
                debug_assert!(is_ident(word));
                let _ = start;
                if word == "lam" {
                    out.push((pos, Tok::Lam));
                } else {
                    out.push((pos, Tok::Ident(word.to_string())));
                }
            }
            other => return Err(ParseError::new(pos, format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    i: usize,
    names: &'a mut Names,
    end: usize,
}

impl Parser<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.0).unwrap_or(self.end)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.1)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut acc: Option<Term> = None;
        loop {
            match self.peek() {
                Some(Tok::Lam) => {
                    let lam = self.lambda()?;
                    return Ok(match acc {
                        Some(f) => Term::ap(f, lam),
                        None => lam,
                    });
                }
                Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    let a = self.atom()?;
                    acc = Some(match acc {
                        Some(f) => Term::ap(f, a),
                        None => a,
                    });
                }
                _ => break,
            }
        }
        acc.ok_or_else(|| ParseError::new(self.pos(), "expected a term"))
    }

    fn lambda(&mut self) -> Result<Term, ParseError> {
        self.i += 1;
        let mut binders = Vec::new();
        while let Some(Tok::Ident(n)) = self.peek() {
            let n = n.clone();
            binders.push(self.names.intern(&n));
            self.i += 1;
        }
        if binders.is_empty() {
            return Err(ParseError::new(self.pos(), "expected a binder"));
        }
        if self.peek() != Some(&Tok::Dot) {
            return Err(ParseError::new(self.pos(), "expected '.'"));
        }
        self.i += 1;
        let body = self.term()?;
        Ok(binders.into_iter().rev().fold(body, |b, x| Term::lm(x, b)))
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(n)) => {
                self.i += 1;
                Ok(Term::vr(self.names.intern(&n)))
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let t = self.term()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(ParseError::new(self.pos(), "expected ')'"));
                }
                self.i += 1;
                Ok(t)
            }
            _ => Err(ParseError::new(self.pos(), "expected a variable or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Var {
        Var(i)
    }
    fn vr(i: u32) -> Term {
        Term::vr(v(i))
    }

    #[test]
    fn alpha_examples() {
        let a = Term::lm(v(0), Term::ap(vr(0), vr(0)));
        let b = Term::lm(v(1), Term::ap(vr(1), vr(1)));
        assert_eq!(a, b);
        assert_ne!(Term::lm(v(0), vr(1)), Term::lm(v(1), vr(1)));
        assert!(alpha_eq_by_swap(&a, &b));
    }

    #[test]
    fn swap_and_permute() {
        // (Lm x (Ap x y))[x∧y] = Lm y (Ap y x)
        let t = Term::lm(v(0), Term::ap(vr(0), vr(1)));
        let want = Term::lm(v(1), Term::ap(vr(1), vr(0)));
        assert!(t.swap(v(0), v(1)).same_representative(&want));
        // (Lm x (Ap z y))[x↦y, y↦z, z↦x] = Lm y (Ap x z)
        let s = Term::lm(v(0), Term::ap(vr(2), vr(1)));
        let sigma = Perm::from_pairs([(v(0), v(1)), (v(1), v(2)), (v(2), v(0))]).unwrap();
        assert_eq!(s.permute(&sigma), Term::lm(v(1), Term::ap(vr(0), vr(2))));
        assert_eq!(vr(2).swap(v(0), v(1)), vr(2));
    }

    #[test]
    fn subst_examples() {
        // (Lm x (Ap x y))[(Ap x x)/y] = Lm x' (Ap x' (Ap x x))
        let t = Term::lm(v(0), Term::ap(vr(0), vr(1)));
        let s = Term::ap(vr(0), vr(0));
        let r = t.subst(&s, v(1));
        match r.node() {
            Node::Lm(x2, _) => assert_ne!(*x2, v(0)),
            _ => panic!("expected abstraction"),
        }
        assert_eq!(r, Term::lm(v(9), Term::ap(vr(9), s.clone())));
        // (Lm x (Ap x y))[x/y] = Lm x' (Ap x' x)
        assert_eq!(t.rename(v(0), v(1)), Term::lm(v(9), Term::ap(vr(9), vr(0))));
        assert_eq!(vr(1).subst(&s, v(1)), s);
        assert_eq!(vr(1).rename(v(0), v(1)), vr(0));
    }

    #[test]
    fn fv_and_fresh() {
        let t = Term::lm(v(0), Term::ap(vr(1), vr(0)));
        assert_eq!(t.fv_set(), [v(1)].into_iter().collect());
        assert!(Term::lm(v(0), vr(0)).fv_set().is_empty());
        assert_eq!(Term::ap(vr(0), vr(1)).fv_set(), [v(0), v(1)].into_iter().collect());
        assert!(Term::lm(v(0), vr(0)).fresh(v(0)));
        assert!(!Term::lm(v(1), vr(0)).fresh(v(0)));
        assert!(vr(0).fresh(v(2)));
    }

    #[test]
    fn dest_extract_refreshes() {
        let t = Term::lm(v(0), vr(0));
        let DestView::L(h) = t.dest() else { panic!() };
        let (x2, body) = h.extract(&[v(0)].into_iter().collect());
        assert_ne!(x2, v(0));
        assert_eq!(Term::lm(x2, body), t);
        let (x3, _) = h.extract(&BTreeSet::new());
        assert_eq!(x3, v(0));
    }

    #[test]
    fn parse_print() {
        let mut n = Names::new();
        let t = parse_with("\\x. x y", &mut n).unwrap();
        assert!(t.same_representative(&Term::lm(v(0), Term::ap(vr(0), vr(1)))));
        let u = parse("(\\x. x) z").unwrap();
        assert!(u.same_representative(&Term::ap(Term::lm(v(0), vr(0)), vr(1))));
        let mut n2 = Names::new();
        let w = parse_with("\\x.\\y. x", &mut n2).unwrap();
        assert_eq!(n2.show(&w), "\\x. \\y. x");
        let mut n3 = Names::new();
        let z = parse_with("lam f. f (\\x. x) (g h)", &mut n3).unwrap();
        assert_eq!(n3.show(&z), "\\f. f (\\x. x) (g h)");
        assert!(parse("\\x x").is_err());
        assert!(parse("(x").is_err());
        assert!(parse("x $").is_err());
    }
}
