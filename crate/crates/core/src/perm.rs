//! Variables and finite-support permutations.
//!
//! A [`Perm`] stores only the variables it moves, so structural equality of two
//! permutations coincides with extensional equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::ParseError;

/// A variable, identified by its index. Displays as `v<index>`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> u32 {
        self.0
    }

    /// Image of `self` under the transposition `a ↔ b`.
    pub fn swapped(self, a: Var, b: Var) -> Var {
        if self == a {
            b
        } else if self == b {
            a
        } else {
            self
        }
    }

    /// Image of `self` under the renaming `[y/x]` (replace `x` by `y`).
    pub fn renamed(self, y: Var, x: Var) -> Var {
        if self == x {
            y
        } else {
            self
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Least variable whose index is not in `avoid`.
pub fn least_unused<'a>(avoid: impl IntoIterator<Item = &'a Var>) -> Var {
    let set: BTreeSet<u32> = avoid.into_iter().map(|v| v.0).collect();
    let mut i = 0;
    while set.contains(&i) {
        i += 1;
    }
    Var(i)
}

/// A permutation of variables with finite support.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Perm {
    map: BTreeMap<Var, Var>,
}

impl Perm {
    pub fn id() -> Perm {
        Perm::default()
    }

    /// The transposition `a ↔ b` (the identity when `a == b`).
    pub fn transposition(a: Var, b: Var) -> Perm {
        let mut map = BTreeMap::new();
        if a != b {
            map.insert(a, b);
            map.insert(b, a);
        }
        Perm { map }
    }

    /// Builds a permutation from explicit pairs. Fixpoints are dropped.
    /// Returns `None` unless the pairs form a bijection on their domain.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Var)>) -> Option<Perm> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            if let Some(prev) = map.insert(a, b) {
                if prev != b {
                    return None;
                }
            }
        }
        let dom: BTreeSet<Var> = map.keys().copied().collect();
        let rng: BTreeSet<Var> = map.values().copied().collect();
        if dom != rng {
            return None;
        }
        map.retain(|a, b| a != b);
        Some(Perm { map })
    }

    pub fn apply(&self, x: Var) -> Var {
        self.map.get(&x).copied().unwrap_or(x)
    }

    pub fn is_id(&self) -> bool {
        self.map.is_empty()
    }

    pub fn support(&self) -> BTreeSet<Var> {
        self.map.keys().copied().collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Var, Var)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    /// `compose(σ, τ)` maps `x` to `σ(τ(x))`.
    pub fn compose(&self, tau: &Perm) -> Perm {
        let mut dom: BTreeSet<Var> = self.support();
        dom.extend(tau.map.keys().copied());
        let map = dom
            .into_iter()
            .filter_map(|x| {
                let y = self.apply(tau.apply(x));
                (y != x).then_some((x, y))
            })
            .collect();
        Perm { map }
    }

    pub fn inverse(&self) -> Perm {
        Perm { map: self.map.iter().map(|(a, b)| (*b, *a)).collect() }
    }

    /// Transpositions whose left-to-right composition equals `self`:
    /// `compose(t1, compose(t2, … tn))`. Each cycle `(a1 a2 … ak)` is emitted
    /// as `(a1 a2), (a2 a3), …, (a(k-1) ak)`.
    pub fn decompose(&self) -> Vec<(Var, Var)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.map.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut cycle = vec![start];
            seen.insert(start);
            let mut cur = self.apply(start);
            while cur != start {
                seen.insert(cur);
                cycle.push(cur);
                cur = self.apply(cur);
            }
            for w in cycle.windows(2) {
                out.push((w[0], w[1]));
            }
        }
        out
    }

    /// Recomposes a transposition list as `decompose` produces it.
    pub fn from_transpositions(ts: &[(Var, Var)]) -> Perm {
        ts.iter().fold(Perm::id(), |acc, &(a, b)| acc.compose(&Perm::transposition(a, b)))
    }

    /// Renders with an optional naming function for variables.
    pub fn render(&self, name: &dyn Fn(Var) -> String) -> String {
        let body: Vec<String> = self.map.iter().map(|(a, b)| format!("{}->{}", name(*a), name(*b))).collect();
        format!("{{{}}}", body.join(", "))
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|v| v.to_string()))
    }
}

/// Parses a permutation literal, either cycle form `(x y)(y z)` or mapping form
/// `{x->y, y->z, z->x}`. Cycles compose left to right as written, so `(x y)(y z)`
/// denotes `compose((x y), (y z))`. Variable names are resolved by `intern`.
pub fn parse_perm(src: &str, intern: &mut dyn FnMut(&str) -> Var) -> Result<Perm, ParseError> {
    let s = src.trim();
    if s.is_empty() || s == "id" {
        return Ok(Perm::id());
    }
    if let Some(inner) = s.strip_prefix('{') {
        let inner = inner.strip_suffix('}').ok_or_else(|| ParseError::new(s.len(), "expected closing '}'"))?;
        let mut pairs = Vec::new();
        let mut offset = 1;
        for entry in inner.split(',') {
            let e = entry.trim();
            if e.is_empty() {
                offset += entry.len() + 1;
                continue;
            }
            let (a, b) = e.split_once("->").ok_or_else(|| ParseError::new(offset, "expected 'a->b'"))?;
            let (a, b) = (a.trim(), b.trim());
            if !is_ident(a) || !is_ident(b) {
                return Err(ParseError::new(offset, "expected identifiers around '->'"));
            }
            pairs.push((intern(a), intern(b)));
            offset += entry.len() + 1;
        }
        return Perm::from_pairs(pairs).ok_or_else(|| ParseError::new(0, "mapping is not a bijection on its domain"));
    }
    let mut acc = Perm::id();
    let mut rest = s;
    let mut pos = 0;
    while !rest.is_empty() {
        let trimmed = rest.trim_start();
        pos += rest.len() - trimmed.len();
        rest = trimmed;
        if rest.is_empty() {
            break;
        }
        if !rest.starts_with('(') {
            return Err(ParseError::new(pos, "expected '(' or '{'"));
        }
        let close = rest.find(')').ok_or_else(|| ParseError::new(pos, "unclosed cycle"))?;
        let names: Vec<&str> = rest[1..close].split_whitespace().collect();
        if names.iter().any(|n| !is_ident(n)) {
            return Err(ParseError::new(pos + 1, "expected identifiers in cycle"));
        }
        let vars: Vec<Var> = names.iter().map(|n| intern(n)).collect();
        let distinct: BTreeSet<Var> = vars.iter().copied().collect();
        if distinct.len() != vars.len() {
            return Err(ParseError::new(pos, "repeated variable in cycle"));
        }
        let mut cyc = Perm::id();
        for w in vars.windows(2) {
            cyc = cyc.compose(&Perm::transposition(w[0], w[1]));
        }
        acc = acc.compose(&cyc);
        pos += close + 1;
        rest = &rest[close + 1..];
    }
    Ok(acc)
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Var {
        Var(i)
    }

    fn cyc3() -> Perm {
        Perm::from_pairs([(v(0), v(1)), (v(1), v(2)), (v(2), v(0))]).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(Perm::transposition(v(0), v(1)).apply(v(0)), v(1));
        assert_eq!(Perm::id().apply(v(7)), v(7));
        assert_eq!(cyc3().apply(v(2)), v(0));
    }

    #[test]
    fn compose_and_inverse() {
        let t = Perm::transposition(v(0), v(1));
        assert!(t.compose(&t).is_id());
        assert_eq!(cyc3().compose(&Perm::id()), cyc3());
        assert_eq!(t.inverse(), t);
        assert!(Perm::id().inverse().is_id());
        let inv = cyc3().inverse();
        assert_eq!(inv.apply(v(1)), v(0));
        assert_eq!(inv.apply(v(2)), v(1));
        assert_eq!(inv.apply(v(0)), v(2));
        // compose(x↔y, y↔z) checked pointwise.
        let c = Perm::transposition(v(0), v(1)).compose(&Perm::transposition(v(1), v(2)));
        for i in 0..4 {
            let expect = v(i).swapped(v(1), v(2)).swapped(v(0), v(1));
            assert_eq!(c.apply(v(i)), expect);
        }
    }

    #[test]
    fn decompose_examples() {
        assert!(Perm::id().decompose().is_empty());
        assert_eq!(Perm::transposition(v(0), v(1)).decompose(), vec![(v(0), v(1))]);
        let d = cyc3().decompose();
        assert_eq!(d.len(), 2);
        assert_eq!(Perm::from_transpositions(&d), cyc3());
    }

    #[test]
    fn no_fixpoints_stored() {
        let p = Perm::from_pairs([(v(0), v(0)), (v(1), v(2)), (v(2), v(1))]).unwrap();
        assert_eq!(p.support().len(), 2);
        assert!(Perm::from_pairs([(v(0), v(1))]).is_none());
    }

    #[test]
    fn literal_forms_agree() {
        let mut names = Vec::<String>::new();
        let mut intern = |s: &str| {
            if let Some(i) = names.iter().position(|n| n == s) {
                Var(i as u32)
            } else {
                names.push(s.to_string());
                Var(names.len() as u32 - 1)
            }
        };
        let a = parse_perm("{x->y, y->z, z->x}", &mut intern).unwrap();
        let b = parse_perm("(x y)(y z)", &mut intern).unwrap();
        assert_eq!(a, b);
        assert!(parse_perm("(x y", &mut intern).is_err());
    }
}
