//! Sets of variables: explicit finite sets, or infinite sets given by
//! arithmetic progressions with finite additions and removals.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::NomError;
use crate::perm::{least_unused, Var};

/// The progression `{a·i + b : i ≥ n0}` over variable indices, `a ≥ 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Prog {
    pub a: u32,
    pub b: u32,
    pub n0: u32,
}

impl Prog {
    pub fn new(a: u32, b: u32, n0: u32) -> Prog {
        assert!(a >= 1, "progression step must be positive");
        Prog { a, b, n0 }
    }

    pub fn contains(&self, v: Var) -> bool {
        let i = v.0 as u64;
        let (a, b, n0) = (self.a as u64, self.b as u64, self.n0 as u64);
        i >= a * n0 + b && (i - b).is_multiple_of(a)
    }

    pub fn nth(&self, k: u32) -> Var {
        Var(self.a * (self.n0 + k) + self.b)
    }

    fn first(&self) -> u32 {
        self.a * self.n0 + self.b
    }
}

/// A set of variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum VarSet {
    Finite(BTreeSet<Var>),
    /// `(⋃ progs ∪ adds) ∖ removes`, with at least one progression.
    Symbolic {
        progs: Vec<Prog>,
        adds: BTreeSet<Var>,
        removes: BTreeSet<Var>,
    },
}

impl Default for VarSet {
    fn default() -> Self {
        VarSet::Finite(BTreeSet::new())
    }
}

impl From<BTreeSet<Var>> for VarSet {
    fn from(s: BTreeSet<Var>) -> Self {
        VarSet::Finite(s)
    }
}

impl VarSet {
    pub fn empty() -> VarSet {
        VarSet::default()
    }

    pub fn singleton(v: Var) -> VarSet {
        VarSet::Finite([v].into_iter().collect())
    }

    /// All variables.
    pub fn all() -> VarSet {
        VarSet::progression(Prog::new(1, 0, 0))
    }

    pub fn progression(p: Prog) -> VarSet {
        VarSet::Symbolic { progs: vec![p], adds: BTreeSet::new(), removes: BTreeSet::new() }
    }

    pub fn contains(&self, v: Var) -> bool {
        match self {
            VarSet::Finite(s) => s.contains(&v),
            VarSet::Symbolic { progs, adds, removes } => {
                !removes.contains(&v) && (adds.contains(&v) || progs.iter().any(|p| p.contains(v)))
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, VarSet::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&BTreeSet<Var>> {
        match self {
            VarSet::Finite(s) => Some(s),
            _ => None,
        }
    }

    fn normalize(self) -> VarSet {
        match self {
            VarSet::Symbolic { progs, mut adds, removes } => {
                if progs.is_empty() {
                    adds.retain(|v| !removes.contains(v));
                    return VarSet::Finite(adds);
                }
                let mut ps = progs;
                ps.sort();
                ps.dedup();
                let mut s = VarSet::Symbolic { progs: ps, adds: BTreeSet::new(), removes };
                let keep: BTreeSet<Var> = adds.into_iter().filter(|v| !s.contains(*v)).collect();
                if let VarSet::Symbolic { adds, removes, .. } = &mut s {
                    *adds = keep.into_iter().filter(|v| !removes.contains(v)).collect();
                }
                s
            }
            f => f,
        }
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        match (self, other) {
            (VarSet::Finite(a), VarSet::Finite(b)) => VarSet::Finite(a | b),
            _ => {
                let (pa, aa, ra) = self.parts();
                let (pb, ab, rb) = other.parts();
                let progs: Vec<Prog> = pa.into_iter().chain(pb).collect();
                let adds: BTreeSet<Var> =
                    aa.union(&ab).copied().filter(|v| self.contains(*v) || other.contains(*v)).collect();
                let removes: BTreeSet<Var> =
                    ra.union(&rb).copied().filter(|v| !self.contains(*v) && !other.contains(*v)).collect();
                VarSet::Symbolic { progs, adds, removes }.normalize()
            }
        }
    }

    /// `self ∖ f` for a finite `f`.
    pub fn minus(&self, f: &BTreeSet<Var>) -> VarSet {
        match self {
            VarSet::Finite(a) => VarSet::Finite(a - f),
            VarSet::Symbolic { progs, adds, removes } => {
                VarSet::Symbolic { progs: progs.clone(), adds: adds - f, removes: removes | f }.normalize()
            }
        }
    }

    pub fn insert(&self, v: Var) -> VarSet {
        self.union(&VarSet::singleton(v))
    }

    pub fn remove(&self, v: Var) -> VarSet {
        self.minus(&[v].into_iter().collect())
    }

    fn parts(&self) -> (Vec<Prog>, BTreeSet<Var>, BTreeSet<Var>) {
        match self {
            VarSet::Finite(s) => (vec![], s.clone(), BTreeSet::new()),
            VarSet::Symbolic { progs, adds, removes } => (progs.clone(), adds.clone(), removes.clone()),
        }
    }

    /// Largest index mentioned by any constant in the representation.
    fn max_const(&self) -> u32 {
        let (ps, a, r) = self.parts();
        let m1 = ps.iter().map(|p| p.first()).max().unwrap_or(0);
        let m2 = a.iter().chain(r.iter()).map(|v| v.0).max().unwrap_or(0);
        m1.max(m2)
    }

    fn period(&self) -> u32 {
        let (ps, _, _) = self.parts();
        ps.iter().fold(1, |acc, p| lcm(acc, p.a))
    }

    /// Exact subset test.
    pub fn is_subset(&self, other: &VarSet) -> bool {
        match self {
            VarSet::Finite(s) => s.iter().all(|v| other.contains(*v)),
            VarSet::Symbolic { progs, adds, .. } => {
                if other.is_finite() {
                    return false;
                }
                if !adds.iter().all(|v| other.contains(*v)) {
                    return false;
                }
                // Beyond every constant, membership in `other` is periodic with
                // period `other.period()`, so a bounded scan decides inclusion.
                let bound = self.max_const().max(other.max_const()) as u64;
                let per = other.period() as u64;
                progs.iter().all(|p| {
                    let mut k = 0u32;
                    loop {
                        let v = p.nth(k);
                        if self.contains(v) && !other.contains(v) {
                            return false;
                        }
                        if v.0 as u64 > bound + per * p.a as u64 + 1 {
                            return true;
                        }
                        k += 1;
                    }
                })
            }
        }
    }

    /// Exact set equality.
    pub fn set_eq(&self, other: &VarSet) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    /// Up to `k` variables outside both `self` and `avoid`, in index order.
    /// Fewer are returned only when the complement is that small.
    pub fn outside(&self, k: usize, avoid: &BTreeSet<Var>) -> Vec<Var> {
        let bound = self.max_const() as u64
            + avoid.iter().map(|v| v.0 as u64).max().unwrap_or(0)
            + (self.period() as u64 + 1) * (k as u64 + 2)
            + 2;
        let mut out = Vec::new();
        let mut i = 0u64;
        while out.len() < k && i <= bound {
            let v = Var(i as u32);
            if !self.contains(v) && !avoid.contains(&v) {
                out.push(v);
            }
            i += 1;
        }
        out
    }

    /// Least variable outside the set.
    pub fn fresh(&self) -> Result<Var, NomError> {
        match self {
            VarSet::Finite(s) => Ok(least_unused(s)),
            _ => self
                .outside(1, &BTreeSet::new())
                .into_iter()
                .next()
                .ok_or_else(|| NomError::NoFreshVar("complement of the set is empty".into())),
        }
    }

    /// Finite approximation listing members with index below `limit`.
    pub fn members_below(&self, limit: u32) -> BTreeSet<Var> {
        match self {
            VarSet::Finite(s) => s.iter().copied().filter(|v| v.0 < limit).collect(),
            _ => (0..limit).map(Var).filter(|v| self.contains(*v)).collect(),
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

/// `fresh_var` over a variable set: least index outside `avoid`.
pub fn fresh_var(avoid: &VarSet) -> Result<Var, NomError> {
    avoid.fresh()
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarSet::Finite(s) => {
                let xs: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                write!(f, "{{{}}}", xs.join(", "))
            }
            VarSet::Symbolic { progs, adds, removes } => {
                let ps: Vec<String> = progs.iter().map(|p| format!("{{{}i+{} : i>={}}}", p.a, p.b, p.n0)).collect();
                write!(f, "{}", ps.join(" u "))?;
                if !adds.is_empty() {
                    write!(f, " u {}", VarSet::Finite(adds.clone()))?;
                }
                if !removes.is_empty() {
                    write!(f, " \\ {}", VarSet::Finite(removes.clone()))?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(xs: &[u32]) -> VarSet {
        VarSet::Finite(xs.iter().map(|&i| Var(i)).collect())
    }

    #[test]
    fn fresh_least_index() {
        assert_eq!(fresh_var(&fin(&[0, 1])).unwrap(), Var(2));
        assert_eq!(fresh_var(&fin(&[])).unwrap(), Var(0));
        assert_eq!(fresh_var(&fin(&[0, 2])).unwrap(), Var(1));
        assert!(fresh_var(&VarSet::all()).is_err());
        let evens = VarSet::progression(Prog::new(2, 0, 0));
        assert_eq!(fresh_var(&evens).unwrap(), Var(1));
    }

    #[test]
    fn symbolic_algebra() {
        let evens = VarSet::progression(Prog::new(2, 0, 0));
        let odds = VarSet::progression(Prog::new(2, 1, 0));
        let all = evens.union(&odds);
        assert!(VarSet::all().is_subset(&all));
        assert!(all.is_subset(&VarSet::all()));
        let e2 = evens.remove(Var(4));
        assert!(!e2.contains(Var(4)));
        assert!(e2.is_subset(&evens));
        assert!(!evens.is_subset(&e2));
        assert!(e2.insert(Var(4)).set_eq(&evens));
        assert!(fin(&[2, 6]).is_subset(&evens));
        assert!(!evens.is_subset(&fin(&[2])));
        let threes = VarSet::progression(Prog::new(3, 0, 2));
        assert!(!threes.is_subset(&evens));
        let sixes = VarSet::progression(Prog::new(6, 0, 1));
        assert!(sixes.is_subset(&evens));
        assert!(sixes.is_subset(&threes.union(&fin(&[]))));
    }

    #[test]
    fn outside_enumerates_complement() {
        let s = VarSet::all().minus(&fin(&[3, 5]).as_finite().unwrap().clone());
        assert_eq!(s.outside(5, &BTreeSet::new()), vec![Var(3), Var(5)]);
    }
}
