//! Index algebra for lattices of Banach and Hilbert spaces.
//!
//! Two index families are provided: points `(1/p, 1/q)` of the unit square
//! labelling the spaces `L^(p,q)`, and integer Hilbert-scale indices `k`.
//! This module never touches vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An involutive lattice of indices. `leq(a, b)` means `V_a ⊂ V_b`.
pub trait LatticeIndex: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn leq(&self, other: &Self) -> bool;
    fn involution(&self) -> Self;
    fn meet(&self, other: &Self) -> Self;
    fn join(&self, other: &Self) -> Self;
    /// The self-dual index of the central Hilbert space.
    fn is_center(&self) -> bool {
        self.involution() == *self
    }
    /// Identity of indices up to rounding in the involution.
    fn same(&self, other: &Self) -> bool {
        self == other
    }
}

/// The point `(1/p, 1/q)` of the unit square.
///
/// Diagonal points are plain `L^p`; above the diagonal (`inv_p < inv_q`) lie
/// intersections `L^p ∩ L^q`, below it sums `L^p + L^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpIndex {
    inv_p: f64,
    inv_q: f64,
}

impl LpIndex {
    pub fn new(inv_p: f64, inv_q: f64) -> Result<Self> {
        let ok = |t: f64| (0.0..=1.0).contains(&t);
        if !(ok(inv_p) && ok(inv_q)) {
            return Err(Error::InvalidIndex { inv_p, inv_q });
        }
        Ok(Self { inv_p, inv_q })
    }

    /// `L^(p,q)` from exponents in `[1, ∞]`.
    pub fn from_exponents(p: f64, q: f64) -> Result<Self> {
        Self::new(inverse_exponent(p)?, inverse_exponent(q)?)
    }

    /// The diagonal point of `L^p`.
    pub fn lp(p: f64) -> Result<Self> {
        Self::from_exponents(p, p)
    }

    pub fn center() -> Self {
        Self { inv_p: 0.5, inv_q: 0.5 }
    }

    /// `L^∞ ∩ L^1`, the smallest space.
    pub fn smallest() -> Self {
        Self { inv_p: 0.0, inv_q: 1.0 }
    }

    /// `L^1 + L^∞`, the largest space.
    pub fn largest() -> Self {
        Self { inv_p: 1.0, inv_q: 0.0 }
    }

    pub fn inv_p(&self) -> f64 {
        self.inv_p
    }

    pub fn inv_q(&self) -> f64 {
        self.inv_q
    }

    pub fn p(&self) -> f64 {
        exponent(self.inv_p)
    }

    pub fn q(&self) -> f64 {
        exponent(self.inv_q)
    }

    pub fn is_diagonal(&self) -> bool {
        self.inv_p == self.inv_q
    }

    /// Above the diagonal: an intersection with the projective norm.
    pub fn is_intersection(&self) -> bool {
        self.inv_p < self.inv_q
    }

    /// Below the diagonal: a sum with the inductive norm.
    pub fn is_sum(&self) -> bool {
        self.inv_p > self.inv_q
    }
}

pub(crate) fn inverse_exponent(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(if p.is_infinite() { 0.0 } else { 1.0 / p })
}

pub(crate) fn exponent(inv: f64) -> f64 {
    if inv == 0.0 {
        f64::INFINITY
    } else {
        1.0 / inv
    }
}

pub(crate) fn fmt_exponent(p: f64) -> String {
    if p.is_infinite() {
        "∞".to_owned()
    } else if (p - p.round()).abs() < 1e-9 {
        format!("{}", p.round() as i64)
    } else {
        format!("{p:.4}").trim_end_matches('0').to_owned()
    }
}

impl fmt::Display for LpIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L^({},{})", fmt_exponent(self.p()), fmt_exponent(self.q()))
    }
}

impl LatticeIndex for LpIndex {
    /// Containment: left of and above-or-level with `other`, componentwise.
    fn leq(&self, other: &Self) -> bool {
        self.inv_p <= other.inv_p && self.inv_q >= other.inv_q
    }

    fn involution(&self) -> Self {
        Self { inv_p: 1.0 - self.inv_p, inv_q: 1.0 - self.inv_q }
    }

    fn meet(&self, other: &Self) -> Self {
        Self { inv_p: self.inv_p.min(other.inv_p), inv_q: self.inv_q.max(other.inv_q) }
    }

    fn join(&self, other: &Self) -> Self {
        Self { inv_p: self.inv_p.max(other.inv_p), inv_q: self.inv_q.min(other.inv_q) }
    }

    // 1 - t is not always exactly representable, so the center is tested directly.
    fn is_center(&self) -> bool {
        self.inv_p == 0.5 && self.inv_q == 0.5
    }

    fn same(&self, other: &Self) -> bool {
        (self.inv_p - other.inv_p).abs() <= 1e-12 && (self.inv_q - other.inv_q).abs() <= 1e-12
    }
}

/// Hilbert-scale index `k`; larger `k` is a smaller space, `k̄ = -k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScaleIndex(pub i32);

impl fmt::Display for ScaleIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 < 0 {
            write!(f, "H_{}̄", -self.0)
        } else {
            write!(f, "H_{}", self.0)
        }
    }
}

impl LatticeIndex for ScaleIndex {
    fn leq(&self, other: &Self) -> bool {
        self.0 >= other.0
    }

    fn involution(&self) -> Self {
        ScaleIndex(-self.0)
    }

    fn meet(&self, other: &Self) -> Self {
        ScaleIndex(self.0.max(other.0))
    }

    fn join(&self, other: &Self) -> Self {
        ScaleIndex(self.0.min(other.0))
    }
}

/// The chain `q = p̄`: from `L^∞ ∩ L^1` through `L^2` to `L^1 + L^∞`,
/// parametrised by `t = 1/p ∈ [0, 1]`.
pub fn diagonal_chain_point(t: f64) -> Result<LpIndex> {
    LpIndex::new(t, 1.0 - t)
}

/// The chain `q = 2`: from `L^∞ ∩ L^2` to `L^1 + L^2`.
pub fn horizontal_chain_point(t: f64) -> Result<LpIndex> {
    LpIndex::new(t, 0.5)
}

/// The chain `p = 2`: from `L^2 ∩ L^1` to `L^2 + L^∞`.
pub fn vertical_chain_point(t: f64) -> Result<LpIndex> {
    LpIndex::new(0.5, 1.0 - t)
}

/// Closes a finite index set under meet, join and (optionally) involution.
pub fn closure<I: LatticeIndex>(seed: &[I], with_involution: bool) -> Vec<I> {
    let mut set: Vec<I> = Vec::new();
    let push = |set: &mut Vec<I>, x: I| {
        if !set.iter().any(|y| y.same(&x)) {
            set.push(x);
            true
        } else {
            false
        }
    };
    for x in seed {
        push(&mut set, x.clone());
    }
    loop {
        let mut grew = false;
        let snapshot = set.clone();
        for a in &snapshot {
            if with_involution {
                grew |= push(&mut set, a.involution());
            }
            for b in &snapshot {
                grew |= push(&mut set, a.meet(b));
                grew |= push(&mut set, a.join(b));
            }
        }
        if !grew {
            return set;
        }
    }
}

/// One round of pairwise meets and joins (plus the seed itself).
pub fn one_round<I: LatticeIndex>(seed: &[I]) -> Vec<I> {
    let mut out: Vec<I> = Vec::new();
    for a in seed {
        for b in seed {
            for x in [a.clone(), a.meet(b), a.join(b)] {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Whether `points` are pairwise comparable (a chain).
pub fn is_total_order<I: LatticeIndex>(points: &[I]) -> bool {
    points.iter().all(|a| points.iter().all(|b| a.leq(b) || b.leq(a)))
}
