//! Computable Banach-space norms over a finite measure space: `L^p`,
//! weighted `ℓ²`, and the projective and inductive norms on intersections
//! and sums, together with duality.

mod program;

use serde::{Deserialize, Serialize};

pub use program::Budget;
use program::{leaf_norm, minimize, weighted, InputSet};

use crate::error::{Error, Result};
use crate::lattice::{exponent, fmt_exponent, inverse_exponent, LpIndex};
use crate::linalg::CVec;
use crate::measure::{FiniteMeasureSpace, ScalarField};

/// A norm on functions over a measure space.
///
/// Descriptors do not own their measure space; every evaluation takes the
/// space explicitly and nested descriptors are evaluated against the same one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", try_from = "wire::Descriptor", into = "wire::Descriptor")]
pub enum SpaceDescriptor {
    Lp { p: f64 },
    /// `(Σ |m_x v_x|² μ_x)^{1/2}`.
    WeightedL2 { m: Vec<f64> },
    /// Norm on the intersection: `‖v‖_a + ‖v‖_b` (or the max of the two).
    Projective { a: Box<SpaceDescriptor>, b: Box<SpaceDescriptor>, combine: Combine },
    /// Norm on the sum: `inf_{v = g + h} ‖g‖_a + ‖h‖_b` (or the max of the two).
    Inductive { a: Box<SpaceDescriptor>, b: Box<SpaceDescriptor>, combine: Combine },
}

/// How the two component norms of a composite descriptor are combined.
///
/// Sum and max give equivalent norms (within a factor 2). They are exact
/// duals of each other: the dual of an intersection with the sum norm is the
/// sum space with the max norm, and vice versa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    #[default]
    Sum,
    Max,
}

impl Combine {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Combine::Sum => a + b,
            Combine::Max => a.max(b),
        }
    }

    pub fn conjugate(self) -> Combine {
        match self {
            Combine::Sum => Combine::Max,
            Combine::Max => Combine::Sum,
        }
    }
}

impl SpaceDescriptor {
    pub fn lp(p: f64) -> Result<Self> {
        inverse_exponent(p)?;
        Ok(SpaceDescriptor::Lp { p })
    }

    pub fn l2() -> Self {
        SpaceDescriptor::Lp { p: 2.0 }
    }

    pub fn weighted_l2(m: Vec<f64>) -> Result<Self> {
        for (index, &value) in m.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        Ok(SpaceDescriptor::WeightedL2 { m })
    }

    pub fn projective(a: SpaceDescriptor, b: SpaceDescriptor) -> Self {
        Self::projective_with(a, b, Combine::Sum)
    }

    pub fn inductive(a: SpaceDescriptor, b: SpaceDescriptor) -> Self {
        Self::inductive_with(a, b, Combine::Sum)
    }

    pub fn projective_with(a: SpaceDescriptor, b: SpaceDescriptor, combine: Combine) -> Self {
        SpaceDescriptor::Projective { a: Box::new(a), b: Box::new(b), combine }
    }

    pub fn inductive_with(a: SpaceDescriptor, b: SpaceDescriptor, combine: Combine) -> Self {
        SpaceDescriptor::Inductive { a: Box::new(a), b: Box::new(b), combine }
    }

    /// `L^∞ ∩ L^1` with the projective norm.
    pub fn smallest() -> Self {
        Self::projective(SpaceDescriptor::Lp { p: f64::INFINITY }, SpaceDescriptor::Lp { p: 1.0 })
    }

    /// `L^1 + L^∞` with the inductive max norm, the exact dual of [`Self::smallest`].
    pub fn largest() -> Self {
        Self::inductive_with(SpaceDescriptor::Lp { p: 1.0 }, SpaceDescriptor::Lp { p: f64::INFINITY }, Combine::Max)
    }

    /// Realises the lattice point `L^(p,q)`: `L^p` on the diagonal, the
    /// projective sum norm above it and the inductive max norm below it, so
    /// that the dual of `L^(p,q)` is realised exactly by `L^(p̄,q̄)`.
    pub fn for_index(ix: &LpIndex) -> Self {
        let a = SpaceDescriptor::Lp { p: exponent(ix.inv_p()) };
        if ix.is_diagonal() {
            return a;
        }
        let b = SpaceDescriptor::Lp { p: exponent(ix.inv_q()) };
        if ix.is_intersection() {
            Self::projective(a, b)
        } else {
            Self::inductive_with(a, b, Combine::Max)
        }
    }

    /// Checks weights and exponents against a space.
    pub fn validate(&self, space: &FiniteMeasureSpace) -> Result<()> {
        match self {
            SpaceDescriptor::Lp { p } => inverse_exponent(*p).map(|_| ()),
            SpaceDescriptor::WeightedL2 { m } => {
                if m.len() != space.len() {
                    return Err(Error::Dimension { expected: space.len(), found: m.len() });
                }
                Self::weighted_l2(m.clone()).map(|_| ())
            }
            SpaceDescriptor::Projective { a, b, .. } | SpaceDescriptor::Inductive { a, b, .. } => {
                a.validate(space)?;
                b.validate(space)
            }
        }
    }

    pub fn is_hilbertian(&self) -> bool {
        matches!(self, SpaceDescriptor::Lp { p } if *p == 2.0) || matches!(self, SpaceDescriptor::WeightedL2 { .. })
    }

    /// Per-point weights `w` such that the norm is `(Σ |w_x v_x|² μ_x)^{1/2}`,
    /// for the Hilbertian leaves.
    pub fn hilbert_weights(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            SpaceDescriptor::Lp { p } if *p == 2.0 => Some(vec![1.0; n]),
            SpaceDescriptor::WeightedL2 { m } => Some(m.clone()),
            _ => None,
        }
    }

    pub fn norm(&self, space: &FiniteMeasureSpace, v: &ScalarField) -> Result<f64> {
        self.norm_with(space, v, &Budget::default())
    }

    pub fn norm_with(&self, space: &FiniteMeasureSpace, v: &ScalarField, budget: &Budget) -> Result<f64> {
        space.check(v)?;
        self.validate(space)?;
        self.norm_vec(space.weights(), v.values(), budget)
    }

    pub(crate) fn norm_vec(&self, mu: &[f64], v: &CVec, budget: &Budget) -> Result<f64> {
        match self {
            SpaceDescriptor::Lp { .. } | SpaceDescriptor::WeightedL2 { .. } => Ok(leaf_norm(self, mu, v, None)),
            SpaceDescriptor::Projective { a, b, combine } => {
                Ok(combine.apply(a.norm_vec(mu, v, budget)?, b.norm_vec(mu, v, budget)?))
            }
            SpaceDescriptor::Inductive { .. } => Ok(minimize(self, mu, InputSet::Fixed(v), budget)?.value),
        }
    }

    /// The conjugate dual with respect to the μ-weighted pairing.
    pub fn dual(&self) -> SpaceDescriptor {
        match self {
            SpaceDescriptor::Lp { p } => {
                let inv = inverse_exponent(*p).expect("validated exponent");
                SpaceDescriptor::Lp { p: exponent(1.0 - inv) }
            }
            SpaceDescriptor::WeightedL2 { m } => SpaceDescriptor::WeightedL2 { m: m.iter().map(|x| 1.0 / x).collect() },
            SpaceDescriptor::Projective { a, b, combine } => Self::inductive_with(a.dual(), b.dual(), combine.conjugate()),
            SpaceDescriptor::Inductive { a, b, combine } => Self::projective_with(a.dual(), b.dual(), combine.conjugate()),
        }
    }

    /// `sup_{‖ξ‖ ≤ 1} |⟨⟨ξ, v⟩⟩|`, by Hölder for leaves and by minimising
    /// `‖ξ‖` over the hyperplane `Re ⟨⟨ξ, v⟩⟩ = 1` for intersections.
    ///
    /// The unit ball of a sum space is `B_a + B_b` under the max norm and
    /// the convex hull of `B_a ∪ B_b` under the sum norm, so its support
    /// function is the sum or the max of those of the children.
    pub fn dual_norm(&self, space: &FiniteMeasureSpace, v: &ScalarField) -> Result<f64> {
        self.dual_norm_with(space, v, &Budget::default())
    }

    pub fn dual_norm_with(&self, space: &FiniteMeasureSpace, v: &ScalarField, budget: &Budget) -> Result<f64> {
        space.check(v)?;
        self.validate(space)?;
        let mu = space.weights();
        let v = v.values();
        if v.iter().all(|z| z.norm() == 0.0) {
            return Ok(0.0);
        }
        match self {
            SpaceDescriptor::Lp { p } => Ok(holder_dual(*p, mu, v)),
            SpaceDescriptor::WeightedL2 { m } => Ok(v
                .iter()
                .zip(mu)
                .zip(m)
                .map(|((z, w), mm)| z.norm_sqr() * w / (mm * mm))
                .sum::<f64>()
                .sqrt()),
            SpaceDescriptor::Inductive { a, b, combine } => {
                let field = ScalarField::new(v.clone());
                let da = a.dual_norm_with(space, &field, budget)?;
                let db = b.dual_norm_with(space, &field, budget)?;
                Ok(combine.conjugate().apply(da, db))
            }
            SpaceDescriptor::Projective { .. } => {
                let w = weighted(v, mu);
                let min = minimize(self, mu, InputSet::Hyperplane(&w), budget)?;
                Ok(1.0 / min.value)
            }
        }
    }

    /// Structural equality with a relative tolerance on exponents and weights.
    pub fn approx_eq(&self, other: &SpaceDescriptor, tol: f64) -> bool {
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= tol * a.abs().max(b.abs());
        match (self, other) {
            (SpaceDescriptor::Lp { p }, SpaceDescriptor::Lp { p: q }) => close(*p, *q),
            (SpaceDescriptor::WeightedL2 { m }, SpaceDescriptor::WeightedL2 { m: n }) => {
                m.len() == n.len() && m.iter().zip(n).all(|(a, b)| close(*a, *b))
            }
            (SpaceDescriptor::Projective { a, b, combine: x }, SpaceDescriptor::Projective { a: c, b: d, combine: y })
            | (SpaceDescriptor::Inductive { a, b, combine: x }, SpaceDescriptor::Inductive { a: c, b: d, combine: y }) => {
                x == y && a.approx_eq(c, tol) && b.approx_eq(d, tol)
            }
            _ => false,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpaceDescriptor::Lp { p } => format!("L^{}", fmt_exponent(*p)),
            SpaceDescriptor::WeightedL2 { .. } => "ℓ²_m".to_owned(),
            SpaceDescriptor::Projective { a, b, combine } => format!("({} ∩{} {})", a.label(), tag(*combine), b.label()),
            SpaceDescriptor::Inductive { a, b, combine } => format!("({} +{} {})", a.label(), tag(*combine), b.label()),
        }
    }
}

fn tag(c: Combine) -> &'static str {
    match c {
        Combine::Sum => "",
        Combine::Max => "∨",
    }
}

fn holder_dual(p: f64, mu: &[f64], v: &CVec) -> f64 {
    let inv = inverse_exponent(p).expect("validated exponent");
    let pbar = exponent(1.0 - inv);
    leaf_norm(&SpaceDescriptor::Lp { p: pbar }, mu, v, None)
}

/// The inductive norm `inf_{v = g + h} ‖g‖_a + ‖h‖_b`.
pub fn inductive_norm(
    space: &FiniteMeasureSpace,
    a: &SpaceDescriptor,
    b: &SpaceDescriptor,
    v: &ScalarField,
) -> Result<f64> {
    SpaceDescriptor::inductive(a.clone(), b.clone()).norm(space, v)
}

/// `|⟨⟨v, w⟩⟩| ≤ ‖v‖_desc ‖w‖_{desc^×}` up to a relative tolerance.
pub fn holder_bound_check(
    space: &FiniteMeasureSpace,
    desc: &SpaceDescriptor,
    v: &ScalarField,
    w: &ScalarField,
) -> Result<bool> {
    let lhs = space.pair(v, w)?.norm();
    let rhs = desc.norm(space, v)? * desc.dual().norm(space, w)?;
    Ok(lhs <= rhs * (1.0 + 1e-9) + 1e-12)
}

/// A constant `C` with `‖v‖_{L^to} ≤ C ‖v‖_{L^from}` on this space.
///
/// Going down in exponent costs a power of the total mass; going up costs a
/// power of the lightest atom.
pub fn lp_embedding_constant(space: &FiniteMeasureSpace, from: f64, to: f64) -> Result<f64> {
    let e = inverse_exponent(to)? - inverse_exponent(from)?;
    Ok(if e >= 0.0 { space.total_mass().powf(e) } else { space.min_weight().powf(e) })
}

mod wire {
    use serde::{Deserialize, Serialize};

    use super::Combine;
    use crate::error::Error;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum Exponent {
        Finite(f64),
        Named(String),
    }

    #[derive(Serialize, Deserialize)]
    #[serde(tag = "kind", deny_unknown_fields)]
    pub enum Descriptor {
        Lp { p: Exponent },
        WeightedL2 { m: Vec<f64> },
        Projective {
            a: Box<Descriptor>,
            b: Box<Descriptor>,
            #[serde(default, skip_serializing_if = "is_sum")]
            combine: Combine,
        },
        Inductive {
            a: Box<Descriptor>,
            b: Box<Descriptor>,
            #[serde(default, skip_serializing_if = "is_sum")]
            combine: Combine,
        },
    }

    fn is_sum(c: &Combine) -> bool {
        *c == Combine::Sum
    }

    impl TryFrom<Descriptor> for super::SpaceDescriptor {
        type Error = Error;
        fn try_from(d: Descriptor) -> Result<Self, Error> {
            use super::SpaceDescriptor as S;
            Ok(match d {
                Descriptor::Lp { p } => {
                    let p = match p {
                        Exponent::Finite(p) => p,
                        Exponent::Named(s) if matches!(s.as_str(), "inf" | "∞" | "infinity") => f64::INFINITY,
                        Exponent::Named(s) => return Err(Error::Domain(format!("unknown exponent {s:?}"))),
                    };
                    S::lp(p)?
                }
                Descriptor::WeightedL2 { m } => S::weighted_l2(m)?,
                Descriptor::Projective { a, b, combine } => S::projective_with((*a).try_into()?, (*b).try_into()?, combine),
                Descriptor::Inductive { a, b, combine } => S::inductive_with((*a).try_into()?, (*b).try_into()?, combine),
            })
        }
    }

    impl From<super::SpaceDescriptor> for Descriptor {
        fn from(d: super::SpaceDescriptor) -> Self {
            use super::SpaceDescriptor as S;
            match d {
                S::Lp { p } if p.is_infinite() => Descriptor::Lp { p: Exponent::Named("inf".into()) },
                S::Lp { p } => Descriptor::Lp { p: Exponent::Finite(p) },
                S::WeightedL2 { m } => Descriptor::WeightedL2 { m },
                S::Projective { a, b, combine } => {
                    Descriptor::Projective { a: Box::new((*a).into()), b: Box::new((*b).into()), combine }
                }
                S::Inductive { a, b, combine } => {
                    Descriptor::Inductive { a: Box::new((*a).into()), b: Box::new((*b).into()), combine }
                }
            }
        }
    }
}
