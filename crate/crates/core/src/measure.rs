//! Atomic measure spaces and the weighted sesquilinear pairing.
//!
//! Every integral over `X` is a finite sum `Σ_x ξ(x) conj(η(x)) μ_x`, so the
//! pairing here is the partial inner product of the central space `L²(X, μ)`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CVec;

/// Finitely many atoms with strictly positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRecord", into = "SpaceRecord")]
pub struct FiniteMeasureSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpaceRecord {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl TryFrom<SpaceRecord> for FiniteMeasureSpace {
    type Error = Error;
    fn try_from(r: SpaceRecord) -> Result<Self> {
        FiniteMeasureSpace::new(r.labels, r.weights)
    }
}

impl From<FiniteMeasureSpace> for SpaceRecord {
    fn from(s: FiniteMeasureSpace) -> Self {
        SpaceRecord { labels: s.labels, weights: s.weights }
    }
}

impl FiniteMeasureSpace {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if labels.len() != weights.len() {
            return Err(Error::Dimension { expected: weights.len(), found: labels.len() });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        Ok(Self { labels, weights })
    }

    /// Points labelled `1..=n` carrying the given weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let labels = (1..=weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, weights)
    }

    /// Counting measure on `n` points.
    pub fn counting(n: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `⟨⟨ξ, η⟩⟩ = Σ_x ξ(x) conj(η(x)) μ_x`.
    pub fn pair(&self, xi: &ScalarField, eta: &ScalarField) -> Result<Complex64> {
        self.check(xi)?;
        self.check(eta)?;
        Ok(self.pair_unchecked(xi.values(), eta.values()))
    }

    pub(crate) fn pair_unchecked(&self, xi: &CVec, eta: &CVec) -> Complex64 {
        xi.iter()
            .zip(eta.iter())
            .zip(self.weights.iter())
            .map(|((a, b), &w)| a * b.conj() * w)
            .sum()
    }

    pub fn check(&self, field: &ScalarField) -> Result<()> {
        if field.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: field.len() });
        }
        Ok(())
    }
}

/// A complex function on the points of a measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: CVec,
}

impl ScalarField {
    pub fn new(values: CVec) -> Self {
        Self { values }
    }

    pub fn from_complex(values: Vec<Complex64>) -> Self {
        Self { values: DVector::from_vec(values) }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0))))
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(CVec::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &CVec {
        &self.values
    }

    pub fn into_values(self) -> CVec {
        self.values
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn to_record(&self, space_id: &str) -> FieldRecord {
        FieldRecord {
            space: space_id.to_owned(),
            re: self.values.iter().map(|z| z.re).collect(),
            im: self.values.iter().map(|z| z.im).collect(),
        }
    }
}

/// Wire form of a scalar field: `{"space": <id>, "re": [...], "im": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldRecord {
    pub space: String,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl TryFrom<FieldRecord> for ScalarField {
    type Error = Error;
    fn try_from(r: FieldRecord) -> Result<Self> {
        if r.re.len() != r.im.len() {
            return Err(Error::Dimension { expected: r.re.len(), found: r.im.len() });
        }
        Ok(ScalarField::from_complex(
            r.re.iter().zip(&r.im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
        ))
    }
}
