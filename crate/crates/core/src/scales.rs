//! Hilbert scales generated by positive diagonal operators, and the weighted
//! families of a discrete reproducing-kernel Hilbert space.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::{
    range_containment, semiframe_sweep, weighted_pair, PairGenerator, RangeCertificate, SweepEvidence, VectorFamily,
};
use crate::lattice::ScaleIndex;
use crate::linalg::{hermitian_eigen, CMat, CVec};
use crate::measure::{FiniteMeasureSpace, ScalarField};
use crate::operators::IndexedSpaceFamily;
use crate::optim::ProbeConfig;
use crate::par::Execution;
use crate::spaces::SpaceDescriptor;

/// Named generator sequences.
pub const SCALE_PRESETS: [&str; 3] = ["diag-n", "sobolev", "oscillator"];

/// `H_k = D(A^k)` with `‖v‖_k = ‖A^k v‖` for `A = diag(a)`, `a_n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HilbertScale {
    name: String,
    generator: Vec<f64>,
    max_k: i32,
}

impl HilbertScale {
    pub fn new(name: &str, generator: Vec<f64>, max_k: i32) -> Result<Self> {
        if generator.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some((index, &value)) = generator.iter().enumerate().find(|(_, a)| !(**a >= 1.0 && a.is_finite())) {
            return Err(Error::InvalidWeight { index, value });
        }
        if max_k < 0 {
            return Err(Error::Domain(format!("negative index range {max_k}")));
        }
        Ok(Self { name: name.to_owned(), generator, max_k })
    }

    /// `diag-n`: `a_n = n`, `n ≥ 1`; `sobolev`: `(1 + n²)^{1/2}`, `n ≥ 0`;
    /// `oscillator`: `2n + 1`, `n ≥ 0`.
    pub fn preset(name: &str, n: usize, max_k: i32) -> Result<Self> {
        let a: Vec<f64> = match name {
            "diag-n" => (1..=n).map(|i| i as f64).collect(),
            "sobolev" => (0..n).map(|i| (1.0 + (i * i) as f64).sqrt()).collect(),
            "oscillator" => (0..n).map(|i| (2 * i + 1) as f64).collect(),
            other => return Err(Error::Domain(format!("unknown scale preset {other:?}"))),
        };
        Self::new(name, a, max_k)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    pub fn max_k(&self) -> i32 {
        self.max_k
    }

    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    pub fn space(&self) -> FiniteMeasureSpace {
        FiniteMeasureSpace::counting(self.dim()).expect("nonempty")
    }

    pub fn scale_space(&self, k: i32) -> Result<SpaceDescriptor> {
        if k.abs() > self.max_k {
            return Err(Error::ScaleOutOfRange { k, max: self.max_k });
        }
        SpaceDescriptor::weighted_l2(self.generator.iter().map(|a| a.powi(k)).collect())
    }

    /// `H_k ⊂ H_0 ⊂ H_{-k}`.
    pub fn triplet(&self, k: i32) -> Result<Triplet> {
        if k < 1 {
            return Err(Error::Domain(format!("a triplet needs k ≥ 1, got {k}")));
        }
        Ok(Triplet { k, small: self.scale_space(k)?, center: self.scale_space(0)?, large: self.scale_space(-k)? })
    }

    /// The family `{H_k : |k| ≤ K}`.
    pub fn family(&self) -> Result<IndexedSpaceFamily<ScaleIndex>> {
        let indices = (-self.max_k..=self.max_k).rev().map(ScaleIndex).collect();
        IndexedSpaceFamily::new(&format!("scale:{}", self.name), self.space(), indices, |k| self.scale_space(k.0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Triplet {
    pub k: i32,
    pub small: SpaceDescriptor,
    pub center: SpaceDescriptor,
    pub large: SpaceDescriptor,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TripletNorms {
    pub large: f64,
    pub center: f64,
    pub small: f64,
}

impl TripletNorms {
    pub fn ordered(&self) -> bool {
        let slack = 1.0 + 1e-12;
        self.large <= self.center * slack && self.center <= self.small * slack
    }
}

impl Triplet {
    pub fn norms(&self, space: &FiniteMeasureSpace, v: &ScalarField) -> Result<TripletNorms> {
        Ok(TripletNorms {
            large: self.large.norm(space, v)?,
            center: self.center.norm(space, v)?,
            small: self.small.norm(space, v)?,
        })
    }
}

/// Kernel matrices for sample points.
pub fn kernel_preset(name: &str, points: &[f64]) -> Result<CMat> {
    let n = points.len();
    let name = name.trim();
    if name == "identity" {
        return Ok(CMat::identity(n, n));
    }
    if let Some(arg) = name.strip_prefix("gaussian(").and_then(|s| s.strip_suffix(')')) {
        let sigma: f64 = arg.trim().parse().map_err(|_| Error::Domain(format!("bad width in {name:?}")))?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("kernel width must be positive, got {sigma}")));
        }
        return Ok(CMat::from_fn(n, n, |i, j| {
            let d = points[i] - points[j];
            Complex64::new((-d * d / (2.0 * sigma * sigma)).exp(), 0.0)
        }));
    }
    Err(Error::Domain(format!("unknown kernel preset {name:?}")))
}

/// Span of `k_{x_1}, …, k_{x_N}` with `⟨c, d⟩_K = d* K c`, handled in the
/// orthonormal coordinates `c ↦ L* c` where `K = L L*`.
#[derive(Debug, Clone)]
pub struct DiscreteRKHS {
    points: Vec<f64>,
    kernel: CMat,
    weights: Vec<f64>,
    space: FiniteMeasureSpace,
    /// Lower Cholesky factor of `K`.
    factor: CMat,
}

/// Smallest eigenvalue of `K` relative to the largest below which it is singular.
const KERNEL_TOLERANCE: f64 = 1e-12;

impl DiscreteRKHS {
    pub fn new(points: Vec<f64>, kernel: CMat, weights: Vec<f64>, space: FiniteMeasureSpace) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        for (what, len) in [("kernel rows", kernel.nrows()), ("kernel columns", kernel.ncols()), ("weights", weights.len()), ("measure", space.len())] {
            if len != n {
                return Err(Error::Dimension { expected: n, found: len }).map_err(|e| with_context(e, what));
            }
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, m)| !(**m > 1.0 && m.is_finite())) {
            return Err(Error::InvalidWeight { index, value });
        }
        let asym = (&kernel - kernel.adjoint()).norm();
        if asym > 1e-12 * (1.0 + kernel.norm()) {
            return Err(Error::Domain(format!("kernel matrix is not Hermitian (residual {asym:e})")));
        }
        let (vals, _) = hermitian_eigen(&kernel);
        let (lo, hi) = (vals[0], vals[n - 1]);
        if !(lo > KERNEL_TOLERANCE * hi) {
            return Err(Error::SingularKernel(lo));
        }
        let factor = kernel.clone().cholesky().ok_or(Error::SingularKernel(lo))?.l();
        Ok(Self { points, kernel, weights, space, factor })
    }

    /// Points, kernel preset and weights `m(x) = x + 1` over counting measure.
    pub fn preset(kernel: &str, points: Vec<f64>) -> Result<Self> {
        let k = kernel_preset(kernel, &points)?;
        let weights = points.iter().map(|x| x + 1.0).collect();
        let space = FiniteMeasureSpace::counting(points.len())?;
        Self::new(points, k, weights, space)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kernel(&self) -> &CMat {
        &self.kernel
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `k_{x_i}` in orthonormal coordinates: column `i` of `L*`.
    pub fn kernel_family(&self) -> VectorFamily {
        VectorFamily::new(self.space.clone(), self.factor.adjoint()).expect("square")
    }

    /// Orthonormal coordinates of `Σ c_j k_{x_j}`.
    pub fn coordinates(&self, c: &CVec) -> CVec {
        self.factor.adjoint() * c
    }

    /// `f(x_j)` for `f` in orthonormal coordinates: `⟨f, k_{x_j}⟩`.
    pub fn evaluate(&self, f: &CVec) -> CVec {
        &self.factor * f
    }

    /// `ψ_x = m(x)^{-n} k_x` and `φ_x = m(x)^n k_x`.
    pub fn weight_pair(&self, n: i32) -> Result<(VectorFamily, VectorFamily)> {
        let m: Vec<Complex64> = self.weights.iter().map(|w| Complex64::new(w.powi(-n), 0.0)).collect();
        weighted_pair(&m, &self.kernel_family())
    }

    /// `H_n` on the sample set: weights `m^n`.
    pub fn weight_space(&self, n: i32) -> Result<SpaceDescriptor> {
        SpaceDescriptor::weighted_l2(self.weights.iter().map(|w| w.powi(n)).collect())
    }

    /// Values of `T_φ ξ` on the sample set, through the family and through
    /// the closed form `K diag(μ) (ξ m^n)`.
    pub fn t_phi_values(&self, n: i32, xi: &ScalarField) -> Result<(CVec, CVec)> {
        let (_, phi) = self.weight_pair(n)?;
        let via_family = self.evaluate(&(phi.synthesis_matrix() * xi.values()));
        let mu = self.space.weights();
        let c = CVec::from_iterator(
            self.len(),
            xi.values().iter().zip(&self.weights).zip(mu).map(|((z, w), u)| z * (w.powi(n) * u)),
        );
        Ok((via_family, &self.kernel * c))
    }

    /// Continuity of `C_ψ: H_K → H_n` and `C_φ: H_K → H_{-n}`, with the
    /// semi-frame sweep over growing point sets of the same kind.
    pub fn range_certificates(&self, n: i32, cfg: &ProbeConfig) -> Result<RkhsCertificates> {
        let (psi, phi) = self.weight_pair(n)?;
        Ok(RkhsCertificates {
            n,
            psi: range_containment(&psi, &self.weight_space(n)?, cfg)?,
            phi: range_containment(&phi, &self.weight_space(-n)?, cfg)?,
            phi_into_l2: range_containment(&phi, &SpaceDescriptor::l2(), cfg)?,
        })
    }
}

fn with_context(e: Error, what: &str) -> Error {
    match e {
        Error::Dimension { expected, found } => Error::Domain(format!("{what}: expected {expected}, found {found}")),
        other => other,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RkhsCertificates {
    pub n: i32,
    pub psi: RangeCertificate,
    pub phi: RangeCertificate,
    /// Grows with the number of points when `m` is unbounded.
    pub phi_into_l2: RangeCertificate,
}

/// Point sets `1..=N` with a kernel preset, `m(x) = x + 1`, exponent `n`.
#[derive(Debug, Clone)]
pub struct RkhsGenerator {
    pub kernel: String,
    pub n: i32,
}

impl PairGenerator for RkhsGenerator {
    fn generate(&self, size: usize) -> Result<(VectorFamily, VectorFamily)> {
        let points = (1..=size).map(|i| i as f64).collect();
        DiscreteRKHS::preset(&self.kernel, points)?.weight_pair(self.n)
    }

    fn describe(&self) -> String {
        format!("kernel {} on 1..N, m(x) = x + 1, exponent {}", self.kernel, self.n)
    }
}

pub fn rkhs_sweep(kernel: &str, n: i32, sizes: &[usize], seed: u64, exec: Execution) -> Result<SweepEvidence> {
    semiframe_sweep(&RkhsGenerator { kernel: kernel.to_owned(), n }, sizes, seed, exec)
}
