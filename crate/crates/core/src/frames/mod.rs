//! Vector families over a finite measure space and the operators built from
//! them: analysis `C_ψ f = (⟨f, ψ_x⟩)_x`, synthesis `C_ψ* ξ = Σ ξ(x) ψ_x μ_x`,
//! frame and resolution operators, and reproducing-pair diagnostics.

mod sweep;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use sweep::{
    classify, semiframe_sweep, Classification, PairGenerator, SweepEvidence, SweepRow, WeightRule, WeightedGenerator,
};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, inner, singular_values, spectral_norm, CMat, CVec, MatrixRecord};
use crate::measure::{FiniteMeasureSpace, ScalarField};
use crate::optim::{maximize_ratio, ProbeConfig};
use crate::spaces::{Budget, SpaceDescriptor};

/// Relative threshold on the smallest singular value of `S_{ψ,φ}` below which
/// it is not counted as invertible.
pub const DEFAULT_GL_TOLERANCE: f64 = 1e-8;

/// One vector `ψ_x ∈ ℂ^d` per point of the measure space, stored as the
/// columns of a `d × N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    space: FiniteMeasureSpace,
    members: CMat,
    bound: Option<f64>,
}

impl VectorFamily {
    pub fn new(space: FiniteMeasureSpace, members: CMat) -> Result<Self> {
        if members.ncols() != space.len() {
            return Err(Error::Dimension { expected: space.len(), found: members.ncols() });
        }
        if members.nrows() == 0 {
            return Err(Error::Domain("vector family in a zero-dimensional space".into()));
        }
        Ok(Self { space, members, bound: None })
    }

    pub fn from_columns(space: FiniteMeasureSpace, columns: &[CVec]) -> Result<Self> {
        let d = columns.first().map_or(0, |c| c.len());
        if let Some(bad) = columns.iter().find(|c| c.len() != d) {
            return Err(Error::Dimension { expected: d, found: bad.len() });
        }
        Self::new(space, CMat::from_columns(columns))
    }

    /// The standard basis of `ℂ^n` over the counting measure.
    pub fn standard_basis(n: usize) -> Result<Self> {
        Self::new(FiniteMeasureSpace::counting(n)?, CMat::identity(n, n))
    }

    /// Claims `sup_x ‖ψ_x‖ ≤ c`, rejected if any member exceeds it.
    pub fn with_uniform_bound(mut self, c: f64) -> Result<Self> {
        let sup = self.sup_norm();
        if sup > c + 1e-12 {
            return Err(Error::Precondition(format!("member norm {sup} exceeds the claimed bound {c}")));
        }
        self.bound = Some(c);
        Ok(self)
    }

    pub fn uniform_bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn members(&self) -> &CMat {
        &self.members
    }

    pub fn member(&self, x: usize) -> CVec {
        self.members.column(x).into_owned()
    }

    /// Ambient Hilbert dimension `d`.
    pub fn dim(&self) -> usize {
        self.members.nrows()
    }

    /// Number of points `N`.
    pub fn len(&self) -> usize {
        self.members.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.members.ncols() == 0
    }

    pub fn sup_norm(&self) -> f64 {
        self.members.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.members.iter().all(|z| z.im == 0.0)
    }

    fn mu_diag(&self) -> CVec {
        DVector::from_iterator(self.len(), self.space.weights().iter().map(|&w| Complex64::new(w, 0.0)))
    }

    fn check_vec(&self, f: &CVec) -> Result<()> {
        if f.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: f.len() });
        }
        Ok(())
    }

    /// The `N × d` matrix of `C_ψ`.
    pub fn analysis_matrix(&self) -> CMat {
        self.members.adjoint()
    }

    /// The `d × N` matrix of `C_ψ*`, i.e. `Ψ diag(μ)`.
    pub fn synthesis_matrix(&self) -> CMat {
        let mut m = self.members.clone();
        for (j, &w) in self.space.weights().iter().enumerate() {
            m.column_mut(j).scale_mut(w);
        }
        m
    }

    /// `(C_ψ f)(x) = ⟨f, ψ_x⟩`.
    pub fn analysis(&self, f: &CVec) -> Result<ScalarField> {
        self.check_vec(f)?;
        Ok(ScalarField::new(self.members.adjoint() * f))
    }

    /// `C_ψ* ξ = Σ_x ξ(x) ψ_x μ_x`.
    pub fn synthesis(&self, xi: &ScalarField) -> Result<CVec> {
        self.space.check(xi)?;
        Ok(&self.members * xi.values().component_mul(&self.mu_diag()))
    }

    /// `S = C_ψ* C_ψ`.
    pub fn frame_operator(&self) -> CMat {
        self.synthesis_matrix() * self.members.adjoint()
    }

    /// Tightest frame constants: the extreme eigenvalues of the frame operator.
    pub fn frame_bounds(&self) -> FrameBounds {
        let (vals, vecs) = hermitian_eigen(&self.frame_operator());
        let d = vals.len();
        FrameBounds {
            lower: vals[0].max(0.0),
            upper: vals[d - 1].max(0.0),
            lower_witness: vecs.column(0).into_owned(),
            upper_witness: vecs.column(d - 1).into_owned(),
        }
    }

    /// `ψ_x ↦ α ψ_x`.
    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self { space: self.space.clone(), members: self.members.map(|z| z * alpha), bound: None }
    }

    /// `ψ_x ↦ A ψ_x` for a `d × d` matrix `A`.
    pub fn mapped(&self, a: &CMat) -> Result<Self> {
        if a.ncols() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: a.ncols() });
        }
        Self::new(self.space.clone(), a * &self.members)
    }

    pub fn to_record(&self, space_id: &str) -> FamilyRecord {
        FamilyRecord {
            space: space_id.to_owned(),
            dim: self.dim(),
            members: self
                .members
                .column_iter()
                .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn from_record(space: FiniteMeasureSpace, record: &FamilyRecord) -> Result<Self> {
        let mut columns = Vec::with_capacity(record.members.len());
        for m in &record.members {
            if m.len() != record.dim {
                return Err(Error::Dimension { expected: record.dim, found: m.len() });
            }
            columns.push(DVector::from_iterator(m.len(), m.iter().map(|&[re, im]| Complex64::new(re, im))));
        }
        Self::from_columns(space, &columns)
    }
}

/// Wire form of a family: `{"space": <id>, "dim": d, "members": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyRecord {
    pub space: String,
    pub dim: usize,
    pub members: Vec<Vec<[f64; 2]>>,
}

/// `m ‖f‖² ≤ Σ_x |⟨f, ψ_x⟩|² μ_x ≤ M ‖f‖²`, with unit eigenvector witnesses.
#[derive(Debug, Clone, Serialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    #[serde(skip)]
    pub lower_witness: CVec,
    #[serde(skip)]
    pub upper_witness: CVec,
}

fn check_compatible(psi: &VectorFamily, phi: &VectorFamily) -> Result<()> {
    if psi.dim() != phi.dim() {
        return Err(Error::Dimension { expected: psi.dim(), found: phi.dim() });
    }
    if psi.space != phi.space {
        return Err(Error::Precondition("families live on different measure spaces".into()));
    }
    Ok(())
}

/// `S_{ψ,φ} f = Σ_x ⟨f, ψ_x⟩ φ_x μ_x`, i.e. `C_φ* C_ψ`.
pub fn resolution_operator(psi: &VectorFamily, phi: &VectorFamily) -> Result<CMat> {
    check_compatible(psi, phi)?;
    Ok(phi.synthesis_matrix() * psi.members.adjoint())
}

#[derive(Debug, Clone, Serialize)]
pub struct PairClassification {
    pub psi: Classification,
    pub phi: Classification,
}

/// Everything measured about a candidate reproducing pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    #[serde(skip)]
    pub matrix: CMat,
    pub resolution: MatrixRecord,
    /// `‖S‖`, the boundedness constant of `Ω_{ψ,φ}`.
    pub norm: f64,
    pub sigma_min: f64,
    pub condition: f64,
    pub gl_tolerance: f64,
    pub invertible: bool,
    /// `‖S - I‖`.
    pub identity_residual: f64,
    /// `‖S_{ψ,φ}* - S_{φ,ψ}‖`.
    pub adjoint_residual: f64,
    /// `‖S_{ψ, S⁻¹φ} - I‖`, when `S` is invertible.
    pub dual_residual: Option<f64>,
    pub classification: Option<PairClassification>,
}

/// Checks boundedness and invertibility of `S_{ψ,φ}`; `relative_tolerance`
/// scales with `‖S‖`.
pub fn check_reproducing_pair(psi: &VectorFamily, phi: &VectorFamily, relative_tolerance: f64) -> Result<PairReport> {
    let s = resolution_operator(psi, phi)?;
    let d = s.nrows();
    let sv = singular_values(&s);
    let norm = sv[0];
    let sigma_min = *sv.last().expect("d >= 1");
    let gl_tolerance = relative_tolerance * norm;
    let invertible = sigma_min > gl_tolerance && sigma_min > 0.0;
    let identity_residual = spectral_norm(&(&s - CMat::identity(d, d)));
    let adjoint_residual = spectral_norm(&(s.adjoint() - resolution_operator(phi, psi)?));
    let dual_residual = if invertible {
        let dual = canonical_dual(psi, phi)?;
        Some(spectral_norm(&(resolution_operator(psi, &dual)? - CMat::identity(d, d))))
    } else {
        None
    };
    Ok(PairReport {
        resolution: MatrixRecord::from_matrix(&s),
        matrix: s,
        norm,
        sigma_min,
        condition: if sigma_min > 0.0 { norm / sigma_min } else { f64::INFINITY },
        gl_tolerance,
        invertible,
        identity_residual,
        adjoint_residual,
        dual_residual,
        classification: None,
    })
}

/// `φ'_x = S_{ψ,φ}^{-1} φ_x`, so that `S_{ψ,φ'} = I`.
pub fn canonical_dual(psi: &VectorFamily, phi: &VectorFamily) -> Result<VectorFamily> {
    let s = resolution_operator(psi, phi)?;
    let sv = singular_values(&s);
    let sigma_min = *sv.last().expect("d >= 1");
    let tolerance = DEFAULT_GL_TOLERANCE * sv[0];
    if !(sigma_min > tolerance && sigma_min > 0.0) {
        return Err(Error::NotInvertible { sigma_min, tolerance });
    }
    let lu = s.lu();
    let members = lu.solve(phi.members()).ok_or(Error::NotInvertible { sigma_min, tolerance })?;
    VectorFamily::new(phi.space.clone(), members)
}

/// `ψ_x = m_x θ_x` and `φ_x = θ_x / conj(m_x)`.
pub fn weighted_pair(m: &[Complex64], theta: &VectorFamily) -> Result<(VectorFamily, VectorFamily)> {
    if m.len() != theta.len() {
        return Err(Error::Dimension { expected: theta.len(), found: m.len() });
    }
    if let Some(i) = m.iter().position(|z| z.norm() == 0.0 || !z.is_finite()) {
        return Err(Error::Domain(format!("weight {i} is zero or not finite")));
    }
    let lower = theta.frame_bounds().lower;
    if lower <= 0.0 {
        return Err(Error::Precondition(format!("θ is not a frame (lower bound {lower:e})")));
    }
    let mut psi = theta.members.clone();
    let mut phi = theta.members.clone();
    for (j, w) in m.iter().enumerate() {
        psi.column_mut(j).scale_mut_c(*w);
        phi.column_mut(j).scale_mut_c(Complex64::new(1.0, 0.0) / w.conj());
    }
    Ok((VectorFamily::new(theta.space.clone(), psi)?, VectorFamily::new(theta.space.clone(), phi)?))
}

trait ScaleC {
    fn scale_mut_c(&mut self, a: Complex64);
}

impl<S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>> ScaleC
    for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_c(&mut self, a: Complex64) {
        for z in self.iter_mut() {
            *z *= a;
        }
    }
}

/// Componentwise `ψ = θ¹ ∧ θ²` and `φ = θ¹ ∨ θ²` for real families.
pub fn minmax_pair(theta1: &VectorFamily, theta2: &VectorFamily) -> Result<(VectorFamily, VectorFamily)> {
    check_compatible(theta1, theta2)?;
    if theta1.len() != theta2.len() {
        return Err(Error::Dimension { expected: theta1.len(), found: theta2.len() });
    }
    if !theta1.is_real() || !theta2.is_real() {
        return Err(Error::Domain("min/max of complex-valued families is undefined".into()));
    }
    let zip = |f: fn(f64, f64) -> f64| {
        theta1.members.zip_map(&theta2.members, |a, b| Complex64::new(f(a.re, b.re), 0.0))
    };
    Ok((
        VectorFamily::new(theta1.space.clone(), zip(f64::min))?,
        VectorFamily::new(theta1.space.clone(), zip(f64::max))?,
    ))
}

/// Continuity certificate for `C_ψ : ℂ^d → V_desc`.
#[derive(Debug, Clone, Serialize)]
pub struct RangeCertificate {
    pub target: String,
    /// Estimate of `sup_{‖f‖=1} ‖C_ψ f‖_desc`.
    pub constant: f64,
    /// `closed-form` (exact singular value) or `probe` (attained lower bound).
    pub method: String,
    pub evaluations: usize,
    #[serde(skip)]
    pub witness: CVec,
}

pub fn range_containment(psi: &VectorFamily, desc: &SpaceDescriptor, cfg: &ProbeConfig) -> Result<RangeCertificate> {
    desc.validate(psi.space())?;
    let mu = psi.space().weights();
    if let Some(w) = desc.hilbert_weights(psi.len()) {
        // ‖C_ψ f‖ = ‖diag(w √μ) Ψ* f‖₂
        let mut a = psi.analysis_matrix();
        for (i, mut row) in a.row_iter_mut().enumerate() {
            row.scale_mut(w[i] * mu[i].sqrt());
        }
        let svd = a.svd(false, true);
        let (idx, constant) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
        let witness = svd.v_t.expect("requested").row(idx).adjoint();
        return Ok(RangeCertificate {
            target: desc.label(),
            constant,
            method: "closed-form".into(),
            evaluations: 1,
            witness,
        });
    }
    let candidates: Vec<CVec> = psi.members.column_iter().map(|c| c.into_owned()).collect();
    let analysis = psi.analysis_matrix();
    let budget = Budget { phase_iterations: 150, final_step: 1e-7, stall_tolerance: 1e-4 };
    let est = maximize_ratio(
        psi.dim(),
        candidates,
        |f| {
            let image = &analysis * f;
            let n = match desc.norm_vec(mu, &image, &budget) {
                Ok(v) => v,
                Err(Error::NotConverged { best, .. }) => best,
                Err(e) => return Err(e),
            };
            Ok(n / f.norm())
        },
        cfg,
    )?;
    Ok(RangeCertificate {
        target: desc.label(),
        constant: est.value,
        method: "probe".into(),
        evaluations: est.evaluations,
        witness: est.witness,
    })
}

/// `|Ω_{ψ,φ}(f, g)| ≤ c_ψ c_φ ‖f‖ ‖g‖` from certificates into dual spaces.
pub fn omega_bound(psi: &RangeCertificate, phi: &RangeCertificate) -> f64 {
    psi.constant * phi.constant
}

/// `Ω_{ψ,φ}(f, g) = ⟨⟨C_ψ f, C_φ g⟩⟩`.
pub fn cross_form(psi: &VectorFamily, phi: &VectorFamily, f: &CVec, g: &CVec) -> Result<Complex64> {
    check_compatible(psi, phi)?;
    psi.space.pair(&psi.analysis(f)?, &phi.analysis(g)?)
}

/// `⟨S f, g⟩` in the central Hilbert space.
pub fn resolution_form(s: &CMat, f: &CVec, g: &CVec) -> Complex64 {
    inner(&(s * f), g)
}
