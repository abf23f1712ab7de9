//! The intrinsic spaces `V_φ = 𝒱_φ / Ker T_φ` of a family and the duality
//! between `V_φ` and `V_ψ` for a reproducing pair.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::{check_reproducing_pair, range_containment, resolution_operator, RangeCertificate, VectorFamily};
use crate::linalg::{inner, null_space, rank_decision, CMat, CVec, RankDecision};
use crate::measure::ScalarField;
use crate::optim::ProbeConfig;
use crate::spaces::SpaceDescriptor;

/// Relative singular-value threshold for kernel and rank decisions.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// `T_φ ξ = Σ_x ξ(x) φ_x μ_x`, defined weakly by `⟨T_φ ξ, g⟩ = ⟨⟨ξ, C_φ g⟩⟩`.
#[derive(Debug, Clone)]
pub struct SynthesisMap {
    family: VectorFamily,
    matrix: CMat,
}

impl SynthesisMap {
    pub fn new(family: &VectorFamily) -> Self {
        Self { matrix: family.synthesis_matrix(), family: family.clone() }
    }

    pub fn family(&self) -> &VectorFamily {
        &self.family
    }

    /// The `d × N` matrix.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, xi: &ScalarField) -> Result<CVec> {
        self.family.space().check(xi)?;
        Ok(&self.matrix * xi.values())
    }
}

#[derive(Debug, Clone)]
pub struct QuotientSpace {
    map: SynthesisMap,
    kernel: CMat,
    decision: RankDecision,
}

impl QuotientSpace {
    pub fn new(phi: &VectorFamily) -> Self {
        Self::with_tolerance(phi, RANK_TOLERANCE)
    }

    pub fn with_tolerance(phi: &VectorFamily, rank_tolerance: f64) -> Self {
        let map = SynthesisMap::new(phi);
        let (kernel, decision) = null_space(map.matrix(), rank_tolerance);
        Self { map, kernel, decision }
    }

    pub fn map(&self) -> &SynthesisMap {
        &self.map
    }

    /// Orthonormal columns spanning `Ker T_φ`.
    pub fn kernel_basis(&self) -> &CMat {
        &self.kernel
    }

    pub fn rank_decision(&self) -> &RankDecision {
        &self.decision
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.family.len()
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.ncols()
    }

    pub fn dim(&self) -> usize {
        self.ambient_dim() - self.kernel_dim()
    }

    /// `‖[ξ]_φ‖ = ‖T_φ ξ‖`.
    pub fn class_norm(&self, xi: &ScalarField) -> Result<f64> {
        Ok(self.map.apply(xi)?.norm())
    }

    /// `sup_{‖g‖ ≤ 1} |⟨⟨ξ, C_φ g⟩⟩|`, from the values of the functional on
    /// an orthonormal basis.
    pub fn class_norm_sup_form(&self, xi: &ScalarField) -> Result<f64> {
        let phi = &self.map.family;
        let space = phi.space();
        space.check(xi)?;
        let d = phi.dim();
        let mut energy = 0.0;
        for i in 0..d {
            let mut e = CVec::zeros(d);
            e[i] = Complex64::new(1.0, 0.0);
            energy += space.pair(xi, &phi.analysis(&e)?)?.norm_sqr();
        }
        Ok(energy.sqrt())
    }

    /// `⟨T_φ ξ, T_φ η⟩`.
    pub fn class_inner(&self, xi: &ScalarField, eta: &ScalarField) -> Result<Complex64> {
        Ok(inner(&self.map.apply(xi)?, &self.map.apply(eta)?))
    }

    /// The best `c` with `|⟨⟨ξ, C_φ g⟩⟩| ≤ c ‖g‖`; every ξ qualifies here.
    pub fn membership_constant(&self, xi: &ScalarField) -> Result<f64> {
        self.class_norm(xi)
    }

    pub fn same_class(&self, xi: &ScalarField, eta: &ScalarField) -> Result<bool> {
        let diff = ScalarField::new(xi.values() - eta.values());
        Ok(self.class_norm(&diff)? <= self.decision.tolerance * (xi.values().norm() + eta.values().norm()).max(1.0))
    }

    /// `ξ + Σ c_j κ_j` for kernel basis vectors `κ_j`.
    pub fn shift(&self, xi: &ScalarField, coeffs: &[Complex64]) -> Result<ScalarField> {
        if coeffs.len() != self.kernel_dim() {
            return Err(Error::Dimension { expected: self.kernel_dim(), found: coeffs.len() });
        }
        let mut v = xi.values().clone();
        for (j, c) in coeffs.iter().enumerate() {
            v += self.kernel.column(j) * *c;
        }
        Ok(ScalarField::new(v))
    }
}

/// `V_φ` and `V_ψ` of a reproducing pair, paired by `⟨⟨ξ, η⟩⟩`.
#[derive(Debug, Clone)]
pub struct DualQuotients {
    pub v_phi: QuotientSpace,
    pub v_psi: QuotientSpace,
    /// `S_{φ,ψ} = T_ψ C_φ`, used to read `g` back from a `V_ψ` class.
    s_phi_psi: CMat,
}

impl DualQuotients {
    pub fn new(psi: &VectorFamily, phi: &VectorFamily, gl_tolerance: f64) -> Result<Self> {
        Self::with_tolerances(psi, phi, gl_tolerance, RANK_TOLERANCE)
    }

    pub fn with_tolerances(psi: &VectorFamily, phi: &VectorFamily, gl_tolerance: f64, rank_tolerance: f64) -> Result<Self> {
        let report = check_reproducing_pair(psi, phi, gl_tolerance)?;
        if !report.invertible {
            return Err(Error::Precondition(format!(
                "not a reproducing pair: smallest singular value {:e} of S_(ψ,φ)",
                report.sigma_min
            )));
        }
        Ok(Self {
            v_phi: QuotientSpace::with_tolerance(phi, rank_tolerance),
            v_psi: QuotientSpace::with_tolerance(psi, rank_tolerance),
            s_phi_psi: resolution_operator(phi, psi)?,
        })
    }

    fn phi(&self) -> &VectorFamily {
        self.v_phi.map.family()
    }

    /// `⟨⟨ξ, C_φ g⟩⟩`, which equals `⟨T_φ ξ, g⟩`.
    pub fn duality_pairing(&self, xi: &ScalarField, g: &CVec) -> Result<Complex64> {
        let eta = self.phi().analysis(g)?;
        self.phi().space().pair(xi, &eta)
    }

    /// The `g` with `[C_φ g]_ψ = [η]_ψ`: `S_{φ,ψ}^{-1} T_ψ η`.
    pub fn representative(&self, eta: &ScalarField) -> Result<CVec> {
        let t = self.v_psi.map.apply(eta)?;
        self.s_phi_psi.clone().lu().solve(&t).ok_or(Error::NotInvertible { sigma_min: 0.0, tolerance: 0.0 })
    }

    /// `⟨[ξ]_φ, [η]_ψ⟩`, evaluated through the representative `C_φ g` of `[η]_ψ`
    /// so that it depends on classes only.
    pub fn class_pairing(&self, xi: &ScalarField, eta: &ScalarField) -> Result<Complex64> {
        let g = self.representative(eta)?;
        self.duality_pairing(xi, &g)
    }

    pub fn represent_functional(&self, g: &CVec) -> Result<RepresentedFunctional> {
        represent_functional(self.phi(), g)
    }
}

/// `F([ξ]_φ) = ⟨T_φ ξ, g⟩` and its `V_ψ` representative `η(x) = ⟨g, φ_x⟩`.
#[derive(Debug, Clone)]
pub struct RepresentedFunctional {
    map: SynthesisMap,
    pub g: CVec,
    pub eta: ScalarField,
}

impl RepresentedFunctional {
    pub fn evaluate(&self, xi: &ScalarField) -> Result<Complex64> {
        Ok(inner(&self.map.apply(xi)?, &self.g))
    }

    /// `⟨⟨ξ, η⟩⟩`, the same functional read through the recovered class.
    pub fn evaluate_via_class(&self, xi: &ScalarField) -> Result<Complex64> {
        self.map.family().space().pair(xi, &self.eta)
    }
}

pub fn represent_functional(phi: &VectorFamily, g: &CVec) -> Result<RepresentedFunctional> {
    let eta = phi.analysis(g)?;
    Ok(RepresentedFunctional { map: SynthesisMap::new(phi), g: g.clone(), eta })
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub holds: bool,
    pub rank: usize,
    /// The rank needed for the property.
    pub required: usize,
    pub decision: RankDecision,
}

/// `Ker C_φ = {0}`, i.e. `T_φ` has rank `d`.
pub fn is_mu_total(phi: &VectorFamily) -> RankReport {
    let decision = rank_decision(&phi.synthesis_matrix(), RANK_TOLERANCE);
    RankReport { holds: decision.rank == phi.dim(), rank: decision.rank, required: phi.dim(), decision }
}

/// `Ker T_φ = {0}`, i.e. `T_φ` has rank `N`.
pub fn is_mu_independent(phi: &VectorFamily) -> RankReport {
    let decision = rank_decision(&phi.synthesis_matrix(), RANK_TOLERANCE);
    RankReport { holds: decision.rank == phi.len(), rank: decision.rank, required: phi.len(), decision }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientDimensions {
    pub n: usize,
    pub d: usize,
    pub dim_v_phi: usize,
    pub dim_v_psi: usize,
    pub kernel_phi: usize,
    pub kernel_psi: usize,
    /// `f ↦ [C_ψ f]_φ` reaches all of `V_φ` (rank of `T_φ C_ψ` equals `dim V_φ`).
    pub onto_v_phi: bool,
    pub onto_v_psi: bool,
    pub psi_certificate: RangeCertificate,
    pub phi_certificate: RangeCertificate,
    pub rank_tolerance: f64,
}

/// Dimensions of `V_φ ≅ V_p / Ker T_φ` and `V_ψ ≅ V_p̄ / Ker T_ψ`, given
/// continuity certificates `C_ψ: H → V_p` and `C_φ: H → V_p̄`.
pub fn quotient_dimensions(
    psi: &VectorFamily,
    phi: &VectorFamily,
    psi_certificate: Option<&RangeCertificate>,
    phi_certificate: Option<&RangeCertificate>,
) -> Result<QuotientDimensions> {
    quotient_dimensions_with(psi, phi, psi_certificate, phi_certificate, crate::frames::DEFAULT_GL_TOLERANCE, RANK_TOLERANCE)
}

pub fn quotient_dimensions_with(
    psi: &VectorFamily,
    phi: &VectorFamily,
    psi_certificate: Option<&RangeCertificate>,
    phi_certificate: Option<&RangeCertificate>,
    gl_tolerance: f64,
    rank_tolerance: f64,
) -> Result<QuotientDimensions> {
    let (Some(cp), Some(cf)) = (psi_certificate, phi_certificate) else {
        return Err(Error::Precondition("both range certificates are required".into()));
    };
    for c in [cp, cf] {
        if !c.constant.is_finite() {
            return Err(Error::Precondition(format!("certificate into {} is not finite", c.target)));
        }
    }
    let q = DualQuotients::with_tolerances(psi, phi, gl_tolerance, rank_tolerance)?;
    let rank_of = |m: CMat| rank_decision(&m, rank_tolerance).rank;
    // T_φ C_ψ = S_{ψ,φ} and T_ψ C_φ = S_{φ,ψ}
    let onto_v_phi = rank_of(resolution_operator(psi, phi)?) == q.v_phi.dim();
    let onto_v_psi = rank_of(resolution_operator(phi, psi)?) == q.v_psi.dim();
    Ok(QuotientDimensions {
        n: psi.len(),
        d: psi.dim(),
        dim_v_phi: q.v_phi.dim(),
        dim_v_psi: q.v_psi.dim(),
        kernel_phi: q.v_phi.kernel_dim(),
        kernel_psi: q.v_psi.kernel_dim(),
        onto_v_phi,
        onto_v_psi,
        psi_certificate: cp.clone(),
        phi_certificate: cf.clone(),
        rank_tolerance,
    })
}

/// Certifies `C_ψ: H → V_p` and `C_φ: H → V_p̄`, then measures the quotients.
pub fn certified_quotient_dimensions(
    psi: &VectorFamily,
    phi: &VectorFamily,
    p: &SpaceDescriptor,
    cfg: &ProbeConfig,
) -> Result<QuotientDimensions> {
    let cp = range_containment(psi, p, cfg)?;
    let cf = range_containment(phi, &p.dual(), cfg)?;
    quotient_dimensions(psi, phi, Some(&cp), Some(&cf))
}
