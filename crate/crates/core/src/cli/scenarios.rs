//! The built-in scenario catalog.

use super::config::{parse_str, prepare, ConfigError, Construction, Prepared, Scenario};

pub struct Builtin {
    pub name: &'static str,
    pub config: &'static str,
    pub steps: &'static [&'static str],
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "onb-sanity",
        config: r#"
name = "onb-sanity"
summary = "An orthonormal basis paired with itself is a dual pair with frame bounds (1, 1)."

[construction]
kind = "weighted_pair"
weights = "1"
sizes = [4, 8, 16]
certify = [[0.5, 0.5], [0.0, 1.0]]
expect = { psi = "frame", phi = "frame" }
"#,
        steps: &[
            "Take the standard orthonormal basis of C^N with counting measure and use it for both families.",
            "Build S = C_φ* C_ψ and require ‖S − I‖ ≤ 1e-12.",
            "Compute both frame bounds from the frame operator and compare them with (1, 1).",
            "Certify the analysis maps into L² and into L^∞ ∩ L¹, and the other family into the dual spaces.",
            "Measure the quotient spaces V_φ and V_ψ; both must have dimension N.",
            "Sweep N and classify both families as frames.",
        ],
    },
    Builtin {
        name: "paper-weighted-1-over-n",
        config: r#"
name = "paper-weighted-1-over-n"
summary = "Weighted orthonormal basis with m_n = 1/n: a dual pair of an upper and a lower semi-frame."

[construction]
kind = "weighted_pair"
weights = "1/n"
sizes = [4, 16, 64, 256]
expect = { psi = "upper-semi-frame-tendency", phi = "lower-semi-frame-tendency" }
"#,
        steps: &[
            "Discrete weighted-basis example: ψ_n = e_n / n and φ_n = n e_n on C^N with counting measure.",
            "The weights cancel in S = Σ ⟨·, ψ_n⟩ φ_n, so ‖S − I‖ must stay below 1e-12 for every N.",
            "The frame bounds of ψ are (1/N², 1): the lower bound decays while the upper one stays put.",
            "The frame bounds of φ are (1, N²): the upper bound grows without limit.",
            "Certify both analysis maps into L², then measure V_φ and V_ψ (dimension N each).",
            "Sweep N ∈ {4, 16, 64, 256} and classify ψ as an upper and φ as a lower semi-frame.",
        ],
    },
    Builtin {
        name: "paper-weighted-n",
        config: r#"
name = "paper-weighted-n"
summary = "Weighted orthonormal basis with m_n = n: the roles of the two semi-frames swap."

[construction]
kind = "weighted_pair"
weights = "n"
sizes = [4, 16, 64, 256]
expect = { psi = "lower-semi-frame-tendency", phi = "upper-semi-frame-tendency" }
"#,
        steps: &[
            "Discrete weighted-basis example with growing weights: ψ_n = n e_n and φ_n = e_n / n.",
            "Require S = I to 1e-12 for every N.",
            "The frame bounds of ψ are (1, N²) and those of φ are (1/N², 1).",
            "Certify both analysis maps into L² and measure the quotient spaces.",
            "Sweep N and classify ψ as a lower and φ as an upper semi-frame.",
        ],
    },
    Builtin {
        name: "rkhs-identity-kernel",
        config: r#"
name = "rkhs-identity-kernel"
summary = "Weighted kernels m^{-n} k_x and m^n k_x in a discrete reproducing kernel space with the identity kernel."

[construction]
kind = "rkhs_weight_pair"
kernel = "identity"
exponent = 1
sizes = [8, 32, 128]
expect = { psi = "upper-semi-frame-tendency", phi = "lower-semi-frame-tendency" }
"#,
        steps: &[
            "Reproducing kernel space on the points 1..N with kernel matrix K = I and weight m(x) = x + 1.",
            "Pair ψ_x = m(x)^{-n} k_x with φ_x = m(x)^n k_x; the weights cancel and S is the frame operator of the kernels, here I.",
            "Check that synthesis with φ multiplies by the weight: (T_φ ξ)(x) = ξ(x) m(x)^n.",
            "Certify C_ψ into the weighted space H_n and C_φ into H_−n; both constants are 1.",
            "Measure the quotient spaces; the kernels are independent so both have dimension N.",
            "Sweep N and classify ψ as an upper and φ as a lower semi-frame.",
        ],
    },
    Builtin {
        name: "rkhs-gaussian-kernel",
        config: r#"
name = "rkhs-gaussian-kernel"
summary = "The same weighted kernel pair for a Gaussian kernel, where S is no longer the identity."

[construction]
kind = "rkhs_weight_pair"
kernel = "gaussian(0.8)"
exponent = 1
sizes = [8, 16, 32]
"#,
        steps: &[
            "Reproducing kernel space on the points 1..N with the Gaussian kernel of width 0.8, handled in orthonormal coordinates from a Cholesky factor.",
            "Check that S for the weighted pair equals the frame operator of the unweighted kernels.",
            "Check the synthesis law T_φ ξ = K μ (ξ m^n) on the sample points, within a tolerance scaled by the kernel condition number.",
            "Certify the analysis maps into the weighted spaces and measure the quotients.",
            "Sweep N and report how the frame bounds move.",
        ],
    },
    Builtin {
        name: "minmax-probe",
        config: r#"
name = "minmax-probe"
summary = "Componentwise min and max of two nonnegative families and their analysis ranges."

[construction]
kind = "minmax_pair"
dim = 3
sizes = [4, 8, 16]
trials = 32
index = [0.0, 1.0]
"#,
        steps: &[
            "Draw two random nonnegative families θ¹ and θ² and set ψ = θ¹ ∧ θ² and φ = θ¹ ∨ θ² componentwise.",
            "Check ψ + φ = θ¹ + θ² exactly.",
            "For nonnegative h, check that the L^∞ ∩ L¹ norm of C_ψ h is at most the sum of those of C_θ¹ h and C_θ² h.",
            "Certify C_ψ into the intersection L^∞ ∩ L¹ and C_φ into the sum L¹ + L^∞.",
            "Report the resolution operator of the pair.",
        ],
    },
    Builtin {
        name: "lp-duality-grid",
        config: r#"
name = "lp-duality-grid"
summary = "Duality of the L^p lattice: dual norms against norms of dual descriptors."

[construction]
kind = "lp_duality_grid"
max_dim = 8
samples = 200
threshold_cases = 100
"#,
        steps: &[
            "For random atomic measures with at most 8 atoms, draw vectors and descriptors of every kind (L^p, weighted L², intersections and sums).",
            "Compute the dual norm sup |⟨⟨ξ, v⟩⟩| over the unit ball and compare it with the norm of the dual descriptor. This is the duality (L^p ∩ L^q)^× = L^p̄ + L^q̄, to within 2%.",
            "Compare the L¹ + L^∞ norm from the solver with the closed threshold formula min_t Σ (|v| − t)_+ μ + t, to within 0.5%.",
        ],
    },
    Builtin {
        name: "scale-triplet",
        config: r#"
name = "scale-triplet"
summary = "Hilbert scale H_k generated by diag(n): duality, nesting and the identity operator."

[construction]
kind = "scale_triplet"
preset = "diag-n"
dim = 32
max_k = 3
samples = 64
"#,
        steps: &[
            "Build the scale H_k with norm ‖A^k v‖ for A = diag(1, 2, …, N) and |k| ≤ 3.",
            "Check that the dual of H_k is H_−k.",
            "For each triplet H_k ⊂ H_0 ⊂ H_−k, check ‖v‖_−k ≤ ‖v‖_0 ≤ ‖v‖_k on random vectors.",
            "Check that the family is closed under k ↦ −k.",
            "Sweep N and confirm that the identity is bounded from H_q to H_p exactly when H_q ⊂ H_p.",
        ],
    },
    Builtin {
        name: "operator-algebra-fuzz",
        config: r#"
name = "operator-algebra-fuzz"
summary = "Random operators on the three spaces H_1 ⊂ H_0 ⊂ H_−1: adjoints and partial products."

[construction]
kind = "operator_algebra_fuzz"
operators = 200
dim = 4
"#,
        steps: &[
            "Draw random operators A = B diag(n)^s with s ∈ {−1, 0, 1} on the scale family, each with its set of continuity pairs.",
            "Check that the adjoint is an exact involution and maps pairs (q, p) to (p̄, q̄).",
            "Check that A^× A is symmetric whenever the product is defined.",
            "Check that BA is defined exactly when some space lies in both i(A) and d(B), and that the result does not depend on which one is used.",
            "Check associativity where both sides are defined.",
        ],
    },
];

pub fn find(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

impl Builtin {
    pub fn scenario(&self) -> Scenario {
        parse_str(self.config, false, &format!("builtin:{}", self.name)).expect("built-in scenarios parse")
    }

    pub fn prepared(&self) -> Result<Prepared, ConfigError> {
        prepare(self.scenario(), None, &format!("builtin:{}", self.name))
    }
}

/// Plain description of what a construction kind does, for user configs.
pub fn describe_kind(c: &Construction) -> Vec<String> {
    let s = |x: &str| x.to_owned();
    match c {
        Construction::WeightedPair { .. } => vec![
            s("Pair ψ_n = m_n e_n with φ_n = e_n / m_n on C^N and check S = I."),
            s("Compare the frame bounds with the diagonal formula (min m², max m²)."),
            s("Certify the analysis maps into the requested lattice spaces and measure the quotient spaces."),
            s("When the weights are a rule, sweep N and classify both families."),
        ],
        Construction::MinmaxPair { .. } => vec![
            s("Form componentwise min and max of two random nonnegative families."),
            s("Check the min + max identity and the norm inequality, then certify the analysis ranges."),
        ],
        Construction::RkhsWeightPair { .. } => vec![
            s("Pair weighted kernels m^{-n} k_x and m^n k_x and check that S is the kernel frame operator."),
            s("Check the synthesis law, certify into H_n and H_−n, measure quotients and sweep N."),
        ],
        Construction::FamiliesFromFile { .. } => vec![
            s("Load ψ and φ from the file and check that S is invertible."),
            s("Check S* against S_(φ,ψ), the canonical dual, the quotient dimensions and kernel-shift invariance of the pairing."),
        ],
        Construction::LpDualityGrid { .. } => vec![
            s("Compare dual norms with norms of dual descriptors, then the L¹ + L^∞ norm with its threshold formula."),
        ],
        Construction::ScaleTriplet { .. } => vec![
            s("Check duality and nesting along a Hilbert scale and the continuity pairs of the identity."),
        ],
        Construction::OperatorAlgebraFuzz { .. } => vec![
            s("Check adjoints and partial products of random operators on a three-space scale family."),
        ],
    }
}
