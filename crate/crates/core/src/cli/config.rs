//! Scenario files: TOML by default, JSON when the extension says so.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::frames::{FamilyRecord, VectorFamily, WeightRule};
use crate::lattice::LpIndex;
use crate::measure::FiniteMeasureSpace;
use crate::scales::{kernel_preset, HilbertScale};

pub const DEFAULT_SEED: u64 = 20_240_601;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub summary: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub construction: Construction,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Construction {
    /// `ψ_n = m_n e_n`, `φ_n = e_n / m_n` on `ℂ^N` for each `N` in `sizes`.
    WeightedPair {
        weights: Weights,
        #[serde(default)]
        sizes: Vec<usize>,
        /// Lattice points `[1/p, 1/q]` whose spaces receive range certificates.
        #[serde(default)]
        certify: Vec<[f64; 2]>,
        #[serde(default)]
        expect: Option<Expect>,
    },
    /// Componentwise min and max of two random nonnegative families.
    MinmaxPair {
        dim: usize,
        sizes: Vec<usize>,
        #[serde(default = "default_trials")]
        trials: usize,
        /// `[1/p, 1/q]` of the intersection the min family is certified into.
        #[serde(default = "default_minmax_index")]
        index: [f64; 2],
    },
    /// Weighted reproducing kernels `m^{∓n} k_x` on the points `1..N`.
    RkhsWeightPair {
        kernel: String,
        exponent: i32,
        sizes: Vec<usize>,
        #[serde(default)]
        expect: Option<Expect>,
    },
    /// Two families read from a JSON file next to the config.
    FamiliesFromFile {
        path: PathBuf,
        #[serde(default)]
        certify: Vec<[f64; 2]>,
    },
    /// Dual norms against norms of dual descriptors, and the `L¹ + L^∞` threshold formula.
    LpDualityGrid {
        max_dim: usize,
        samples: usize,
        #[serde(default = "default_threshold_cases")]
        threshold_cases: usize,
    },
    /// Norm nesting and duality along a Hilbert scale.
    ScaleTriplet { preset: String, dim: usize, max_k: i32, samples: usize },
    /// Random operators on a three-space scale family.
    OperatorAlgebraFuzz { operators: usize, dim: usize },
}

fn default_trials() -> usize {
    32
}

fn default_minmax_index() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_threshold_cases() -> usize {
    100
}

impl Construction {
    pub fn kind(&self) -> &'static str {
        match self {
            Construction::WeightedPair { .. } => "weighted_pair",
            Construction::MinmaxPair { .. } => "minmax_pair",
            Construction::RkhsWeightPair { .. } => "rkhs_weight_pair",
            Construction::FamiliesFromFile { .. } => "families_from_file",
            Construction::LpDualityGrid { .. } => "lp_duality_grid",
            Construction::ScaleTriplet { .. } => "scale_triplet",
            Construction::OperatorAlgebraFuzz { .. } => "operator_algebra_fuzz",
        }
    }
}

/// A rule such as `"1/n"` or an explicit list of weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Rule(String),
    Values(Vec<f64>),
}

/// Expected sweep classifications, in kebab case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    pub psi: String,
    pub phi: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative threshold on the smallest singular value of `S`.
    pub gl: f64,
    pub rank: f64,
    /// Pairing and reproduction identities.
    pub duality: f64,
    /// `‖S - I‖` for pairs that should be dual.
    pub identity: f64,
    /// Frame bounds against the diagonal formula, relative to `max(1, bound)`.
    pub bounds: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gl: 1e-8, rank: 1e-10, duality: 1e-11, identity: 1e-12, bounds: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    /// File stem of the report; the scenario name when empty.
    pub stem: String,
    pub format: Format,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { stem: String::new(), format: Format::Both }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.source, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Families loaded for `families_from_file`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamiliesFile {
    pub space: FiniteMeasureSpace,
    pub psi: FamilyRecord,
    pub phi: FamilyRecord,
}

/// A validated scenario with every external input resolved.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub families: Option<(VectorFamily, VectorFamily)>,
}

pub fn parse_str(text: &str, json: bool, source: &str) -> Result<Scenario, ConfigError> {
    let err = |message: String| ConfigError { source: source.to_owned(), message };
    if json {
        serde_json::from_str(text).map_err(|e| err(e.to_string()))
    } else {
        toml::from_str(text).map_err(|e| err(e.to_string().trim_end().to_owned()))
    }
}

pub fn load(path: &Path) -> Result<Prepared, ConfigError> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError { source: source.clone(), message: e.to_string() })?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let scenario = parse_str(&text, json, &source)?;
    prepare(scenario, path.parent(), &source)
}

/// Validates values and resolves presets and files; `base` anchors relative paths.
pub fn prepare(scenario: Scenario, base: Option<&Path>, source: &str) -> Result<Prepared, ConfigError> {
    let err = |key: &str, message: String| ConfigError { source: source.to_owned(), message: format!("{key}: {message}") };
    if scenario.name.trim().is_empty() {
        return Err(err("name", "must not be empty".into()));
    }
    if !scenario.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(err("name", format!("{:?} may only contain letters, digits, '-' and '_'", scenario.name)));
    }
    let stem = &scenario.outputs.stem;
    if !stem.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.') || stem.starts_with('.') {
        return Err(err("outputs.stem", format!("{stem:?} is not a plain file stem")));
    }
    let t = &scenario.tolerances;
    for (key, v) in [("gl", t.gl), ("rank", t.rank), ("duality", t.duality), ("identity", t.identity), ("bounds", t.bounds)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(err(&format!("tolerances.{key}"), format!("must be positive, got {v}")));
        }
    }
    let sizes_ok = |key: &str, sizes: &[usize]| -> Result<(), ConfigError> {
        if sizes.is_empty() {
            return Err(err(key, "needs at least one size".into()));
        }
        if let Some(s) = sizes.iter().find(|&&s| s == 0) {
            return Err(err(key, format!("sizes must be positive, got {s}")));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(err(key, "sizes must be strictly increasing".into()));
        }
        Ok(())
    };
    let certify_ok = |certify: &[[f64; 2]]| -> Result<(), ConfigError> {
        for (i, &[a, b]) in certify.iter().enumerate() {
            LpIndex::new(a, b).map_err(|e| err(&format!("construction.certify[{i}]"), e.to_string()))?;
        }
        Ok(())
    };
    let expect_ok = |expect: &Option<Expect>| -> Result<(), ConfigError> {
        if let Some(e) = expect {
            for (key, v) in [("psi", &e.psi), ("phi", &e.phi)] {
                if !CLASSIFICATIONS.contains(&v.as_str()) {
                    return Err(err(&format!("construction.expect.{key}"), format!("unknown classification {v:?}")));
                }
            }
        }
        Ok(())
    };
    let mut families = None;
    match &scenario.construction {
        Construction::WeightedPair { weights, sizes, certify, expect } => {
            match weights {
                Weights::Rule(rule) => {
                    WeightRule::parse(rule).map_err(|e| err("construction.weights", e.to_string()))?;
                    sizes_ok("construction.sizes", sizes)?;
                }
                Weights::Values(values) => {
                    if values.is_empty() {
                        return Err(err("construction.weights", "needs at least one weight".into()));
                    }
                    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
                        return Err(err(
                            &format!("construction.weights[{i}]"),
                            format!("weights must be strictly positive and finite, got {v}"),
                        ));
                    }
                    if !sizes.is_empty() {
                        return Err(err("construction.sizes", "not used with an explicit weight list".into()));
                    }
                    if expect.is_some() {
                        return Err(err("construction.expect", "a sweep needs a weight rule".into()));
                    }
                }
            }
            certify_ok(certify)?;
            expect_ok(expect)?;
        }
        Construction::MinmaxPair { dim, sizes, trials, index } => {
            if *dim == 0 {
                return Err(err("construction.dim", "must be positive".into()));
            }
            sizes_ok("construction.sizes", sizes)?;
            if *trials == 0 {
                return Err(err("construction.trials", "must be positive".into()));
            }
            let ix = LpIndex::new(index[0], index[1]).map_err(|e| err("construction.index", e.to_string()))?;
            if ix.is_sum() {
                return Err(err("construction.index", "must lie on or above the diagonal".into()));
            }
        }
        Construction::RkhsWeightPair { kernel, exponent, sizes, expect } => {
            sizes_ok("construction.sizes", sizes)?;
            kernel_preset(kernel, &[1.0]).map_err(|e| err("construction.kernel", e.to_string()))?;
            if exponent.unsigned_abs() > 8 {
                return Err(err("construction.exponent", format!("|n| ≤ 8 expected, got {exponent}")));
            }
            expect_ok(expect)?;
        }
        Construction::FamiliesFromFile { path, certify } => {
            certify_ok(certify)?;
            let full = base.map(|b| b.join(path)).unwrap_or_else(|| path.clone());
            let text = std::fs::read_to_string(&full)
                .map_err(|e| err("construction.path", format!("{}: {e}", full.display())))?;
            let file: FamiliesFile = serde_json::from_str(&text)
                .map_err(|e| err("construction.path", format!("{}: {e}", full.display())))?;
            let read = |r: &FamilyRecord, key: &str| {
                VectorFamily::from_record(file.space.clone(), r)
                    .map_err(|e| err(&format!("construction.path ({key})"), e.to_string()))
            };
            let (psi, phi) = (read(&file.psi, "psi")?, read(&file.phi, "phi")?);
            if psi.dim() != phi.dim() || psi.len() != phi.len() {
                return Err(err("construction.path", "psi and phi have different shapes".into()));
            }
            families = Some((psi, phi));
        }
        Construction::LpDualityGrid { max_dim, samples, threshold_cases } => {
            if !(1..=8).contains(max_dim) {
                return Err(err("construction.max_dim", format!("must lie in 1..=8, got {max_dim}")));
            }
            if *samples == 0 || *threshold_cases == 0 {
                return Err(err("construction.samples", "sample counts must be positive".into()));
            }
        }
        Construction::ScaleTriplet { preset, dim, max_k, samples } => {
            if *max_k < 1 {
                return Err(err("construction.max_k", "must be at least 1".into()));
            }
            HilbertScale::preset(preset, *dim, *max_k).map_err(|e| err("construction.preset", e.to_string()))?;
            if *samples == 0 {
                return Err(err("construction.samples", "must be positive".into()));
            }
        }
        Construction::OperatorAlgebraFuzz { operators, dim } => {
            if *operators == 0 || *dim == 0 {
                return Err(err("construction", "operators and dim must be positive".into()));
            }
        }
    }
    Ok(Prepared { scenario, families })
}

pub const CLASSIFICATIONS: [&str; 4] =
    ["frame", "upper-semi-frame-tendency", "lower-semi-frame-tendency", "neither"];
