//! Semi-frame behaviour observed along truncation sweeps.
//!
//! Every finite frame is a frame, so upper and lower semi-frames only show up
//! as trends: how the frame bounds of `Ψ_N` move as `N` grows.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{resolution_operator, weighted_pair, FrameBounds, VectorFamily};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, CMat, CVec};
use crate::par::{self, Execution};
use crate::sweep::{bounded_below, decays, grows, stays_bounded};

/// Produces the truncation `(Ψ_N, Φ_N)`; `Ψ_N` must embed in `Ψ_{N'}` for `N < N'`.
pub trait PairGenerator: Sync {
    fn generate(&self, n: usize) -> Result<(VectorFamily, VectorFamily)>;
    fn describe(&self) -> String;
}

/// `m_n = n^k`, written `"1"`, `"n"`, `"1/n"`, `"n^k"` or `"1/n^k"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    Power(f64),
}

impl WeightRule {
    pub fn parse(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Domain(format!("unrecognised weight rule {s:?}"));
        let (sign, rest) = match s.strip_prefix("1/") {
            Some(rest) => (-1.0, rest),
            None if s == "1" => return Ok(WeightRule::Power(0.0)),
            None => (1.0, s.as_str()),
        };
        let k = match rest.strip_prefix('n').ok_or_else(bad)? {
            "" => 1.0,
            exp => exp.strip_prefix('^').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        if !k.is_finite() {
            return Err(bad());
        }
        Ok(WeightRule::Power(sign * k))
    }

    /// Weight of the `n`-th element, counting from 1.
    pub fn weight(&self, n: usize) -> f64 {
        let WeightRule::Power(k) = self;
        (n as f64).powf(*k)
    }

    pub fn label(&self) -> String {
        let WeightRule::Power(k) = *self;
        match k {
            k if k == 0.0 => "1".into(),
            k if k == 1.0 => "n".into(),
            k if k == -1.0 => "1/n".into(),
            k if k < 0.0 => format!("1/n^{}", -k),
            k => format!("n^{k}"),
        }
    }
}

/// `ψ_n = m_n e_n`, `φ_n = e_n / m_n` on `ℂ^N` with counting measure.
#[derive(Debug, Clone)]
pub struct WeightedGenerator {
    pub rule: WeightRule,
}

impl WeightedGenerator {
    pub fn new(rule: WeightRule) -> Self {
        Self { rule }
    }
}

impl PairGenerator for WeightedGenerator {
    fn generate(&self, n: usize) -> Result<(VectorFamily, VectorFamily)> {
        let m: Vec<Complex64> = (1..=n).map(|i| Complex64::new(self.rule.weight(i), 0.0)).collect();
        weighted_pair(&m, &VectorFamily::standard_basis(n)?)
    }

    fn describe(&self) -> String {
        format!("weighted orthonormal basis, m_n = {}", self.rule.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Frame,
    UpperSemiFrameTendency,
    LowerSemiFrameTendency,
    Neither,
}

/// Frame if both bounds stay put; upper tendency if the lower bound decays
/// under a bounded upper one; lower tendency if the upper bound grows over a
/// lower bound bounded away from 0.
pub fn classify(lower: &[f64], upper: &[f64]) -> Classification {
    let upper_bounded = stays_bounded(upper);
    let lower_held = bounded_below(lower);
    if upper_bounded && lower_held {
        Classification::Frame
    } else if upper_bounded && decays(lower) {
        Classification::UpperSemiFrameTendency
    } else if lower_held && grows(upper) {
        Classification::LowerSemiFrameTendency
    } else {
        Classification::Neither
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub psi: FrameBounds,
    pub phi: FrameBounds,
    /// `‖S_{ψ,φ} - I‖` at this truncation.
    pub identity_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEvidence {
    pub generator: String,
    pub rows: Vec<SweepRow>,
    pub psi: Classification,
    pub phi: Classification,
    /// Fraction of probe vectors whose analysis norm under `C_ψ` stays bounded.
    pub psi_domain_fraction: f64,
    pub phi_domain_fraction: f64,
    pub probes: usize,
}

const PROBES: usize = 16;

/// Probe sequences `f_k = z_k k^{-α}` with decay rates spread over `[0.25, 3]`,
/// so that some of them leave the domain of an unbounded analysis map.
fn probes(seed: u64, len: usize) -> Vec<CVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..PROBES)
        .map(|j| {
            let alpha = 0.25 + 2.75 * j as f64 / (PROBES - 1) as f64;
            DVector::from_iterator(
                len,
                (1..=len).map(|k| {
                    let z = Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5));
                    z * (k as f64).powf(-alpha)
                }),
            )
        })
        .collect()
}

fn analysis_energy(family: &VectorFamily, f: &CVec) -> f64 {
    let d = family.dim();
    let head = f.rows(0, d.min(f.len())).into_owned();
    let f = if head.len() < d { head.resize_vertically(d, Complex64::new(0.0, 0.0)) } else { head };
    let coeffs = family.analysis_matrix() * f;
    coeffs.iter().zip(family.space().weights()).map(|(z, w)| z.norm_sqr() * w).sum::<f64>().sqrt()
}

/// Runs the generator at each size and classifies both families.
pub fn semiframe_sweep<G: PairGenerator + ?Sized>(
    generator: &G,
    sizes: &[usize],
    seed: u64,
    exec: Execution,
) -> Result<SweepEvidence> {
    if sizes.is_empty() {
        return Err(Error::Precondition("empty sweep".into()));
    }
    let probe_len = sizes.iter().copied().max().unwrap_or(0);
    let probe_set = probes(seed, probe_len);
    let results = par::map(exec, sizes, |&n| -> Result<(SweepRow, Vec<f64>, Vec<f64>)> {
        let (psi, phi) = generator.generate(n)?;
        let s: CMat = resolution_operator(&psi, &phi)?;
        let d = s.nrows();
        let row = SweepRow {
            n,
            psi: psi.frame_bounds(),
            phi: phi.frame_bounds(),
            identity_residual: spectral_norm(&(s - CMat::identity(d, d))),
        };
        let ep = probe_set.iter().map(|f| analysis_energy(&psi, f)).collect();
        let eh = probe_set.iter().map(|f| analysis_energy(&phi, f)).collect();
        Ok((row, ep, eh))
    });
    let mut rows = Vec::with_capacity(sizes.len());
    let mut psi_traj = vec![Vec::new(); PROBES];
    let mut phi_traj = vec![Vec::new(); PROBES];
    for r in results {
        let (row, ep, eh) = r?;
        rows.push(row);
        for j in 0..PROBES {
            psi_traj[j].push(ep[j]);
            phi_traj[j].push(eh[j]);
        }
    }
    let fraction = |t: &[Vec<f64>]| t.iter().filter(|v| stays_bounded(v)).count() as f64 / PROBES as f64;
    let col = |f: fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(SweepEvidence {
        generator: generator.describe(),
        psi: classify(&col(|r| r.psi.lower), &col(|r| r.psi.upper)),
        phi: classify(&col(|r| r.phi.lower), &col(|r| r.phi.upper)),
        psi_domain_fraction: fraction(&psi_traj),
        phi_domain_fraction: fraction(&phi_traj),
        probes: PROBES,
        rows,
    })
}
