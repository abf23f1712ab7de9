//! Estimating `sup_v num(v) / den(v)` over `ℂ^n` by probing.
//!
//! Used for operator norms between Banach descriptors, where no closed form
//! is available. The estimate is a certified lower bound: every reported
//! value is attained by the returned witness.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{random_cvec, CVec};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    pub random_probes: usize,
    pub refine_starts: usize,
    pub refine_steps: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { random_probes: 256, refine_starts: 4, refine_steps: 200, seed: 0x5eed, exec: Execution::Parallel }
    }
}

#[derive(Debug, Clone)]
pub struct RatioEstimate {
    pub value: f64,
    pub witness: CVec,
    pub evaluations: usize,
}

/// Maximises `ratio(v)` over nonzero `v`; `candidates` are tried first.
pub fn maximize_ratio<F>(n: usize, candidates: Vec<CVec>, ratio: F, cfg: &ProbeConfig) -> Result<RatioEstimate>
where
    F: Fn(&CVec) -> Result<f64> + Sync + Send,
{
    let mut probes = candidates;
    for i in 0..n {
        let mut e = CVec::zeros(n);
        e[i] = Complex64::new(1.0, 0.0);
        probes.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_probes {
        probes.push(random_cvec(&mut rng, n));
    }
    probes.retain(|p| p.norm() > 0.0);
    let values: Vec<Result<f64>> = par::map(cfg.exec, &probes, |p| ratio(p));
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for (i, v) in values.into_iter().enumerate() {
        scored.push((v?, i));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut evaluations = probes.len();

    let starts: Vec<(f64, CVec, u64)> = scored
        .iter()
        .take(cfg.refine_starts.max(1))
        .enumerate()
        .map(|(k, &(v, i))| (v, probes[i].clone(), cfg.seed.wrapping_add(1 + k as u64)))
        .collect();
    let refined: Vec<Result<(f64, CVec)>> = par::map(cfg.exec, &starts, |(v, x, seed)| {
        climb(&ratio, *v, x.clone(), cfg.refine_steps, *seed)
    });
    evaluations += starts.len() * cfg.refine_steps;

    let mut best = (scored.first().map(|s| s.0).unwrap_or(0.0), probes.get(scored.first().map_or(0, |s| s.1)).cloned());
    for r in refined {
        let (v, x) = r?;
        if v > best.0 {
            best = (v, Some(x));
        }
    }
    Ok(RatioEstimate { value: best.0, witness: best.1.unwrap_or_else(|| CVec::zeros(n)), evaluations })
}

fn climb<F>(ratio: &F, mut value: f64, mut x: CVec, steps: usize, seed: u64) -> Result<(f64, CVec)>
where
    F: Fn(&CVec) -> Result<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let nx = x.norm();
    x /= Complex64::new(nx, 0.0);
    let mut radius = 0.5;
    let mut misses = 0;
    for _ in 0..steps {
        let mut cand = &x + random_cvec(&mut rng, n).scale(radius / (n as f64).sqrt());
        let nc = cand.norm();
        if nc == 0.0 {
            continue;
        }
        cand /= Complex64::new(nc, 0.0);
        let v = ratio(&cand)?;
        if v > value {
            value = v;
            x = cand;
            misses = 0;
        } else {
            misses += 1;
            if misses >= 8 {
                radius *= 0.5;
                misses = 0;
            }
        }
        if radius < 1e-10 {
            break;
        }
    }
    Ok((value, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_cmat, spectral_norm};

    #[test]
    fn recovers_spectral_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_cmat(&mut rng, 4, 4);
        let exact = spectral_norm(&a);
        let est = maximize_ratio(4, vec![], |v| Ok((&a * v).norm() / v.norm()), &ProbeConfig::default()).unwrap();
        assert!(est.value <= exact * (1.0 + 1e-12));
        assert!(est.value >= exact * (1.0 - 1e-4), "{} vs {exact}", est.value);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_cmat(&mut rng, 3, 3);
        let f = |v: &CVec| Ok((&a * v).norm() / v.norm());
        let s = maximize_ratio(3, vec![], f, &ProbeConfig { exec: Execution::Sequential, ..Default::default() }).unwrap();
        let p = maximize_ratio(3, vec![], f, &ProbeConfig::default()).unwrap();
        assert_eq!(s.value, p.value);
    }
}
