//! Reference implementations written from the definitions with plain loops,
//! independent of the library's matrix code.

#![allow(dead_code)]

use num_complex::Complex64;
use pipframe::frames::VectorFamily;
use pipframe::linalg::{random_cmat, CMat, CVec};
use pipframe::measure::FiniteMeasureSpace;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `Σ a_i conj(b_i)`.
pub fn dot(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// `Σ_x ξ(x) conj(η(x)) μ_x`.
pub fn pair(mu: &[f64], xi: &CVec, eta: &CVec) -> Complex64 {
    (0..mu.len()).map(|x| xi[x] * eta[x].conj() * mu[x]).sum()
}

/// `(C_ψ f)(x) = ⟨f, ψ_x⟩`.
pub fn analysis(members: &CMat, f: &CVec) -> CVec {
    CVec::from_fn(members.ncols(), |x, _| (0..members.nrows()).map(|i| f[i] * members[(i, x)].conj()).sum())
}

/// `S_{ψ,φ}[i][j] = Σ_x φ_x[i] conj(ψ_x[j]) μ_x`.
pub fn resolution(psi: &CMat, phi: &CMat, mu: &[f64]) -> CMat {
    let d = psi.nrows();
    let mut s = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = zero();
            for (x, w) in mu.iter().enumerate() {
                acc += phi[(i, x)] * psi[(j, x)].conj() * *w;
            }
            s[(i, j)] = acc;
        }
    }
    s
}

/// `(Σ |v|^p μ)^{1/p}`, or the max for `p = ∞`.
pub fn lp_norm(mu: &[f64], v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        v.iter().zip(mu).map(|(x, w)| x.abs().powf(p) * w).sum::<f64>().powf(1.0 / p)
    }
}

pub fn weighted_l2_norm(mu: &[f64], m: &[f64], v: &[f64]) -> f64 {
    v.iter().zip(mu).zip(m).map(|((x, w), k)| (k * x).powi(2) * w).sum::<f64>().sqrt()
}

/// `min_t Σ (|v| − t)_+ μ + t`; the minimum sits at 0 or at one of the `|v_x|`.
pub fn l1_linf_threshold(mu: &[f64], v: &[f64]) -> f64 {
    let mut ts: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    ts.push(0.0);
    ts.iter()
        .map(|&t| v.iter().zip(mu).map(|(x, w)| (x.abs() - t).max(0.0) * w).sum::<f64>() + t)
        .fold(f64::INFINITY, f64::min)
}

/// `inf_{v = g + h} combine(‖g‖_a, ‖h‖_b)` by exhaustive grid search with
/// pattern refinement, for `N ≤ 3` and lattice norms given on `|v|`.
///
/// Only splits `g = t v`, `t ∈ [0, 1]^N`, are searched: for lattice norms
/// any split can be moved onto one of these without increasing either part.
pub fn brute_inductive<A, B>(v: &[f64], a: A, b: B, max: bool) -> f64
where
    A: Fn(&[f64]) -> f64,
    B: Fn(&[f64]) -> f64,
{
    let n = v.len();
    assert!(n <= 3);
    let cost = |t: &[f64]| {
        let g: Vec<f64> = (0..n).map(|i| t[i] * v[i].abs()).collect();
        let h: Vec<f64> = (0..n).map(|i| (1.0 - t[i]) * v[i].abs()).collect();
        let (x, y) = (a(&g), b(&h));
        if max {
            x.max(y)
        } else {
            x + y
        }
    };
    const GRID: usize = 40;
    let mut best = vec![0.0; n];
    let mut best_cost = f64::INFINITY;
    let total = (GRID + 1).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let t: Vec<f64> = (0..n)
            .map(|_| {
                let k = c % (GRID + 1);
                c /= GRID + 1;
                k as f64 / GRID as f64
            })
            .collect();
        let val = cost(&t);
        if val < best_cost {
            best_cost = val;
            best = t;
        }
    }
    let mut step = 1.0 / GRID as f64;
    while step > 1e-9 {
        let mut improved = false;
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let t: Vec<f64> = (0..n)
                .map(|i| {
                    let dir = (c % 3) as f64 - 1.0;
                    c /= 3;
                    (best[i] + dir * step).clamp(0.0, 1.0)
                })
                .collect();
            let val = cost(&t);
            if val < best_cost - 1e-15 * best_cost.abs() {
                best_cost = val;
                best = t;
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best_cost
}

pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMeasureSpace {
    FiniteMeasureSpace::from_weights((0..n).map(|_| rng.gen_range(0.2..2.0)).collect()).unwrap()
}

/// A `d × N` family whose synthesis map has rank exactly `r` (generically).
pub fn family_of_rank(rng: &mut ChaCha8Rng, space: &FiniteMeasureSpace, d: usize, r: usize) -> VectorFamily {
    let n = space.len();
    let members = if r == 0 { CMat::zeros(d, n) } else { random_cmat(rng, d, r) * random_cmat(rng, r, n) };
    VectorFamily::new(space.clone(), members).unwrap()
}

/// Ratio of the extreme singular values.
pub fn condition(s: &CMat) -> f64 {
    let sv = s.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}
