//! Convex minimisation of descriptor norms by projected subgradient descent.
//!
//! A descriptor tree is flattened into a sum (or max) of leaf norms: every
//! `Inductive` node owns one free vector `g` and hands `g` to its left child
//! and `input - g` to its right child. Minimising the total jointly over all
//! free vectors evaluates the nested infimum exactly, and the same routine
//! minimises the norm over an affine hyperplane for dual-norm evaluation.

use nalgebra::DVector;
use num_complex::Complex64;

use super::{Combine, SpaceDescriptor};
use crate::error::{Error, Result};
use crate::linalg::CVec;

#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Iterations per restart phase.
    pub phase_iterations: usize,
    /// Step sizes shrink by half per phase down to this fraction of the scale.
    pub final_step: f64,
    /// Relative improvement over the last phases above which the run is
    /// reported as not converged.
    pub stall_tolerance: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { phase_iterations: 300, final_step: 1e-9, stall_tolerance: 1e-6 }
    }
}

pub(crate) fn count_free(desc: &SpaceDescriptor) -> usize {
    match desc {
        SpaceDescriptor::Lp { .. } | SpaceDescriptor::WeightedL2 { .. } => 0,
        SpaceDescriptor::Projective { a, b, .. } => count_free(a) + count_free(b),
        SpaceDescriptor::Inductive { a, b, .. } => 1 + count_free(a) + count_free(b),
    }
}

/// Value of a leaf norm and, when requested, its subgradient added into `grad`.
pub(crate) fn leaf_norm(desc: &SpaceDescriptor, mu: &[f64], v: &CVec, grad: Option<&mut CVec>) -> f64 {
    match desc {
        SpaceDescriptor::Lp { p } => {
            let p = *p;
            if p.is_infinite() {
                let (arg, val) = v
                    .iter()
                    .enumerate()
                    .map(|(i, z)| (i, z.norm()))
                    .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                if let Some(g) = grad {
                    if val > 0.0 {
                        g[arg] += v[arg] / val;
                    }
                }
                val
            } else if p == 1.0 {
                let val = v.iter().zip(mu).map(|(z, w)| z.norm() * w).sum();
                if let Some(g) = grad {
                    for (i, z) in v.iter().enumerate() {
                        let a = z.norm();
                        if a > 0.0 {
                            g[i] += z * (mu[i] / a);
                        }
                    }
                }
                val
            } else {
                // scale by the max modulus to avoid overflow in |v|^p
                let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if vmax == 0.0 {
                    return 0.0;
                }
                let s: f64 = v.iter().zip(mu).map(|(z, w)| (z.norm() / vmax).powf(p) * w).sum();
                let val = vmax * s.powf(1.0 / p);
                if let Some(g) = grad {
                    for (i, z) in v.iter().enumerate() {
                        let a = z.norm();
                        if a > 0.0 {
                            g[i] += z * (mu[i] * (a / val).powf(p - 1.0) / a);
                        }
                    }
                }
                val
            }
        }
        SpaceDescriptor::WeightedL2 { m } => {
            let val = v
                .iter()
                .zip(mu)
                .zip(m)
                .map(|((z, w), mm)| z.norm_sqr() * mm * mm * w)
                .sum::<f64>()
                .sqrt();
            if let Some(g) = grad {
                if val > 0.0 {
                    for i in 0..v.len() {
                        g[i] += v[i] * (m[i] * m[i] * mu[i] / val);
                    }
                }
            }
            val
        }
        _ => unreachable!("composite descriptor passed as leaf"),
    }
}

/// Evaluates the flattened objective at `input` with free vectors `free`,
/// accumulating subgradients when `grads` is given.
pub(crate) fn objective(
    desc: &SpaceDescriptor,
    mu: &[f64],
    input: &CVec,
    free: &[CVec],
    cursor: &mut usize,
    grads: Option<(&mut CVec, &mut [CVec])>,
) -> f64 {
    let (a, b, combine, inductive) = match desc {
        SpaceDescriptor::Lp { .. } | SpaceDescriptor::WeightedL2 { .. } => {
            return leaf_norm(desc, mu, input, grads.map(|(gi, _)| gi));
        }
        SpaceDescriptor::Projective { a, b, combine } => (a, b, *combine, false),
        SpaceDescriptor::Inductive { a, b, combine } => (a, b, *combine, true),
    };
    let (left, right, slot) = if inductive {
        let slot = *cursor;
        *cursor += 1;
        (free[slot].clone(), input - &free[slot], Some(slot))
    } else {
        (input.clone(), input.clone(), None)
    };
    let Some((gi, gf)) = grads else {
        let va = objective(a, mu, &left, free, cursor, None);
        let vb = objective(b, mu, &right, free, cursor, None);
        return combine.apply(va, vb);
    };
    let n = input.len();
    let mut ga = CVec::zeros(n);
    let mut gfa: Vec<CVec> = vec![CVec::zeros(n); free.len()];
    let va = objective(a, mu, &left, free, cursor, Some((&mut ga, &mut gfa)));
    let mut gb = CVec::zeros(n);
    let mut gfb: Vec<CVec> = vec![CVec::zeros(n); free.len()];
    let vb = objective(b, mu, &right, free, cursor, Some((&mut gb, &mut gfb)));
    // Which children contribute to the subgradient.
    let (use_a, use_b) = match combine {
        Combine::Sum => (true, true),
        Combine::Max => (va >= vb, va < vb),
    };
    if !use_a {
        ga.fill(Complex64::new(0.0, 0.0));
        gfa.iter_mut().for_each(|g| g.fill(Complex64::new(0.0, 0.0)));
    }
    if !use_b {
        gb.fill(Complex64::new(0.0, 0.0));
        gfb.iter_mut().for_each(|g| g.fill(Complex64::new(0.0, 0.0)));
    }
    for ((acc, x), y) in gf.iter_mut().zip(&gfa).zip(&gfb) {
        *acc += x + y;
    }
    match slot {
        // left sees g, right sees input - g
        Some(slot) => {
            gf[slot] += &ga - &gb;
            *gi += &gb;
        }
        None => {
            *gi += &ga + &gb;
        }
    }
    combine.apply(va, vb)
}

/// Where the input vector lives during minimisation.
pub(crate) enum InputSet<'a> {
    /// The input is fixed; only the decomposition vectors move.
    Fixed(&'a CVec),
    /// The input moves on `{x : Re Σ x_i conj(w_i) = 1}` (w already μ-weighted).
    Hyperplane(&'a CVec),
}

pub(crate) struct Minimum {
    pub value: f64,
}

/// Euclidean projection of `t` onto `{t ≥ 0, Σ a_i t_i = 1}`; coordinates
/// with `a_i = 0` are pinned to zero.
fn project_simplex(t: &mut [f64], a: &[f64]) {
    let mut order: Vec<usize> = (0..t.len()).filter(|&i| a[i] > 0.0).collect();
    order.sort_by(|&i, &j| (t[j] / a[j]).total_cmp(&(t[i] / a[i])));
    // t_i = max(0, y_i - θ a_i), with the active set grown by breakpoint
    let (mut ay, mut aa) = (0.0, 0.0);
    let mut theta = 0.0;
    for (k, &i) in order.iter().enumerate() {
        ay += a[i] * t[i];
        aa += a[i] * a[i];
        theta = (ay - 1.0) / aa;
        let next = order.get(k + 1).map(|&j| t[j] / a[j]);
        if next.map_or(true, |b| theta >= b) {
            break;
        }
    }
    for i in 0..t.len() {
        t[i] = if a[i] > 0.0 { (t[i] - theta * a[i]).max(0.0) } else { 0.0 };
    }
}

/// The gradient `g` projected onto the face of `{t ≥ 0, Σ a_i t_i = 1}`
/// that a descent step from `t` stays on. Coordinates at zero join the face
/// only when descent would make them positive.
fn face_gradient(g: &[f64], t: &[f64], a: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut on: Vec<bool> = (0..n).map(|i| a[i] > 0.0 && t[i] > 0.0).collect();
    loop {
        let (ga, aa) = (0..n).filter(|&i| on[i]).fold((0.0, 0.0), |(x, y), i| (x + g[i] * a[i], y + a[i] * a[i]));
        let r = if aa > 0.0 { ga / aa } else { 0.0 };
        let released: Vec<usize> = (0..n).filter(|&i| !on[i] && a[i] > 0.0 && g[i] - r * a[i] < 0.0).collect();
        if released.is_empty() {
            return (0..n).map(|i| if on[i] { g[i] - r * a[i] } else { 0.0 }).collect();
        }
        released.into_iter().for_each(|i| on[i] = true);
    }
}

pub(crate) fn minimize(desc: &SpaceDescriptor, mu: &[f64], set: InputSet<'_>, budget: &Budget) -> Result<Minimum> {
    let n = mu.len();
    let nfree = count_free(desc);
    // On the hyperplane the input is kept as `t_i u_i` with `t` on a simplex
    // and `u` the phases of `w`. Every leaf is a lattice norm, so aligning
    // the phases with `w` loses nothing, and the kink of `|z|` at zero turns
    // into a face of the simplex that the projection handles exactly.
    let (mut input, moving, phases_w, a) = match set {
        InputSet::Fixed(v) => (v.clone(), false, CVec::zeros(n), vec![0.0; n]),
        InputSet::Hyperplane(w) => {
            let a: Vec<f64> = w.iter().map(|z| z.norm()).collect();
            let u = CVec::from_iterator(n, w.iter().zip(&a).map(|(z, m)| if *m > 0.0 { z / m } else { Complex64::new(0.0, 0.0) }));
            let a2: f64 = a.iter().map(|x| x * x).sum();
            let x = CVec::from_iterator(n, u.iter().zip(&a).map(|(z, m)| z * (m / a2)));
            (x, true, u, a)
        }
    };
    let scale = input.norm();
    if scale == 0.0 {
        return Ok(Minimum { value: 0.0 });
    }
    let mut free: Vec<CVec> = vec![input.scale(0.5); nfree];
    init_free(desc, &input, &mut free, &mut 0);

    let eval = |input: &CVec, free: &[CVec]| objective(desc, mu, input, free, &mut 0, None);
    let mut best = eval(&input, &free);
    let mut best_input = input.clone();
    let mut best_free = free.clone();

    // Also try the pure splits g = 0 and g = input at the top level.
    if nfree > 0 && !moving {
        for t in [0.0, 1.0] {
            let mut f = free.clone();
            f[0] = input.scale(t);
            let val = eval(&input, &f);
            if val < best {
                best = val;
                best_free = f;
            }
        }
    }

    let mut step0 = 0.5 * scale;
    let mut history: Vec<f64> = vec![best];
    let mut phases = 0usize;
    while step0 > budget.final_step * scale {
        input = best_input.clone();
        free = best_free.clone();
        for k in 0..budget.phase_iterations {
            let mut gi = CVec::zeros(n);
            let mut gf: Vec<CVec> = vec![CVec::zeros(n); nfree];
            // On the simplex the one-sided derivative at t_i = 0 is wanted,
            // so the subgradient is taken a hair inside the positive side.
            let at = if moving { &input + phases_w.scale(1e-14 * scale) } else { input.clone() };
            let val = objective(desc, mu, &at, &free, &mut 0, Some((&mut gi, &mut gf)));
            if val < best {
                best = val;
                best_input = input.clone();
                best_free = free.clone();
            }
            // derivative along each phase direction
            let gt: Vec<f64> = if moving {
                let g: Vec<f64> = (0..n).map(|i| if a[i] > 0.0 { (phases_w[i].conj() * gi[i]).re } else { 0.0 }).collect();
                let t: Vec<f64> = (0..n).map(|i| (phases_w[i].conj() * input[i]).re).collect();
                face_gradient(&g, &t, &a)
            } else {
                Vec::new()
            };
            let gnorm = (gt.iter().map(|x| x * x).sum::<f64>() + gf.iter().map(|g| g.norm_squared()).sum::<f64>()).sqrt();
            if gnorm == 0.0 {
                break;
            }
            let alpha = step0 / ((k + 1) as f64).sqrt() / gnorm;
            if moving {
                let mut t: Vec<f64> = (0..n).map(|i| (phases_w[i].conj() * input[i]).re - alpha * gt[i]).collect();
                project_simplex(&mut t, &a);
                input = CVec::from_iterator(n, t.iter().zip(phases_w.iter()).map(|(x, z)| z * *x));
            }
            for (f, g) in free.iter_mut().zip(&gf) {
                *f -= g.scale(alpha);
            }
        }
        let val = eval(&input, &free);
        if val < best {
            best = val;
            best_input = input.clone();
            best_free = free.clone();
        }
        history.push(best);
        step0 *= 0.5;
        phases += 1;
    }

    // Converged when the last few halvings barely moved the best value.
    let look = history.len().saturating_sub(6);
    let drift = history[look] - best;
    if drift > budget.stall_tolerance * best.max(f64::MIN_POSITIVE) {
        return Err(Error::NotConverged { best, iterations: phases * budget.phase_iterations });
    }
    Ok(Minimum { value: best })
}

fn init_free(desc: &SpaceDescriptor, input: &CVec, free: &mut [CVec], cursor: &mut usize) {
    match desc {
        SpaceDescriptor::Lp { .. } | SpaceDescriptor::WeightedL2 { .. } => {}
        SpaceDescriptor::Projective { a, b, .. } => {
            init_free(a, input, free, cursor);
            init_free(b, input, free, cursor);
        }
        SpaceDescriptor::Inductive { a, b, .. } => {
            let slot = *cursor;
            *cursor += 1;
            let g = input.scale(0.5);
            free[slot] = g.clone();
            init_free(a, &g, free, cursor);
            init_free(b, &(input - &g), free, cursor);
        }
    }
}

pub(crate) fn weighted(v: &CVec, mu: &[f64]) -> CVec {
    DVector::from_iterator(v.len(), v.iter().zip(mu).map(|(z, w)| z * *w))
}
