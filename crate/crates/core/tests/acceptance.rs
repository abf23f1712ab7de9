//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pipframe::frames::{
    canonical_dual, resolution_operator, semiframe_sweep, weighted_pair, Classification, VectorFamily,
    WeightRule, WeightedGenerator, DEFAULT_GL_TOLERANCE,
};
use pipframe::lattice::{
    closure, diagonal_chain_point, horizontal_chain_point, is_total_order, vertical_chain_point, LatticeIndex,
    LpIndex, ScaleIndex,
};
use pipframe::linalg::{random_cmat, random_cvec, spectral_norm, CMat, CVec};
use pipframe::measure::{FiniteMeasureSpace, ScalarField};
use pipframe::operators::{multiply, multiply_through, IndexedSpaceFamily, PipOperator};
use pipframe::optim::ProbeConfig;
use pipframe::par::{self, Execution};
use pipframe::scales::{DiscreteRKHS, HilbertScale};
use pipframe::spaces::{Combine, SpaceDescriptor};
use pipframe::vspace::{is_mu_independent, is_mu_total, quotient_dimensions, DualQuotients, QuotientSpace, RANK_TOLERANCE};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0xacce_97);
    r.set_stream(stream);
    r
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so that it fails every comparison
    xs.into_iter().fold(0.0, |m: f64, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

fn keystone_identity() -> Verdict {
    const TOL: f64 = 1e-11;
    let start = Instant::now();
    let residuals = par::map_range(Execution::Parallel, 1000, |i| {
        let mut rng = rng(1 << 40 | i as u64);
        let n = rng.gen_range(1..=64);
        let d = rng.gen_range(1..=64);
        let space = common::random_space(&mut rng, n);
        let psi = VectorFamily::new(space.clone(), random_cmat(&mut rng, d, n)).unwrap();
        let phi = VectorFamily::new(space.clone(), random_cmat(&mut rng, d, n)).unwrap();
        let f = random_cvec(&mut rng, d);
        let g = random_cvec(&mut rng, d);
        let cf = psi.analysis(&f).unwrap();
        let cg = phi.analysis(&g).unwrap();
        let lhs = space.pair(&cf, &cg).unwrap();
        let s = resolution_operator(&psi, &phi).unwrap();
        let rhs = common::dot(&(&s * &f), &g);
        let scale: f64 = (0..n).map(|x| cf.values()[x].norm() * cg.values()[x].norm() * space.weights()[x]).sum();
        // the same quantities from the loop oracle
        let mu = space.weights();
        let oracle_s = common::resolution(psi.members(), phi.members(), mu);
        let oracle_lhs = common::pair(mu, &common::analysis(psi.members(), &f), &common::analysis(phi.members(), &g));
        let s_scale = psi.members().norm() * phi.members().norm() * mu.iter().cloned().fold(0.0, f64::max);
        let a = (lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE);
        let b = (lhs - oracle_lhs).norm() / scale.max(f64::MIN_POSITIVE);
        let c = (&s - &oracle_s).norm() / s_scale;
        a.max(b).max(c)
    });
    let elapsed = start.elapsed().as_secs_f64();
    let worst = max_of(residuals);
    verdict(
        worst <= TOL && elapsed < 10.0,
        format!("pair(C_ψ f, C_φ g) = ⟨S f, g⟩ on 1000 draws, N, d ≤ 64: worst {worst:.2e} (tol {TOL:e}), {elapsed:.2} s (limit 10 s)"),
    )
}

fn weighted_basis_example() -> Verdict {
    let start = Instant::now();
    let sizes = [4usize, 16, 64, 256];
    let mut worst_s = 0.0f64;
    let mut worst_psi = 0.0f64;
    let mut worst_phi = 0.0f64;
    for &n in &sizes {
        let theta = VectorFamily::standard_basis(n).unwrap();
        let m: Vec<Complex64> = (1..=n).map(|k| Complex64::new(1.0 / k as f64, 0.0)).collect();
        let (psi, phi) = weighted_pair(&m, &theta).unwrap();
        let s = resolution_operator(&psi, &phi).unwrap();
        worst_s = worst_s.max(spectral_norm(&(s - CMat::identity(n, n))));
        let nn = (n * n) as f64;
        let bp = psi.frame_bounds();
        worst_psi = worst_psi.max((bp.lower - 1.0 / nn).abs()).max((bp.upper - 1.0).abs());
        let bf = phi.frame_bounds();
        worst_phi = worst_phi.max((bf.lower - 1.0).abs() / nn).max((bf.upper - nn).abs() / nn);
    }
    let generator = WeightedGenerator::new(WeightRule::parse("1/n").unwrap());
    let ev = semiframe_sweep(&generator, &sizes, 11, Execution::Parallel).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let classes_ok = ev.psi == Classification::UpperSemiFrameTendency && ev.phi == Classification::LowerSemiFrameTendency;
    verdict(
        worst_s <= 1e-12 && worst_psi <= 1e-10 && worst_phi <= 1e-8 && classes_ok && elapsed < 5.0,
        format!(
            "m_n = 1/n, N ∈ {{4,16,64,256}}: ‖S − I‖ {worst_s:.1e} (tol 1e-12), ψ bounds off (1/N², 1) by {worst_psi:.1e} (tol 1e-10), \
             φ bounds off (1, N²) by {worst_phi:.1e}·N² (tol 1e-8·N²), ψ {:?}, φ {:?}, {elapsed:.2} s (limit 5 s)",
            ev.psi, ev.phi
        ),
    )
}

fn canonical_dual_pairs() -> Verdict {
    const TOL: f64 = 1e-10;
    let residuals = par::map_range(Execution::Parallel, 100, |i| {
        let mut rng = rng(3 << 40 | i as u64);
        let d = rng.gen_range(1..=12);
        let n = rng.gen_range(d..=3 * d);
        let space = common::random_space(&mut rng, n);
        let psi = VectorFamily::new(space.clone(), random_cmat(&mut rng, d, n)).unwrap();
        let phi = VectorFamily::new(space, random_cmat(&mut rng, d, n)).unwrap();
        let dual = canonical_dual(&psi, &phi).unwrap();
        let s = common::resolution(psi.members(), dual.members(), psi.space().weights());
        spectral_norm(&(s - CMat::identity(d, d)))
    });
    let worst = max_of(residuals);
    verdict(worst <= TOL, format!("‖S_(ψ, S⁻¹φ) − I‖ on 100 random pairs: worst {worst:.2e} (tol {TOL:e})"))
}

fn quotient_construction() -> Verdict {
    const TOL: f64 = 1e-12;
    let results = par::map_range(Execution::Parallel, 100, |i| {
        let mut rng = rng(4 << 40 | i as u64);
        let n = rng.gen_range(1..=24);
        let d = rng.gen_range(1..=12);
        let full = n.min(d);
        // a third of the families are rank-deficient by construction
        let r = if i % 3 == 0 { rng.gen_range(0..full.max(1)) } else { full };
        let space = common::random_space(&mut rng, n);
        let phi = common::family_of_rank(&mut rng, &space, d, r);
        let q = QuotientSpace::new(&phi);
        let t_norm = spectral_norm(q.map().matrix()).max(1.0);
        let mut vanish = 0.0f64;
        let mut shift = 0.0f64;
        for j in 0..q.kernel_dim() {
            let kappa = ScalarField::new(q.kernel_basis().column(j).into_owned());
            vanish = vanish.max(q.class_norm(&kappa).unwrap() / t_norm);
        }
        for _ in 0..4 {
            let xi = ScalarField::new(random_cvec(&mut rng, n));
            let coeffs: Vec<Complex64> = (0..q.kernel_dim()).map(|_| random_cvec(&mut rng, 1)[0] * 3.0).collect();
            let moved = q.shift(&xi, &coeffs).unwrap();
            let a = q.class_norm(&xi).unwrap();
            let b = q.class_norm(&moved).unwrap();
            shift = shift.max((a - b).abs() / (t_norm * moved.values().norm()));
        }
        let dims_ok = q.dim() + q.kernel_dim() == n && q.dim() == r && q.kernel_dim() == n - r;
        let total_ok = is_mu_total(&phi).holds == (r == d);
        let independent_ok = is_mu_independent(&phi).holds == (r == n);
        (vanish, shift, dims_ok, total_ok && independent_ok)
    });
    let vanish = max_of(results.iter().map(|r| r.0));
    let shift = max_of(results.iter().map(|r| r.1));
    let dims = results.iter().filter(|r| !r.2).count();
    let props = results.iter().filter(|r| !r.3).count();
    // hand-built families with known answers
    let space = FiniteMeasureSpace::from_weights(vec![0.5, 1.0, 2.0]).unwrap();
    let e = |v: [f64; 2]| CVec::from_iterator(2, v.iter().map(|&x| Complex64::new(x, 0.0)));
    let family = |cols: &[[f64; 2]]| VectorFamily::from_columns(space.clone(), &cols.iter().map(|c| e(*c)).collect::<Vec<_>>()).unwrap();
    let spanning = family(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
    let on_a_line = family(&[[1.0, 2.0], [2.0, 4.0], [-1.0, -2.0]]);
    let basis = VectorFamily::standard_basis(3).unwrap();
    let explicit_ok = is_mu_total(&spanning).holds
        && !is_mu_independent(&spanning).holds
        && !is_mu_total(&on_a_line).holds
        && !is_mu_independent(&on_a_line).holds
        && is_mu_total(&basis).holds
        && is_mu_independent(&basis).holds
        && QuotientSpace::new(&on_a_line).kernel_dim() == 2;
    verdict(
        vanish <= TOL && shift <= TOL && dims == 0 && props == 0 && explicit_ok,
        format!(
            "100 families (a third rank-deficient): class norm on Ker T_φ {vanish:.1e}, shift drift {shift:.1e} (tol {TOL:e}); \
             dimension mismatches {dims}, total/independent mismatches {props}, hand-built cases {}",
            if explicit_ok { "ok" } else { "WRONG" }
        ),
    )
}

/// A random reproducing pair with `cond(S) ≤ 10³`, possibly with kernels.
fn reproducing_pair(rng: &mut ChaCha8Rng) -> (VectorFamily, VectorFamily) {
    loop {
        let d = rng.gen_range(1..=6);
        let n = rng.gen_range(d..=3 * d);
        let space = common::random_space(rng, n);
        let psi = VectorFamily::new(space.clone(), random_cmat(rng, d, n)).unwrap();
        let phi = VectorFamily::new(space, random_cmat(rng, d, n)).unwrap();
        let s = resolution_operator(&psi, &phi).unwrap();
        if common::condition(&s) <= 1e3 {
            return (psi, phi);
        }
    }
}

fn pairing_well_defined() -> Verdict {
    const TOL: f64 = 1e-11;
    let results = par::map_range(Execution::Parallel, 100, |i| {
        let mut rng = rng(5 << 40 | i as u64);
        let (psi, phi) = reproducing_pair(&mut rng);
        let n = psi.len();
        let q = DualQuotients::new(&psi, &phi, DEFAULT_GL_TOLERANCE).unwrap();
        let s_inv_norm = {
            let s = resolution_operator(&phi, &psi).unwrap();
            spectral_norm(&s.try_inverse().unwrap())
        };
        let t_phi = spectral_norm(q.v_phi.map().matrix());
        let t_psi = spectral_norm(q.v_psi.map().matrix());
        let mut drift = 0.0f64;
        for _ in 0..4 {
            let xi = ScalarField::new(random_cvec(&mut rng, n));
            let eta = ScalarField::new(random_cvec(&mut rng, n));
            let c1: Vec<Complex64> = (0..q.v_phi.kernel_dim()).map(|_| random_cvec(&mut rng, 1)[0]).collect();
            let c2: Vec<Complex64> = (0..q.v_psi.kernel_dim()).map(|_| random_cvec(&mut rng, 1)[0]).collect();
            let xi2 = q.v_phi.shift(&xi, &c1).unwrap();
            let eta2 = q.v_psi.shift(&eta, &c2).unwrap();
            let base = q.class_pairing(&xi, &eta).unwrap();
            let scale = t_phi * s_inv_norm * t_psi * xi2.values().norm().max(xi.values().norm()) * eta2.values().norm().max(eta.values().norm());
            for moved in [q.class_pairing(&xi2, &eta).unwrap(), q.class_pairing(&xi, &eta2).unwrap(), q.class_pairing(&xi2, &eta2).unwrap()] {
                drift = drift.max((moved - base).norm() / scale);
            }
        }
        // non-degeneracy: pairing with every point mass vanishes only on kernel classes
        let mut violations = 0usize;
        let mut zero_cases = 0usize;
        for k in 0..6 {
            let xi = if k % 2 == 0 && q.v_phi.kernel_dim() > 0 {
                let c: Vec<Complex64> = (0..q.v_phi.kernel_dim()).map(|_| random_cvec(&mut rng, 1)[0]).collect();
                q.v_phi.shift(&ScalarField::zeros(n), &c).unwrap()
            } else {
                ScalarField::new(random_cvec(&mut rng, n))
            };
            let scale = t_phi * s_inv_norm * t_psi * xi.values().norm();
            let worst_pairing = max_of((0..n).map(|y| {
                let mut delta = CVec::zeros(n);
                delta[y] = Complex64::new(1.0, 0.0);
                q.class_pairing(&xi, &ScalarField::new(delta)).unwrap().norm()
            }));
            let class_norm = q.v_phi.class_norm(&xi).unwrap();
            if worst_pairing <= TOL * scale {
                zero_cases += 1;
                if class_norm > RANK_TOLERANCE * t_phi * xi.values().norm() {
                    violations += 1;
                }
            } else if class_norm <= 1e-14 * t_phi * xi.values().norm() {
                // a nonzero pairing on the zero class would be just as wrong
                violations += 1;
            }
        }
        (drift, violations, zero_cases)
    });
    let drift = max_of(results.iter().map(|r| r.0));
    let violations: usize = results.iter().map(|r| r.1).sum();
    let zero_cases: usize = results.iter().map(|r| r.2).sum();
    verdict(
        drift <= TOL && violations == 0 && zero_cases > 0,
        format!(
            "100 reproducing pairs: kernel-shift drift {drift:.1e} (tol {TOL:e}), non-degeneracy violations {violations} \
             over {zero_cases} vanishing-pairing cases"
        ),
    )
}

fn functional_representation() -> Verdict {
    const TOL: f64 = 1e-11;
    let results = par::map_range(Execution::Parallel, 100, |i| {
        let mut rng = rng(6 << 40 | i as u64);
        let (psi, phi) = reproducing_pair(&mut rng);
        let (n, d) = (psi.len(), psi.dim());
        let q = DualQuotients::new(&psi, &phi, DEFAULT_GL_TOLERANCE).unwrap();
        let g = random_cvec(&mut rng, d);
        let f = q.represent_functional(&g).unwrap();
        // back from the class [η]_ψ to a vector, then to a functional again
        let g_back = q.representative(&f.eta).unwrap();
        let f_back = q.represent_functional(&g_back).unwrap();
        let t_phi = spectral_norm(q.v_phi.map().matrix());
        let mut round_trip = 0.0f64;
        for _ in 0..4 {
            let xi = ScalarField::new(random_cvec(&mut rng, n));
            let want = f.evaluate(&xi).unwrap();
            let scale = t_phi * xi.values().norm() * g.norm();
            for got in [f.evaluate_via_class(&xi).unwrap(), f_back.evaluate(&xi).unwrap(), f_back.evaluate_via_class(&xi).unwrap()] {
                round_trip = round_trip.max((got - want).norm() / scale);
            }
        }
        // distinct vectors give distinct classes unless their functionals agree
        let mut collisions = 0usize;
        for k in 0..4 {
            let size = [2e-6, 1e-4, 1e-2, 1.0][k];
            let delta = random_cvec(&mut rng, d);
            let g2 = &g + delta.scale(size / delta.norm());
            let f2 = q.represent_functional(&g2).unwrap();
            let evaluators_agree = (0..n).all(|x| {
                let mut e = CVec::zeros(n);
                e[x] = Complex64::new(1.0, 0.0);
                let e = ScalarField::new(e);
                (f.evaluate(&e).unwrap() - f2.evaluate(&e).unwrap()).norm() <= TOL * t_phi * g.norm()
            });
            if q.v_psi.same_class(&f.eta, &f2.eta).unwrap() && !evaluators_agree {
                collisions += 1;
            }
        }
        (round_trip, collisions)
    });
    let round_trip = max_of(results.iter().map(|r| r.0));
    let collisions: usize = results.iter().map(|r| r.1).sum();
    verdict(
        round_trip <= TOL && collisions == 0,
        format!("g → F → [η]_ψ → F on 100 pairs: worst {round_trip:.1e} (tol {TOL:e}); merged classes {collisions} of 400 (‖g − g′‖ ≥ 2e-6)"),
    )
}

fn descriptor_kinds(rng: &mut ChaCha8Rng, n: usize) -> Vec<SpaceDescriptor> {
    let lp = |p: f64| SpaceDescriptor::lp(p).unwrap();
    vec![
        lp(1.0),
        lp(1.5),
        lp(2.0),
        lp(4.0),
        lp(f64::INFINITY),
        SpaceDescriptor::weighted_l2((0..n).map(|_| rng.gen_range(0.5..3.0)).collect()).unwrap(),
        SpaceDescriptor::smallest(),
        SpaceDescriptor::largest(),
        SpaceDescriptor::projective(lp(2.0), lp(4.0)),
        SpaceDescriptor::projective_with(lp(1.0), lp(3.0), Combine::Max),
        SpaceDescriptor::projective_with(lp(f64::INFINITY), lp(1.0), Combine::Max),
        SpaceDescriptor::inductive(lp(1.0), lp(f64::INFINITY)),
        SpaceDescriptor::inductive(lp(1.5), lp(2.0)),
    ]
}

fn lp_lattice() -> Verdict {
    let start = Instant::now();
    let kinds = descriptor_kinds(&mut rng(7), 1).len();
    let gaps = par::map_range(Execution::Parallel, kinds * 200, |i| {
        let mut rng = rng(7 << 40 | i as u64);
        let n = rng.gen_range(1..=8);
        let space = common::random_space(&mut rng, n);
        let desc = descriptor_kinds(&mut rng, n).swap_remove(i % kinds);
        let v = ScalarField::new(random_cvec(&mut rng, n));
        let a = desc.dual_norm(&space, &v).unwrap();
        let b = desc.dual().norm(&space, &v).unwrap();
        (a - b).abs() / a.max(b)
    });
    let dual_gap = max_of(gaps);
    // inductive norms against the grid oracle
    let inductive = par::map_range(Execution::Parallel, 60, |i| {
        let mut rng = rng(8 << 40 | i as u64);
        let n = rng.gen_range(1..=3);
        let space = common::random_space(&mut rng, n);
        let mu = space.weights().to_vec();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
        let m: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
        let max = i % 2 == 1;
        let combine = if max { Combine::Max } else { Combine::Sum };
        let (a, b, want) = match (i / 2) % 3 {
            0 => (
                SpaceDescriptor::lp(1.0).unwrap(),
                SpaceDescriptor::lp(f64::INFINITY).unwrap(),
                common::brute_inductive(&v, |g| common::lp_norm(&mu, g, 1.0), |h| common::lp_norm(&mu, h, f64::INFINITY), max),
            ),
            1 => (
                SpaceDescriptor::lp(2.0).unwrap(),
                SpaceDescriptor::lp(4.0).unwrap(),
                common::brute_inductive(&v, |g| common::lp_norm(&mu, g, 2.0), |h| common::lp_norm(&mu, h, 4.0), max),
            ),
            _ => (
                SpaceDescriptor::weighted_l2(m.clone()).unwrap(),
                SpaceDescriptor::lp(1.0).unwrap(),
                common::brute_inductive(&v, |g| common::weighted_l2_norm(&mu, &m, g), |h| common::lp_norm(&mu, h, 1.0), max),
            ),
        };
        // random phases do not change a lattice norm
        let field = ScalarField::from_complex(v.iter().map(|&x| Complex64::from_polar(x, rng.gen_range(0.0..6.28))).collect());
        let got = SpaceDescriptor::inductive_with(a, b, combine).norm(&space, &field).unwrap();
        if want == 0.0 {
            got
        } else {
            (got - want).abs() / want
        }
    });
    let inductive_gap = max_of(inductive);
    let threshold = par::map_range(Execution::Parallel, 100, |i| {
        let mut rng = rng(9 << 40 | i as u64);
        let n = rng.gen_range(1..=8);
        let space = common::random_space(&mut rng, n);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
        let got = SpaceDescriptor::inductive(SpaceDescriptor::lp(1.0).unwrap(), SpaceDescriptor::lp(f64::INFINITY).unwrap())
            .norm(&space, &ScalarField::from_real(&v))
            .unwrap();
        let want = common::l1_linf_threshold(space.weights(), &v);
        if want == 0.0 {
            got
        } else {
            (got - want).abs() / want
        }
    });
    let threshold_gap = max_of(threshold);
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        dual_gap <= 0.02 && inductive_gap <= 0.01 && threshold_gap <= 0.005 && elapsed < 60.0,
        format!(
            "dual norm vs dual descriptor, {kinds} kinds × 200 vectors, N ≤ 8: worst {:.3}% (tol 2%); inductive vs grid oracle, N ≤ 3: \
             {:.3}% (tol 1%); L¹ + L^∞ threshold, 100 cases: {:.3}% (tol 0.5%); {elapsed:.1} s (limit 60 s)",
            100.0 * dual_gap,
            100.0 * inductive_gap,
            100.0 * threshold_gap
        ),
    )
}

fn lattice_axioms() -> Verdict {
    let mut rng = rng(10);
    let mut failures = Vec::new();
    let c = LpIndex::center();
    if !(c.involution().same(&c) && c.is_center()) {
        failures.push("center is not fixed");
    }
    // the only fixed point on a fine grid is the center
    for i in 0..=40 {
        for j in 0..=40 {
            let x = LpIndex::new(i as f64 / 40.0, j as f64 / 40.0).unwrap();
            if x.involution().same(&x) != (i == 20 && j == 20) {
                failures.push("stray fixed point");
            }
        }
    }
    let pt = |rng: &mut ChaCha8Rng| LpIndex::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)).unwrap();
    for _ in 0..500 {
        let (a, b, d) = (pt(&mut rng), pt(&mut rng), pt(&mut rng));
        if !a.meet(&b).involution().same(&a.involution().join(&b.involution()))
            || !a.join(&b).involution().same(&a.involution().meet(&b.involution()))
        {
            failures.push("De Morgan");
        }
        if !a.meet(&b).same(&b.meet(&a)) || !a.meet(&b.meet(&d)).same(&a.meet(&b).meet(&d)) || !a.meet(&a.join(&b)).same(&a) {
            failures.push("lattice law");
        }
        if a.leq(&b) != a.meet(&b).same(&a) || !a.involution().involution().same(&a) {
            failures.push("order or involution");
        }
        if a.leq(&b) != b.involution().leq(&a.involution()) {
            failures.push("involution does not reverse order");
        }
        let (k, l) = (ScaleIndex(rng.gen_range(-5..=5)), ScaleIndex(rng.gen_range(-5..=5)));
        if k.meet(&l).involution() != k.involution().join(&l.involution()) || k.leq(&l) != (k.meet(&l) == k) {
            failures.push("scale index");
        }
    }
    // the three chains are totally ordered, increasing in t, with the right endpoints
    type Chain = fn(f64) -> pipframe::Result<LpIndex>;
    let chains: [(&str, Chain, LpIndex, LpIndex); 3] = [
        ("diagonal", diagonal_chain_point, LpIndex::smallest(), LpIndex::largest()),
        ("horizontal", horizontal_chain_point, LpIndex::from_exponents(f64::INFINITY, 2.0).unwrap(), LpIndex::from_exponents(1.0, 2.0).unwrap()),
        ("vertical", vertical_chain_point, LpIndex::from_exponents(2.0, 1.0).unwrap(), LpIndex::from_exponents(2.0, f64::INFINITY).unwrap()),
    ];
    for (_, chain, lo, hi) in &chains {
        let mut ts: Vec<f64> = (0..30).map(|_| rng.gen_range(0.0..=1.0)).collect();
        ts.extend([0.0, 0.5, 1.0]);
        let points: Vec<LpIndex> = ts.iter().map(|&t| chain(t).unwrap()).collect();
        if !is_total_order(&points) {
            failures.push("chain not total");
        }
        for (s, a) in ts.iter().zip(&points) {
            for (t, b) in ts.iter().zip(&points) {
                if (s <= t) != a.leq(b) && s != t {
                    failures.push("chain order");
                }
            }
        }
        if !chain(0.0).unwrap().same(lo) || !chain(1.0).unwrap().same(hi) || !chain(0.5).unwrap().same(&LpIndex::center()) {
            failures.push("chain endpoints");
        }
    }
    let mixed = [horizontal_chain_point(0.2).unwrap(), vertical_chain_point(0.3).unwrap()];
    if is_total_order(&mixed) {
        failures.push("points off one chain compared");
    }
    // closure of diagonal subsets adds nothing, or only mirrors
    for _ in 0..50 {
        let k = rng.gen_range(1..=8);
        let seed: Vec<LpIndex> = (0..k).map(|_| diagonal_chain_point(rng.gen_range(0.0..=1.0)).unwrap()).collect();
        let closed = closure(&seed, false);
        if closed.len() != seed.len() || !closed.iter().all(|x| seed.iter().any(|y| y.same(x))) {
            failures.push("closure grew");
        }
        let mut mirrored = seed.clone();
        mirrored.extend(seed.iter().map(|x| x.involution()));
        let closed = closure(&seed, true);
        if !closed.iter().all(|x| mirrored.iter().any(|y| y.same(x))) || !closed.iter().all(|x| (x.inv_p() + x.inv_q() - 1.0).abs() <= 1e-12) {
            failures.push("closure with involution left the chain");
        }
    }
    let distinct: BTreeSet<&str> = failures.iter().copied().collect();
    verdict(
        failures.is_empty(),
        format!(
            "fixed point, De Morgan, lattice laws on 500 draws, three chains total and increasing, diagonal closure: {}",
            if failures.is_empty() { "no violations".to_owned() } else { format!("{} violations ({:?})", failures.len(), distinct) }
        ),
    )
}

/// `A = B diag(n)^s` on `{H_1, H_0, H_−1}`; maps `H_q → H_p` for `p ≤ q − s`.
fn scale_operator(rng: &mut ChaCha8Rng, fam: &Arc<IndexedSpaceFamily<ScaleIndex>>) -> (PipOperator<ScaleIndex>, i32) {
    let n = fam.dim();
    let s: i32 = rng.gen_range(-1..=1);
    let b = random_cmat(rng, n, n);
    let m = CMat::from_fn(n, n, |i, j| b[(i, j)] * ((j + 1) as f64).powi(s));
    let pairs = scale_pairs(fam, s);
    (PipOperator::from_parts(fam.clone(), &m, &pairs.into_iter().collect::<Vec<_>>()).unwrap(), s)
}

fn scale_pairs(fam: &IndexedSpaceFamily<ScaleIndex>, s: i32) -> BTreeSet<(usize, usize)> {
    let k = |i: usize| fam.indices()[i].0;
    (0..fam.len()).flat_map(|q| (0..fam.len()).map(move |p| (q, p))).filter(|&(q, p)| k(p) <= k(q) - s).collect()
}

fn operator_algebra() -> Verdict {
    let fam = Arc::new(HilbertScale::preset("diag-n", 5, 1).unwrap().family().unwrap());
    assert_eq!(fam.len(), 3);
    let k = |i: usize| fam.indices()[i].0;
    let tallies = par::map_range(Execution::Parallel, 200, |i| {
        let mut rng = rng(11 << 40 | i as u64);
        let (a, sa) = scale_operator(&mut rng, &fam);
        let (b, sb) = scale_operator(&mut rng, &fam);
        let mut bad = [0usize; 6];
        let ax = a.adjoint();
        bad[0] += usize::from(!ax.adjoint().same_as(&a) || ax.adjoint().matrix() != a.matrix());
        let mirrored: BTreeSet<(usize, usize)> = a.jset().iter().map(|&(q, p)| (fam.involution_of(p), fam.involution_of(q))).collect();
        bad[1] += usize::from(*ax.jset() != mirrored);
        match multiply(&ax, &a) {
            Ok(g) => bad[2] += usize::from(!g.is_symmetric()),
            Err(_) => bad[2] += 1,
        }
        // oracle: BA exists iff some middle r has k(r) ≤ 1 − s_A and k(r) ≥ s_B − 1
        let middles: Vec<usize> = (0..3).filter(|&r| k(r) <= 1 - sa && k(r) >= sb - 1).collect();
        match multiply(&b, &a) {
            Ok(ba) => {
                bad[3] += usize::from(middles.is_empty());
                let want: BTreeSet<(usize, usize)> = middles
                    .iter()
                    .flat_map(|&r| {
                        let into = scale_pairs(&fam, sa).into_iter().filter(move |&(_, p)| p == r);
                        let out: Vec<_> = scale_pairs(&fam, sb).into_iter().filter(|&(q, _)| q == r).collect();
                        into.flat_map(move |(q, _)| out.clone().into_iter().map(move |(_, p)| (q, p)))
                    })
                    .collect();
                bad[4] += usize::from(*ba.jset() != want);
                let mut union = BTreeSet::new();
                for &r in &middles {
                    let t = multiply_through(&b, &a, r).unwrap();
                    bad[5] += usize::from(t.balanced() != ba.balanced());
                    union.extend(t.jset().iter().copied());
                }
                bad[5] += usize::from(union != *ba.jset());
            }
            Err(_) => bad[3] += usize::from(!middles.is_empty()),
        }
        bad
    });
    let mut total = [0usize; 6];
    for t in &tallies {
        for (x, y) in total.iter_mut().zip(t) {
            *x += y;
        }
    }
    verdict(
        total.iter().all(|&x| x == 0),
        format!(
            "200 random operators on H_1 ⊂ H_0 ⊂ H_−1: A^×× ≠ A {}, jset mirror {}, A^×A not symmetric {}, defined-iff {}, \
             product jset {}, middle-index dependence {}",
            total[0], total[1], total[2], total[3], total[4], total[5]
        ),
    )
}

fn rkhs_example() -> Verdict {
    let sizes = [8usize, 32, 128];
    let mut law = 0.0f64;
    let mut identity = 0.0f64;
    let mut dims_ok = true;
    let cfg = ProbeConfig { random_probes: 64, refine_starts: 2, refine_steps: 60, seed: 5, exec: Execution::Parallel };
    let mut rng = rng(12);
    for &n in &sizes {
        let h = DiscreteRKHS::preset("identity", (1..=n).map(|x| x as f64).collect()).unwrap();
        for e in [1, 2] {
            let (psi, phi) = h.weight_pair(e).unwrap();
            let s = resolution_operator(&psi, &phi).unwrap();
            identity = identity.max(spectral_norm(&(s - CMat::identity(n, n))));
            for _ in 0..4 {
                let xi = ScalarField::new(random_cvec(&mut rng, n));
                let (via_family, _) = h.t_phi_values(e, &xi).unwrap();
                // m(x) = x + 1 on the points 1..N
                for x in 0..n {
                    let want = xi.values()[x] * ((x + 2) as f64).powi(e);
                    law = law.max((via_family[x] - want).norm() / want.norm());
                }
            }
        }
        if n <= 32 {
            let certs = h.range_certificates(1, &cfg).unwrap();
            let (psi, phi) = h.weight_pair(1).unwrap();
            let q = quotient_dimensions(&psi, &phi, Some(&certs.psi), Some(&certs.phi)).unwrap();
            dims_ok &= q.dim_v_phi == n && q.dim_v_psi == n && q.kernel_phi == 0 && q.kernel_psi == 0 && q.onto_v_phi && q.onto_v_psi;
        }
    }
    // exact up to rounding of m^n and 1/m^{-n}
    let law_tol = 4.0 * f64::EPSILON;
    verdict(
        law <= law_tol && identity <= 1e-12 && dims_ok,
        format!(
            "identity kernel, N ∈ {{8,32,128}}, n ∈ {{1,2}}: T_φ ξ = ξ m^n to {law:.1e} relative (tol {law_tol:.1e}), ‖S − I‖ {identity:.1e} \
             (tol 1e-12), quotient dimensions {}",
            if dims_ok { "N with trivial kernels" } else { "WRONG" }
        ),
    )
}

fn run_all(dir: &Path) -> (bool, f64, String) {
    let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).to_string();
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_pipframe"))
        .args(["run", "builtin:all", "--format", "json", "--jobs", &jobs, "--out"])
        .arg(dir)
        .output()
        .expect("pipframe runs");
    let elapsed = start.elapsed().as_secs_f64();
    (out.status.success(), elapsed, String::from_utf8_lossy(&out.stdout).into_owned())
}

fn cli_determinism() -> Verdict {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ok_a, ta, out_a) = run_all(a.path());
    let (ok_b, tb, _) = run_all(b.path());
    let mut names: Vec<String> = std::fs::read_dir(a.path())
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.ends_with(".json") && !n.ends_with(".timings.json"))
        .collect();
    names.sort();
    let differing: Vec<&String> =
        names.iter().filter(|n| std::fs::read(a.path().join(n)).ok() != std::fs::read(b.path().join(n)).ok()).collect();
    let slowest = ta.max(tb);
    let all_ran = names.len() >= 8;
    if !(ok_a && ok_b) {
        eprint!("{out_a}");
    }
    verdict(
        all_ran && differing.is_empty() && slowest < 180.0 && ok_a && ok_b,
        format!(
            "two runs of builtin:all: {} reports, {} differ; suite {} in {slowest:.1} s (limit 180 s)",
            names.len(),
            differing.len(),
            if ok_a && ok_b { "passed" } else { "FAILED" }
        ),
    )
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("AC1", keystone_identity),
        ("AC2", weighted_basis_example),
        ("AC3", canonical_dual_pairs),
        ("AC4", quotient_construction),
        ("AC5", pairing_well_defined),
        ("AC6", functional_representation),
        ("AC7", lp_lattice),
        ("AC8", lattice_axioms),
        ("AC9", operator_algebra),
        ("AC10", rkhs_example),
        ("AC11", cli_determinism),
    ];
    let mut failed = 0;
    for (id, check) in criteria {
        let v = check();
        println!("{id:<5} {} {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.passed);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
