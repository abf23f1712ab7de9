//! Executes a prepared scenario into a report.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Construction, Expect, Prepared, Scenario, Tolerances, Weights};
use super::report::{Check, Report, Timings, SCHEMA};
use crate::error::Result;
use crate::frames::{
    check_reproducing_pair, minmax_pair, range_containment, semiframe_sweep, weighted_pair, Classification, FrameBounds,
    PairReport, RangeCertificate, SweepEvidence, VectorFamily, WeightRule, WeightedGenerator,
};
use crate::lattice::{LatticeIndex, LpIndex, ScaleIndex};
use crate::linalg::{random_cmat, random_cvec, real, spectral_norm, CMat, CVec};
use crate::measure::{FiniteMeasureSpace, ScalarField};
use crate::operators::{multiply, multiply_through, IndexedSpaceFamily, PipOperator};
use crate::optim::ProbeConfig;
use crate::par::{self, Execution};
use crate::scales::{rkhs_sweep, DiscreteRKHS, HilbertScale};
use crate::spaces::{inductive_norm, Combine, SpaceDescriptor};
use crate::vspace::{quotient_dimensions_with, DualQuotients, QuotientDimensions};

/// Relative slack for inequalities that hold exactly in real arithmetic.
const INEQUALITY_SLACK: f64 = 1e-12;
/// Dual norms are computed by a first-order solver.
const DUAL_NORM_TOLERANCE: f64 = 0.02;
const THRESHOLD_TOLERANCE: f64 = 0.005;

pub struct Outcome {
    pub report: Report,
    pub timings: Timings,
}

struct Ctx {
    seed: u64,
    tol: Tolerances,
    exec: Execution,
    checks: Vec<Check>,
    steps: Vec<(String, f64)>,
}

impl Ctx {
    fn probe(&self) -> ProbeConfig {
        ProbeConfig { seed: self.seed, exec: self.exec, ..ProbeConfig::default() }
    }

    /// A generator for draw `stream`, independent of evaluation order.
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn timed<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.steps.push((name.to_owned(), start.elapsed().as_secs_f64()));
        out
    }

    fn check(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.checks.push(Check::new(name, residual, tolerance));
    }

    fn count(&mut self, name: impl Into<String>, failures: usize) {
        self.checks.push(Check::count(name, failures));
    }

    fn expect(&mut self, expect: &Option<Expect>, sweep: &SweepEvidence) {
        if let Some(e) = expect {
            let mismatch = |got: Classification, want: &str| usize::from(classification_name(got) != want);
            self.count(format!("sweep classifies ψ as {}", e.psi), mismatch(sweep.psi, &e.psi));
            self.count(format!("sweep classifies φ as {}", e.phi), mismatch(sweep.phi, &e.phi));
        }
    }
}

fn classification_name(c: Classification) -> String {
    serde_json::to_value(c).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

pub fn run(prepared: &Prepared, exec: Execution) -> Result<Outcome> {
    let sc = &prepared.scenario;
    let mut ctx = Ctx { seed: sc.seed, tol: sc.tolerances, exec, checks: Vec::new(), steps: Vec::new() };
    let start = Instant::now();
    let results = match &sc.construction {
        Construction::WeightedPair { weights, sizes, certify, expect } => {
            weighted(&mut ctx, weights, sizes, certify, expect)?
        }
        Construction::MinmaxPair { dim, sizes, trials, index } => minmax(&mut ctx, *dim, sizes, *trials, *index)?,
        Construction::RkhsWeightPair { kernel, exponent, sizes, expect } => {
            rkhs(&mut ctx, kernel, *exponent, sizes, expect)?
        }
        Construction::FamiliesFromFile { certify, .. } => {
            let (psi, phi) = prepared.families.as_ref().expect("resolved when prepared");
            from_file(&mut ctx, psi, phi, certify)?
        }
        Construction::LpDualityGrid { max_dim, samples, threshold_cases } => {
            lp_duality(&mut ctx, *max_dim, *samples, *threshold_cases)?
        }
        Construction::ScaleTriplet { preset, dim, max_k, samples } => scale_triplet(&mut ctx, preset, *dim, *max_k, *samples)?,
        Construction::OperatorAlgebraFuzz { operators, dim } => operator_fuzz(&mut ctx, *operators, *dim)?,
    };
    let timings = Timings {
        schema: SCHEMA,
        scenario: sc.name.clone(),
        steps: std::mem::take(&mut ctx.steps),
        total_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(Outcome { report: Report::new(sc.clone(), ctx.checks, results), timings })
}

/// Echo of the scenario with the effective seed.
pub fn with_seed(mut scenario: Scenario, seed: Option<u64>) -> Scenario {
    if let Some(s) = seed {
        scenario.seed = s;
    }
    scenario
}

#[derive(Serialize)]
struct PairSummary {
    norm: f64,
    sigma_min: f64,
    condition: f64,
    gl_tolerance: f64,
    invertible: bool,
    identity_residual: f64,
    adjoint_residual: f64,
    dual_residual: Option<f64>,
}

impl From<&PairReport> for PairSummary {
    fn from(r: &PairReport) -> Self {
        Self {
            norm: r.norm,
            sigma_min: r.sigma_min,
            condition: r.condition,
            gl_tolerance: r.gl_tolerance,
            invertible: r.invertible,
            identity_residual: r.identity_residual,
            adjoint_residual: r.adjoint_residual,
            dual_residual: r.dual_residual,
        }
    }
}

fn bounds_json(b: &FrameBounds) -> Value {
    json!({ "lower": b.lower, "upper": b.upper })
}

fn bounds_residual(b: &FrameBounds, lower: f64, upper: f64) -> f64 {
    ((b.lower - lower).abs() / lower.max(1.0)).max((b.upper - upper).abs() / upper.max(1.0))
}

fn min_max(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn certify_indices(certify: &[[f64; 2]]) -> Vec<LpIndex> {
    if certify.is_empty() {
        vec![LpIndex::center()]
    } else {
        certify.iter().map(|&[a, b]| LpIndex::new(a, b).expect("validated")).collect()
    }
}

/// Certificates of `C_ψ` into `V_p` and `C_φ` into `V_p̄` for each index, with
/// the Hölder step `|Ω(f, g)| ≤ ‖C_ψ f‖_p ‖C_φ g‖_p̄` checked on random draws.
fn certify_pair(
    ctx: &mut Ctx,
    label: &str,
    psi: &VectorFamily,
    phi: &VectorFamily,
    indices: &[LpIndex],
) -> Result<Vec<(RangeCertificate, RangeCertificate)>> {
    let cfg = ctx.probe();
    let mut out = Vec::new();
    let mut violations = 0;
    let mut rng = ctx.rng(0xce27);
    for ix in indices {
        let p = SpaceDescriptor::for_index(ix);
        let pbar = SpaceDescriptor::for_index(&ix.involution());
        let cp = range_containment(psi, &p, &cfg)?;
        let cf = range_containment(phi, &pbar, &cfg)?;
        let space = psi.space();
        for _ in 0..8 {
            let f = random_cvec(&mut rng, psi.dim());
            let g = random_cvec(&mut rng, psi.dim());
            let (a, b) = (psi.analysis(&f)?, phi.analysis(&g)?);
            let omega = space.pair(&a, &b)?.norm();
            let bound = p.norm(space, &a)? * pbar.norm(space, &b)?;
            if omega > bound * (1.0 + 1e-9) + 1e-12 {
                violations += 1;
            }
        }
        out.push((cp, cf));
    }
    ctx.count(format!("{label}: Hölder bound on the cross form"), violations);
    Ok(out)
}

fn certificates_json(indices: &[LpIndex], certs: &[(RangeCertificate, RangeCertificate)]) -> Value {
    Value::Array(
        indices
            .iter()
            .zip(certs)
            .map(|(ix, (cp, cf))| {
                json!({
                    "index": ix.to_string(),
                    "psi": cp,
                    "phi": cf,
                    "omega_bound": crate::frames::omega_bound(cp, cf),
                })
            })
            .collect(),
    )
}

fn quotient_check(ctx: &mut Ctx, label: &str, q: &QuotientDimensions, expected: Option<usize>) {
    let n = q.n;
    let rank_nullity = (q.dim_v_phi + q.kernel_phi).abs_diff(n) + (q.dim_v_psi + q.kernel_psi).abs_diff(n);
    ctx.count(format!("{label}: dim V + dim Ker T = N"), rank_nullity);
    if let Some(e) = expected {
        ctx.count(format!("{label}: dim V_φ = dim V_ψ = {e}"), q.dim_v_phi.abs_diff(e) + q.dim_v_psi.abs_diff(e));
    }
    ctx.count(format!("{label}: C_ψ and C_φ reach the quotients"), usize::from(!q.onto_v_phi) + usize::from(!q.onto_v_psi));
}

fn weighted(
    ctx: &mut Ctx,
    weights: &Weights,
    sizes: &[usize],
    certify: &[[f64; 2]],
    expect: &Option<Expect>,
) -> Result<Value> {
    let (rule, runs): (Option<WeightRule>, Vec<Vec<f64>>) = match weights {
        Weights::Rule(r) => {
            let rule = WeightRule::parse(r)?;
            (Some(rule), sizes.iter().map(|&n| (1..=n).map(|i| rule.weight(i)).collect()).collect())
        }
        Weights::Values(v) => (None, vec![v.clone()]),
    };
    let indices = certify_indices(certify);
    let tol = ctx.tol;
    let mut rows = Vec::new();
    for m in &runs {
        let n = m.len();
        let label = format!("N={n}");
        let row = ctx.timed(&label, |ctx| {
            let mc: Vec<Complex64> = m.iter().map(|&w| real(w)).collect();
            let (psi, phi) = weighted_pair(&mc, &VectorFamily::standard_basis(n)?)?;
            let report = check_reproducing_pair(&psi, &phi, tol.gl)?;
            ctx.check(format!("{label}: ‖S_(ψ,φ) − I‖"), report.identity_residual, tol.identity);
            let (bp, bf) = (psi.frame_bounds(), phi.frame_bounds());
            let (lo, hi) = min_max(m.iter().map(|w| w * w));
            ctx.check(format!("{label}: frame bounds of ψ against (min m², max m²)"), bounds_residual(&bp, lo, hi), tol.bounds);
            ctx.check(
                format!("{label}: frame bounds of φ against (1/max m², 1/min m²)"),
                bounds_residual(&bf, 1.0 / hi, 1.0 / lo),
                tol.bounds,
            );
            let certs = certify_pair(ctx, &label, &psi, &phi, &indices)?;
            let (cp, cf) = &certs[0];
            let q = quotient_dimensions_with(&psi, &phi, Some(cp), Some(cf), tol.gl, tol.rank)?;
            quotient_check(ctx, &label, &q, Some(n));
            Ok(json!({
                "n": n,
                "pair": PairSummary::from(&report),
                "psi_bounds": bounds_json(&bp),
                "phi_bounds": bounds_json(&bf),
                "certificates": certificates_json(&indices, &certs),
                "quotients": q,
            }))
        })?;
        rows.push(row);
    }
    let sweep = match rule {
        Some(rule) => {
            let seed = ctx.seed;
            let exec = ctx.exec;
            let ev = ctx.timed("sweep", |_| semiframe_sweep(&WeightedGenerator::new(rule), sizes, seed, exec))?;
            ctx.expect(expect, &ev);
            Some(ev)
        }
        None => None,
    };
    Ok(json!({
        "weights": rule.map(|r| r.label()),
        "runs": rows,
        "sweep": sweep.as_ref().map(sweep_json),
    }))
}

fn sweep_json(ev: &SweepEvidence) -> Value {
    json!({
        "generator": ev.generator,
        "psi": ev.psi,
        "phi": ev.phi,
        "psi_domain_fraction": ev.psi_domain_fraction,
        "phi_domain_fraction": ev.phi_domain_fraction,
        "probes": ev.probes,
        "rows": ev.rows.iter().map(|r| json!({
            "n": r.n,
            "psi": bounds_json(&r.psi),
            "phi": bounds_json(&r.phi),
            "identity_residual": r.identity_residual,
        })).collect::<Vec<_>>(),
    })
}

fn random_nonneg_family(rng: &mut ChaCha8Rng, space: &FiniteMeasureSpace, d: usize) -> Result<VectorFamily> {
    let n = space.len();
    let m = CMat::from_fn(d, n, |_, _| real(rng.gen_range(0.0..1.0)));
    VectorFamily::new(space.clone(), m)
}

fn minmax(ctx: &mut Ctx, dim: usize, sizes: &[usize], trials: usize, index: [f64; 2]) -> Result<Value> {
    let ix = LpIndex::new(index[0], index[1])?;
    let proj = SpaceDescriptor::for_index(&ix);
    let ind = SpaceDescriptor::for_index(&ix.involution());
    let tol = ctx.tol;
    let mut rows = Vec::new();
    for (s, &n) in sizes.iter().enumerate() {
        let label = format!("N={n}");
        let row = ctx.timed(&label, |ctx| {
            let mut rng = ctx.rng(s as u64);
            let space = FiniteMeasureSpace::counting(n)?;
            let t1 = random_nonneg_family(&mut rng, &space, dim)?;
            let t2 = random_nonneg_family(&mut rng, &space, dim)?;
            let (psi, phi) = minmax_pair(&t1, &t2)?;
            let sum_residual = ((psi.members() + phi.members()) - (t1.members() + t2.members()))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            ctx.check(format!("{label}: ψ + φ = θ¹ + θ² componentwise"), sum_residual, 0.0);
            let mut violations = 0;
            let mut worst = 0.0f64;
            for _ in 0..trials {
                let h = CVec::from_fn(dim, |_, _| real(rng.gen_range(0.0..1.0)));
                let lhs = proj.norm(&space, &psi.analysis(&h)?)?;
                let rhs = proj.norm(&space, &t1.analysis(&h)?)? + proj.norm(&space, &t2.analysis(&h)?)?;
                worst = worst.max(lhs / rhs);
                if lhs > rhs * (1.0 + INEQUALITY_SLACK) {
                    violations += 1;
                }
            }
            ctx.count(format!("{label}: ‖C_ψ h‖ ≤ ‖C_θ¹ h‖ + ‖C_θ² h‖ for nonnegative h"), violations);
            let cfg = ctx.probe();
            let cp = range_containment(&psi, &proj, &cfg)?;
            let cf = range_containment(&phi, &ind, &cfg)?;
            ctx.check(format!("{label}: finite certificate for C_ψ into {}", cp.target), finite_residual(cp.constant), 0.0);
            ctx.check(format!("{label}: finite certificate for C_φ into {}", cf.target), finite_residual(cf.constant), 0.0);
            let report = check_reproducing_pair(&psi, &phi, tol.gl)?;
            Ok(json!({
                "n": n,
                "worst_ratio": worst,
                "psi_certificate": cp,
                "phi_certificate": cf,
                "pair": PairSummary::from(&report),
            }))
        })?;
        rows.push(row);
    }
    Ok(json!({ "index": ix.to_string(), "dim": dim, "runs": rows }))
}

fn finite_residual(c: f64) -> f64 {
    if c.is_finite() {
        0.0
    } else {
        f64::INFINITY
    }
}

fn rkhs(ctx: &mut Ctx, kernel: &str, exponent: i32, sizes: &[usize], expect: &Option<Expect>) -> Result<Value> {
    let tol = ctx.tol;
    let mut rows = Vec::new();
    for (s, &n) in sizes.iter().enumerate() {
        let label = format!("N={n}");
        let row = ctx.timed(&label, |ctx| {
            let h = DiscreteRKHS::preset(kernel, (1..=n).map(|i| i as f64).collect())?;
            let (psi, phi) = h.weight_pair(exponent)?;
            let report = check_reproducing_pair(&psi, &phi, tol.gl)?;
            let s_k = h.kernel_family().frame_operator();
            let scale = spectral_norm(&s_k).max(1.0);
            let s_residual = spectral_norm(&(&report.matrix - &s_k)) / scale;
            ctx.check(format!("{label}: S_(ψ,φ) equals the frame operator of the kernels"), s_residual, tol.identity);
            let kernel_cond = {
                let sv = crate::linalg::singular_values(h.kernel());
                sv[0] / sv[sv.len() - 1]
            };
            let mut rng = ctx.rng(s as u64);
            let xi = ScalarField::new(random_cvec(&mut rng, n));
            let (via_family, closed) = h.t_phi_values(exponent, &xi)?;
            let law = (&via_family - &closed).norm() / closed.norm().max(1.0);
            ctx.check(format!("{label}: T_φ ξ = K μ (ξ m^n) on the sample points"), law, tol.duality * kernel_cond);
            if kernel.trim() == "identity" {
                ctx.check(format!("{label}: ‖S_(ψ,φ) − I‖"), report.identity_residual, tol.identity);
                let direct = CVec::from_iterator(
                    n,
                    xi.values().iter().zip(h.weights()).map(|(z, w)| z * w.powi(exponent)),
                );
                let exact = (&via_family - &direct).norm() / direct.norm().max(1.0);
                ctx.check(format!("{label}: T_φ ξ = ξ m^n"), exact, tol.identity);
            }
            let certs = h.range_certificates(exponent, &ctx.probe())?;
            let q = quotient_dimensions_with(&psi, &phi, Some(&certs.psi), Some(&certs.phi), tol.gl, tol.rank)?;
            quotient_check(ctx, &label, &q, Some(n));
            Ok(json!({
                "n": n,
                "kernel_condition": kernel_cond,
                "pair": PairSummary::from(&report),
                "multiplication_residual": law,
                "certificates": certs,
                "quotients": q,
            }))
        })?;
        rows.push(row);
    }
    let (seed, exec) = (ctx.seed, ctx.exec);
    let ev = ctx.timed("sweep", |_| rkhs_sweep(kernel, exponent, sizes, seed, exec))?;
    ctx.expect(expect, &ev);
    Ok(json!({ "kernel": kernel, "exponent": exponent, "runs": rows, "sweep": sweep_json(&ev) }))
}

fn from_file(ctx: &mut Ctx, psi: &VectorFamily, phi: &VectorFamily, certify: &[[f64; 2]]) -> Result<Value> {
    let tol = ctx.tol;
    let report = ctx.timed("pair", |_| check_reproducing_pair(psi, phi, tol.gl))?;
    // passes iff σ_min exceeds the relative threshold
    let ratio = if report.sigma_min > 0.0 { report.gl_tolerance / report.sigma_min } else { f64::INFINITY };
    ctx.check("S_(ψ,φ) is invertible (threshold / σ_min)", ratio, 1.0);
    let scale = 1.0 + report.norm;
    ctx.check("S_(ψ,φ)* = S_(φ,ψ)", report.adjoint_residual / scale, tol.identity);
    let mut out = json!({ "n": psi.len(), "d": psi.dim(), "pair": PairSummary::from(&report) });
    if !report.invertible {
        return Ok(out);
    }
    ctx.check(
        "canonical dual reproduces the identity",
        report.dual_residual.unwrap_or(f64::INFINITY),
        tol.duality * report.condition.max(1.0),
    );
    let indices = certify_indices(certify);
    let certs = ctx.timed("certificates", |ctx| certify_pair(ctx, "file", psi, phi, &indices))?;
    let (cp, cf) = &certs[0];
    let q = quotient_dimensions_with(psi, phi, Some(cp), Some(cf), tol.gl, tol.rank)?;
    quotient_check(ctx, "file", &q, None);
    let dq = DualQuotients::with_tolerances(psi, phi, tol.gl, tol.rank)?;
    let mut rng = ctx.rng(7);
    let n = psi.len();
    let mut shift_residual = 0.0f64;
    let mut kernel_norm = 0.0f64;
    for _ in 0..16 {
        let xi = ScalarField::new(random_cvec(&mut rng, n));
        let eta = ScalarField::new(random_cvec(&mut rng, n));
        let base = dq.class_pairing(&xi, &eta)?;
        let c1: Vec<Complex64> = (0..dq.v_phi.kernel_dim()).map(|_| random_cvec(&mut rng, 1)[0]).collect();
        let c2: Vec<Complex64> = (0..dq.v_psi.kernel_dim()).map(|_| random_cvec(&mut rng, 1)[0]).collect();
        let shifted = dq.class_pairing(&dq.v_phi.shift(&xi, &c1)?, &dq.v_psi.shift(&eta, &c2)?)?;
        let scale = xi.values().norm() * eta.values().norm() * report.norm.max(1.0);
        shift_residual = shift_residual.max((shifted - base).norm() / scale);
    }
    for j in 0..dq.v_phi.kernel_dim() {
        let k = ScalarField::new(dq.v_phi.kernel_basis().column(j).into_owned());
        kernel_norm = kernel_norm.max(dq.v_phi.class_norm(&k)?);
    }
    ctx.check("pairing is invariant under kernel shifts", shift_residual, tol.duality);
    let phi_scale = spectral_norm(&phi.synthesis_matrix()).max(1.0);
    ctx.check("class norm vanishes on Ker T_φ", kernel_norm / phi_scale, tol.rank);
    out["certificates"] = certificates_json(&indices, &certs);
    out["quotients"] = serde_json::to_value(&q).expect("serialisable");
    out["kernel_shift_residual"] = json!(shift_residual);
    Ok(out)
}

fn l1_linf_threshold(mu: &[f64], v: &[f64]) -> f64 {
    let mut ts: Vec<f64> = v.to_vec();
    ts.push(0.0);
    ts.iter()
        .map(|&t| v.iter().zip(mu).map(|(x, w)| (x - t).max(0.0) * w).sum::<f64>() + t)
        .fold(f64::INFINITY, f64::min)
}

fn descriptor_kinds(n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<SpaceDescriptor>> {
    let lp = |p: f64| SpaceDescriptor::lp(p);
    Ok(vec![
        lp(1.0)?,
        lp(1.5)?,
        lp(2.0)?,
        lp(4.0)?,
        lp(f64::INFINITY)?,
        SpaceDescriptor::weighted_l2((0..n).map(|_| rng.gen_range(0.5..3.0)).collect())?,
        SpaceDescriptor::smallest(),
        SpaceDescriptor::largest(),
        SpaceDescriptor::projective(lp(2.0)?, lp(4.0)?),
        SpaceDescriptor::projective_with(lp(1.0)?, lp(3.0)?, Combine::Max),
        SpaceDescriptor::inductive(lp(1.0)?, lp(f64::INFINITY)?),
        SpaceDescriptor::inductive(lp(1.5)?, lp(2.0)?),
    ])
}

fn lp_duality(ctx: &mut Ctx, max_dim: usize, samples: usize, threshold_cases: usize) -> Result<Value> {
    let this = &*ctx;
    let draws = this.timed_free(|| {
        par::map_range(this.exec, samples, |i| -> Result<(String, f64)> {
            let mut rng = this.rng(i as u64);
            let n = rng.gen_range(1..=max_dim);
            let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
            let space = FiniteMeasureSpace::from_weights(mu)?;
            let kinds = descriptor_kinds(n, &mut rng)?;
            let desc = &kinds[i % kinds.len()];
            let v = ScalarField::new(random_cvec(&mut rng, n));
            let a = desc.dual_norm(&space, &v)?;
            let b = desc.dual().norm(&space, &v)?;
            Ok((desc.label(), (a - b).abs() / a.max(b).max(f64::MIN_POSITIVE)))
        })
    });
    let (draws, t1) = draws;
    let threshold = this.timed_free(|| {
        par::map_range(this.exec, threshold_cases, |i| -> Result<f64> {
            let mut rng = this.rng(1 << 32 | i as u64);
            let n = rng.gen_range(1..=max_dim.min(3));
            let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
            let space = FiniteMeasureSpace::from_weights(mu.clone())?;
            let got = inductive_norm(
                &space,
                &SpaceDescriptor::lp(1.0)?,
                &SpaceDescriptor::lp(f64::INFINITY)?,
                &ScalarField::from_real(&v),
            )?;
            let want = l1_linf_threshold(&mu, &v);
            Ok(if want == 0.0 { got } else { (got - want).abs() / want })
        })
    });
    let (threshold, t2) = threshold;
    ctx.steps.push(("dual norms".into(), t1));
    ctx.steps.push(("threshold".into(), t2));
    let mut per_kind: std::collections::BTreeMap<String, f64> = Default::default();
    for d in draws {
        let (label, r) = d?;
        let e = per_kind.entry(label).or_insert(0.0);
        *e = e.max(r);
    }
    for (label, r) in &per_kind {
        ctx.check(format!("dual norm of {label} equals the norm of its dual"), *r, DUAL_NORM_TOLERANCE);
    }
    let worst_threshold = threshold.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    ctx.check("L¹ + L^∞ norm matches the threshold formula", worst_threshold, THRESHOLD_TOLERANCE);
    Ok(json!({
        "max_dim": max_dim,
        "samples": samples,
        "threshold_cases": threshold_cases,
        "worst_relative_gap": per_kind,
        "worst_threshold_gap": worst_threshold,
    }))
}

impl Ctx {
    fn timed_free<T>(&self, f: impl FnOnce() -> T) -> (T, f64) {
        let start = Instant::now();
        let out = f();
        (out, start.elapsed().as_secs_f64())
    }
}

fn scale_triplet(ctx: &mut Ctx, preset: &str, dim: usize, max_k: i32, samples: usize) -> Result<Value> {
    let scale = HilbertScale::preset(preset, dim, max_k)?;
    let space = scale.space();
    let mut mirror = 0.0f64;
    for k in -max_k..=max_k {
        let d = scale.scale_space(k)?.dual();
        let m = scale.scale_space(-k)?;
        let (Some(a), Some(b)) = (d.hilbert_weights(dim), m.hilbert_weights(dim)) else { unreachable!("weighted") };
        mirror = mirror.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs())).fold(0.0, f64::max));
    }
    ctx.check("dual of H_k is H_−k", mirror, INEQUALITY_SLACK);
    let mut rng = ctx.rng(0);
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for k in 1..=max_k {
        let t = scale.triplet(k)?;
        let mut local = 0.0f64;
        for _ in 0..samples {
            let v = ScalarField::new(random_cvec(&mut rng, dim));
            let n = t.norms(&space, &v)?;
            local = local.max(n.large / n.center - 1.0).max(n.center / n.small - 1.0);
        }
        worst = worst.max(local);
        rows.push(json!({ "k": k, "worst_excess": local.max(0.0) }));
    }
    ctx.check("‖v‖_−k ≤ ‖v‖_0 ≤ ‖v‖_k", worst.max(0.0), INEQUALITY_SLACK);
    ctx.count("triplet rejects k < 1", usize::from(scale.triplet(0).is_ok()));
    let family = scale.family()?;
    let broken = (0..family.len())
        .filter(|&i| !family.descriptor(i).dual().approx_eq(family.descriptor(family.involution_of(i)), 1e-12))
        .count();
    ctx.count("family is closed under the involution", broken);
    // identity: H_q → H_p is bounded exactly when H_q ⊂ H_p
    let small = HilbertScale::preset(preset, dim, 1)?;
    let sizes = [dim.max(2), 4 * dim.max(2), 16 * dim.max(2)];
    let cfg = ctx.probe();
    let p = preset.to_owned();
    let (op, _) = ctx.timed("identity jset", |_| {
        PipOperator::swept(
            dim,
            |n| HilbertScale::preset(&p, n, 1)?.family(),
            |n| CMat::identity(n, n),
            &sizes,
            &cfg,
        )
    })?;
    let f = small.family()?;
    let want: BTreeSet<(usize, usize)> = (0..f.len())
        .flat_map(|q| (0..f.len()).map(move |p| (q, p)))
        .filter(|&(q, p)| f.leq(q, p))
        .collect();
    ctx.count("identity is bounded from H_q to H_p iff H_q ⊂ H_p", op.jset().symmetric_difference(&want).count());
    Ok(json!({
        "preset": preset,
        "generator_range": min_max(scale.generator().iter().copied()),
        "dim": dim,
        "max_k": max_k,
        "triplets": rows,
        "identity_jset": op.jset_labels(),
    }))
}

fn random_operator(rng: &mut ChaCha8Rng, fam: &Arc<IndexedSpaceFamily<ScaleIndex>>) -> Result<PipOperator<ScaleIndex>> {
    let n = fam.dim();
    let shift: i32 = rng.gen_range(-1..=1);
    let b = random_cmat(rng, n, n);
    let m = CMat::from_fn(n, n, |i, j| b[(i, j)] * ((i + 1) as f64).powi(shift));
    let k = fam.len();
    // multiplying by n^shift lowers the scale index by shift
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|q| (0..k).map(move |p| (q, p)))
        .filter(|&(q, p)| fam.indices()[p].0 <= fam.indices()[q].0 - shift)
        .collect();
    PipOperator::from_parts(fam.clone(), &m, &pairs)
}

#[derive(Default)]
struct FuzzTally {
    adjoint_involution: usize,
    adjoint_jset: usize,
    gram_symmetric: usize,
    defined_iff: usize,
    middle_index: usize,
    associativity: f64,
}

fn operator_fuzz(ctx: &mut Ctx, operators: usize, dim: usize) -> Result<Value> {
    let fam = Arc::new(HilbertScale::preset("diag-n", dim, 1)?.family()?);
    let this = &*ctx;
    let (tallies, t) = this.timed_free(|| {
        par::map_range(this.exec, operators, |i| -> Result<FuzzTally> {
            let mut rng = this.rng(i as u64);
            let a = random_operator(&mut rng, &fam)?;
            let b = random_operator(&mut rng, &fam)?;
            let c = random_operator(&mut rng, &fam)?;
            let mut tally = FuzzTally::default();
            let ax = a.adjoint();
            tally.adjoint_involution = usize::from(!ax.adjoint().same_as(&a));
            let mirrored: BTreeSet<(usize, usize)> =
                a.jset().iter().map(|&(q, p)| (fam.involution_of(p), fam.involution_of(q))).collect();
            tally.adjoint_jset = usize::from(*ax.jset() != mirrored);
            if let Ok(gram) = multiply(&ax, &a) {
                tally.gram_symmetric = usize::from(!gram.is_symmetric());
            }
            let middle: Vec<usize> = a.iset().intersection(&b.dset()).copied().collect();
            match multiply(&b, &a) {
                Ok(ba) => {
                    tally.defined_iff += usize::from(middle.is_empty());
                    for &r in &middle {
                        let through = multiply_through(&b, &a, r)?;
                        if through.balanced() != ba.balanced() || !through.jset().is_subset(ba.jset()) {
                            tally.middle_index += 1;
                        }
                    }
                    if let (Ok(cb), Ok(left)) = (multiply(&c, &b), multiply(&c, &ba)) {
                        if let Ok(right) = multiply(&cb, &a) {
                            let scale = 1.0 + left.matrix().norm();
                            tally.associativity = (left.matrix() - right.matrix()).norm() / scale;
                        }
                    }
                }
                Err(_) => tally.defined_iff += usize::from(!middle.is_empty()),
            }
            Ok(tally)
        })
    });
    ctx.steps.push(("operators".into(), t));
    let mut total = FuzzTally::default();
    for r in tallies {
        let r = r?;
        total.adjoint_involution += r.adjoint_involution;
        total.adjoint_jset += r.adjoint_jset;
        total.gram_symmetric += r.gram_symmetric;
        total.defined_iff += r.defined_iff;
        total.middle_index += r.middle_index;
        total.associativity = total.associativity.max(r.associativity);
    }
    ctx.count("A^×× = A exactly", total.adjoint_involution);
    ctx.count("j(A^×) = {(p̄, q̄) : (q, p) ∈ j(A)}", total.adjoint_jset);
    ctx.count("A^× A is symmetric when defined", total.gram_symmetric);
    ctx.count("BA is defined iff i(A) ∩ d(B) is nonempty", total.defined_iff);
    ctx.count("BA does not depend on the middle index", total.middle_index);
    ctx.check("(CB)A = C(BA) when both are defined", total.associativity, INEQUALITY_SLACK);
    Ok(json!({
        "family": fam.name(),
        "indices": (0..fam.len()).map(|i| fam.label(i)).collect::<Vec<_>>(),
        "operators": operators,
        "dim": dim,
    }))
}
