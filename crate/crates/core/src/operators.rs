//! Operators on a lattice of spaces that share one coordinate system.
//!
//! Every space of an [`IndexedSpaceFamily`] is `ℂ^N` with its own norm, so the
//! embeddings between them are identities and an operator is one matrix
//! together with the set `j(A)` of pairs `(q, p)` for which it maps `V_q`
//! continuously into `V_p`.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeIndex;
use crate::linalg::{spectral_norm, CMat, CVec};
use crate::measure::FiniteMeasureSpace;
use crate::optim::{maximize_ratio, ProbeConfig};
use crate::par;
use crate::spaces::{Budget, SpaceDescriptor};
use crate::sweep::stays_bounded;

/// Tolerance for comparing `realize(r̄)` with the dual of `realize(r)`.
const DUALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedSpaceFamily<I: LatticeIndex> {
    name: String,
    space: FiniteMeasureSpace,
    indices: Vec<I>,
    descriptors: Vec<SpaceDescriptor>,
    involution: Vec<usize>,
}

impl<I: LatticeIndex> IndexedSpaceFamily<I> {
    pub fn new<F>(name: &str, space: FiniteMeasureSpace, indices: Vec<I>, realize: F) -> Result<Self>
    where
        F: Fn(&I) -> Result<SpaceDescriptor>,
    {
        if indices.is_empty() {
            return Err(Error::Precondition("a family needs at least one index".into()));
        }
        if !indices.iter().any(|i| i.is_center()) {
            return Err(Error::Precondition(format!("family {name} has no self-dual center")));
        }
        let mut involution = Vec::with_capacity(indices.len());
        for ix in &indices {
            let bar = ix.involution();
            let j = indices
                .iter()
                .position(|y| y.same(&bar))
                .ok_or_else(|| Error::Precondition(format!("family {name} is not closed under involution: {bar} missing")))?;
            involution.push(j);
        }
        let descriptors = indices.iter().map(&realize).collect::<Result<Vec<_>>>()?;
        for d in &descriptors {
            d.validate(&space)?;
        }
        for (i, d) in descriptors.iter().enumerate() {
            let bar = &descriptors[involution[i]];
            if !d.dual().approx_eq(bar, DUALITY_TOLERANCE) {
                return Err(Error::Precondition(format!(
                    "the dual of {} is not realised by {}",
                    indices[i],
                    indices[involution[i]]
                )));
            }
        }
        Ok(Self { name: name.to_owned(), space, indices, descriptors, involution })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn indices(&self) -> &[I] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Shared coordinate dimension `N`.
    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn descriptor(&self, i: usize) -> &SpaceDescriptor {
        &self.descriptors[i]
    }

    pub fn involution_of(&self, i: usize) -> usize {
        self.involution[i]
    }

    pub fn position(&self, ix: &I) -> Option<usize> {
        self.indices.iter().position(|y| y.same(ix))
    }

    pub fn center(&self) -> usize {
        self.indices.iter().position(|i| i.is_center()).expect("validated")
    }

    /// `V_i ⊂ V_j`.
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.indices[i].leq(&self.indices[j])
    }

    pub fn label(&self, i: usize) -> String {
        self.indices[i].to_string()
    }

    fn position_by_label(&self, label: &str) -> Result<usize> {
        (0..self.len())
            .find(|&i| self.label(i) == label)
            .ok_or_else(|| Error::Domain(format!("index {label:?} not in family {}", self.name)))
    }
}

/// `sup_{‖v‖_from = 1} ‖A v‖_to`.
///
/// Exact (a spectral norm) when both norms are Hilbertian, otherwise a lower
/// bound attained by a probe vector.
pub fn operator_norm(
    space: &FiniteMeasureSpace,
    matrix: &CMat,
    from: &SpaceDescriptor,
    to: &SpaceDescriptor,
    cfg: &ProbeConfig,
) -> Result<f64> {
    let n = space.len();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::Dimension { expected: n, found: matrix.nrows().max(matrix.ncols()) });
    }
    let mu = space.weights();
    if let (Some(wf), Some(wt)) = (from.hilbert_weights(n), to.hilbert_weights(n)) {
        // ‖A v‖_to / ‖v‖_from = ‖M u‖₂ / ‖u‖₂ with u = W_from D^{1/2} v
        let m = CMat::from_fn(n, n, |i, j| matrix[(i, j)] * (wt[i] * mu[i].sqrt() / (wf[j] * mu[j].sqrt())));
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm() == 0.0));
        return Ok(if diagonal { (0..n).map(|i| m[(i, i)].norm()).fold(0.0, f64::max) } else { spectral_norm(&m) });
    }
    let budget = Budget { phase_iterations: 150, final_step: 1e-7, stall_tolerance: 1e-4 };
    let eval = |d: &SpaceDescriptor, v: &CVec| match d.norm_vec(mu, v, &budget) {
        Err(Error::NotConverged { best, .. }) => Ok(best),
        other => other,
    };
    let est = maximize_ratio(n, Vec::new(), |v| Ok(eval(to, &(matrix * v))? / eval(from, v)?), cfg)?;
    Ok(est.value)
}

/// Norm trajectories of every pair `(q, p)` along a truncation sweep.
#[derive(Debug, Clone, Serialize)]
pub struct JsetEvidence {
    pub sizes: Vec<usize>,
    /// `(q, p)` labels with the norm of `A: V_q → V_p` at each size.
    pub trajectories: Vec<PairTrajectory>,
    pub rule: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairTrajectory {
    pub from: String,
    pub to: String,
    pub norms: Vec<f64>,
    pub admitted: bool,
}

/// A pip-space operator: one matrix, stored in μ-balanced coordinates
/// `D^{1/2} A D^{-1/2}` so that the adjoint is a plain conjugate transpose.
#[derive(Debug, Clone)]
pub struct PipOperator<I: LatticeIndex> {
    family: Arc<IndexedSpaceFamily<I>>,
    sym: CMat,
    jset: BTreeSet<(usize, usize)>,
}

fn balance(space: &FiniteMeasureSpace, a: &CMat, forward: bool) -> CMat {
    let mu = space.weights();
    let s = |i: usize| if forward { mu[i].sqrt() } else { 1.0 / mu[i].sqrt() };
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (s(i) / s(j)))
}

impl<I: LatticeIndex> PipOperator<I> {
    /// `pairs` are `(q, p)` positions; the set is closed under the order.
    pub fn from_parts(family: Arc<IndexedSpaceFamily<I>>, matrix: &CMat, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = family.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        if let Some(&(q, p)) = pairs.iter().find(|(q, p)| *q >= family.len() || *p >= family.len()) {
            return Err(Error::Domain(format!("pair ({q}, {p}) outside the family")));
        }
        let sym = balance(family.space(), matrix, true);
        let jset = close_pairs(&family, pairs.iter().copied());
        Ok(Self { family, sym, jset })
    }

    /// Every pair: in a fixed finite dimension every linear map is bounded.
    pub fn bounded(family: Arc<IndexedSpaceFamily<I>>, matrix: &CMat) -> Result<Self> {
        let k = family.len();
        let pairs: Vec<_> = (0..k).flat_map(|q| (0..k).map(move |p| (q, p))).collect();
        Self::from_parts(family, matrix, &pairs)
    }

    /// Builds the operator at size `n` and admits `(q, p)` when the norm of
    /// `A: V_q → V_p` stays bounded along `sizes`.
    pub fn swept<F, G>(n: usize, family_at: F, matrix_at: G, sizes: &[usize], cfg: &ProbeConfig) -> Result<(Self, JsetEvidence)>
    where
        F: Fn(usize) -> Result<IndexedSpaceFamily<I>>,
        G: Fn(usize) -> CMat,
    {
        let family = Arc::new(family_at(n)?);
        let evidence = sweep_jset(&family_at, &matrix_at, sizes, cfg)?;
        let pairs: Vec<(usize, usize)> = evidence
            .trajectories
            .iter()
            .filter(|t| t.admitted)
            .map(|t| Ok((family.position_by_label(&t.from)?, family.position_by_label(&t.to)?)))
            .collect::<Result<_>>()?;
        let op = Self::from_parts(family, &matrix_at(n), &pairs)?;
        Ok((op, evidence))
    }

    pub fn family(&self) -> &Arc<IndexedSpaceFamily<I>> {
        &self.family
    }

    /// The matrix in the shared coordinates.
    pub fn matrix(&self) -> CMat {
        balance(self.family.space(), &self.sym, false)
    }

    pub fn balanced(&self) -> &CMat {
        &self.sym
    }

    pub fn jset(&self) -> &BTreeSet<(usize, usize)> {
        &self.jset
    }

    pub fn jset_labels(&self) -> Vec<(String, String)> {
        self.jset.iter().map(|&(q, p)| (self.family.label(q), self.family.label(p))).collect()
    }

    /// Initial indices `d(A)`.
    pub fn dset(&self) -> BTreeSet<usize> {
        self.jset.iter().map(|&(q, _)| q).collect()
    }

    /// Final indices `i(A)`.
    pub fn iset(&self) -> BTreeSet<usize> {
        self.jset.iter().map(|&(_, p)| p).collect()
    }

    /// `A^×`, adjoint for the μ-weighted pairing, with `j(A^×) = {(p̄, q̄)}`.
    pub fn adjoint(&self) -> Self {
        let f = &self.family;
        let jset = self.jset.iter().map(|&(q, p)| (f.involution_of(p), f.involution_of(q))).collect();
        Self { family: f.clone(), sym: self.sym.adjoint(), jset }
    }

    pub fn is_symmetric(&self) -> bool {
        let scale = 1.0 + spectral_norm(&self.sym);
        spectral_norm(&(&self.sym - self.sym.adjoint())) <= 1e-12 * scale && self.adjoint().jset == self.jset
    }

    /// Exact equality of matrices and pair sets.
    pub fn same_as(&self, other: &Self) -> bool {
        *self.family == *other.family && self.sym == other.sym && self.jset == other.jset
    }

    pub fn to_record(&self) -> OperatorRecord {
        let m = self.matrix();
        OperatorRecord {
            matrix_re: m.row_iter().map(|r| r.iter().map(|z| z.re).collect()).collect(),
            matrix_im: m.row_iter().map(|r| r.iter().map(|z| z.im).collect()).collect(),
            family: self.family.name().to_owned(),
            jset: self.jset_labels().into_iter().map(|(q, p)| [q, p]).collect(),
        }
    }

    pub fn from_record(family: Arc<IndexedSpaceFamily<I>>, record: &OperatorRecord) -> Result<Self> {
        if record.family != family.name() {
            return Err(Error::Domain(format!("operator belongs to family {:?}, not {:?}", record.family, family.name())));
        }
        let n = family.dim();
        let rows_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !rows_ok(&record.matrix_re) || !rows_ok(&record.matrix_im) {
            return Err(Error::Dimension { expected: n, found: record.matrix_re.len() });
        }
        let matrix = CMat::from_fn(n, n, |i, j| num_complex::Complex64::new(record.matrix_re[i][j], record.matrix_im[i][j]));
        let pairs = record
            .jset
            .iter()
            .map(|[q, p]| Ok((family.position_by_label(q)?, family.position_by_label(p)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(family, &matrix, &pairs)
    }
}

fn same_family<I: LatticeIndex>(a: &PipOperator<I>, b: &PipOperator<I>) -> Result<()> {
    if Arc::ptr_eq(&a.family, &b.family) || *a.family == *b.family {
        Ok(())
    } else {
        Err(Error::Precondition("operators live on different families".into()))
    }
}

/// `BA`, defined iff some `r` lies in `i(A) ∩ d(B)`.
pub fn multiply<I: LatticeIndex>(b: &PipOperator<I>, a: &PipOperator<I>) -> Result<PipOperator<I>> {
    same_family(a, b)?;
    let middle: Vec<usize> = a.iset().intersection(&b.dset()).copied().collect();
    if middle.is_empty() {
        let f = &a.family;
        return Err(Error::UndefinedProduct {
            iset: a.iset().into_iter().map(|i| f.label(i)).collect(),
            dset: b.dset().into_iter().map(|i| f.label(i)).collect(),
        });
    }
    let pairs: Vec<(usize, usize)> = middle.iter().flat_map(|&r| pairs_through(a, b, r)).collect();
    Ok(PipOperator { family: a.family.clone(), sym: &b.sym * &a.sym, jset: close_pairs(&a.family, pairs.into_iter()) })
}

/// `BA` factored through one `r ∈ i(A) ∩ d(B)`: `(BA)_{pq} = B_{pr} A_{rq}`.
pub fn multiply_through<I: LatticeIndex>(b: &PipOperator<I>, a: &PipOperator<I>, r: usize) -> Result<PipOperator<I>> {
    same_family(a, b)?;
    if !a.iset().contains(&r) || !b.dset().contains(&r) {
        return Err(Error::Precondition(format!("{} is not in i(A) ∩ d(B)", a.family.label(r))));
    }
    let pairs = pairs_through(a, b, r);
    Ok(PipOperator { family: a.family.clone(), sym: &b.sym * &a.sym, jset: close_pairs(&a.family, pairs.into_iter()) })
}

fn pairs_through<I: LatticeIndex>(a: &PipOperator<I>, b: &PipOperator<I>, r: usize) -> Vec<(usize, usize)> {
    let into: Vec<usize> = a.jset.iter().filter(|&&(_, p)| p == r).map(|&(q, _)| q).collect();
    let out: Vec<usize> = b.jset.iter().filter(|&&(q, _)| q == r).map(|&(_, p)| p).collect();
    into.iter().flat_map(|&q| out.iter().map(move |&p| (q, p))).collect()
}

/// Adds `(q', p')` for every `q' ≤ q` and `p ≤ p'`.
fn close_pairs<I: LatticeIndex>(f: &IndexedSpaceFamily<I>, pairs: impl Iterator<Item = (usize, usize)>) -> BTreeSet<(usize, usize)> {
    let k = f.len();
    let mut out = BTreeSet::new();
    for (q, p) in pairs {
        for q2 in (0..k).filter(|&q2| f.leq(q2, q)) {
            for p2 in (0..k).filter(|&p2| f.leq(p, p2)) {
                out.insert((q2, p2));
            }
        }
    }
    out
}

/// Operator norms of every pair at every size; a pair is admitted when its
/// trajectory stays within the growth factor of its first value.
pub fn sweep_jset<I, F, G>(family_at: &F, matrix_at: &G, sizes: &[usize], cfg: &ProbeConfig) -> Result<JsetEvidence>
where
    I: LatticeIndex,
    F: Fn(usize) -> Result<IndexedSpaceFamily<I>>,
    G: Fn(usize) -> CMat,
{
    if sizes.is_empty() {
        return Err(Error::Precondition("empty sweep".into()));
    }
    let families = sizes.iter().map(|&n| family_at(n)).collect::<Result<Vec<_>>>()?;
    let matrices: Vec<CMat> = sizes.iter().map(|&n| matrix_at(n)).collect();
    let labels: Vec<String> = (0..families[0].len()).map(|i| families[0].label(i)).collect();
    for f in &families[1..] {
        if (0..f.len()).map(|i| f.label(i)).collect::<Vec<_>>() != labels {
            return Err(Error::Precondition("index set changes along the sweep".into()));
        }
    }
    let k = labels.len();
    let tasks: Vec<(usize, usize, usize)> =
        (0..sizes.len()).flat_map(|s| (0..k).flat_map(move |q| (0..k).map(move |p| (s, q, p)))).collect();
    // probing inside each task stays sequential; the fan-out is over tasks
    let inner = ProbeConfig { exec: par::Execution::Sequential, ..*cfg };
    let norms = par::map(cfg.exec, &tasks, |&(s, q, p)| {
        let f = &families[s];
        operator_norm(f.space(), &matrices[s], f.descriptor(q), f.descriptor(p), &inner)
    });
    let mut trajectories: Vec<PairTrajectory> = (0..k)
        .flat_map(|q| (0..k).map(move |p| (q, p)))
        .map(|(q, p)| PairTrajectory { from: labels[q].clone(), to: labels[p].clone(), norms: Vec::new(), admitted: false })
        .collect();
    for (&(_, q, p), norm) in tasks.iter().zip(norms) {
        trajectories[q * k + p].norms.push(norm?);
    }
    for t in &mut trajectories {
        t.admitted = stays_bounded(&t.norms);
    }
    Ok(JsetEvidence {
        sizes: sizes.to_vec(),
        trajectories,
        rule: format!("admitted when the last norm is within a factor {} of the first", crate::sweep::GROWTH_FACTOR),
    })
}

/// Wire form: `{"matrix_re", "matrix_im", "family", "jset": [[q, p], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRecord {
    pub matrix_re: Vec<Vec<f64>>,
    pub matrix_im: Vec<Vec<f64>>,
    pub family: String,
    pub jset: Vec<[String; 2]>,
}
