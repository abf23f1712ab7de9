//! Small dense complex linear-algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value (operator 2-norm); zero for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Outcome of a numerical rank decision.
#[derive(Debug, Clone, Serialize)]
pub struct RankDecision {
    pub rank: usize,
    /// Absolute threshold: singular values above it count.
    pub tolerance: f64,
    pub relative_tolerance: f64,
    pub singular_values: Vec<f64>,
    /// Ratio between the last retained and the first discarded singular value
    /// (infinite when nothing is discarded, or the discarded value is zero).
    pub gap: f64,
}

pub fn rank_decision(m: &CMat, relative_tolerance: f64) -> RankDecision {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let tolerance = relative_tolerance * smax;
    let rank = s.iter().filter(|&&v| v > tolerance && v > 0.0).count();
    let gap = match (rank.checked_sub(1).map(|i| s[i]), s.get(rank)) {
        (Some(kept), Some(&dropped)) if dropped > 0.0 => kept / dropped,
        _ => f64::INFINITY,
    };
    RankDecision { rank, tolerance, relative_tolerance, singular_values: s, gap }
}

/// Orthonormal basis (as columns) of the null space of `m`, together with the
/// rank decision that produced it.
pub fn null_space(m: &CMat, relative_tolerance: f64) -> (CMat, RankDecision) {
    let n = m.ncols();
    let decision = rank_decision(m, relative_tolerance);
    if decision.rank == 0 {
        return (CMat::identity(n, n), decision);
    }
    // Row space from the right singular vectors; the kernel is its complement.
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > decision.tolerance && svd.singular_values[i] > 0.0)
        .collect();
    keep.truncate(decision.rank);
    let mut projector = CMat::identity(n, n);
    for &i in &keep {
        let row = v_t.row(i).transpose(); // conj of right singular vector
        let v = row.map(|z| z.conj());
        projector -= &v * v.adjoint();
    }
    let kdim = n - decision.rank;
    if kdim == 0 {
        return (CMat::zeros(n, 0), decision);
    }
    // eigenvalues of the projector are 0 and 1, well separated
    let (vals, vecs) = hermitian_eigen(&projector);
    debug_assert!(vals.len() == n);
    let mut basis = CMat::zeros(n, kdim);
    for j in 0..kdim {
        basis.set_column(j, &vecs.column(n - kdim + j));
    }
    (basis, decision)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Euclidean inner product, linear in the first argument.
pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    b.dotc(a)
}

pub fn random_cvec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

pub fn random_rvec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| real(rng.sample::<f64, _>(StandardNormal)))
}

pub fn random_cmat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-ish random unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = random_cmat(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix the phases so the distribution does not depend on the QR convention.
    let mut out = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { real(1.0) };
        for i in 0..n {
            out[(i, j)] *= phase;
        }
    }
    out
}

/// Wire form of a complex matrix: row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct MatrixRecord {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &CMat) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Option<CMat> {
        let r = self.re.len();
        let c = self.re.first().map_or(0, |row| row.len());
        if self.im.len() != r || self.re.iter().chain(&self.im).any(|row| row.len() != c) {
            return None;
        }
        Some(CMat::from_fn(r, c, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }
}

/// Converts a real matrix into a complex one.
pub fn complexify(m: &DMatrix<f64>) -> CMat {
    m.map(real)
}
