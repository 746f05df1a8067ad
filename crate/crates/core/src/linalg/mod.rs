//! Dense real symmetric linear algebra.
//!
//! Eigenpairs are always ordered by descending `|λ|`: the saddle-free step
//! rescales by `|λ_i|⁻¹` and truncation keeps the largest magnitudes, so the
//! magnitude order is the one every consumer wants.
//!
//! Frobenius norms and truncation errors use the standard definitions,
//! `‖A‖_F = (Σ σ_i²)^{1/2}` and `‖H − H_k‖_F = (Σ_{i>k} λ_i²)^{1/2}`. Some
//! texts print these without the squares (`(Σ σ_i)^{1/2}`,
//! `Σ_{i>k} λ_i`); those forms are not norms and are not used here.

mod tridiag;

use log::warn;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use tridiag::MAX_QL_SWEEPS;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is empty")]
    Empty,

    #[error("QL iteration for eigenvalue {index} did not converge in {sweeps} sweeps")]
    Convergence { index: usize, sweeps: usize },

    #[error("threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),

    #[error("no eigenvalue reaches threshold {threshold} (largest magnitude {max_abs})")]
    EmptySpectrum { threshold: f64, max_abs: f64 },

    #[error("requested rank {requested} exceeds numerical rank {rank}")]
    Rank { requested: usize, rank: usize },

    #[error("index {index} out of range for dimension {dim}")]
    Range { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Reconstruction / orthogonality tolerance: `1e-8 · N · max|entry|`.
pub fn tolerance(dim: usize, max_entry: f64) -> f64 {
    1e-8 * dim as f64 * max_entry.max(f64::MIN_POSITIVE)
}

pub(crate) fn check_finite(a: &Matrix) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(LinalgError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub(crate) fn max_abs_entry(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// A real symmetric matrix. Symmetry is checked exactly on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(LinalgError::Empty);
        }
        for j in 0..m.ncols() {
            for i in (j + 1)..m.nrows() {
                if m[(i, j)] != m[(j, i)] {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    /// `(M + Mᵀ) / 2`, which is exactly symmetric in floating point.
    pub fn symmetrize(m: &Matrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "symmetrize needs a square matrix");
        let n = m.nrows();
        let mut s = m.clone();
        for j in 0..n {
            for i in (j + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Self(s)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(Matrix::from_diagonal(&Vector::from_column_slice(diag)))
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_row_slice(n, n, data))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn max_abs_entry(&self) -> f64 {
        max_abs_entry(&self.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Spectral decomposition `H = Σ λ_i s_i s_iᵀ`, sorted by descending `|λ_i|`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.first().map_or(0.0, |l| l.abs())
    }

    pub fn reconstruct(&self) -> Matrix {
        let lambda = Matrix::from_diagonal(&Vector::from_column_slice(&self.eigenvalues));
        &self.eigenvectors * lambda * self.eigenvectors.transpose()
    }

    /// Coordinates of `x` in the eigenbasis, `Sᵀx`.
    pub fn coordinates(&self, x: &Vector) -> Vector {
        self.eigenvectors.tr_mul(x)
    }
}

fn magnitude_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
    });
    order
}

/// Full eigendecomposition of a symmetric matrix via Householder
/// tridiagonalization and implicit QL.
pub fn sym_eig(h: &SymmetricMatrix) -> Result<EigenDecomposition> {
    check_finite(h.as_matrix())?;
    let n = h.dim();
    let mut v = h.as_matrix().clone();
    let mut tri = tridiag::householder_reduce(&mut v);
    tridiag::implicit_ql(&mut tri, Some(&mut v))?;

    let order = magnitude_order(&tri.d);
    let eigenvalues = order.iter().map(|&i| tri.d[i]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &v.column(src));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, sorted by descending `|λ|`. Skips accumulating the QL
/// rotations, which dominates the cost of [`sym_eig`].
pub fn sym_eigvals(h: &SymmetricMatrix) -> Result<Vec<f64>> {
    check_finite(h.as_matrix())?;
    let mut v = h.as_matrix().clone();
    let mut tri = tridiag::householder_reduce(&mut v);
    tridiag::implicit_ql(&mut tri, None)?;
    let order = magnitude_order(&tri.d);
    Ok(order.iter().map(|&i| tri.d[i]).collect())
}

/// Thin SVD `A = U Σ Vᵀ` with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct SvdDecomposition {
    /// `m × min(m, n)`
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    /// `n × min(m, n)`; columns are right singular vectors.
    pub v: Matrix,
    /// Number of singular values above `max(m, n) · ε · σ_1`.
    pub rank: usize,
}

impl SvdDecomposition {
    pub fn reconstruct(&self) -> Matrix {
        let s = Matrix::from_diagonal(&Vector::from_column_slice(&self.singular_values));
        &self.u * s * self.v.transpose()
    }
}

pub fn svd(a: &Matrix) -> Result<SvdDecomposition> {
    check_finite(a)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(LinalgError::Empty);
    }
    let raw = a.clone().svd(true, true);
    let u_raw = raw.u.expect("requested U");
    let vt_raw = raw.v_t.expect("requested V^T");
    let sv = raw.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));

    let k = sv.len();
    let mut u = Matrix::zeros(a.nrows(), k);
    let mut v = Matrix::zeros(a.ncols(), k);
    let mut singular_values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        v.set_column(dst, &vt_raw.row(src).transpose());
        singular_values.push(sv[src]);
    }
    let cutoff = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * singular_values[0];
    let rank = singular_values.iter().filter(|&&s| s > cutoff).count();
    Ok(SvdDecomposition {
        u,
        singular_values,
        v,
        rank,
    })
}

/// Eigenpairs with `|λ| ≥ threshold`, the retained part of a truncated
/// saddle-free inverse.
#[derive(Debug, Clone)]
pub struct TruncatedSpectrum {
    pub threshold: f64,
    pub eigenvalues: Vec<f64>,
    /// `N × k`, column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
    /// `max|λ| / threshold`, the condition number bound implied by the cut.
    pub kappa_eff: f64,
}

impl TruncatedSpectrum {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ_retained |λ_i|⁻¹ s_i s_iᵀ`
    pub fn abs_inverse(&self) -> Matrix {
        let inv: Vec<f64> = self.eigenvalues.iter().map(|l| 1.0 / l.abs()).collect();
        let d = Matrix::from_diagonal(&Vector::from_vec(inv));
        &self.eigenvectors * d * self.eigenvectors.transpose()
    }

    /// `|H_k|⁻¹ g` without forming the inverse.
    pub fn apply_abs_inverse(&self, g: &Vector) -> Vector {
        let mut coords = self.eigenvectors.tr_mul(g);
        for (c, l) in coords.iter_mut().zip(&self.eigenvalues) {
            *c /= l.abs();
        }
        &self.eigenvectors * coords
    }
}

/// Keeps the eigenpairs of `eig` whose magnitude reaches `threshold`.
pub fn truncate(eig: &EigenDecomposition, threshold: f64) -> Result<TruncatedSpectrum> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(LinalgError::InvalidThreshold(threshold));
    }
    let k = eig
        .eigenvalues
        .iter()
        .take_while(|l| l.abs() >= threshold)
        .count();
    if k == 0 {
        return Err(LinalgError::EmptySpectrum {
            threshold,
            max_abs: eig.max_abs(),
        });
    }
    Ok(TruncatedSpectrum {
        threshold,
        eigenvalues: eig.eigenvalues[..k].to_vec(),
        eigenvectors: eig.eigenvectors.columns(0, k).clone_owned(),
        kappa_eff: eig.max_abs() / threshold,
    })
}

/// Truncated absolute pseudo-inverse `Σ_{|λ_i| ≥ τ} |λ_i|⁻¹ s_i s_iᵀ`.
/// Eigenvalues below the threshold contribute nothing.
pub fn abs_pinv_truncated(h: &SymmetricMatrix, threshold: f64) -> Result<(Matrix, TruncatedSpectrum)> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(LinalgError::InvalidThreshold(threshold));
    }
    let eig = sym_eig(h)?;
    let spectrum = truncate(&eig, threshold)?;
    Ok((spectrum.abs_inverse(), spectrum))
}

#[derive(Debug, Clone)]
pub struct LowRankInverse {
    pub z: Matrix,
    /// False when `σ_r == σ_{r+1}` to working precision; `z` is then one of
    /// several minimisers.
    pub unique: bool,
}

/// Optimal rank-`r` approximation of the inverse, `Z* = V_r Σ_r⁻¹ U_rᵀ`,
/// minimising `‖Z A − I‖_F` over rank-`r` matrices.
pub fn low_rank_inverse(a: &Matrix, r: usize) -> Result<LowRankInverse> {
    let s = svd(a)?;
    if r == 0 || r > s.rank {
        return Err(LinalgError::Rank {
            requested: r,
            rank: s.rank,
        });
    }
    let sigma = &s.singular_values;
    let unique = match sigma.get(r) {
        Some(&next) => sigma[r - 1] - next > 1e-12 * sigma[0],
        None => true,
    };
    if !unique {
        warn!(
            "rank-{r} inverse is not unique: sigma_{r} = {} equals sigma_{} = {}",
            sigma[r - 1],
            r + 1,
            sigma[r]
        );
    }
    let inv = Vector::from_iterator(r, sigma[..r].iter().map(|x| 1.0 / x));
    let z = s.v.columns(0, r) * Matrix::from_diagonal(&inv) * s.u.columns(0, r).transpose();
    Ok(LowRankInverse { z, unique })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationError {
    pub spectral: f64,
    pub frobenius: f64,
}

/// Error of the best rank-`k` approximation `H_k` (top-`k` by magnitude):
/// `‖H − H_k‖₂ = |λ_{k+1}|`, `‖H − H_k‖_F = (Σ_{i>k} λ_i²)^{1/2}`.
pub fn truncation_error(h: &SymmetricMatrix, k: usize) -> Result<TruncationError> {
    let n = h.dim();
    if k >= n {
        return Err(LinalgError::Range { index: k, dim: n });
    }
    let eigs = sym_eigvals(h)?;
    Ok(truncation_error_from_eigs(&eigs, k))
}

pub(crate) fn truncation_error_from_eigs(sorted_eigs: &[f64], k: usize) -> TruncationError {
    let tail = &sorted_eigs[k.min(sorted_eigs.len())..];
    TruncationError {
        spectral: tail.first().map_or(0.0, |l| l.abs()),
        frobenius: tail.iter().map(|l| l * l).sum::<f64>().sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub spectral: f64,
    pub frobenius: f64,
}

pub fn norms(a: &Matrix) -> Result<Norms> {
    check_finite(a)?;
    let frobenius = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frobenius == 0.0 {
        return Ok(Norms {
            spectral: 0.0,
            frobenius,
        });
    }
    let s = svd(a)?;
    Ok(Norms {
        spectral: s.singular_values[0],
        frobenius,
    })
}
