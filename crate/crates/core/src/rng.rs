//! Seeded random sources.
//!
//! Every stochastic routine takes an explicit `u64` seed. The generator is
//! ChaCha8 (a counter-based stream cipher), and normal variates come from
//! `rand_distr::StandardNormal`, which uses the ziggurat method. Both are fixed
//! so that histograms and CSV outputs are bit-reproducible across runs.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Matrix, SymmetricMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for trial `index` of a study seeded with `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| gaussian(rng)).collect()
}

/// Matrix with i.i.d. `N(0, sigma^2)` entries, filled row by row.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, sigma: f64) -> Matrix {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = sigma * gaussian(rng);
        }
    }
    m
}

/// Symmetric matrix `(G + G^T) / 2` with standard normal `G`.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymmetricMatrix {
    let g = gaussian_matrix(rng, n, n, 1.0);
    SymmetricMatrix::symmetrize(&g)
}

/// Haar-ish orthogonal matrix from modified Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let mut q = gaussian_matrix(rng, n, n, 1.0);
    orthonormalize_columns(&mut q);
    q
}

/// In-place modified Gram–Schmidt with one re-orthogonalisation pass.
pub(crate) fn orthonormalize_columns(q: &mut Matrix) {
    let n = q.ncols();
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = q.column(i).dot(&q.column(j));
                let qi = q.column(i).clone_owned();
                let mut cj = q.column_mut(j);
                cj.axpy(-proj, &qi, 1.0);
            }
        }
        let norm = q.column(j).norm();
        q.column_mut(j).scale_mut(1.0 / norm);
    }
}
