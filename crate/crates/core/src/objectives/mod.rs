//! Differentiable test objectives with exact gradients and Hessians.

mod mlp;

pub use mlp::{Mlp, MAX_MLP_PARAMS};

use thiserror::Error;

use crate::dataio::Dataset;
use crate::linalg::{Matrix, SymmetricMatrix, Vector};
use crate::rmt::covariance_root;
use crate::rng::{gaussian_matrix, gaussian_vec, random_orthogonal, seeded, sub_seed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("rosenbrock needs n >= 2, got {0}")]
    TooSmall(usize),
    #[error("basis is not orthogonal: max |QᵀQ − I| = {0:e}")]
    NotOrthogonal(f64),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("network has {params} parameters, above the cap of {cap}")]
    TooLarge { params: usize, cap: usize },
    #[error("dataset has no targets")]
    MissingTargets,
}

pub type Result<T> = std::result::Result<T, ObjectiveError>;

/// A twice-differentiable scalar function of `dim()` variables.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn hessian(&self, x: &Vector) -> SymmetricMatrix;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &Vector) -> SymmetricMatrix {
        (**self).hessian(x)
    }
}

/// Central differences of `value` with step `1e-5 · (1 + |x_i|)`.
pub fn finite_difference_gradient<O: Objective + ?Sized>(obj: &O, x: &Vector) -> Vector {
    let mut g = Vector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let h = 1e-5 * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let up = obj.value(&probe);
        probe[i] = x[i] - h;
        let down = obj.value(&probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    g
}

/// Central differences of `gradient` with step `1e-4 · (1 + |x_i|)`,
/// symmetrised.
pub fn finite_difference_hessian<O: Objective + ?Sized>(obj: &O, x: &Vector) -> SymmetricMatrix {
    let n = x.len();
    let mut h = Matrix::zeros(n, n);
    let mut probe = x.clone();
    for i in 0..n {
        let step = 1e-4 * (1.0 + x[i].abs());
        probe[i] = x[i] + step;
        let up = obj.gradient(&probe);
        probe[i] = x[i] - step;
        let down = obj.gradient(&probe);
        probe[i] = x[i];
        h.set_column(i, &((up - down) / (2.0 * step)));
    }
    SymmetricMatrix::symmetrize(&h)
}

/// Chained Rosenbrock `Σ_{i<n} 100 (x_{i+1} − x_i²)² + (1 − x_i)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rosenbrock {
    n: usize,
}

pub fn rosenbrock(n: usize) -> Result<Rosenbrock> {
    if n < 2 {
        return Err(ObjectiveError::TooSmall(n));
    }
    Ok(Rosenbrock { n })
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &Vector) -> f64 {
        (0..self.n - 1)
            .map(|i| {
                let a = x[i + 1] - x[i] * x[i];
                let b = 1.0 - x[i];
                100.0 * a * a + b * b
            })
            .sum()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = Vector::zeros(self.n);
        for i in 0..self.n - 1 {
            let a = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * a;
        }
        g
    }

    fn hessian(&self, x: &Vector) -> SymmetricMatrix {
        let mut h = Matrix::zeros(self.n, self.n);
        for i in 0..self.n - 1 {
            h[(i, i)] += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
            h[(i + 1, i + 1)] += 200.0;
            h[(i, i + 1)] -= 400.0 * x[i];
            h[(i + 1, i)] -= 400.0 * x[i];
        }
        SymmetricMatrix::symmetrize(&h)
    }
}

/// Quadratic in Morse normal form around a critical point:
/// `f(x* + Δx) = ½ Σ λ_i v_i²` with `v = Bᵀ Δx`.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseQuadratic {
    pub lambdas: Vec<f64>,
    pub basis: Matrix,
    pub x_star: Vector,
    hessian: SymmetricMatrix,
}

pub fn morse_quadratic(lambdas: &[f64], basis: &Matrix, x_star: &Vector) -> Result<MorseQuadratic> {
    let n = lambdas.len();
    if basis.nrows() != n || basis.ncols() != n || x_star.len() != n {
        return Err(ObjectiveError::Shape(format!(
            "{} eigenvalues, {}×{} basis, point of length {}",
            n,
            basis.nrows(),
            basis.ncols(),
            x_star.len()
        )));
    }
    let gram = basis.tr_mul(basis) - Matrix::identity(n, n);
    let defect = gram.amax();
    if defect > 1e-10 * (n.max(1) as f64) {
        return Err(ObjectiveError::NotOrthogonal(defect));
    }
    let d = Matrix::from_diagonal(&Vector::from_column_slice(lambdas));
    let hessian = SymmetricMatrix::symmetrize(&(basis * d * basis.transpose()));
    Ok(MorseQuadratic {
        lambdas: lambdas.to_vec(),
        basis: basis.clone(),
        x_star: x_star.clone(),
        hessian,
    })
}

impl MorseQuadratic {
    /// Eigencoordinates `Bᵀ(x − x*)`.
    pub fn coordinates(&self, x: &Vector) -> Vector {
        self.basis.tr_mul(&(x - &self.x_star))
    }
}

impl Objective for MorseQuadratic {
    fn dim(&self) -> usize {
        self.lambdas.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        let v = self.coordinates(x);
        0.5 * v.iter().zip(&self.lambdas).map(|(vi, l)| l * vi * vi).sum::<f64>()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let mut v = self.coordinates(x);
        for (vi, l) in v.iter_mut().zip(&self.lambdas) {
            *vi *= l;
        }
        &self.basis * v
    }

    fn hessian(&self, _x: &Vector) -> SymmetricMatrix {
        self.hessian.clone()
    }
}

/// Gaussian samples with covariance `I + s Σ_{j<rank} w_j w_jᵀ` for seeded
/// orthonormal `w_j`.
///
/// Targets come from a seeded linear teacher normalised to unit variance,
/// plus `N(0, 0.1²)` noise, so the set can train an MLP directly.
pub fn synthetic_correlated_data(n_samples: usize, dim: usize, planted_rank: usize, spike_strength: f64, seed: u64) -> Dataset {
    assert!(planted_rank <= dim, "planted rank {planted_rank} exceeds dimension {dim}");
    assert!(n_samples >= 1 && dim >= 1);
    let mut rng = seeded(seed);
    let basis = random_orthogonal(&mut rng, dim);
    let spikes = vec![spike_strength; planted_rank];
    let root = covariance_root(&basis, &spikes);
    let noise = gaussian_matrix(&mut rng, n_samples, dim, 1.0);
    // rows xᵀ = gᵀ Σ^{1/2}, Σ^{1/2} symmetric
    let features = noise * &root;

    let mut teacher_rng = seeded(sub_seed(seed, 1));
    let teacher = Vector::from_vec(gaussian_vec(&mut teacher_rng, dim)).normalize();
    let scale = (&root * &teacher).norm();
    let jitter = gaussian_vec(&mut teacher_rng, n_samples);
    let targets = Matrix::from_fn(n_samples, 1, |i, _| {
        features.row(i).transpose().dot(&teacher) / scale + 0.1 * jitter[i]
    });
    Dataset::new(features, Some(targets)).expect("generated data is finite")
}
