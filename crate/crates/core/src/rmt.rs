//! Wishart ensembles and the Marchenko–Pastur law.
//!
//! For `W = n⁻¹ A Aᵀ` with `A` an `m × n` matrix of i.i.d. `N(0, σ²)` entries
//! and `m/n → c`, the eigenvalue density converges to
//!
//! ```text
//! ρ(λ) = sqrt((c₊ − λ)(λ − c₋)) / (2π σ² c λ)   on (c₋, c₊),
//! c± = σ² (1 ± √c)²,
//! ```
//!
//! plus an atom of mass `1 − 1/c` at zero when `c > 1`. Spectra of Hessians
//! and sample covariances are split against this law into zero modes, a noise
//! bulk and outliers.

use std::f64::consts::PI;

use rand::Rng;
use thiserror::Error;

use crate::linalg::{Matrix, SymmetricMatrix};
use crate::rng::{gaussian_matrix, random_orthogonal, seeded};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RmtError {
    #[error("aspect ratio c must be positive and finite, got {0}")]
    InvalidRatio(f64),
    #[error("variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("quadrature did not reach tolerance {tol:e} on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, RmtError>;

/// Marchenko–Pastur parameters and derived support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpModel {
    pub c: f64,
    pub sigma2: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub point_mass_at_zero: f64,
}

impl MpModel {
    pub fn new(c: f64, sigma2: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(RmtError::InvalidRatio(c));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(RmtError::InvalidVariance(sigma2));
        }
        let root = c.sqrt();
        Ok(Self {
            c,
            sigma2,
            c_minus: sigma2 * (1.0 - root) * (1.0 - root),
            c_plus: sigma2 * (1.0 + root) * (1.0 + root),
            point_mass_at_zero: (1.0 - 1.0 / c).max(0.0),
        })
    }

    /// Model for an `m × m` Wishart matrix built from `m × n` data.
    pub fn for_shape(m: usize, n: usize, sigma2: f64) -> Result<Self> {
        Self::new(m as f64 / n as f64, sigma2)
    }

    pub fn density(&self, lambda: f64) -> f64 {
        mp_density(lambda, self)
    }

    pub fn cdf(&self, lambda: f64) -> Result<f64> {
        mp_cdf(lambda, self)
    }
}

/// Continuous part of the MP density; zero outside the open support. The
/// atom at zero (for `c > 1`) is reported by `point_mass_at_zero`, not here.
pub fn mp_density(lambda: f64, model: &MpModel) -> f64 {
    if lambda <= model.c_minus || lambda >= model.c_plus || lambda <= 0.0 {
        return 0.0;
    }
    let radicand = (model.c_plus - lambda) * (lambda - model.c_minus);
    radicand.sqrt() / (2.0 * PI * model.sigma2 * model.c * lambda)
}

/// Absolute error target for [`mp_cdf`].
pub const CDF_TOLERANCE: f64 = 1e-10;

/// Cumulative distribution including the atom at zero.
///
/// Integrates the density after the substitution
/// `λ = c₋ + (c₊ − c₋) sin²(θ/2)`, which removes the square-root edge
/// singularities (and the `λ^{-1/2}` one at zero when `c = 1`), using adaptive
/// Gauss–Kronrod 7/15.
pub fn mp_cdf(lambda: f64, model: &MpModel) -> Result<f64> {
    if lambda < 0.0 {
        return Ok(0.0);
    }
    if lambda <= model.c_minus {
        return Ok(model.point_mass_at_zero);
    }
    if lambda >= model.c_plus {
        return Ok(1.0);
    }
    let width = model.c_plus - model.c_minus;
    let half_sin = ((lambda - model.c_minus) / width).sqrt().min(1.0);
    let theta_max = 2.0 * half_sin.asin();
    let integrand = |theta: f64| {
        let s = (0.5 * theta).sin();
        let co = (0.5 * theta).cos();
        let lam = model.c_minus + width * s * s;
        // ρ(λ) dλ/dθ with sin²θ = 4 s² co²
        width * width * 4.0 * s * s * co * co / (8.0 * PI * model.sigma2 * model.c * lam)
    };
    let mass = integrate(integrand, 0.0, theta_max, CDF_TOLERANCE)?;
    Ok((model.point_mass_at_zero + mass).clamp(0.0, 1.0))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod quadrature with absolute tolerance `tol`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Option<f64> {
        let (value, err) = kronrod(f, a, b);
        if err <= tol || (b - a).abs() < 1e-14 {
            return Some(value);
        }
        if depth == 0 {
            return None;
        }
        let mid = 0.5 * (a + b);
        Some(recurse(f, a, mid, 0.5 * tol, depth - 1)? + recurse(f, mid, b, 0.5 * tol, depth - 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    recurse(&f, a, b, tol, 40).ok_or(RmtError::Quadrature { lo: a, hi: b, tol })
}

/// `W = n⁻¹ A Aᵀ` with `A` an `m × n` matrix of i.i.d. `N(0, σ²)` entries.
pub fn sample_wishart(m: usize, n: usize, sigma: f64, seed: u64) -> SymmetricMatrix {
    let mut rng = seeded(seed);
    wishart_from_rng(&mut rng, m, n, sigma)
}

pub(crate) fn wishart_from_rng<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, sigma: f64) -> SymmetricMatrix {
    let a = gaussian_matrix(rng, m, n, sigma);
    let w = (&a * a.transpose()) / n as f64;
    SymmetricMatrix::symmetrize(&w)
}

/// Wishart matrix whose columns have covariance `I + Σ_j spike_j w_j w_jᵀ`
/// for random orthonormal `w_j`.
pub fn sample_spiked_wishart(m: usize, n: usize, spikes: &[f64], seed: u64) -> SymmetricMatrix {
    assert!(spikes.len() <= m, "more spikes than dimensions");
    let mut rng = seeded(seed);
    let basis = random_orthogonal(&mut rng, m);
    let root = covariance_root(&basis, spikes);
    let g = gaussian_matrix(&mut rng, m, n, 1.0);
    let a = root * g;
    SymmetricMatrix::symmetrize(&((&a * a.transpose()) / n as f64))
}

/// `(I + Σ s_j w_j w_jᵀ)^{1/2} = I + Σ (sqrt(1 + s_j) − 1) w_j w_jᵀ`
/// for orthonormal columns `w_j` of `basis`.
pub(crate) fn covariance_root(basis: &Matrix, spikes: &[f64]) -> Matrix {
    let m = basis.nrows();
    let mut root = Matrix::identity(m, m);
    for (j, s) in spikes.iter().enumerate() {
        let w = basis.column(j);
        root += (w * w.transpose()) * ((1.0 + s).sqrt() - 1.0);
    }
    root
}

/// Zero modes, MP bulk and outliers of an empirical spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPartition {
    pub zeros: usize,
    pub bulk: Vec<f64>,
    pub outliers: Vec<f64>,
    /// Non-zero eigenvalues below `c₋ − pad`, including negative ones.
    pub below_bulk: Vec<f64>,
}

impl SpectrumPartition {
    pub fn total(&self) -> usize {
        self.zeros + self.bulk.len() + self.outliers.len() + self.below_bulk.len()
    }
}

/// Classifies each eigenvalue. Outliers lie strictly above `c₊ + edge_pad`.
/// Category vectors are sorted descending, so the result does not depend on
/// input order.
pub fn partition_spectrum(eigs: &[f64], model: &MpModel, zero_tol: f64, edge_pad: f64) -> SpectrumPartition {
    let mut p = SpectrumPartition {
        zeros: 0,
        bulk: Vec::new(),
        outliers: Vec::new(),
        below_bulk: Vec::new(),
    };
    for &l in eigs {
        if l.abs() < zero_tol {
            p.zeros += 1;
        } else if l > model.c_plus + edge_pad {
            p.outliers.push(l);
        } else if l >= model.c_minus - edge_pad {
            p.bulk.push(l);
        } else {
            p.below_bulk.push(l);
        }
    }
    for v in [&mut p.bulk, &mut p.outliers, &mut p.below_bulk] {
        v.sort_by(|a, b| b.total_cmp(a));
    }
    p
}

/// Edge fluctuation allowance `2 · n^{-2/3} · c₊` for an `n`-dimensional
/// matrix (Tracy–Widom scale).
pub fn default_edge_pad(n: usize, model: &MpModel) -> f64 {
    2.0 * (n as f64).powf(-2.0 / 3.0) * model.c_plus
}

/// `1e-10 · max|λ|`
pub fn default_zero_tol(eigs: &[f64]) -> f64 {
    1e-10 * eigs.iter().fold(0.0_f64, |m, l| m.max(l.abs()))
}

/// Kolmogorov–Smirnov distance between an empirical sample and the MP law.
pub fn ks_distance(samples: &[f64], model: &MpModel) -> Result<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = mp_cdf(x, model)?;
        d = d.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        let w = self.width();
        (0..self.counts.len()).map(move |i| self.lo + (i as f64 + 0.5) * w)
    }

    /// Counts normalised to a probability density over the sample.
    pub fn densities(&self) -> Vec<f64> {
        let norm = self.total.max(1) as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }
}

/// Equal-width histogram over `[lo, hi]`; values outside are counted in
/// `total` only.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Histogram {
    assert!(bins > 0 && hi > lo);
    let mut counts = vec![0u64; bins];
    let width = (hi - lo) / bins as f64;
    for &v in values {
        if v >= lo && v <= hi {
            let idx = (((v - lo) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
    }
    Histogram {
        lo,
        hi,
        counts,
        total: values.len() as u64,
    }
}
