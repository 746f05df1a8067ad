//! Column-sampling approximate SVD and empirical checks of its error bounds.
//!
//! `c` columns are drawn with replacement from probabilities
//! `p_i ≥ β |A^i|² / ‖A‖_F²`, rescaled by `1 / sqrt(c p_i)`, and the top-`k`
//! left singular vectors of the resulting `m × c` sketch form `H_k`. With
//! `η = 1 + sqrt((8/β) ln(1/δ))` and `ε > 0` the guarantees are:
//!
//! | variant | sample count | bound on the left side |
//! |---|---|---|
//! | `E ‖A − H_kH_kᵀA‖_F²` | `c ≥ 4k/(βε²)` | `‖A − A_k‖_F² + ε‖A‖_F²` |
//! | `‖A − H_kH_kᵀA‖_F²` w.p. `1−δ` | `c ≥ 4kη²/(βε²)` | same |
//! | `E ‖A − H_kH_kᵀA‖_2²` | `c ≥ 4/(βε²)` | `‖A − A_k‖_2² + ε‖A‖_F²` |
//! | `‖A − H_kH_kᵀA‖_2²` w.p. `1−δ` | `c ≥ 4η²/(βε²)` | same |

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix, SymmetricMatrix};
use crate::rng::{seeded, sub_seed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RsvdError {
    #[error("matrix has no nonzero column; the sampling distribution is undefined")]
    ZeroMatrix,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, RsvdError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsvdConfig {
    /// Sampled columns.
    pub c: usize,
    /// Target rank.
    pub k: usize,
    /// Floor coefficient of the sampling distribution, in `(0, 1]`.
    pub beta: f64,
    /// Failure probability of the high-probability bounds.
    pub delta: f64,
    pub seed: u64,
}

impl Default for RsvdConfig {
    fn default() -> Self {
        Self {
            c: 20,
            k: 5,
            beta: 1.0,
            delta: 0.1,
            seed: 0,
        }
    }
}

impl RsvdConfig {
    /// `η = 1 + sqrt((8/β) ln(1/δ))`.
    pub fn eta(&self) -> f64 {
        1.0 + ((8.0 / self.beta) * (1.0 / self.delta).ln()).sqrt()
    }

    /// Checks `1 ≤ k ≤ c ≤ n`, `0 < β ≤ 1` and `0 < δ < 1`.
    pub fn validate(&self, n_cols: usize) -> Result<()> {
        if self.k == 0 {
            return Err(RsvdError::Config("k must be at least 1".into()));
        }
        if self.c < self.k {
            return Err(RsvdError::Config(format!("c = {} is below k = {}", self.c, self.k)));
        }
        if self.c > n_cols {
            return Err(RsvdError::Config(format!(
                "c = {} exceeds the column count {n_cols}",
                self.c
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(RsvdError::Config(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(RsvdError::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    /// Smallest `c` for which `variant` holds at accuracy `eps`.
    pub fn required_c(&self, variant: BoundVariant, eps: f64) -> usize {
        let eta2 = self.eta().powi(2);
        let k = self.k as f64;
        let factor = match variant {
            BoundVariant::FrobeniusExpectation => k,
            BoundVariant::FrobeniusHighProbability => k * eta2,
            BoundVariant::SpectralExpectation => 1.0,
            BoundVariant::SpectralHighProbability => eta2,
        };
        (4.0 * factor / (self.beta * eps * eps)).ceil() as usize
    }
}

/// Sampling probabilities `β |A^i|²/‖A‖_F² + (1 − β)/n`.
pub fn sampling_probabilities(a: &Matrix, beta: f64) -> Result<Vec<f64>> {
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm_squared()).collect();
    let total: f64 = norms.iter().sum();
    if !(total > 0.0) {
        return Err(RsvdError::ZeroMatrix);
    }
    let n = norms.len() as f64;
    Ok(norms.iter().map(|x| beta * x / total + (1.0 - beta) / n).collect())
}

/// `H_k`: an `m × k` matrix with orthonormal columns spanning the sketch's
/// dominant left singular subspace.
pub fn linear_time_svd(a: &Matrix, config: &RsvdConfig) -> Result<Matrix> {
    config.validate(a.ncols())?;
    if config.k > a.nrows() {
        return Err(RsvdError::Config(format!(
            "k = {} exceeds the row count {}",
            config.k,
            a.nrows()
        )));
    }
    let p = sampling_probabilities(a, config.beta)?;
    let dist = WeightedIndex::new(&p).map_err(|e| RsvdError::Config(e.to_string()))?;
    let mut rng = seeded(config.seed);
    let c = config.c as f64;
    let mut sketch = Matrix::zeros(a.nrows(), config.c);
    for t in 0..config.c {
        let i = dist.sample(&mut rng);
        sketch.set_column(t, &(a.column(i) / (c * p[i]).sqrt()));
    }
    let svd = linalg::svd(&sketch)?;
    Ok(svd.u.columns(0, config.k).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    FrobeniusExpectation,
    FrobeniusHighProbability,
    SpectralExpectation,
    SpectralHighProbability,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 4] = [
        BoundVariant::FrobeniusExpectation,
        BoundVariant::FrobeniusHighProbability,
        BoundVariant::SpectralExpectation,
        BoundVariant::SpectralHighProbability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundVariant::FrobeniusExpectation => "frobenius_expectation",
            BoundVariant::FrobeniusHighProbability => "frobenius_high_probability",
            BoundVariant::SpectralExpectation => "spectral_expectation",
            BoundVariant::SpectralHighProbability => "spectral_high_probability",
        }
    }

    pub fn is_spectral(self) -> bool {
        matches!(self, BoundVariant::SpectralExpectation | BoundVariant::SpectralHighProbability)
    }

    pub fn is_expectation(self) -> bool {
        matches!(self, BoundVariant::FrobeniusExpectation | BoundVariant::SpectralExpectation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    /// `‖A − H_kH_kᵀA‖_F²`
    pub fro_err_sq: f64,
    /// `‖A − H_kH_kᵀA‖_2²`
    pub spectral_err_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub variant: BoundVariant,
    /// Sample count the guarantee asks for at this `ε`.
    pub required_c: usize,
    pub c_sufficient: bool,
    /// `‖A − A_k‖²` in the matching norm.
    pub opt_err_sq: f64,
    /// `‖A − A_k‖² + ε ‖A‖_F²`.
    pub bound_rhs: f64,
    /// Fraction of trials at or below the bound.
    pub pass_rate: f64,
    pub mean_err_sq: f64,
    pub std_error: f64,
    /// Expectation variants: mean within `bound + 2 SE`. High-probability
    /// variants: pass rate at least `1 − δ − 0.05`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub config: RsvdConfig,
    pub eps: f64,
    pub eta: f64,
    pub fro_norm_sq: f64,
    pub trials: Vec<TrialOutcome>,
    pub checks: Vec<BoundCheck>,
}

impl BoundsReport {
    pub fn check(&self, variant: BoundVariant) -> &BoundCheck {
        self.checks.iter().find(|c| c.variant == variant).expect("all variants are checked")
    }
}

/// Squared Frobenius and spectral norms of `A − H Hᵀ A`.
pub fn projection_errors(a: &Matrix, h: &Matrix) -> Result<(f64, f64)> {
    let r = a - h * (h.transpose() * a);
    let fro = r.norm_squared();
    // ‖R‖_2² is the top eigenvalue of the smaller Gram matrix
    let gram = if r.nrows() <= r.ncols() {
        &r * r.transpose()
    } else {
        r.transpose() * &r
    };
    let top = linalg::sym_eigvals(&SymmetricMatrix::symmetrize(&gram))?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((fro, top))
}

/// Runs `trials` independent sketches (seeds derived from `config.seed`)
/// and evaluates all four bounds against the exact SVD of `A`.
pub fn verify_bounds(a: &Matrix, config: &RsvdConfig, eps: f64, trials: usize) -> Result<BoundsReport> {
    if trials < 30 {
        return Err(RsvdError::Config(format!("at least 30 trials are needed, got {trials}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(RsvdError::Config(format!("eps must be positive, got {eps}")));
    }
    config.validate(a.ncols())?;
    let exact = linalg::svd(a)?;
    let sv = &exact.singular_values;
    let k = config.k.min(sv.len());
    let fro_norm_sq: f64 = sv.iter().map(|s| s * s).sum();
    let opt_fro: f64 = sv[k..].iter().map(|s| s * s).sum();
    let opt_spec = sv.get(k).map_or(0.0, |s| s * s);

    let mut outcomes = Vec::with_capacity(trials);
    for trial in 0..trials {
        let seed = sub_seed(config.seed, trial as u64);
        let h = linear_time_svd(a, &RsvdConfig { seed, ..*config })?;
        let (fro_err_sq, spectral_err_sq) = projection_errors(a, &h)?;
        outcomes.push(TrialOutcome {
            trial,
            seed,
            fro_err_sq,
            spectral_err_sq,
        });
    }

    let checks = BoundVariant::ALL
        .iter()
        .map(|&variant| {
            let (opt, errs): (f64, Vec<f64>) = if variant.is_spectral() {
                (opt_spec, outcomes.iter().map(|o| o.spectral_err_sq).collect())
            } else {
                (opt_fro, outcomes.iter().map(|o| o.fro_err_sq).collect())
            };
            let bound_rhs = opt + eps * fro_norm_sq;
            let n = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / n;
            let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let std_error = (var / n).sqrt();
            let pass_rate = errs.iter().filter(|&&e| e <= bound_rhs).count() as f64 / n;
            let holds = if variant.is_expectation() {
                mean <= bound_rhs + 2.0 * std_error
            } else {
                pass_rate >= 1.0 - config.delta - 0.05
            };
            let required_c = config.required_c(variant, eps);
            BoundCheck {
                variant,
                required_c,
                c_sufficient: config.c >= required_c,
                opt_err_sq: opt,
                bound_rhs,
                pass_rate,
                mean_err_sq: mean,
                std_error,
                holds,
            }
        })
        .collect();

    Ok(BoundsReport {
        config: *config,
        eps,
        eta: config.eta(),
        fro_norm_sq,
        trials: outcomes,
        checks,
    })
}
