//! First- and second-order iterative optimizers with trajectory recording.
//!
//! Newton-type steps are undamped: there is no line search, only a global
//! `step_scale` multiplier.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, sym_eig, EigenDecomposition, LinalgError, SymmetricMatrix, TruncatedSpectrum, Vector};
use crate::objectives::Objective;

/// Eigenvalues with `|λ| < SINGULAR_RTOL · max|λ|` make Newton and SFN steps
/// fail instead of being regularised.
pub const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("non-finite {what} at iterate")]
    Divergence { what: &'static str },
    #[error("Hessian is singular: |λ| = {lambda:e} against max |λ| = {max_abs:e}")]
    Singular { lambda: f64, max_abs: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("top-k truncation asked for k = {k} of {dim} eigenvalues")]
    TopK { k: usize, dim: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, OptimizerError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[serde(rename = "gd")]
    GradientDescent,
    Newton,
    #[serde(rename = "sfn")]
    SaddleFreeNewton,
    #[serde(rename = "tsfn")]
    TruncatedSaddleFreeNewton,
}

impl std::str::FromStr for Method {
    type Err = OptimizerError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Method::GradientDescent),
            "newton" => Ok(Method::Newton),
            "sfn" => Ok(Method::SaddleFreeNewton),
            "tsfn" => Ok(Method::TruncatedSaddleFreeNewton),
            other => Err(OptimizerError::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// How many eigendirections the truncated method keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// The `k` largest `|λ|`; converted to the threshold `|λ_k|`.
    TopK(usize),
    Threshold(f64),
}

impl Truncation {
    /// Absolute threshold for a spectrum sorted by descending magnitude.
    pub fn threshold(&self, eig: &EigenDecomposition) -> Result<f64> {
        match *self {
            Truncation::Threshold(t) => Ok(t),
            Truncation::TopK(k) => {
                if k == 0 || k > eig.dim() {
                    return Err(OptimizerError::TopK { k, dim: eig.dim() });
                }
                let t = eig.eigenvalues[k - 1].abs();
                if t == 0.0 {
                    return Err(OptimizerError::Linalg(LinalgError::InvalidThreshold(t)));
                }
                Ok(t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Gradient-descent learning rate.
    pub eta: f64,
    /// Required for the truncated method, ignored otherwise.
    pub truncation: Option<Truncation>,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Multiplies every step; 1 gives the plain methods.
    pub step_scale: f64,
    /// Recorded for provenance; every method here is deterministic.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::GradientDescent,
            eta: 1e-3,
            truncation: None,
            max_iter: 1000,
            grad_tol: 1e-8,
            step_scale: 1.0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(OptimizerError::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(OptimizerError::Config(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(OptimizerError::Config(format!(
                "step_scale must be positive, got {}",
                self.step_scale
            )));
        }
        if self.method == Method::TruncatedSaddleFreeNewton && self.truncation.is_none() {
            return Err(OptimizerError::Config("tsfn needs either k or a threshold".into()));
        }
        Ok(())
    }
}

fn finite_gradient<O: Objective + ?Sized>(obj: &O, x: &Vector) -> Result<Vector> {
    let g = obj.gradient(x);
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(OptimizerError::Divergence { what: "gradient" })
    }
}

/// `x − η ∇f(x)`
pub fn gd_step<O: Objective + ?Sized>(obj: &O, x: &Vector, eta: f64) -> Result<Vector> {
    if !(eta > 0.0) {
        return Err(OptimizerError::Config(format!("eta must be positive, got {eta}")));
    }
    let g = finite_gradient(obj, x)?;
    Ok(x - g * eta)
}

fn nonsingular_eig(h: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let eig = sym_eig(h)?;
    let max_abs = eig.max_abs();
    if let Some(&lambda) = eig.eigenvalues.iter().find(|l| l.abs() < SINGULAR_RTOL * max_abs || max_abs == 0.0) {
        return Err(OptimizerError::Singular { lambda, max_abs });
    }
    Ok(eig)
}

/// `Σ f(λ_i)⁻¹ s_i s_iᵀ g` over all eigenpairs.
fn spectral_solve(eig: &EigenDecomposition, g: &Vector, abs: bool) -> Vector {
    let mut coords = eig.coordinates(g);
    for (c, &l) in coords.iter_mut().zip(&eig.eigenvalues) {
        *c /= if abs { l.abs() } else { l };
    }
    &eig.eigenvectors * coords
}

/// Newton direction `H⁻¹ g`.
pub fn newton_direction(h: &SymmetricMatrix, g: &Vector) -> Result<Vector> {
    Ok(spectral_solve(&nonsingular_eig(h)?, g, false))
}

/// Saddle-free direction `|H|⁻¹ g`.
pub fn sfn_direction(h: &SymmetricMatrix, g: &Vector) -> Result<Vector> {
    Ok(spectral_solve(&nonsingular_eig(h)?, g, true))
}

/// Truncated saddle-free direction `|H_k|⁻¹ g`; components of `g` outside the
/// retained eigenspace get no step.
pub fn tsfn_direction(h: &SymmetricMatrix, g: &Vector, truncation: Truncation) -> Result<(Vector, TruncatedSpectrum)> {
    let eig = sym_eig(h)?;
    let threshold = truncation.threshold(&eig)?;
    let spectrum = linalg::truncate(&eig, threshold)?;
    Ok((spectrum.apply_abs_inverse(g), spectrum))
}

/// `x − H⁻¹ ∇f(x)`
pub fn newton_step<O: Objective + ?Sized>(obj: &O, x: &Vector) -> Result<Vector> {
    let g = finite_gradient(obj, x)?;
    Ok(x - newton_direction(&obj.hessian(x), &g)?)
}

/// `x − |H|⁻¹ ∇f(x)`
pub fn sfn_step<O: Objective + ?Sized>(obj: &O, x: &Vector) -> Result<Vector> {
    let g = finite_gradient(obj, x)?;
    Ok(x - sfn_direction(&obj.hessian(x), &g)?)
}

/// `x − |H_k|⁻¹ ∇f(x)` together with the retained spectrum.
pub fn tsfn_step<O: Objective + ?Sized>(obj: &O, x: &Vector, truncation: Truncation) -> Result<(Vector, TruncatedSpectrum)> {
    let g = finite_gradient(obj, x)?;
    let (d, spectrum) = tsfn_direction(&obj.hessian(x), &g, truncation)?;
    Ok((x - d, spectrum))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Status {
    Converged,
    MaxIterations,
    Diverged { reason: String },
}

/// Per-iterate record. Row `t > 0` carries the step that produced `x^t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub iterates: Vec<Vector>,
    pub values: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub k_used: Vec<Option<usize>>,
    pub kappa_eff: Vec<Option<f64>>,
    pub step_norms: Vec<Option<f64>>,
    pub status: Status,
}

impl Trajectory {
    fn start(x0: Vector, f: f64, gnorm: f64) -> Self {
        Self {
            iterates: vec![x0],
            values: vec![f],
            grad_norms: vec![gnorm],
            k_used: vec![None],
            kappa_eff: vec![None],
            step_norms: vec![None],
            status: Status::MaxIterations,
        }
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn final_point(&self) -> &Vector {
        self.iterates.last().expect("trajectory holds the start point")
    }

    pub fn final_grad_norm(&self) -> f64 {
        *self.grad_norms.last().expect("trajectory holds the start point")
    }
}

/// Iterates until `‖∇f‖ ≤ grad_tol` or `max_iter` steps. Non-finite values
/// and failed steps end the run with [`Status::Diverged`]; the iterates up
/// to that point are kept.
pub fn run<O: Objective + ?Sized>(obj: &O, config: &OptimizerConfig, x0: &Vector) -> Result<Trajectory> {
    config.validate()?;
    if x0.len() != obj.dim() {
        return Err(OptimizerError::Config(format!(
            "start point has length {} but the objective has dimension {}",
            x0.len(),
            obj.dim()
        )));
    }
    let mut x = x0.clone();
    let mut g = obj.gradient(&x);
    let f0 = obj.value(&x);
    if !f0.is_finite() || !g.iter().all(|v| v.is_finite()) {
        let mut t = Trajectory::start(x, f0, f64::INFINITY);
        t.status = Status::Diverged {
            reason: "non-finite value at start".into(),
        };
        return Ok(t);
    }
    let mut traj = Trajectory::start(x.clone(), f0, g.norm());

    loop {
        if traj.final_grad_norm() <= config.grad_tol {
            traj.status = Status::Converged;
            break;
        }
        if traj.iterations() >= config.max_iter {
            traj.status = Status::MaxIterations;
            break;
        }
        let stepped = match config.method {
            Method::GradientDescent => Ok((&g * config.eta, None)),
            Method::Newton => newton_direction(&obj.hessian(&x), &g).map(|d| (d, None)),
            Method::SaddleFreeNewton => sfn_direction(&obj.hessian(&x), &g).map(|d| (d, None)),
            Method::TruncatedSaddleFreeNewton => {
                let truncation = config.truncation.expect("validated");
                tsfn_direction(&obj.hessian(&x), &g, truncation).map(|(d, s)| (d, Some(s)))
            }
        };
        let (direction, spectrum) = match stepped {
            Ok(v) => v,
            Err(e) => {
                traj.status = Status::Diverged { reason: e.to_string() };
                break;
            }
        };
        let step = direction * config.step_scale;
        let next = &x - &step;
        let f = obj.value(&next);
        let g_next = obj.gradient(&next);
        if !f.is_finite() || !g_next.iter().all(|v| v.is_finite()) || !next.iter().all(|v| v.is_finite()) {
            traj.status = Status::Diverged {
                reason: "objective or gradient became non-finite".into(),
            };
            break;
        }
        x = next;
        g = g_next;
        traj.iterates.push(x.clone());
        traj.values.push(f);
        traj.grad_norms.push(g.norm());
        traj.k_used.push(spectrum.as_ref().map(|s| s.k()));
        traj.kappa_eff.push(spectrum.as_ref().map(|s| s.kappa_eff));
        traj.step_norms.push(Some(step.norm()));
    }
    Ok(traj)
}
