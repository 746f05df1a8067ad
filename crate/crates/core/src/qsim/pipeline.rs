//! The full hybrid step: gradient encoding, `ρ ∝ HHᵀ`, phase estimation,
//! conditional inversion and signed readout.

use serde::Serialize;

use super::{
    conditional_invert, encode_gradient, phase_estimation, readout_signed, PipelineConfig, QsimError, Result,
};
use crate::linalg::{SymmetricMatrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridDiagnostics {
    pub p_success: f64,
    /// Retained eigencomponents.
    pub k: usize,
    /// Estimated `|λ̄|` of the retained components, in units of `H`.
    pub lambda_bar: Vec<f64>,
    pub c_rot: f64,
    /// `max |λ̄| / threshold`.
    pub kappa_eff: f64,
    /// Postselection rounds without amplification, `1 / p_success`.
    pub expected_repetitions: f64,
    /// Rounds with amplitude amplification, `1 / sqrt(p_success)`.
    pub amplified_repetitions: f64,
    pub pe_bits: u32,
    pub t: f64,
    pub shots: u64,
    /// Readout components whose sign was not resolved.
    pub uncertain_signs: usize,
}

/// Approximates the truncated saddle-free direction `|H_k|⁻¹ ∇f`.
///
/// The readout returns the normalised state `Σ (η_i c/|λ̄_i|) u_i / √p`;
/// multiplying by `‖∇f‖ · √p / c` undoes the encoding and rotation scales so
/// the result is directly comparable with the classical direction.
pub fn hybrid_step(h: &SymmetricMatrix, grad: &Vector, config: &PipelineConfig) -> Result<(Vector, HybridDiagnostics)> {
    config.validate()?;
    let n = h.dim();
    if grad.len() != n {
        return Err(QsimError::Dimension(format!(
            "Hessian is {n}-dimensional, gradient has {} entries",
            grad.len()
        )));
    }
    let chi = encode_gradient(grad.as_slice())?;
    let readout = phase_estimation(h, &chi, config)?;
    let inverted = conditional_invert(&readout, config)?;
    let state = inverted.to_state(&readout)?;
    let p = config.p.unwrap_or(state.n_qubits() as u32);
    let signed = readout_signed(&state, p, config.shots, config.seed)?;

    let scale = grad.norm() * inverted.p_success.sqrt() / inverted.c_rot;
    let direction = Vector::from_iterator(n, signed.alpha.iter().take(n).map(|a| a * scale));
    let max_lambda = inverted.abs_lambdas.iter().cloned().fold(0.0, f64::max);
    let diagnostics = HybridDiagnostics {
        p_success: inverted.p_success,
        k: inverted.k(),
        lambda_bar: inverted.abs_lambdas.clone(),
        c_rot: inverted.c_rot,
        kappa_eff: max_lambda / config.threshold,
        expected_repetitions: inverted.expected_repetitions(),
        amplified_repetitions: inverted.amplified_repetitions(),
        pe_bits: config.pe_bits,
        t: readout.t,
        shots: config.shots,
        uncertain_signs: signed.n_uncertain(),
    };
    Ok((direction, diagnostics))
}

/// Allowance on the cosine to the classical direction implied by the
/// phase-estimation accuracy at grid unit `delta`: every retained `|λ̄|`
/// is within a relative `δ / (2 μ_min)` of the truth, so `1 − cos` stays
/// below `2 (δ / μ_min)²`. `μ_min` is the smallest normalised `λ²` that
/// survives `threshold`.
pub fn fidelity_allowance(h: &SymmetricMatrix, threshold: f64, delta: f64) -> Result<f64> {
    let eig = crate::linalg::sym_eig(h)?;
    let f2 = h.frobenius_norm().powi(2);
    let mu_min = eig
        .eigenvalues
        .iter()
        .filter(|l| l.abs() >= threshold)
        .map(|l| l * l / f2)
        .fold(f64::INFINITY, f64::min);
    Ok(2.0 * (delta / mu_min).powi(2))
}
