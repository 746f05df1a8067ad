//! Conditional rotation on the eigenvalue register, postselection, and the
//! threshold filter.

use super::{EigenReadout, PipelineConfig, QsimError, QuantumState, Result};
use crate::linalg::Vector;

/// State after postselecting the rotation ancilla on `|1⟩`.
#[derive(Debug, Clone)]
pub struct InvertedState {
    /// `(readout entry index, normalised amplitude)` over retained
    /// eigencomponents.
    pub amplitudes: Vec<(usize, f64)>,
    /// Probability of the `|1⟩` outcome.
    pub p_success: f64,
    /// Rotation constant used.
    pub c_rot: f64,
    /// Estimated `|λ̄|` of each retained component, aligned with `amplitudes`.
    pub abs_lambdas: Vec<f64>,
}

impl InvertedState {
    pub fn k(&self) -> usize {
        self.amplitudes.len()
    }

    /// `1 / p_success` postselection attempts on average.
    pub fn expected_repetitions(&self) -> f64 {
        1.0 / self.p_success
    }

    /// `1 / sqrt(p_success)` rounds with amplitude amplification.
    pub fn amplified_repetitions(&self) -> f64 {
        1.0 / self.p_success.sqrt()
    }

    /// The state in the computational basis, `Σ a_i u_i`.
    pub fn to_state(&self, readout: &EigenReadout) -> Result<QuantumState> {
        let n = readout.eigenvectors.nrows();
        let mut v = Vector::zeros(n);
        for &(idx, a) in &self.amplitudes {
            let col = readout.entries[idx].index;
            v += readout.eigenvectors.column(col) * a;
        }
        QuantumState::from_real(v.as_slice())
    }
}

/// Rotates the ancilla by `R_y(2 asin(c / |λ̄_i|))` on each eigencomponent
/// and postselects `|1⟩`.
///
/// A component is kept when its register value reaches the threshold grid
/// point, i.e. `λ̄² ≥ (τ / ‖H‖_F)² − δ/2`; a zero register carries no
/// eigenvalue information and is always dropped. Kept amplitudes become
/// `η_i c / |λ̄_i|` before renormalisation.
pub fn conditional_invert(readout: &EigenReadout, config: &PipelineConfig) -> Result<InvertedState> {
    config.validate()?;
    let cut = (config.threshold / readout.scale).powi(2) - 0.5 * readout.grid_unit;
    let retained: Vec<usize> = readout
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.lambda_sq > 0.0 && e.lambda_sq >= cut)
        .map(|(i, _)| i)
        .collect();
    if retained.is_empty() {
        return Err(QsimError::EmptyInversion);
    }
    let abs_lambdas: Vec<f64> = retained.iter().map(|&i| readout.abs_lambda(&readout.entries[i])).collect();
    let min_retained = abs_lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_rot = config.c_rot.unwrap_or(min_retained);
    if c_rot > min_retained * (1.0 + 1e-12) {
        return Err(QsimError::Config(format!(
            "c_rot = {c_rot} exceeds the smallest retained |λ̄| = {min_retained}"
        )));
    }

    // |1⟩ branch of the rotated ancilla, component by component
    let mut branch = Vec::with_capacity(retained.len());
    for (&i, &abs_l) in retained.iter().zip(&abs_lambdas) {
        let half_angle = (c_rot / abs_l).min(1.0).asin();
        branch.push((i, readout.entries[i].eta * half_angle.sin()));
    }
    let p_success: f64 = branch.iter().map(|(_, a)| a * a).sum();
    if p_success == 0.0 {
        return Err(QsimError::EmptyInversion);
    }
    let norm = p_success.sqrt();
    Ok(InvertedState {
        amplitudes: branch.into_iter().map(|(i, a)| (i, a / norm)).collect(),
        p_success,
        c_rot,
        abs_lambdas,
    })
}
