//! Sign-recovering classical readout of a real amplitude vector.
//!
//! An ancilla `A` in `|+⟩` selects between a reference register in
//! `|+⟩^{⊗p}` and the target state `|α⟩`:
//! `(|0⟩_A |+⟩^{⊗p} + |1⟩_A |α⟩) / √2`. Measuring `A` in the `±` basis and
//! the register in the computational basis gives
//! `P(±, j) = (a ± α_j)² / 4` with `a = 2^{-p/2}`, so
//! `α_j = (P(+, j) − P(−, j)) / a` exactly, sign included.
//!
//! Postselecting on `+` alone leaves `(a + α_j)² / (2 + 2 a Σα)`, which does
//! not fix the sign of `α_j` once `|α_j| > a`; both branches are therefore
//! kept. [`branch_distribution`] exposes the normalised `+` branch.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{QsimError, QuantumState, Result};
use crate::rng::seeded;

/// Something that can prepare the same state on demand.
pub trait StateSource {
    fn prepare(&self) -> Result<QuantumState>;
}

impl StateSource for QuantumState {
    fn prepare(&self) -> Result<QuantumState> {
        Ok(self.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedReadout {
    /// Estimated amplitudes, padded to `2^p`.
    pub alpha: Vec<f64>,
    /// Standard error of each estimate; zero for exact readout.
    pub std_error: Vec<f64>,
    /// `|α̂_j| < 2 · SE_j`: the sign is not resolved at this shot count.
    pub uncertain: Vec<bool>,
    pub shots: u64,
    pub p: u32,
}

impl SignedReadout {
    pub fn n_uncertain(&self) -> usize {
        self.uncertain.iter().filter(|&&u| u).count()
    }
}

fn padded_alpha(state: &QuantumState, p: u32) -> Result<Vec<f64>> {
    let width = 1usize << p;
    if state.dim() > width {
        return Err(QsimError::Dimension(format!(
            "2^p = {width} is smaller than the state dimension {}",
            state.dim()
        )));
    }
    let mut alpha = state.real_amplitudes();
    alpha.resize(width, 0.0);
    Ok(alpha)
}

/// Probability of the `+` ancilla outcome and the exactly normalised
/// register distribution `(a + α_j)² / (2 + 2a Σ_j α_j)` that follows it.
pub fn branch_distribution(state: &QuantumState, p: u32) -> Result<(f64, Vec<f64>)> {
    let alpha = padded_alpha(state, p)?;
    let a = (-(p as f64) / 2.0).exp2();
    let overlap: f64 = alpha.iter().map(|x| a * x).sum();
    let norm2 = 2.0 + 2.0 * overlap;
    let dist = alpha.iter().map(|x| (a + x).powi(2) / norm2).collect();
    Ok((norm2 / 4.0, dist))
}

/// Estimates the real amplitudes of the source state, signs included.
/// `shots = 0` inverts the exact distribution.
pub fn readout_signed(source: &dyn StateSource, p: u32, shots: u64, seed: u64) -> Result<SignedReadout> {
    let state = source.prepare()?;
    let alpha = padded_alpha(&state, p)?;
    let a = (-(p as f64) / 2.0).exp2();
    let joint: Vec<(f64, f64)> = alpha.iter().map(|x| ((a + x).powi(2) / 4.0, (a - x).powi(2) / 4.0)).collect();

    if shots == 0 {
        return Ok(SignedReadout {
            alpha: joint.iter().map(|(plus, minus)| (plus - minus) / a).collect(),
            std_error: vec![0.0; alpha.len()],
            uncertain: vec![false; alpha.len()],
            shots,
            p,
        });
    }

    let probs: Vec<f64> = joint.iter().flat_map(|&(plus, minus)| [plus, minus]).collect();
    let counts = multinomial(&mut seeded(seed), shots, &probs);
    let s = shots as f64;
    let mut est = Vec::with_capacity(alpha.len());
    let mut se = Vec::with_capacity(alpha.len());
    for j in 0..alpha.len() {
        let fp = counts[2 * j] as f64 / s;
        let fm = counts[2 * j + 1] as f64 / s;
        est.push((fp - fm) / a);
        let var = (fp + fm - (fp - fm).powi(2)).max(0.0) / (a * a);
        se.push((var / s).sqrt());
    }
    let uncertain = est.iter().zip(&se).map(|(e, s)| e.abs() < 2.0 * s).collect();
    Ok(SignedReadout {
        alpha: est,
        std_error: se,
        uncertain,
        shots,
        p,
    })
}

/// Multinomial counts by sequential conditional binomials.
fn multinomial<R: Rng + ?Sized>(rng: &mut R, shots: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0; probs.len()];
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        counts[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    counts
}
