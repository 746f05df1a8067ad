//! Phase estimation of `e^{−iρt}` on the eigencomponents of the encoded
//! gradient.
//!
//! The phase register reads `m ≈ 2^b · (−μt / 2π mod 1)` for an eigenvalue
//! `μ` of `ρ`, so the estimate is `μ̄ = ((2^b − m) mod 2^b) · δ` with grid
//! unit `δ = 2^{-b} · 2π / t`.

use std::f64::consts::PI;

use super::exponentiation::{controlled_swap_blocks, matrix_power};
use super::prep::pad_symmetric;
use super::{c, prepare_rho_hh, CMatrix, CVector, Mode, PipelineConfig, QsimError, QuantumState, Result, C64};
use crate::linalg::{sym_eig, Matrix, SymmetricMatrix, Vector};

/// Largest `N⁵ · 2^b` simulated in circuit mode; one register distribution
/// per eigenvector costs about `b · N⁴ · 2^b` operations.
const CIRCUIT_BUDGET: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutEntry {
    /// Register estimate of the `ρ` eigenvalue `λ² / ‖H‖_F²`.
    pub lambda_sq: f64,
    /// Amplitude of the gradient state on this eigenvector.
    pub eta: f64,
    /// Column of `eigenvectors`.
    pub index: usize,
}

#[derive(Debug, Clone)]
pub struct EigenReadout {
    pub entries: Vec<ReadoutEntry>,
    /// Eigenvectors of `ρ`, ordered by descending eigenvalue.
    pub eigenvectors: Matrix,
    /// Exact eigenvalues of `ρ`, aligned with `entries`.
    pub exact_lambda_sq: Vec<f64>,
    /// `‖H‖_F`; `sqrt(λ̄²) · scale` estimates `|λ|` of `H`.
    pub scale: f64,
    pub grid_unit: f64,
    pub pe_bits: u32,
    pub t: f64,
    /// Probability of the reported register value, circuit mode only.
    pub peak_probability: Option<Vec<f64>>,
}

impl EigenReadout {
    /// Estimated `|λ_i|` in the units of `H`.
    pub fn abs_lambda(&self, entry: &ReadoutEntry) -> f64 {
        entry.lambda_sq.max(0.0).sqrt() * self.scale
    }
}

/// Rounds `μ` to the register grid the way an ideal register would report it.
fn rounded_estimate(mu: f64, bits: u32, t: f64) -> f64 {
    let size = 1u64 << bits;
    let phase = (-mu * t / (2.0 * PI)).rem_euclid(1.0);
    let m = ((phase * size as f64).round() as u64) % size;
    register_to_estimate(m, bits, t)
}

fn register_to_estimate(m: u64, bits: u32, t: f64) -> f64 {
    let size = 1u64 << bits;
    ((size - m) % size) as f64 * 2.0 * PI / (t * size as f64)
}

/// Estimates every eigenvalue of `ρ = HHᵀ / ‖H‖_F²` together with the
/// amplitude of `chi` on its eigenvector.
///
/// Oracle mode rounds the exact phases to `b` bits. Circuit mode computes
/// the full register distribution for each eigenvector input under
/// controlled powers of the partial-swap channel followed by the inverse
/// QFT, and reports the most likely register value.
pub fn phase_estimation(h: &SymmetricMatrix, chi: &QuantumState, config: &PipelineConfig) -> Result<EigenReadout> {
    config.validate()?;
    let hp = pad_symmetric(h);
    if hp.dim() != chi.dim() {
        return Err(QsimError::Dimension(format!(
            "Hessian pads to {} but the state has {} amplitudes",
            hp.dim(),
            chi.dim()
        )));
    }
    let rho = prepare_rho_hh(h, config.mode)?;
    let eig = sym_eig(&rho.real_part())?;
    let t = config.evolution_time();
    let bits = config.pe_bits;
    let mu_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if mu_max * t >= 2.0 * PI {
        return Err(QsimError::Wraparound { t, phase: mu_max * t });
    }

    let chi_re = Vector::from_iterator(chi.dim(), chi.amplitudes().iter().map(|a| a.re));
    let etas = eig.eigenvectors.tr_mul(&chi_re);
    let n = hp.dim();

    let (estimates, peak) = match config.mode {
        Mode::Oracle => (
            eig.eigenvalues.iter().map(|&mu| rounded_estimate(mu, bits, t)).collect::<Vec<_>>(),
            None,
        ),
        Mode::Circuit => {
            let cost = (n as u64).pow(5).saturating_mul(1u64 << bits);
            if cost > CIRCUIT_BUDGET {
                return Err(QsimError::TooLarge {
                    what: "phase register",
                    mode: Mode::Circuit,
                    detail: format!("N⁵·2^b = {cost} above {CIRCUIT_BUDGET}"),
                });
            }
            let register = Register::new(rho.matrix(), t, config.n_trotter, bits);
            let mut estimates = Vec::with_capacity(n);
            let mut peaks = Vec::with_capacity(n);
            for k in 0..n {
                let u: CVector = eig.eigenvectors.column(k).map(c);
                let dist = register.distribution(&(&u * u.adjoint()));
                let (m, p) = dist
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (m, p)| if p > best.1 { (m, p) } else { best });
                estimates.push(register_to_estimate(m as u64, bits, t));
                peaks.push(p);
            }
            (estimates, Some(peaks))
        }
    };

    let entries = estimates
        .iter()
        .enumerate()
        .map(|(index, &lambda_sq)| ReadoutEntry {
            lambda_sq,
            eta: etas[index],
            index,
        })
        .collect();
    Ok(EigenReadout {
        entries,
        eigenvectors: eig.eigenvectors,
        exact_lambda_sq: eig.eigenvalues,
        scale: h.frobenius_norm(),
        grid_unit: config.grid_unit(),
        pe_bits: bits,
        t,
        peak_probability: peak,
    })
}

/// Controlled powers `U^{2^k}` of the partial-swap channel, one per register
/// qubit, as block maps.
struct Register {
    bits: u32,
    /// `A^{n·2^k}` and its adjoint.
    left: Vec<(CMatrix, CMatrix)>,
    /// `E^{n·2^k}` on column-major `vec(X)`.
    channel: Vec<CMatrix>,
}

impl Register {
    fn new(rho: &CMatrix, t: f64, n_trotter: u64, bits: u32) -> Self {
        let blocks = controlled_swap_blocks(rho, t / n_trotter as f64);
        let mut a = matrix_power(&blocks.a, n_trotter);
        let mut e = matrix_power(&blocks.channel, n_trotter);
        let mut left = Vec::with_capacity(bits as usize);
        let mut channel = Vec::with_capacity(bits as usize);
        for k in 0..bits {
            left.push((a.clone(), a.adjoint()));
            channel.push(e.clone());
            if k + 1 < bits {
                a = &a * &a;
                e = &e * &e;
            }
        }
        Self { bits, left, channel }
    }

    /// Register distribution after Hadamards, the controlled powers and the
    /// inverse QFT, for system input `sigma`.
    ///
    /// The joint state is `Σ_ab |a⟩⟨b| ⊗ X_ab`; outcome `m` has probability
    /// `4^{-b} tr Ψ_{b−1}(… Ψ_0(σ))` with
    /// `Ψ_k(X) = X + e^{−iφ_k} A_k X + e^{iφ_k} X A_k† + E_k(X)`,
    /// `φ_k = 2π m 2^k / 2^b`.
    fn distribution(&self, sigma: &CMatrix) -> Vec<f64> {
        let size = 1u64 << self.bits;
        let n = sigma.nrows();
        let norm = (4.0f64).powi(self.bits as i32);
        (0..size)
            .map(|m| {
                let mut x = sigma.clone();
                for k in 0..self.bits as usize {
                    let turn = ((m << k) % size) as f64 / size as f64;
                    let w = C64::from_polar(1.0, -2.0 * PI * turn);
                    let (a, a_adj) = &self.left[k];
                    let evolved = &self.channel[k] * CVector::from_column_slice(x.as_slice());
                    let e = CMatrix::from_column_slice(n, n, evolved.as_slice());
                    x = &x + a * &x * w + &x * a_adj * w.conj() + e;
                }
                x.trace().re / norm
            })
            .collect()
    }
}

/// Smallest register width whose grid unit `δ` (at the default evolution
/// time) satisfies `δ ≤ ε · μ_min`. For eigenvalues of `ρ` at least `μ_min`
/// this bounds the distance between the normalised estimated and exact
/// inverted states by about `ε`; the total evolution time `t · 2^b` then
/// grows like `1 / (ε μ_min)`.
pub fn pe_bits_for_precision(mu_min: f64, eps: f64) -> u32 {
    assert!(mu_min > 0.0 && eps > 0.0);
    let target = 1.0 + 1.0 / (eps * mu_min);
    target.log2().ceil().max(1.0) as u32
}
