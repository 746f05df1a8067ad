//! Exact desk-scale simulation of the quantum truncated saddle-free Newton
//! step: amplitude encoding, preparation of `ρ ∝ HHᵀ`, density-matrix
//! exponentiation by partial swaps, phase estimation, conditional rotation
//! with postselection, and a sign-recovering readout.
//!
//! Two modes share every interface. `Circuit` runs the register-level
//! calculus on small systems; `Oracle` substitutes exact linear algebra for
//! the register stages so equivalence tests scale to larger `N`.

mod exponentiation;
mod inversion;
mod phase;
mod pipeline;
mod prep;
mod readout;

pub use exponentiation::{
    controlled_swap_blocks, density_exponentiation, exact_conjugation, swap_channel, swap_step, ControlledBlocks,
};
pub use inversion::{conditional_invert, InvertedState};
pub use phase::{pe_bits_for_precision, phase_estimation, EigenReadout, ReadoutEntry};
pub use pipeline::{fidelity_allowance, hybrid_step, HybridDiagnostics};
pub use prep::{encode_gradient, pad_symmetric, prepare_rho_hh, prepare_rho_hh_circuit, PreparedDensity};
pub use readout::{branch_distribution, readout_signed, SignedReadout, StateSource};

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{sym_eigvals, LinalgError, SymmetricMatrix};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for the normalisation, hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-10;

/// Largest system register simulated in circuit mode.
pub const MAX_CIRCUIT_DIM: usize = 16;
/// Largest system handled in oracle mode.
pub const MAX_ORACLE_DIM: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("gradient is zero; the iterate is already stationary")]
    ZeroGradient,
    #[error("state norm² is {0}, expected 1")]
    NotNormalized(f64),
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    Trace(f64),
    #[error("matrix has eigenvalue {0:e} below zero")]
    NotPositive(f64),
    #[error("rotation constant {c} is below max |H_ij| = {max}")]
    RotationOverflow { c: f64, max: f64 },
    #[error("evolution time {t} wraps phase: λ²_max · t = {phase} ≥ 2π")]
    Wraparound { t: f64, phase: f64 },
    #[error("{what} too large for {mode:?} mode: {detail}")]
    TooLarge {
        what: &'static str,
        mode: Mode,
        detail: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("every eigencomponent fell below the threshold")]
    EmptyInversion,
    #[error("Hessian has zero Frobenius norm")]
    ZeroMatrix,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, QsimError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Circuit,
    Oracle,
}

impl std::str::FromStr for Mode {
    type Err = QsimError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circuit" => Ok(Mode::Circuit),
            "oracle" => Ok(Mode::Oracle),
            other => Err(QsimError::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// Pure state on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
}

impl QuantumState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(QsimError::NotPowerOfTwo(len));
        }
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > STATE_TOL {
            return Err(QsimError::NotNormalized(norm2));
        }
        Ok(Self { amplitudes })
    }

    /// Normalises a real vector whose length is a power of two.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QsimError::ZeroGradient);
        }
        Self::new(CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| C64::new(v / norm, 0.0)),
        ))
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut a = CVector::zeros(1 << n_qubits);
        a[index] = C64::new(1.0, 0.0);
        Self { amplitudes: a }
    }

    pub fn n_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Real parts of the amplitudes.
    pub fn real_amplitudes(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.re).collect()
    }

    pub fn overlap(&self, other: &QuantumState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `sqrt(2 (1 − Re⟨a|b⟩))`
    pub fn distance(&self, other: &QuantumState) -> f64 {
        (2.0 * (1.0 - self.overlap(other).re)).max(0.0).sqrt()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(QsimError::Dimension(format!("{}×{} is not square", n, m.ncols())));
        }
        let defect = (&m - m.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if defect > STATE_TOL {
            return Err(QsimError::NotHermitian(defect));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(QsimError::Trace(tr.re));
        }
        let min = hermitian_eigvals(&m)?[0];
        if min < -STATE_TOL {
            return Err(QsimError::NotPositive(min));
        }
        Ok(Self { m })
    }

    /// Skips validation; for intermediate results of maps already known to
    /// be channels.
    pub(crate) fn unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn from_pure(state: &QuantumState) -> Self {
        let a = state.amplitudes();
        Self { m: a * a.adjoint() }
    }

    pub fn from_real(m: &SymmetricMatrix) -> Result<Self> {
        Self::new(m.as_matrix().map(|v| C64::new(v, 0.0)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Real part as a symmetric matrix; exact for the real density matrices
    /// this pipeline prepares.
    pub fn real_part(&self) -> SymmetricMatrix {
        SymmetricMatrix::symmetrize(&self.m.map(|z| z.re))
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigvals(&self.m)
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn fidelity_pure(&self, psi: &QuantumState) -> f64 {
        let a = psi.amplitudes();
        (a.adjoint() * &self.m * a)[(0, 0)].re
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        Ok(0.5 * trace_norm(&(&self.m - &other.m))?)
    }
}

/// Eigenvalues of a Hermitian matrix, ascending, from the real embedding
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is that of `m` with every value
/// doubled.
pub fn hermitian_eigvals(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.nrows();
    let embed = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut eigs = sym_eigvals(&SymmetricMatrix::symmetrize(&embed))?;
    eigs.sort_by(|a, b| a.total_cmp(b));
    Ok(eigs.into_iter().step_by(2).collect())
}

/// `Σ |λ_i|` for a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigvals(m)?.iter().map(|l| l.abs()).sum())
}

/// Parameters of the quantum pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    /// Phase-register width `b`.
    pub pe_bits: u32,
    /// Evolution time per controlled unitary; `None` picks `2π (1 − 2^{-b})`,
    /// the longest time that cannot wrap for a trace-one `ρ`.
    pub t: Option<f64>,
    /// Partial-swap steps per controlled unitary in circuit mode.
    pub n_trotter: u64,
    /// Rotation constant; `None` picks the smallest retained `|λ̄|`.
    pub c_rot: Option<f64>,
    /// Cut on `|λ|` in the units of `H`.
    pub threshold: f64,
    /// Readout samples; 0 reads the exact distribution.
    pub shots: u64,
    /// Readout reference-register width; `None` uses the system width.
    pub p: Option<u32>,
    pub mode: Mode,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            pe_bits: 12,
            t: None,
            n_trotter: 1 << 20,
            c_rot: None,
            threshold: 1e-6,
            shots: 0,
            p: None,
            mode: Mode::Oracle,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pe_bits == 0 || self.pe_bits > 30 {
            return Err(QsimError::Config(format!("pe_bits must be in 1..=30, got {}", self.pe_bits)));
        }
        if let Some(t) = self.t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(QsimError::Config(format!("t must be positive, got {t}")));
            }
        }
        if self.n_trotter == 0 {
            return Err(QsimError::Config("n_trotter must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(QsimError::Config(format!(
                "threshold must be positive, got {}",
                self.threshold
            )));
        }
        if let Some(c) = self.c_rot {
            if !(c > 0.0 && c <= self.threshold) {
                return Err(QsimError::Config(format!(
                    "c_rot must lie in (0, threshold = {}], got {c}",
                    self.threshold
                )));
            }
        }
        Ok(())
    }

    pub fn evolution_time(&self) -> f64 {
        self.t
            .unwrap_or_else(|| 2.0 * PI * (1.0 - (-(self.pe_bits as f64)).exp2()))
    }

    /// Spacing of the phase-register grid in eigenvalues of `ρ`:
    /// `2^{-b} · 2π / t`.
    pub fn grid_unit(&self) -> f64 {
        2.0 * PI / (self.evolution_time() * (self.pe_bits as f64).exp2())
    }
}

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Uniformly random pure state on `dim` levels.
pub fn random_state<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> QuantumState {
    let v: CVector = CVector::from_fn(dim, |_, _| {
        C64::new(crate::rng::gaussian(rng), crate::rng::gaussian(rng))
    });
    let n = v.norm();
    QuantumState { amplitudes: v / c(n) }
}

/// Full-rank random density matrix `GG† / tr(GG†)`.
pub fn random_density<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(crate::rng::gaussian(rng), crate::rng::gaussian(rng))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix { m: m / tr }
}
