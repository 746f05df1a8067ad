//! State preparation: amplitude-encoded gradients and the density matrix
//! `ρ = HHᵀ / tr(HHᵀ)`.

use std::collections::HashMap;

use super::{DensityMatrix, Mode, QsimError, QuantumState, Result, MAX_CIRCUIT_DIM, MAX_ORACLE_DIM};
use crate::linalg::{Matrix, SymmetricMatrix};

/// `grad / ‖grad‖` on `⌈log₂ N⌉` qubits, zero padded.
pub fn encode_gradient(grad: &[f64]) -> Result<QuantumState> {
    if grad.is_empty() {
        return Err(QsimError::Dimension("empty gradient".into()));
    }
    let mut padded = grad.to_vec();
    padded.resize(grad.len().next_power_of_two(), 0.0);
    QuantumState::from_real(&padded)
}

/// Zero-pads `h` to the next power-of-two dimension. The padding adds
/// zero eigenvalues only.
pub fn pad_symmetric(h: &SymmetricMatrix) -> SymmetricMatrix {
    let n = h.dim();
    let p = n.next_power_of_two();
    if p == n {
        return h.clone();
    }
    let mut m = Matrix::zeros(p, p);
    m.view_mut((0, 0), (n, n)).copy_from(h.as_matrix());
    SymmetricMatrix::symmetrize(&m)
}

/// Output of the register-level preparation.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDensity {
    pub rho: DensityMatrix,
    /// Probability that the rotation ancilla reads `|1⟩`,
    /// `‖H‖_F² / (N c)²` for the uniform start state.
    pub p_success: f64,
    /// Rotation constant used.
    pub c: f64,
}

/// `ρ ∝ HHᵀ` on the padded power-of-two space.
pub fn prepare_rho_hh(h: &SymmetricMatrix, mode: Mode) -> Result<DensityMatrix> {
    match mode {
        Mode::Oracle => {
            let h = pad_symmetric(h);
            if h.dim() > MAX_ORACLE_DIM {
                return Err(QsimError::TooLarge {
                    what: "system",
                    mode,
                    detail: format!("dimension {} above {MAX_ORACLE_DIM}", h.dim()),
                });
            }
            let m = h.as_matrix();
            let hh = m * m.transpose();
            let tr = hh.trace();
            if tr == 0.0 {
                return Err(QsimError::ZeroMatrix);
            }
            DensityMatrix::from_real(&SymmetricMatrix::symmetrize(&(hh / tr)))
        }
        Mode::Circuit => Ok(prepare_rho_hh_circuit(h, h.max_abs_entry())?.rho),
    }
}

/// Register-by-register preparation with rotation constant `c ≥ max|H_ij|`.
///
/// Registers are `i` (row), `j` (column), a value register holding a label
/// for `H_ij`, and one rotation ancilla. The stages are: uniform
/// superposition over `(i, j)`; dephasing of `j`, which leaves the ensemble
/// `Σ_j |ψ̃_j⟩⟨ψ̃_j|`; the entry oracle writing the label of `H_ij`; the
/// controlled `R_y` with amplitude `H_ij / c` on `|1⟩`; postselection on
/// `|1⟩`; uncomputation of the value register; and the partial trace over
/// `j`. Every ensemble member stays pure, so each is propagated as a state
/// vector over `(i, value, ancilla)` with its `j` fixed.
pub fn prepare_rho_hh_circuit(h: &SymmetricMatrix, c: f64) -> Result<PreparedDensity> {
    let h = pad_symmetric(h);
    let n = h.dim();
    if n > MAX_CIRCUIT_DIM {
        return Err(QsimError::TooLarge {
            what: "system",
            mode: Mode::Circuit,
            detail: format!("dimension {n} above {MAX_CIRCUIT_DIM}"),
        });
    }
    let max = h.max_abs_entry();
    if max == 0.0 {
        return Err(QsimError::ZeroMatrix);
    }
    if !(c >= max) {
        return Err(QsimError::RotationOverflow { c, max });
    }

    // label 0 is the empty register and doubles as the label of H_ij = 0
    let mut labels: HashMap<u64, usize> = HashMap::new();
    let mut values = vec![0.0];
    for i in 0..n {
        for j in 0..n {
            let v = h.get(i, j);
            if v != 0.0 {
                labels.entry(v.to_bits()).or_insert_with(|| {
                    values.push(v);
                    values.len() - 1
                });
            }
        }
    }
    let label = |i: usize, j: usize| -> usize {
        let v = h.get(i, j);
        if v == 0.0 {
            0
        } else {
            labels[&v.to_bits()]
        }
    };
    let vdim = values.len().next_power_of_two();
    let idx = |i: usize, v: usize, a: usize| (i * vdim + v) * 2 + a;
    let block = n * vdim * 2;

    let oracle = |psi: &[f64], j: usize| -> Vec<f64> {
        let mut out = vec![0.0; block];
        for i in 0..n {
            let l = label(i, j);
            for v in 0..vdim {
                for a in 0..2 {
                    out[idx(i, v ^ l, a)] = psi[idx(i, v, a)];
                }
            }
        }
        out
    };

    let amp = 1.0 / n as f64;
    let mut rho = Matrix::zeros(n, n);
    let mut p_success = 0.0;
    for j in 0..n {
        // P_j applied to the uniform state: the j-th dephased member
        let mut psi = vec![0.0; block];
        for i in 0..n {
            psi[idx(i, 0, 0)] = amp;
        }

        psi = oracle(&psi, j);

        for i in 0..n {
            for v in 1..values.len() {
                let s = values[v] / c;
                let co = (1.0 - s * s).max(0.0).sqrt();
                let (x0, x1) = (psi[idx(i, v, 0)], psi[idx(i, v, 1)]);
                psi[idx(i, v, 0)] = co * x0 - s * x1;
                psi[idx(i, v, 1)] = s * x0 + co * x1;
            }
        }

        for i in 0..n {
            for v in 0..vdim {
                psi[idx(i, v, 0)] = 0.0;
            }
        }

        psi = oracle(&psi, j);

        let phi: Vec<f64> = (0..n).map(|i| psi[idx(i, 0, 1)]).collect();
        let kept: f64 = phi.iter().map(|x| x * x).sum();
        let total: f64 = psi.iter().map(|x| x * x).sum();
        debug_assert!((total - kept).abs() <= 1e-14, "value register not uncomputed");
        p_success += kept;
        for a in 0..n {
            for b in 0..n {
                rho[(a, b)] += phi[a] * phi[b];
            }
        }
    }
    let rho = DensityMatrix::from_real(&SymmetricMatrix::symmetrize(&(rho / p_success)))?;
    Ok(PreparedDensity { rho, p_success, c })
}
