//! Density-matrix exponentiation: `e^{−iρt} σ e^{iρt}` from repeated partial
//! swaps with fresh copies of `ρ`.
//!
//! With `S` the swap on the doubled space, `S² = I`, so
//! `e^{−iSΔt} = cos Δt · I − i sin Δt · S` exactly, and tracing out the copy
//! gives the closed form
//!
//! ```text
//! tr₁(e^{−iSΔt} ρ⊗σ e^{iSΔt}) = cos²Δt · σ + sin²Δt · tr(σ) ρ − i sinΔt cosΔt [ρ, σ].
//! ```

use super::{c, CMatrix, DensityMatrix, QsimError, Result, C64};

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(QsimError::Dimension(format!(
            "ρ is {}-dimensional, σ is {}-dimensional",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

pub(crate) fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, col| a[(r / br, col / bc)] * b[(r % br, col % bc)])
}

/// Swap on `C^d ⊗ C^d`: `|m⟩|n⟩ ↦ |n⟩|m⟩`.
pub(crate) fn swap_operator(d: usize) -> CMatrix {
    let mut s = CMatrix::zeros(d * d, d * d);
    for m in 0..d {
        for n in 0..d {
            s[(n * d + m, m * d + n)] = c(1.0);
        }
    }
    s
}

/// `tr` over the first factor of a `(d·d) × (d·d)` operator.
pub(crate) fn trace_first(m: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |a, b| (0..d).map(|k| m[(k * d + a, k * d + b)]).sum())
}

/// One partial swap, simulated on the doubled space with the exact unitary
/// `e^{−iSΔt}`.
pub fn swap_step(rho: &DensityMatrix, sigma: &DensityMatrix, dt: f64) -> Result<DensityMatrix> {
    check_dims(rho, sigma)?;
    let d = rho.dim();
    let s = swap_operator(d);
    let u = CMatrix::identity(d * d, d * d) * c(dt.cos()) - s * C64::new(0.0, dt.sin());
    let joint = kron(rho.matrix(), sigma.matrix());
    let out = &u * joint * u.adjoint();
    DensityMatrix::new(trace_first(&out, d))
}

/// The same map as [`swap_step`] from its closed form; linear in `x`, which
/// need not be a state.
pub fn swap_channel(rho: &CMatrix, x: &CMatrix, dt: f64) -> CMatrix {
    let (s, co) = dt.sin_cos();
    let comm = rho * x - x * rho;
    x * c(co * co) + rho * (x.trace() * s * s) - comm * C64::new(0.0, s * co)
}

/// `n_steps` partial swaps of length `t / n_steps`. The trace-distance error
/// to [`exact_conjugation`] is `O(t² / n_steps)`.
pub fn density_exponentiation(rho: &DensityMatrix, sigma: &DensityMatrix, t: f64, n_steps: u64) -> Result<DensityMatrix> {
    check_dims(rho, sigma)?;
    if n_steps == 0 {
        return Err(QsimError::Config("n_steps must be at least 1".into()));
    }
    let dt = t / n_steps as f64;
    let mut x = sigma.matrix().clone();
    for _ in 0..n_steps {
        x = swap_channel(rho.matrix(), &x, dt);
    }
    // symmetrise away rounding before validation
    let x = (&x + x.adjoint()) * c(0.5);
    DensityMatrix::new(x)
}

/// `e^{−iρt} σ e^{iρt}` from an eigendecomposition of `ρ`.
pub fn exact_conjugation(rho: &DensityMatrix, sigma: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_dims(rho, sigma)?;
    let u = unitary(rho.matrix(), t);
    let out = &u * sigma.matrix() * u.adjoint();
    Ok(DensityMatrix::unchecked((&out + out.adjoint()) * c(0.5)))
}

/// `e^{−iρt}` for Hermitian `ρ`.
pub(crate) fn unitary(rho: &CMatrix, t: f64) -> CMatrix {
    let eig = rho.clone().symmetric_eigen();
    let phases = eig
        .eigenvalues
        .map(|l| C64::new(0.0, -l * t).exp());
    &eig.eigenvectors * CMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

/// Block action of one controlled partial swap on a control ⊗ system state.
///
/// Writing the joint state as `Σ_ab |a⟩⟨b| ⊗ X_ab`, the control-`00` block
/// is untouched, `X_10 ↦ A X_10`, `X_01 ↦ X_01 A†` with
/// `A = cos Δt · I − i sin Δt · ρ`, and `X_11 ↦ E(X_11)` with `E` the
/// [`swap_channel`].
#[derive(Debug, Clone)]
pub struct ControlledBlocks {
    /// Left factor of the `10` block.
    pub a: CMatrix,
    /// `E` as an `N² × N²` matrix acting on column-major `vec(X)`.
    pub channel: CMatrix,
}

pub fn controlled_swap_blocks(rho: &CMatrix, dt: f64) -> ControlledBlocks {
    let n = rho.nrows();
    let (s, co) = dt.sin_cos();
    let a = CMatrix::identity(n, n) * c(co) - rho * C64::new(0.0, s);
    let mut channel = CMatrix::zeros(n * n, n * n);
    for q in 0..n {
        for p in 0..n {
            let mut basis = CMatrix::zeros(n, n);
            basis[(p, q)] = c(1.0);
            let image = swap_channel(rho, &basis, dt);
            channel.column_mut(p + q * n).copy_from_slice(image.as_slice());
        }
    }
    ControlledBlocks { a, channel }
}

/// `m^power` by repeated squaring.
pub(crate) fn matrix_power(m: &CMatrix, mut power: u64) -> CMatrix {
    let n = m.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut base = m.clone();
    while power > 0 {
        if power & 1 == 1 {
            result = &result * &base;
        }
        power >>= 1;
        if power > 0 {
            base = &base * &base;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{random_density, random_state, QuantumState};
    use crate::rng::seeded;
    use std::f64::consts::PI;

    fn dm(m: CMatrix) -> DensityMatrix {
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn explicit_and_closed_forms_agree() {
        let mut rng = seeded(1);
        for d in [2, 3, 4] {
            let rho = random_density(&mut rng, d);
            let sigma = random_density(&mut rng, d);
            for dt in [0.0, 0.01, 0.3, 1.7] {
                let explicit = swap_step(&rho, &sigma, dt).unwrap();
                let closed = swap_channel(rho.matrix(), sigma.matrix(), dt);
                assert!((explicit.matrix() - closed).camax() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let mut rng = seeded(2);
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        assert!((swap_step(&rho, &sigma, 0.0).unwrap().matrix() - sigma.matrix()).camax() < 1e-15);
        let out = density_exponentiation(&rho, &sigma, 0.0, 5).unwrap();
        assert!((out.matrix() - sigma.matrix()).camax() < 1e-15);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = DensityMatrix::maximally_mixed(2);
        let b = DensityMatrix::maximally_mixed(4);
        assert!(matches!(swap_step(&a, &b, 0.1), Err(QsimError::Dimension(_))));
    }

    #[test]
    fn commuting_states_move_only_at_second_order() {
        let rho = dm(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.7), c(0.3)])));
        let sigma = dm(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.2), c(0.8)])));
        for dt in [0.1, 0.05, 0.01] {
            let out = swap_step(&rho, &sigma, dt).unwrap();
            assert!(out.trace_distance(&sigma).unwrap() <= 10.0 * dt * dt);
        }
    }

    /// Least-squares slope of `log err` against `log dt`.
    fn slope(dts: &[f64], errs: &[f64]) -> f64 {
        let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    }

    #[test]
    fn single_step_error_is_second_order() {
        let dts = [0.1, 0.05, 0.025, 0.0125];
        let mut rng = seeded(3);
        for _ in 0..10 {
            let rho = random_density(&mut rng, 4);
            let sigma = DensityMatrix::from_pure(&random_state(&mut rng, 4));
            let errs: Vec<f64> = dts
                .iter()
                .map(|&dt| {
                    let a = swap_step(&rho, &sigma, dt).unwrap();
                    let b = exact_conjugation(&rho, &sigma, dt).unwrap();
                    a.trace_distance(&b).unwrap()
                })
                .collect();
            let s = slope(&dts, &errs);
            assert!((s - 2.0).abs() <= 0.2, "slope {s}");
        }
    }

    #[test]
    fn phase_flip_example() {
        let rho = DensityMatrix::from_pure(&QuantumState::basis(1, 0));
        let plus = QuantumState::from_real(&[1.0, 1.0]).unwrap();
        let minus = QuantumState::from_real(&[1.0, -1.0]).unwrap();
        let out = density_exponentiation(&rho, &DensityMatrix::from_pure(&plus), PI, 512).unwrap();
        let f = out.fidelity_pure(&minus);
        assert!(f >= 0.99, "fidelity {f}");
    }

    #[test]
    fn halving_steps_nearly_halves_error() {
        let mut rng = seeded(4);
        for _ in 0..5 {
            let rho = random_density(&mut rng, 4);
            let sigma = DensityMatrix::from_pure(&random_state(&mut rng, 4));
            let exact = exact_conjugation(&rho, &sigma, 1.0).unwrap();
            let err = |n| {
                density_exponentiation(&rho, &sigma, 1.0, n)
                    .unwrap()
                    .trace_distance(&exact)
                    .unwrap()
            };
            for m in [8, 32, 128] {
                assert!(err(2 * m) <= 0.6 * err(m));
            }
        }
    }

    /// Explicit control ⊗ copy ⊗ system simulation of a controlled partial
    /// swap, copy traced out.
    fn explicit_controlled(rho: &CMatrix, joint: &CMatrix, dt: f64) -> CMatrix {
        let d = rho.nrows();
        let dd = d * d;
        let s = swap_operator(d);
        let u_swap = CMatrix::identity(dd, dd) * c(dt.cos()) - s * C64::new(0.0, dt.sin());
        let mut u = CMatrix::zeros(2 * dd, 2 * dd);
        u.view_mut((0, 0), (dd, dd)).copy_from(&CMatrix::identity(dd, dd));
        u.view_mut((dd, dd), (dd, dd)).copy_from(&u_swap);
        // reorder control ⊗ system into control ⊗ copy ⊗ system
        let full = CMatrix::from_fn(2 * dd, 2 * dd, |r, col| {
            let (ca, ka, sa) = (r / dd, (r / d) % d, r % d);
            let (cb, kb, sb) = (col / dd, (col / d) % d, col % d);
            rho[(ka, kb)] * joint[(ca * d + sa, cb * d + sb)]
        });
        let out = &u * full * u.adjoint();
        CMatrix::from_fn(2 * d, 2 * d, |r, col| {
            let (ca, sa) = (r / d, r % d);
            let (cb, sb) = (col / d, col % d);
            (0..d).map(|k| out[(ca * dd + k * d + sa, cb * dd + k * d + sb)]).sum()
        })
    }

    #[test]
    fn controlled_blocks_match_explicit_simulation() {
        let mut rng = seeded(5);
        let d = 3;
        let rho = random_density(&mut rng, d);
        let joint = random_density(&mut rng, 2 * d);
        let dt = 0.37;
        let out = explicit_controlled(rho.matrix(), joint.matrix(), dt);
        let blocks = controlled_swap_blocks(rho.matrix(), dt);
        let block = |m: &CMatrix, a: usize, b: usize| m.view((a * d, b * d), (d, d)).clone_owned();
        assert!((block(&out, 0, 0) - block(joint.matrix(), 0, 0)).camax() < 1e-14);
        assert!((block(&out, 1, 0) - &blocks.a * block(joint.matrix(), 1, 0)).camax() < 1e-14);
        assert!((block(&out, 0, 1) - block(joint.matrix(), 0, 1) * blocks.a.adjoint()).camax() < 1e-14);
        let x11 = block(joint.matrix(), 1, 1);
        let via_superop = &blocks.channel * nalgebra::DVector::from_column_slice(x11.as_slice());
        let expected = block(&out, 1, 1);
        assert!((via_superop - nalgebra::DVector::from_column_slice(expected.as_slice())).camax() < 1e-14);
    }

    #[test]
    fn controlled_phase_recovers_rho_eigenvalues() {
        // coherence between control branches on an eigenvector picks up
        // (cos Δt − i sin Δt μ)^n, which inverts exactly to μ
        let mut rng = seeded(6);
        let h = crate::rng::random_symmetric(&mut rng, 4);
        let rho = crate::qsim::prepare_rho_hh(&h, crate::qsim::Mode::Oracle).unwrap();
        let eig = crate::linalg::sym_eig(&rho.real_part()).unwrap();
        let (t, n) = (1.0, 1000);
        let dt = t / n as f64;
        let blocks = controlled_swap_blocks(rho.matrix(), dt);
        for k in 0..4 {
            let u = eig.eigenvectors.column(k).map(c);
            let mut x = &u * u.adjoint();
            for _ in 0..n {
                x = &blocks.a * x;
            }
            let coherence = (u.adjoint() * &x * &u)[(0, 0)];
            let phase = coherence.arg();
            let mu = -(phase / n as f64).tan() / dt.tan();
            assert!((mu - eig.eigenvalues[k]).abs() <= 1e-10, "{mu} vs {}", eig.eigenvalues[k]);
        }
    }

    #[test]
    fn matrix_power_by_squaring() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert_eq!(matrix_power(&m, 13)[(0, 1)], c(13.0));
        assert_eq!(matrix_power(&m, 0), CMatrix::identity(2, 2));
    }
}
