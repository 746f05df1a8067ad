//! Fully connected tanh network with mean-squared-error loss.
//!
//! The gradient is ordinary backprop. The Hessian is exact: backprop is
//! written over a scalar type, and running it on dual numbers seeded with a
//! unit tangent yields one Hessian column per pass (forward-over-reverse).

use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use rand::Rng;

use super::{Objective, ObjectiveError, Result};
use crate::dataio::Dataset;
use crate::linalg::{Matrix, SymmetricMatrix, Vector};
use crate::rng::seeded;

/// Largest parameter count accepted; the Hessian is dense.
pub const MAX_MLP_PARAMS: usize = 4096;

trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + AddAssign {
    fn from_f64(v: f64) -> Self;
    fn tanh(self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
}

/// `v + d ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual {
    v: f64,
    d: f64,
}

impl Add for Dual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}

impl Sub for Dual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

impl Mul for Dual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual {
            v: self.v * o.v,
            d: self.v * o.d + self.d * o.v,
        }
    }
}

impl Neg for Dual {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { v: -self.v, d: -self.d }
    }
}

impl AddAssign for Dual {
    fn add_assign(&mut self, o: Self) {
        self.v += o.v;
        self.d += o.d;
    }
}

impl Scalar for Dual {
    fn from_f64(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        Dual { v: t, d: self.d * (1.0 - t * t) }
    }
}

/// MLP objective over a fixed dataset. Hidden layers use tanh, the output
/// layer is linear, and the loss is `n⁻¹ Σ_s ‖y(x_s) − t_s‖²`.
///
/// Parameters are laid out layer by layer: the weight matrix row-major
/// (`out × in`), then the bias.
#[derive(Debug, Clone)]
pub struct Mlp {
    widths: Vec<usize>,
    data: Arc<Dataset>,
    targets: Matrix,
    offsets: Vec<usize>,
    n_params: usize,
}

impl Mlp {
    pub fn new(widths: Vec<usize>, data: Dataset) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(ObjectiveError::Shape(format!("invalid layer widths {widths:?}")));
        }
        if data.dim() != widths[0] {
            return Err(ObjectiveError::Shape(format!(
                "input width {} but dataset has {} features",
                widths[0],
                data.dim()
            )));
        }
        let targets = data.targets.clone().ok_or(ObjectiveError::MissingTargets)?;
        let out = *widths.last().unwrap();
        if targets.ncols() != out {
            return Err(ObjectiveError::Shape(format!(
                "output width {out} but dataset has {} target columns",
                targets.ncols()
            )));
        }
        let mut offsets = vec![0];
        for w in widths.windows(2) {
            offsets.push(offsets.last().unwrap() + w[1] * w[0] + w[1]);
        }
        let n_params = *offsets.last().unwrap();
        if n_params > MAX_MLP_PARAMS {
            return Err(ObjectiveError::TooLarge {
                params: n_params,
                cap: MAX_MLP_PARAMS,
            });
        }
        Ok(Self {
            widths,
            data: Arc::new(data),
            targets,
            offsets,
            n_params,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    /// Weights `N(0, 1/fan_in)`, biases zero.
    pub fn initial_params(&self, seed: u64) -> Vector {
        let mut rng = seeded(seed);
        let mut x = Vector::zeros(self.n_params);
        for (l, w) in self.widths.windows(2).enumerate() {
            let std = 1.0 / (w[0] as f64).sqrt();
            for i in 0..w[0] * w[1] {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                x[self.offsets[l] + i] = std * z;
            }
        }
        x
    }

    fn loss_and_gradient<T: Scalar>(&self, params: &[T]) -> (T, Vec<T>) {
        let layers = self.widths.len() - 1;
        let n = self.data.n_samples();
        let inv_n = T::from_f64(1.0 / n as f64);
        let two_over_n = T::from_f64(2.0 / n as f64);
        let mut grad = vec![T::from_f64(0.0); params.len()];
        let mut loss = T::from_f64(0.0);
        let mut acts: Vec<Vec<T>> = vec![Vec::new(); layers + 1];

        for s in 0..n {
            acts[0] = self.data.features.row(s).iter().map(|&v| T::from_f64(v)).collect();
            for l in 0..layers {
                let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
                let w = &params[self.offsets[l]..];
                let bias = &w[fan_in * fan_out..];
                let mut next = Vec::with_capacity(fan_out);
                for o in 0..fan_out {
                    let mut z = bias[o];
                    for i in 0..fan_in {
                        z += w[o * fan_in + i] * acts[l][i];
                    }
                    next.push(if l + 1 < layers { z.tanh() } else { z });
                }
                acts[l + 1] = next;
            }

            let mut delta: Vec<T> = acts[layers]
                .iter()
                .enumerate()
                .map(|(o, &y)| {
                    let r = y - T::from_f64(self.targets[(s, o)]);
                    loss += r * r * inv_n;
                    r * two_over_n
                })
                .collect();

            for l in (0..layers).rev() {
                let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
                let base = self.offsets[l];
                for o in 0..fan_out {
                    for i in 0..fan_in {
                        grad[base + o * fan_in + i] += delta[o] * acts[l][i];
                    }
                    grad[base + fan_in * fan_out + o] += delta[o];
                }
                if l > 0 {
                    let one = T::from_f64(1.0);
                    delta = (0..fan_in)
                        .map(|i| {
                            let mut back = T::from_f64(0.0);
                            for o in 0..fan_out {
                                back += params[base + o * fan_in + i] * delta[o];
                            }
                            let a = acts[l][i];
                            back * (one - a * a)
                        })
                        .collect();
                }
            }
        }
        (loss, grad)
    }
}

impl Objective for Mlp {
    fn dim(&self) -> usize {
        self.n_params
    }

    fn value(&self, x: &Vector) -> f64 {
        self.loss_and_gradient(x.as_slice()).0
    }

    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_vec(self.loss_and_gradient(x.as_slice()).1)
    }

    fn hessian(&self, x: &Vector) -> SymmetricMatrix {
        let n = self.n_params;
        let mut h = Matrix::zeros(n, n);
        let mut duals: Vec<Dual> = x.iter().map(|&v| Dual { v, d: 0.0 }).collect();
        for j in 0..n {
            duals[j].d = 1.0;
            let (_, g) = self.loss_and_gradient(&duals);
            duals[j].d = 0.0;
            for (i, gi) in g.iter().enumerate() {
                h[(i, j)] = gi.d;
            }
        }
        SymmetricMatrix::symmetrize(&h)
    }
}
