//! Built-in integrand families with closed-form derivatives of every order.
//!
//! The ramp family `((x-a)+)^m / m!` is the workhorse for the exact local-time
//! identity: its (p-1)-th derivative is a Heaviside step (taken cadlag) and
//! the associated Stieltjes measure is a point mass or an indicator density,
//! both of which integrate exactly against piecewise-polynomial local times.

use crate::error::Result;
use crate::tensors::{multi_indices, SymTensor};
use serde::{Deserialize, Serialize};

fn falling(m: u32, k: u32) -> f64 {
    // m (m-1) ... (m-k+1)
    (0..k).map(|i| (m - i) as f64).product()
}

/// Scalar function R -> R with derivatives of every order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ScalarFunction {
    /// x^m
    Monomial { m: u32 },
    /// c0 + c1 x + c2 x^2 + ...
    Polynomial { coeffs: Vec<f64> },
    /// amp * cos(freq * x)
    Cos { amp: f64, freq: f64 },
    /// amp * sin(freq * x)
    Sin { amp: f64, freq: f64 },
    /// amp * exp(rate * x)
    Exp { amp: f64, rate: f64 },
    /// ((x - a)+)^m / m!
    Ramp { a: f64, m: u32 },
    /// the constant 1 scaled
    Constant { c: f64 },
    /// identity x
    Identity,
}

impl ScalarFunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.deriv(0, x)
    }

    /// k-th derivative at x. Ramp derivatives use the cadlag convention at the
    /// kink: the m-th derivative is the indicator of [a, ∞).
    pub fn deriv(&self, k: u32, x: f64) -> f64 {
        match self {
            ScalarFunction::Monomial { m } => {
                if k > *m {
                    0.0
                } else {
                    falling(*m, k) * x.powi((*m - k) as i32)
                }
            }
            ScalarFunction::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for (i, &c) in coeffs.iter().enumerate() {
                    let i = i as u32;
                    if i >= k {
                        acc += c * falling(i, k) * x.powi((i - k) as i32);
                    }
                }
                acc
            }
            ScalarFunction::Cos { amp, freq } => {
                let scale = amp * freq.powi(k as i32);
                match k % 4 {
                    0 => scale * (freq * x).cos(),
                    1 => -scale * (freq * x).sin(),
                    2 => -scale * (freq * x).cos(),
                    _ => scale * (freq * x).sin(),
                }
            }
            ScalarFunction::Sin { amp, freq } => {
                let scale = amp * freq.powi(k as i32);
                match k % 4 {
                    0 => scale * (freq * x).sin(),
                    1 => scale * (freq * x).cos(),
                    2 => -scale * (freq * x).sin(),
                    _ => -scale * (freq * x).cos(),
                }
            }
            ScalarFunction::Exp { amp, rate } => amp * rate.powi(k as i32) * (rate * x).exp(),
            ScalarFunction::Ramp { a, m } => {
                if k < *m {
                    let r = (x - a).max(0.0);
                    let mk = *m - k;
                    r.powi(mk as i32) / falling(mk, mk)
                } else if k == *m {
                    if x >= *a {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    0.0
                }
            }
            ScalarFunction::Constant { c } => {
                if k == 0 {
                    *c
                } else {
                    0.0
                }
            }
            ScalarFunction::Identity => match k {
                0 => x,
                1 => 1.0,
                _ => 0.0,
            },
        }
    }

    /// Whether derivatives up to `order` are continuous (needed by the
    /// compensated-sum integrals).
    pub fn has_continuous_derivs(&self, order: u32) -> bool {
        match self {
            ScalarFunction::Ramp { m, .. } => order < *m,
            _ => true,
        }
    }

    /// The Stieltjes measure d f^(p-1) used by the local-time identity,
    /// classified into exactly integrable pieces.
    pub fn stieltjes_measure(&self, p: u32) -> Result<StieltjesMeasure> {
        match self {
            ScalarFunction::Ramp { a, m } => {
                if *m + 1 == p {
                    // f^(p-1) = 1_{[a,∞)}: a unit point mass at a
                    Ok(StieltjesMeasure::Atom { at: *a, weight: 1.0 })
                } else if *m == p {
                    // f^(p-1) = (x-a)+: density 1_{[a,∞)} dx
                    Ok(StieltjesMeasure::IndicatorDensity { from: *a, weight: 1.0 })
                } else if *m + 1 < p {
                    Ok(StieltjesMeasure::Zero)
                } else {
                    // still absolutely continuous, fall back to the smooth rule
                    Ok(StieltjesMeasure::SmoothDensity)
                }
            }
            ScalarFunction::Monomial { .. }
            | ScalarFunction::Polynomial { .. }
            | ScalarFunction::Cos { .. }
            | ScalarFunction::Sin { .. }
            | ScalarFunction::Exp { .. }
            | ScalarFunction::Constant { .. }
            | ScalarFunction::Identity => Ok(StieltjesMeasure::SmoothDensity),
        }
    }
}

/// Classification of d f^(p-1) for the exact local-time pairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StieltjesMeasure {
    Zero,
    /// weight * δ_at
    Atom { at: f64, weight: f64 },
    /// weight * 1_{[from,∞)}(x) dx
    IndicatorDensity { from: f64, weight: f64 },
    /// f^(p)(x) dx with f^(p) continuous; integrated by quadrature
    SmoothDensity,
}

/// Function R^d -> R with symmetric-tensor derivatives of every order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum VectorFunction {
    /// d = 1 wrapper around a scalar function
    Scalar1d(ScalarFunction),
    /// v · x
    LinearForm { v: Vec<f64> },
    /// (v · x)^m
    PowerOfForm { v: Vec<f64>, m: u32 },
    /// amp * cos(v · x)
    CosOfForm { v: Vec<f64>, amp: f64 },
    /// x' A x / 2 + b · x + c with A symmetric (row-major d*d)
    Quadratic { a: Vec<f64>, b: Vec<f64>, c: f64 },
}

impl VectorFunction {
    pub fn dim(&self) -> usize {
        match self {
            VectorFunction::Scalar1d(_) => 1,
            VectorFunction::LinearForm { v } => v.len(),
            VectorFunction::PowerOfForm { v, .. } => v.len(),
            VectorFunction::CosOfForm { v, .. } => v.len(),
            VectorFunction::Quadratic { b, .. } => b.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            VectorFunction::Scalar1d(f) => f.eval(x[0]),
            VectorFunction::LinearForm { v } => dot(v, x),
            VectorFunction::PowerOfForm { v, m } => dot(v, x).powi(*m as i32),
            VectorFunction::CosOfForm { v, amp } => amp * dot(v, x).cos(),
            VectorFunction::Quadratic { a, b, c } => {
                let d = b.len();
                let mut q = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        q += a[i * d + j] * x[i] * x[j];
                    }
                }
                0.5 * q + dot(b, x) + c
            }
        }
    }

    /// k-th gradient ∇^k f(x) as a symmetric order-k tensor.
    pub fn grad(&self, k: usize, x: &[f64]) -> SymTensor {
        let d = self.dim();
        match self {
            VectorFunction::Scalar1d(f) => {
                SymTensor::from_coeffs(1, k, vec![f.deriv(k as u32, x[0])]).expect("1d tensor")
            }
            VectorFunction::LinearForm { v } => match k {
                0 => SymTensor::scalar(d, dot(v, x)),
                1 => SymTensor::sym_power(v, 1),
                _ => SymTensor::zero(d, k),
            },
            VectorFunction::PowerOfForm { v, m } => {
                if k as u32 > *m {
                    SymTensor::zero(d, k)
                } else {
                    let s = dot(v, x);
                    SymTensor::sym_power(v, k)
                        .scale(falling(*m, k as u32) * s.powi((*m - k as u32) as i32))
                }
            }
            VectorFunction::CosOfForm { v, amp } => {
                let s = dot(v, x);
                let val = match k % 4 {
                    0 => s.cos(),
                    1 => -s.sin(),
                    2 => -s.cos(),
                    _ => s.sin(),
                };
                SymTensor::sym_power(v, k).scale(amp * val)
            }
            VectorFunction::Quadratic { a, b, c: _ } => match k {
                0 => SymTensor::scalar(d, self.eval(x)),
                1 => {
                    let mut g = vec![0.0; d];
                    for i in 0..d {
                        g[i] = b[i]
                            + 0.5
                                * (0..d).map(|j| (a[i * d + j] + a[j * d + i]) * x[j]).sum::<f64>();
                    }
                    SymTensor::sym_power(&g, 1)
                }
                2 => {
                    // packed order-2 coefficients: diagonal a_ii, off-diagonal (a_ij+a_ji)/2
                    let table = multi_indices(d, 2);
                    let mut coeffs = vec![0.0; table.len()];
                    for (slot, alpha) in table.iter().enumerate() {
                        let mut idx = Vec::with_capacity(2);
                        for (i, &cnt) in alpha.iter().enumerate() {
                            for _ in 0..cnt {
                                idx.push(i);
                            }
                        }
                        coeffs[slot] = 0.5 * (a[idx[0] * d + idx[1]] + a[idx[1] * d + idx[0]]);
                    }
                    SymTensor::from_coeffs(d, 2, coeffs).expect("quadratic hessian")
                }
                _ => SymTensor::zero(d, k),
            },
        }
    }

    pub fn has_continuous_derivs(&self, order: u32) -> bool {
        match self {
            VectorFunction::Scalar1d(f) => f.has_continuous_derivs(order),
            _ => true,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
