use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::Serialize;

use super::test_function::{grid, TestFunction};
use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::quadrature::AnalyticFunction;

/// Grid resolution used for the sup norms `‖f‖_M` and `‖f'‖_M`.
pub const NORM_GRID_POINTS: usize = 20_001;

/// Bounded C¹ extension of `f|[-M, M]` to the whole line.
///
/// Outside the interval `f` is continued by `f(±M) + f'(±M) t e^{-α|t|}`,
/// `t = x ∓ M`, with `α = ‖f'‖_M / (e ‖f‖_M)`. This keeps
/// `‖f̃‖∞ ≤ 2‖f‖_M` and `‖f̃'‖∞ = ‖f'‖_M`. A function vanishing on the
/// interval extends by zero.
pub fn c1_extension(f: &TestFunction, m: f64) -> Result<TestFunction> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidInput(format!("extension half-width must be positive, got {m}")));
    }
    let sup = f.grid_sup(m, NORM_GRID_POINTS);
    let sup_d = f.grid_sup_derivative(m, NORM_GRID_POINTS);
    let name = format!("{}~", f.name);
    if sup == 0.0 {
        let mut zero = TestFunction::new(name, |_| Complex64::new(0.0, 0.0), |_| Complex64::new(0.0, 0.0))
            .with_bounds(Some(0.0), Some(0.0));
        zero.real_valued = true;
        return Ok(zero);
    }
    let alpha = sup_d / (E * sup);
    let (f_hi, d_hi) = (f.eval(m), f.eval_derivative(m));
    let (f_lo, d_lo) = (f.eval(-m), f.eval_derivative(-m));
    let (g, dg) = (f.clone(), f.clone());
    let value = move |x: f64| {
        if x > m {
            let t = x - m;
            f_hi + d_hi * t * (-alpha * t).exp()
        } else if x < -m {
            let t = x + m;
            f_lo + d_lo * t * (alpha * t).exp()
        } else {
            g.eval(x)
        }
    };
    let derivative = move |x: f64| {
        if x > m {
            let t = x - m;
            d_hi * (1.0 - alpha * t) * (-alpha * t).exp()
        } else if x < -m {
            let t = x + m;
            d_lo * (1.0 + alpha * t) * (alpha * t).exp()
        } else {
            dg.eval_derivative(x)
        }
    };
    let mut out = TestFunction::new(name, value, derivative).with_bounds(Some(2.0 * sup), Some(sup_d));
    out.real_valued = f.real_valued;
    Ok(out)
}

/// Chebyshev interpolant of a real function on `[-M, M]`.
#[derive(Debug, Clone, Serialize)]
pub struct ChebyshevApprox {
    pub half_width: f64,
    /// Coefficients of `T_j(x/M)`.
    pub coeffs: Vec<f64>,
    /// `‖p - f‖_M` on a dense grid.
    pub sup_error: f64,
    /// `‖p' - f'‖_M` on a dense grid.
    pub sup_derivative_error: f64,
}

/// Interpolate `f` at the `degree + 1` first-kind Chebyshev points of
/// `[-M, M]` and measure the error of the interpolant and of its derivative.
pub fn chebyshev_approx(f: &TestFunction, m: f64, degree: usize) -> Result<ChebyshevApprox> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidInput(format!("interval half-width must be positive, got {m}")));
    }
    if !f.real_valued {
        return Err(Error::InvalidInput(format!("{} is not real valued", f.name)));
    }
    let n = degree + 1;
    let theta: Vec<f64> = (0..n).map(|k| PI * (k as f64 + 0.5) / n as f64).collect();
    let fx: Vec<f64> = theta.iter().map(|t| f.eval(m * t.cos()).re).collect();
    let coeffs = (0..n)
        .map(|j| {
            let s: f64 = fx.iter().zip(&theta).map(|(v, t)| v * (j as f64 * t).cos()).sum();
            let c = 2.0 * s / n as f64;
            if j == 0 {
                c / 2.0
            } else {
                c
            }
        })
        .collect();
    let mut out = ChebyshevApprox {
        half_width: m,
        coeffs,
        sup_error: 0.0,
        sup_derivative_error: 0.0,
    };
    let d = out.derivative_coeffs();
    for x in grid(m, NORM_GRID_POINTS) {
        let t = x / m;
        out.sup_error = out.sup_error.max((clenshaw(&out.coeffs, t) - f.eval(x).re).abs());
        let dp = clenshaw(&d, t) / m;
        out.sup_derivative_error = out.sup_derivative_error.max((dp - f.eval_derivative(x).re).abs());
    }
    Ok(out)
}

fn clenshaw<T>(c: &[f64], t: T) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<f64, Output = T> + std::ops::Sub<Output = T>,
    T: std::ops::Mul<T, Output = T> + std::ops::Add<T, Output = T>,
{
    let zero = t * 0.0;
    let (mut b1, mut b2) = (zero, zero);
    for &cj in c.iter().skip(1).rev() {
        let b0 = t * b1 * 2.0 - b2 + cj;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

impl ChebyshevApprox {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x / self.half_width)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        clenshaw(&self.derivative_coeffs(), x / self.half_width) / self.half_width
    }

    /// Chebyshev coefficients of `d/dt Σ c_j T_j(t)`.
    fn derivative_coeffs(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        if n < 2 {
            return vec![0.0];
        }
        let mut d = vec![0.0; n + 1];
        for j in (1..n).rev() {
            d[j - 1] = d[j + 1] + 2.0 * j as f64 * self.coeffs[j];
        }
        d[0] /= 2.0;
        d.truncate(n - 1);
        d
    }

    /// Expand into monomial coefficients in `x`.
    pub fn to_polynomial(&self) -> Polynomial {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        // T_j(t) in powers of t, by the three-term recurrence.
        let mut prev = vec![1.0];
        let mut cur = vec![0.0, 1.0];
        for (j, &c) in self.coeffs.iter().enumerate() {
            let t = match j {
                0 => prev.clone(),
                1 => cur.clone(),
                _ => {
                    let mut next = vec![0.0; j + 1];
                    for (k, &a) in cur.iter().enumerate() {
                        next[k + 1] += 2.0 * a;
                    }
                    for (k, &a) in prev.iter().enumerate() {
                        next[k] -= a;
                    }
                    prev = std::mem::replace(&mut cur, next);
                    cur.clone()
                }
            };
            for (k, &a) in t.iter().enumerate() {
                out[k] += c * a;
            }
        }
        let mut scale = 1.0;
        for c in out.iter_mut() {
            *c *= scale;
            scale /= self.half_width;
        }
        Polynomial::new(out)
    }

    /// The interpolant as an entire function, evaluated by Clenshaw.
    pub fn analytic(&self) -> AnalyticFunction {
        let (c, m) = (self.coeffs.clone(), self.half_width);
        AnalyticFunction::new(format!("cheb{}", self.degree()), f64::INFINITY, move |z| {
            clenshaw::<Complex64>(&c, z / m)
        })
    }

    pub fn to_test_function(&self) -> TestFunction {
        let (a, b) = (self.clone(), self.clone());
        TestFunction::real(format!("cheb{}", self.degree()), move |x| a.eval(x), move |x| b.eval_derivative(x))
            .with_extension(self.analytic())
    }
}
