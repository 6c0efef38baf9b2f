use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::quadrature::AnalyticFunction;

type RealToComplex = dyn Fn(f64) -> Complex64 + Send + Sync;

/// A C¹ function on the real line, its derivative, and whatever global
/// bounds are known for them.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    value: Arc<RealToComplex>,
    derivative: Arc<RealToComplex>,
    /// `‖f'‖∞` over ℝ, when finite.
    pub sup_deriv_bound: Option<f64>,
    /// `‖f‖∞` over ℝ, when finite.
    pub sup_bound: Option<f64>,
    pub analytic_extension: Option<AnalyticFunction>,
    /// `f(ℝ) ⊂ ℝ`
    pub real_valued: bool,
    polynomial: Option<Polynomial>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("sup_deriv_bound", &self.sup_deriv_bound)
            .field("sup_bound", &self.sup_bound)
            .field("real_valued", &self.real_valued)
            .finish()
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl TestFunction {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            sup_deriv_bound: None,
            sup_bound: None,
            analytic_extension: None,
            real_valued: false,
            polynomial: None,
        }
    }

    pub fn real(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            real_valued: true,
            ..Self::new(name, move |x| re(value(x)), move |x| re(derivative(x)))
        }
    }

    pub fn with_bounds(mut self, sup: Option<f64>, sup_deriv: Option<f64>) -> Self {
        self.sup_bound = sup;
        self.sup_deriv_bound = sup_deriv;
        self
    }

    pub fn with_extension(mut self, f: AnalyticFunction) -> Self {
        self.analytic_extension = Some(f);
        self
    }

    pub fn polynomial(p: Polynomial) -> Self {
        let dp = p.derivative();
        let degree = p.degree();
        let name = match p.coeffs() {
            c if degree == 1 && c == [0.0, 1.0] => "id".to_string(),
            c if c.iter().take(degree).all(|&x| x == 0.0) && c[degree] == 1.0 => {
                format!("x^{degree}")
            }
            c => format!("poly{c:?}"),
        };
        let ext = AnalyticFunction::polynomial(&p);
        let (sup, sup_d) = match degree {
            0 => (Some(p.coeffs()[0].abs()), Some(0.0)),
            1 => (None, Some(p.coeffs()[1].abs())),
            _ => (None, None),
        };
        let pv = p.clone();
        let mut f = Self::real(name, move |x| pv.eval(x), move |x| dp.eval(x))
            .with_bounds(sup, sup_d)
            .with_extension(ext);
        f.polynomial = Some(p);
        f
    }

    /// The coefficients when `f` was built from a polynomial.
    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.polynomial.as_ref()
    }

    pub fn identity() -> Self {
        Self::polynomial(Polynomial::monomial(1))
    }

    pub fn monomial(k: usize) -> Self {
        Self::polynomial(Polynomial::monomial(k))
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(Polynomial::new(vec![c]))
    }

    pub fn sin() -> Self {
        Self::real("sin", f64::sin, f64::cos)
            .with_bounds(Some(1.0), Some(1.0))
            .with_extension(AnalyticFunction::sin())
    }

    pub fn cos() -> Self {
        Self::real("cos", f64::cos, |x| -x.sin())
            .with_bounds(Some(1.0), Some(1.0))
            .with_extension(AnalyticFunction::cos())
    }

    /// `exp(-x²)`; `‖f'‖∞ = √(2/e)` at `x = ±1/√2`.
    pub fn gaussian() -> Self {
        Self::real("gauss", |x| (-x * x).exp(), |x| -2.0 * x * (-x * x).exp())
            .with_bounds(Some(1.0), Some((2.0 / std::f64::consts::E).sqrt()))
            .with_extension(AnalyticFunction::new("gauss", f64::INFINITY, |z| (-z * z).exp()))
    }

    pub fn exp() -> Self {
        Self::real("exp", f64::exp, f64::exp).with_extension(AnalyticFunction::exp())
    }

    /// Look up one of the built-in functions: `id`, `x2`…`x9`, `sin`, `cos`,
    /// `gauss`, `exp`, `one`.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "id" | "x" | "x1" => Self::identity(),
            "sin" => Self::sin(),
            "cos" => Self::cos(),
            "gauss" => Self::gaussian(),
            "exp" => Self::exp(),
            "one" | "1" => Self::constant(1.0),
            s if s.starts_with('x') => {
                let k: usize = s[1..]
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("unknown test function {name:?}")))?;
                Self::monomial(k)
            }
            _ => return Err(Error::InvalidInput(format!("unknown test function {name:?}"))),
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        (self.value)(x)
    }

    #[inline]
    pub fn eval_derivative(&self, x: f64) -> Complex64 {
        (self.derivative)(x)
    }

    /// `sup |f|` on a uniform grid of `[-m, m]`.
    pub fn grid_sup(&self, m: f64, points: usize) -> f64 {
        grid(m, points).map(|x| self.eval(x).norm()).fold(0.0, f64::max)
    }

    /// `sup |f'|` on a uniform grid of `[-m, m]`.
    pub fn grid_sup_derivative(&self, m: f64, points: usize) -> f64 {
        grid(m, points)
            .map(|x| self.eval_derivative(x).norm())
            .fold(0.0, f64::max)
    }

    /// Largest relative mismatch between the derivative and a central
    /// difference of the value on a grid of `[-m, m]`.
    pub fn derivative_consistency(&self, m: f64, points: usize) -> f64 {
        let h = 1e-6;
        grid(m, points)
            .map(|x| {
                let fd = (self.eval(x + h) - self.eval(x - h)) / (2.0 * h);
                let d = self.eval_derivative(x);
                (fd - d).norm() / d.norm().max(1.0)
            })
            .fold(0.0, f64::max)
    }

    /// `f·1_{|x| ≤ m}`
    pub fn truncated(&self, m: f64) -> Self {
        let (f, df) = (self.value.clone(), self.derivative.clone());
        let mut out = Self::new(
            format!("{}_M", self.name),
            move |x| if x.abs() <= m { f(x) } else { re(0.0) },
            move |x| if x.abs() <= m { df(x) } else { re(0.0) },
        );
        out.real_valued = self.real_valued;
        out.sup_bound = self.sup_bound;
        out
    }
}

pub(crate) fn grid(m: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = 2.0 * m / (points - 1) as f64;
    (0..points).map(move |i| -m + step * i as f64)
}
