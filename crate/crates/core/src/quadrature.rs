//! Trapezoidal contour quadrature.
//!
//! On a closed curve parametrised over `[0, 2π)`, the equispaced trapezoid
//! rule converges geometrically for integrands analytic in a neighbourhood
//! of the curve. The bilinear functional
//! `ρ(f, g) = (2πi)^{-2} ∮∮ f(z) g(w) G₂(z, w) dz dw`
//! is evaluated with the tensor product of two such rules.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::MomentTable;
use crate::polynomial::Polynomial;

pub const MIN_NODES: usize = 16;
pub const DEFAULT_NODES: usize = 256;
pub const DEFAULT_Z_RADIUS: f64 = 3.0;
pub const DEFAULT_W_RADIUS: f64 = 3.5;
/// Half-width of the segment the default contours must enclose: the
/// support of the semicircle law, where the GUE `G₂` is singular.
pub const DEFAULT_ENCLOSED: f64 = 2.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContourShape {
    Circle { center: f64, radius: f64 },
    Ellipse { center: f64, semi_x: f64, semi_y: f64 },
}

impl ContourShape {
    fn semi_axes(&self) -> (f64, f64, f64) {
        match *self {
            ContourShape::Circle { center, radius } => (center, radius, radius),
            ContourShape::Ellipse {
                center,
                semi_x,
                semi_y,
            } => (center, semi_x, semi_y),
        }
    }
}

/// Positively oriented circle or ellipse with cached trapezoid nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    shape: ContourShape,
    enclosed: f64,
    #[serde(skip)]
    points: Vec<Complex64>,
    #[serde(skip)]
    derivatives: Vec<Complex64>,
}

impl Contour {
    pub fn circle(center: f64, radius: f64, nodes: usize, enclosed: f64) -> Result<Self> {
        Self::new(ContourShape::Circle { center, radius }, nodes, enclosed)
    }

    pub fn ellipse(center: f64, semi_x: f64, semi_y: f64, nodes: usize, enclosed: f64) -> Result<Self> {
        Self::new(
            ContourShape::Ellipse {
                center,
                semi_x,
                semi_y,
            },
            nodes,
            enclosed,
        )
    }

    /// `enclosed` is the half-width `M` of the segment `[-M, M]` the curve
    /// must strictly surround.
    pub fn new(shape: ContourShape, nodes: usize, enclosed: f64) -> Result<Self> {
        if nodes < MIN_NODES || nodes % 2 == 1 {
            return Err(Error::Configuration(format!(
                "contour needs an even node count of at least {MIN_NODES}, got {nodes}"
            )));
        }
        let (c, a, b) = shape.semi_axes();
        if !(a > 0.0 && b > 0.0) || !c.is_finite() {
            return Err(Error::Configuration(format!("degenerate contour {shape:?}")));
        }
        if enclosed.is_nan() || enclosed < 0.0 || c.abs() + enclosed >= a {
            return Err(Error::Configuration(format!(
                "contour {shape:?} does not strictly enclose [-{enclosed}, {enclosed}]"
            )));
        }
        let (points, derivatives) = (0..nodes)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / nodes as f64;
                let (s, co) = t.sin_cos();
                (
                    Complex64::new(c + a * co, b * s),
                    Complex64::new(-a * s, b * co),
                )
            })
            .unzip();
        Ok(Self {
            shape,
            enclosed,
            points,
            derivatives,
        })
    }

    pub fn shape(&self) -> ContourShape {
        self.shape
    }

    pub fn enclosed(&self) -> f64 {
        self.enclosed
    }

    pub fn nodes(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn derivatives(&self) -> &[Complex64] {
        &self.derivatives
    }

    /// Same curve with a different node count.
    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        Self::new(self.shape, nodes, self.enclosed)
    }

    /// Negative inside, zero on the curve, positive outside.
    pub fn level(&self, z: Complex64) -> f64 {
        let (c, a, b) = self.shape.semi_axes();
        ((z.re - c) / a).powi(2) + (z.im / b).powi(2) - 1.0
    }

    /// Trapezoid weights `h·z'(t_k)` with `h = 2π/nodes`.
    fn weights(&self) -> impl Iterator<Item = Complex64> + '_ {
        let h = 2.0 * PI / self.nodes() as f64;
        self.derivatives.iter().map(move |d| d * h)
    }

    /// `∮ f(z) dz`
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.points.iter().zip(self.weights()).map(|(&z, wt)| f(z) * wt).sum()
    }

    /// True if the two curves do not meet: one lies strictly inside the
    /// other or they are mutually exterior.
    pub fn disjoint_from(&self, other: &Contour) -> bool {
        let probe = 2048;
        let side = |a: &Contour, b: &Contour| -> Option<bool> {
            let (c, sa, sb) = b.shape.semi_axes();
            let mut inside = None;
            for k in 0..probe {
                let t = 2.0 * PI * k as f64 / probe as f64;
                let z = Complex64::new(c + sa * t.cos(), sb * t.sin());
                let lv = a.level(z);
                if lv.abs() < 1e-12 {
                    return None;
                }
                match inside {
                    None => inside = Some(lv < 0.0),
                    Some(s) if s != (lv < 0.0) => return None,
                    _ => {}
                }
            }
            inside
        };
        side(self, other).is_some() && side(other, self).is_some()
    }
}

type ComplexFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// A function analytic on a neighbourhood of the contours it is integrated
/// over.
#[derive(Clone)]
pub struct AnalyticFunction {
    evaluator: Arc<ComplexFn>,
    /// Radius of a disc about the origin on which the function is known to
    /// be analytic (`f64::INFINITY` for entire functions).
    pub domain_radius: f64,
    pub name: String,
}

impl fmt::Debug for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFunction")
            .field("name", &self.name)
            .field("domain_radius", &self.domain_radius)
            .finish()
    }
}

impl AnalyticFunction {
    pub fn new(
        name: impl Into<String>,
        domain_radius: f64,
        evaluator: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            evaluator: Arc::new(evaluator),
            domain_radius,
            name: name.into(),
        }
    }

    pub fn polynomial(p: &Polynomial) -> Self {
        let p = p.clone();
        Self::new(format!("poly{:?}", p.coeffs()), f64::INFINITY, move |z| p.eval_complex(z))
    }

    pub fn monomial(k: usize) -> Self {
        let mut f = Self::polynomial(&Polynomial::monomial(k));
        f.name = format!("x^{k}");
        f
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), f64::INFINITY, move |_| Complex64::new(c, 0.0))
    }

    pub fn exp() -> Self {
        Self::new("exp", f64::INFINITY, |z| z.exp())
    }

    pub fn sin() -> Self {
        Self::new("sin", f64::INFINITY, |z| z.sin())
    }

    pub fn cos() -> Self {
        Self::new("cos", f64::INFINITY, |z| z.cos())
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.evaluator)(z)
    }

    /// Worst deviation of the Cauchy integral `(2πi)^{-1} ∮ f(z)/(z-x) dz`
    /// from `f(x)` over the given interior points.
    pub fn cauchy_consistency(&self, contour: &Contour, interior: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &x in interior {
            check_interior(contour, x)?;
            let v = contour.integrate(|z| self.eval(z) / (z - x)) / (2.0 * PI * I);
            worst = worst.max((v - self.eval(Complex64::new(x, 0.0))).norm());
        }
        Ok(worst)
    }
}

fn check_interior(contour: &Contour, x: f64) -> Result<()> {
    if contour.level(Complex64::new(x, 0.0)) >= 0.0 {
        return Err(Error::Domain(format!(
            "{x} is not strictly inside the contour {:?}",
            contour.shape()
        )));
    }
    Ok(())
}

/// `ρ(f, g) = (2πi)^{-2} ∮_{cz} ∮_{cw} f(z) g(w) G₂(z, w) dw dz` by the
/// tensor-product trapezoid rule. The two contours must not meet so the
/// removable diagonal of `G₂` is never sampled.
pub fn rho_via_contour<G>(
    f: &AnalyticFunction,
    g: &AnalyticFunction,
    g2: G,
    cz: &Contour,
    cw: &Contour,
) -> Result<Complex64>
where
    G: Fn(Complex64, Complex64) -> Result<Complex64> + Sync,
{
    if !cz.disjoint_from(cw) {
        return Err(Error::Configuration(
            "z- and w-contours intersect; use distinct radii".into(),
        ));
    }
    let fz: Vec<Complex64> = cz
        .points()
        .iter()
        .zip(cz.weights())
        .map(|(&z, wt)| f.eval(z) * wt)
        .collect();
    let gw: Vec<Complex64> = cw
        .points()
        .iter()
        .zip(cw.weights())
        .map(|(&w, wt)| g.eval(w) * wt)
        .collect();
    let rows: Vec<Result<Complex64>> = cz
        .points()
        .par_iter()
        .enumerate()
        .map(|(k, &z)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, &w) in cw.points().iter().enumerate() {
                let kernel = g2(z, w).map_err(|e| Error::AtNode {
                    z_node: k,
                    w_node: l,
                    source: Box::new(e),
                })?;
                acc += gw[l] * kernel;
            }
            Ok(acc * fz[k])
        })
        .collect();
    // first failing node in z order, independent of scheduling
    let mut total = Complex64::new(0.0, 0.0);
    for row in rows {
        total += row?;
    }
    Ok(total / (2.0 * PI * I).powi(2))
}

/// `Σ_j Σ_k p_j q_k α_{j,k}`, the exact bilinear extension of the second
/// order moments to polynomials.
pub fn rho_polynomial_reference(p: &Polynomial, q: &Polynomial, table: &MomentTable) -> Result<f64> {
    let mut acc = 0.0;
    for (j, &pj) in p.coeffs().iter().enumerate() {
        for (k, &qk) in q.coeffs().iter().enumerate() {
            if pj == 0.0 || qk == 0.0 || j == 0 || k == 0 {
                continue;
            }
            if j + k > table.max_degree() {
                return Err(Error::Capacity {
                    what: "polynomial degree sum",
                    value: j + k,
                    limit: table.max_degree(),
                });
            }
            acc += pj * qk * table.second(j, k)? as f64;
        }
    }
    Ok(acc)
}

/// `f'(x) = (2πi)^{-1} ∮ f(z) (z-x)^{-2} dz`
pub fn cauchy_derivative(f: &AnalyticFunction, x: f64, contour: &Contour) -> Result<Complex64> {
    check_interior(contour, x)?;
    Ok(contour.integrate(|z| {
        let d = z - x;
        f.eval(z) / (d * d)
    }) / (2.0 * PI * I))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub nodes: usize,
    pub value: Complex64,
    /// `|value - previous value|`; absent on the first row.
    pub diff: Option<f64>,
}

/// Re-evaluate an integral at each node count.
pub fn convergence_sweep(
    integral: impl Fn(usize) -> Result<Complex64>,
    node_counts: &[usize],
) -> Result<Vec<SweepRow>> {
    if node_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Configuration("node counts must be ascending".into()));
    }
    let mut rows: Vec<SweepRow> = Vec::with_capacity(node_counts.len());
    for &nodes in node_counts {
        let value = integral(nodes)?;
        let diff = rows.last().map(|r| (value - r.value).norm());
        rows.push(SweepRow { nodes, value, diff });
    }
    Ok(rows)
}

/// Successive differences never grow, except below `floor` where rounding
/// dominates.
pub fn sweep_is_monotone(rows: &[SweepRow], floor: f64) -> bool {
    let diffs: Vec<f64> = rows.iter().filter_map(|r| r.diff).collect();
    diffs.windows(2).all(|w| w[1] <= w[0] || w[1] <= floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::g2_gue_free;

    fn default_pair(nodes: usize) -> (Contour, Contour) {
        (
            Contour::circle(0.0, DEFAULT_Z_RADIUS, nodes, DEFAULT_ENCLOSED).unwrap(),
            Contour::circle(0.0, DEFAULT_W_RADIUS, nodes, DEFAULT_ENCLOSED).unwrap(),
        )
    }

    #[test]
    fn contour_validation() {
        assert!(Contour::circle(0.0, 3.0, 15, 2.0).is_err());
        assert!(Contour::circle(0.0, 3.0, 8, 2.0).is_err());
        assert!(Contour::circle(0.0, 2.0, 64, 2.0).is_err());
        assert!(Contour::circle(0.5, 2.4, 64, 2.0).is_err());
        assert!(Contour::ellipse(0.0, 2.5, 0.3, 64, 2.0).is_ok());
        assert!(Contour::ellipse(0.0, 2.5, 0.0, 64, 2.0).is_err());
    }

    #[test]
    fn orientation_is_positive() {
        let c = Contour::circle(0.0, 1.0, 64, 0.0).unwrap();
        let v = c.integrate(|z| z.inv());
        assert!((v - 2.0 * PI * I).norm() < 1e-13);
    }

    #[test]
    fn disjointness() {
        let (a, b) = default_pair(32);
        assert!(a.disjoint_from(&b));
        let e = Contour::ellipse(0.0, 3.2, 2.0, 32, 2.0).unwrap();
        assert!(!a.disjoint_from(&e));
        let err = rho_via_contour(
            &AnalyticFunction::monomial(1),
            &AnalyticFunction::monomial(1),
            g2_gue_free,
            &a,
            &e,
        );
        assert!(matches!(err, Err(Error::Configuration(_))));
    }

    #[test]
    fn first_two_second_order_moments() {
        let (cz, cw) = default_pair(256);
        for (k, expected) in [(1usize, 1.0), (2, 2.0)] {
            let f = AnalyticFunction::monomial(k);
            let v = rho_via_contour(&f, &f, g2_gue_free, &cz, &cw).unwrap();
            assert!((v.re - expected).abs() < 1e-8 && v.im.abs() < 1e-9, "{k}: {v}");
        }
    }

    #[test]
    fn constants_do_not_fluctuate() {
        let (cz, cw) = default_pair(128);
        let one = AnalyticFunction::constant(1.0);
        for g in [AnalyticFunction::exp(), AnalyticFunction::monomial(3), one.clone()] {
            let v = rho_via_contour(&one, &g, g2_gue_free, &cz, &cw).unwrap();
            assert!(v.norm() < 1e-10, "{}: {v}", g.name);
        }
    }

    #[test]
    fn kernel_errors_carry_node() {
        let (cz, cw) = default_pair(16);
        let f = AnalyticFunction::monomial(1);
        let err = rho_via_contour(&f, &f, |_, _| Err(Error::Domain("x".into())), &cz, &cw)
            .unwrap_err();
        assert!(matches!(err, Error::AtNode { z_node: 0, w_node: 0, .. }));
    }

    #[test]
    fn polynomial_reference_examples() {
        let t = MomentTable::gue(8).unwrap();
        let x = Polynomial::monomial(1);
        let x2 = Polynomial::monomial(2);
        assert_eq!(rho_polynomial_reference(&x, &x, &t).unwrap(), 1.0);
        assert_eq!(rho_polynomial_reference(&x, &x2, &t).unwrap(), 0.0);
        let p = Polynomial::new(vec![0.0, 1.0, 1.0]);
        assert_eq!(rho_polynomial_reference(&p, &p, &t).unwrap(), 3.0);
        let big = Polynomial::monomial(5);
        assert!(rho_polynomial_reference(&big, &big, &t).is_err());
    }

    #[test]
    fn cauchy_derivative_examples() {
        let c = Contour::circle(0.0, 2.0, 128, 1.0).unwrap();
        let d = cauchy_derivative(&AnalyticFunction::exp(), 0.0, &c).unwrap();
        assert!((d - 1.0).norm() < 1e-10);
        let d = cauchy_derivative(&AnalyticFunction::monomial(3), 1.0, &c).unwrap();
        assert!((d - 3.0).norm() < 1e-10);
        let d = cauchy_derivative(&AnalyticFunction::constant(1.0), 0.3, &c).unwrap();
        assert!(d.norm() < 1e-12);
        assert!(cauchy_derivative(&AnalyticFunction::exp(), 2.0, &c).is_err());
        assert!(cauchy_derivative(&AnalyticFunction::exp(), 5.0, &c).is_err());
    }

    #[test]
    fn cauchy_consistency_of_entire_functions() {
        let c = Contour::circle(0.0, 3.0, 128, 2.0).unwrap();
        for f in [AnalyticFunction::exp(), AnalyticFunction::sin(), AnalyticFunction::monomial(4)] {
            let err = f.cauchy_consistency(&c, &[-1.5, 0.0, 0.7, 2.0]).unwrap();
            assert!(err < 1e-10, "{}: {err:e}", f.name);
        }
    }

    #[test]
    fn sweep_rules() {
        assert!(convergence_sweep(|_| Ok(Complex64::new(0.0, 0.0)), &[64, 32]).is_err());
        let (cz, cw) = default_pair(16);
        let rows = convergence_sweep(
            |n| {
                let one = AnalyticFunction::constant(1.0);
                rho_via_contour(&one, &one, g2_gue_free, &cz.with_nodes(n)?, &cw.with_nodes(n)?)
            },
            &[32, 64, 128],
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.value.norm() < 1e-12));
        assert_eq!(rows[0].diff, None);
    }
}
