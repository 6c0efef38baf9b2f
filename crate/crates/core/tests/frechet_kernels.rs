//! Kernel representation of covariances on constructed kernels, checked
//! against direct two-dimensional quadrature of the density.

use fluctlab::frechet::{frechet_integral_refined, rho_from_kernel, FrechetMesh};
use fluctlab::statistics::TestFunction;
use num_complex::Complex64;

/// Tensor composite Simpson rule on `[-m, m]²`.
fn simpson2(f: impl Fn(f64, f64) -> Complex64, m: f64, intervals: usize) -> Complex64 {
    let h = 2.0 * m / intervals as f64;
    let weight = |i: usize| match i {
        0 => 1.0,
        i if i == intervals => 1.0,
        i if i % 2 == 1 => 4.0,
        _ => 2.0,
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=intervals {
        let x = -m + i as f64 * h;
        for j in 0..=intervals {
            let y = -m + j as f64 * h;
            acc += f(x, y) * (weight(i) * weight(j));
        }
    }
    acc * (h * h / 9.0)
}

fn resolvent(z: Complex64) -> TestFunction {
    TestFunction::new(format!("r_{z}"), move |x| (z - x).inv(), move |x| {
        let d = z - x;
        (d * d).inv()
    })
}

#[test]
fn density_kernel_matches_tensor_quadrature() {
    let m = 1.5;
    let u = |x: f64, y: f64| (x * y).exp();
    let density = |x: f64, y: f64| (1.0 + x * y) * (x * y).exp();
    let (f, g) = (TestFunction::sin(), TestFunction::monomial(2));
    let oracle = simpson2(
        |x, y| f.eval_derivative(x) * g.eval_derivative(y) * density(x, y),
        m,
        400,
    );
    let mesh = FrechetMesh::uniform(m, 512, 512, u).unwrap();
    let v = rho_from_kernel(&f, &g, &mesh);
    assert!((v - oracle).norm() < 1e-5 * (1.0 + oracle.norm()), "{v} vs {oracle}");
}

#[test]
fn resolvent_kernels_reproduce_the_integral_representation() {
    let m = 2.0;
    let u = |x: f64, y: f64| -(x + y).sin();
    let density = |x: f64, y: f64| (x + y).sin();
    let (z, w) = (Complex64::new(0.0, 3.0), Complex64::new(2.0, 2.0));
    let oracle = simpson2(
        |x, y| {
            let (a, b) = (z - x, w - y);
            density(x, y) / (a * a * b * b)
        },
        m,
        400,
    );
    let mesh = FrechetMesh::uniform(m, 512, 512, u).unwrap();
    let v = rho_from_kernel(&resolvent(z), &resolvent(w), &mesh);
    assert!((v - oracle).norm() < 1e-5 * (1.0 + oracle.norm()), "{v} vs {oracle}");
}

#[test]
fn refinement_converges_at_least_linearly() {
    let m = 1.0;
    let u = |x: f64, y: f64| (x * y).exp();
    let density = |x: f64, y: f64| (1.0 + x * y) * (x * y).exp();
    let f = |x: f64| Complex64::new(x.cos(), 0.0);
    let g = |y: f64| Complex64::new(y.exp(), 0.0);
    let oracle = simpson2(|x, y| f(x) * g(y) * density(x, y), m, 400);
    let mesh = FrechetMesh::uniform(m, 8, 8, u).unwrap();
    let rows = frechet_integral_refined(f, g, u, &mesh, 4).unwrap();
    let errors: Vec<f64> = rows.iter().map(|r| (r.value - oracle).norm()).collect();
    for pair in errors.windows(2) {
        assert!(pair[1] <= pair[0] / 1.9, "{errors:?}");
    }
}
