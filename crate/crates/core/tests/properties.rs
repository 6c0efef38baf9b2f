//! Randomized invariants across modules.

use fluctlab::ensembles::{eigenvalues, sample_gue, EnsembleSpec, HermitianMatrix};
use fluctlab::frechet::{
    frechet_integral, frechet_variation, rectangle_increments, variation_of_increments, FrechetMesh,
    VariationMode,
};
use fluctlab::moments::{enumerate_pairings, MomentTable};
use fluctlab::quadrature::{
    rho_polynomial_reference, rho_via_contour, AnalyticFunction, Contour, DEFAULT_ENCLOSED,
};
use fluctlab::statistics::{c1_extension, k_statistic, TestFunction};
use fluctlab::transforms::{g2_gue_free, g2_gue_ps};
use fluctlab::{Polynomial, RngStream};
use num_complex::Complex64;
use proptest::prelude::*;

fn off_cut_point() -> impl Strategy<Value = Complex64> {
    (-6.0..6.0f64, 0.25..6.0f64, any::<bool>())
        .prop_map(|(x, y, up)| Complex64::new(x, if up { y } else { -y }))
}

fn ascending_grid(m: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05..1.0f64, 1..8).prop_map(move |gaps| {
        let total: f64 = gaps.iter().sum();
        let mut g = vec![-m];
        let mut acc = 0.0;
        for gap in &gaps[..gaps.len() - 1] {
            acc += gap;
            g.push(-m + 2.0 * m * acc / total);
        }
        g.push(m);
        g
    })
}

fn small_polynomial() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(-2.0..2.0f64, 1..5).prop_map(Polynomial::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_agree(z in off_cut_point(), w in off_cut_point()) {
        prop_assume!((z - w).norm() > 0.2);
        let a = g2_gue_free(z, w).unwrap();
        let b = g2_gue_ps(z, w).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn g2_symmetries(z in off_cut_point(), w in off_cut_point()) {
        prop_assume!((z - w).norm() > 0.2);
        let a = g2_gue_free(z, w).unwrap();
        prop_assert!((a - g2_gue_free(w, z).unwrap()).norm() <= 1e-12 * (1.0 + a.norm()));
        prop_assert!((a.conj() - g2_gue_free(z.conj(), w.conj()).unwrap()).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn spectrum_sums_to_trace_and_shifts(n in 1usize..24, seed in any::<u64>(), c in -3.0..3.0f64) {
        let x = sample_gue(n, RngStream::new(seed, 0)).unwrap();
        let s = eigenvalues(&x).unwrap();
        prop_assert!((s.sum() - x.trace()).abs() <= 1e-12 * n as f64 * (1.0 + s.norm()));
        let shift = HermitianMatrix::from_real_diagonal(&vec![c; n]).unwrap();
        let t = eigenvalues(&x.add(&shift).unwrap()).unwrap();
        for (a, b) in s.values().iter().zip(t.values()) {
            prop_assert!((a + c - b).abs() <= 1e-12 * (1.0 + s.norm() + c.abs()) * n as f64);
        }
    }

    #[test]
    fn increments_telescope(gx in ascending_grid(1.5), gy in ascending_grid(1.5), k in 0.1..3.0f64) {
        let u = move |x: f64, y: f64| (k * x * y).sin() + x * x * y.exp();
        let coarse = FrechetMesh::from_fn(gx.clone(), gy.clone(), u).unwrap();
        let fine = coarse.refined(u).unwrap();
        let (a, b) = (rectangle_increments(&coarse), rectangle_increments(&fine));
        for i in 0..a.len() {
            for j in 0..a[0].len() {
                let s = b[2 * i][2 * j] + b[2 * i + 1][2 * j] + b[2 * i][2 * j + 1] + b[2 * i + 1][2 * j + 1];
                prop_assert!((s - a[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_variation_ignores_row_and_column_signs(
        gx in ascending_grid(1.0), gy in ascending_grid(1.0), row in 0usize..8, col in 0usize..8,
    ) {
        let mesh = FrechetMesh::from_fn(gx, gy, |x, y| (2.0 * x + y).cos() * (x - y)).unwrap();
        let a = rectangle_increments(&mesh);
        let v = frechet_variation(&mesh, VariationMode::Exact).unwrap();
        prop_assert!(v <= frechet_variation(&mesh, VariationMode::UpperBound).unwrap() + 1e-14);
        let mut flipped = a.clone();
        let r = row % a.len();
        for x in flipped[r].iter_mut() {
            *x = -*x;
        }
        let c = col % a[0].len();
        for line in flipped.iter_mut() {
            line[c] = -line[c];
        }
        let w = variation_of_increments(&flipped, VariationMode::Exact).unwrap();
        prop_assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn frechet_integral_is_bilinear(p in small_polynomial(), q in small_polynomial(), h in small_polynomial(), a in -2.0..2.0f64) {
        let mesh = FrechetMesh::uniform(2.0, 9, 7, |x, y| (x * y).sin() + y * y * x).unwrap();
        let ev = |p: &Polynomial| { let p = p.clone(); move |x: f64| Complex64::new(p.eval(x), 0.0) };
        let combo = |x: f64| Complex64::new(a * p.eval(x) + q.eval(x), 0.0);
        let lhs = frechet_integral(combo, ev(&h), &mesh);
        let rhs = frechet_integral(ev(&p), ev(&h), &mesh) * a + frechet_integral(ev(&q), ev(&h), &mesh);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn k_statistics_scale_and_shift(xs in prop::collection::vec(-5.0..5.0f64, 8..40), c in 0.2..3.0f64, b in -4.0..4.0f64) {
        let ys: Vec<f64> = xs.iter().map(|x| c * x + b).collect();
        for r in 2..=4 {
            let (kx, ky) = (k_statistic(&xs, r).value, k_statistic(&ys, r).value);
            let want = c.powi(r as i32) * kx;
            prop_assert!((ky - want).abs() <= 1e-8 * (1.0 + want.abs()), "r={} {} {}", r, ky, want);
        }
    }

    #[test]
    fn extension_bounds(p in small_polynomial(), m in 0.5..2.5f64) {
        let f = TestFunction::polynomial(p);
        let e = c1_extension(&f, m).unwrap();
        let sup = f.grid_sup(m, 20_001);
        prop_assert!(e.grid_sup(10.0 * m, 20_001) <= 2.0 * sup + 1e-12);
        prop_assert!(e.grid_sup_derivative(10.0 * m, 20_001) <= f.grid_sup_derivative(m, 20_001) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn contour_matches_oracle_on_random_polynomials(p in small_polynomial(), q in small_polynomial()) {
        let table = MomentTable::gue(8).unwrap();
        let cz = Contour::circle(0.0, 3.0, 128, DEFAULT_ENCLOSED).unwrap();
        let cw = Contour::circle(0.0, 3.5, 128, DEFAULT_ENCLOSED).unwrap();
        let (fp, fq) = (AnalyticFunction::polynomial(&p), AnalyticFunction::polynomial(&q));
        let v = rho_via_contour(&fp, &fq, g2_gue_free, &cz, &cw).unwrap();
        let exact = rho_polynomial_reference(&p, &q, &table).unwrap();
        prop_assert!((v - exact).norm() < 1e-8, "{} vs {}", v, exact);
        let swapped = rho_via_contour(&fq, &fp, g2_gue_free, &cz, &cw).unwrap();
        prop_assert!((v - swapped).norm() < 1e-9);
    }

    #[test]
    fn genus_exponents_are_even_and_bounded(m in 1usize..6, n in 1usize..6) {
        prop_assume!((m + n) % 2 == 0);
        for p in enumerate_pairings(m, n).unwrap() {
            let e = p.exponent(m);
            let cap = if p.connects(m) { 0 } else { 2 };
            prop_assert!(e <= cap && e % 2 == 0, "{:?} exponent {}", p.pairs(), e);
        }
    }

    #[test]
    fn sampling_replays(n in 1usize..16, seed in any::<u64>(), stream in any::<u64>()) {
        let spec = EnsembleSpec::gue(n).unwrap();
        let s = RngStream::new(seed, stream);
        prop_assert_eq!(spec.sample(s).unwrap(), spec.sample(s).unwrap());
    }
}
