//! Cauchy transforms of the semicircle law and the GUE second-order
//! Cauchy transform, in closed form and from sampled spectra.

use num_complex::Complex64;

use crate::ensembles::{EnsembleSpec, Spectrum};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::statistics::estimate::{covariance_jackknife, replicate, EstimateWithError};

/// Minimum replica count for [`g2_empirical`].
pub const MIN_G2_REPLICAS: usize = 100;

/// `√(z-2)·√(z+2)` with principal roots: analytic off `[-2, 2]`, `~ z` at
/// infinity, and commutes with conjugation.
pub fn branched_sqrt(z: Complex64) -> Complex64 {
    (z - 2.0).sqrt() * (z + 2.0).sqrt()
}

fn on_cut(z: Complex64) -> bool {
    z.im == 0.0 && z.re.abs() <= 2.0
}

fn check_off_cut(z: Complex64) -> Result<()> {
    if on_cut(z) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("{z} lies on the cut [-2, 2]")));
    }
    Ok(())
}

/// Semicircle Cauchy transform `G(z) = (z - s(z))/2`, evaluated as the
/// equivalent `2/(z + s(z))` to avoid cancellation at large `|z|`.
pub fn semicircle_cauchy(z: Complex64) -> Result<Complex64> {
    check_off_cut(z)?;
    Ok(cauchy_unchecked(z).0)
}

/// `G'(z) = -G(z)/s(z)`, from differentiating `G² - zG + 1 = 0`.
pub fn semicircle_cauchy_derivative(z: Complex64) -> Result<Complex64> {
    check_off_cut(z)?;
    Ok(cauchy_unchecked(z).1)
}

#[inline]
fn cauchy_unchecked(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let s = branched_sqrt(z);
    let g = 2.0 / (z + s);
    (g, -g / s, s)
}

/// Guard radius around the diagonal `z = w`, where both closed forms are a
/// removable `0/0`.
pub fn diagonal_guard(z: Complex64) -> f64 {
    1e-3 * (1.0 + z.norm())
}

fn check_pair(z: Complex64, w: Complex64) -> Result<()> {
    check_off_cut(z)?;
    check_off_cut(w)?;
    let gap = (z - w).norm();
    let guard = diagonal_guard(z);
    if gap < guard {
        return Err(Error::NearDiagonal { gap, guard });
    }
    Ok(())
}

/// `G'(z)G'(w)/(G(z)-G(w))² - 1/(z-w)²`
pub fn g2_gue_free(z: Complex64, w: Complex64) -> Result<Complex64> {
    check_pair(z, w)?;
    let (gz, dgz, _) = cauchy_unchecked(z);
    let (gw, dgw, _) = cauchy_unchecked(w);
    let dg = gz - gw;
    let dz = z - w;
    Ok(dgz * dgw / (dg * dg) - (dz * dz).inv())
}

/// `((zw - 4)/(s(z)s(w)) - 1) / (2(z-w)²)`
pub fn g2_gue_ps(z: Complex64, w: Complex64) -> Result<Complex64> {
    check_pair(z, w)?;
    let dz = z - w;
    let ratio = (z * w - 4.0) / (branched_sqrt(z) * branched_sqrt(w));
    Ok((ratio - 1.0) / (2.0 * dz * dz))
}

/// `Tr (z - X)^{-1} = Σ_i 1/(z - λ_i)`.
pub fn resolvent_trace(spectrum: &Spectrum, z: Complex64) -> Result<Complex64> {
    let scale = spectrum.norm();
    let mut acc = Complex64::new(0.0, 0.0);
    for &lam in spectrum.values() {
        let d = z - lam;
        let dist = d.norm();
        if dist <= 1e-14 * scale || dist == 0.0 {
            return Err(Error::NearPole { distance: dist });
        }
        acc += d.inv();
    }
    Ok(acc)
}

/// Resolvent trace restricted to eigenvalues with `|λ| ≤ cutoff`.
pub fn truncated_resolvent_trace(spectrum: &Spectrum, z: Complex64, cutoff: f64) -> Complex64 {
    spectrum
        .values()
        .iter()
        .filter(|l| l.abs() <= cutoff)
        .map(|&l| (z - l).inv())
        .sum()
}

fn distance_to_interval(z: Complex64, half_width: f64) -> f64 {
    let dx = (z.re.abs() - half_width).max(0.0);
    dx.hypot(z.im)
}

/// Monte Carlo estimate of `Cov(Tr r_z(X), Tr r_w(X))` with the resolvents
/// truncated to `|λ| ≤ M`, `M` being the ensemble's norm cutoff.
///
/// Diagnostics: `norm_exceedances`, the number of draws with `‖X‖ > M`.
pub fn g2_empirical(
    spec: &EnsembleSpec,
    z: Complex64,
    w: Complex64,
    replicas: usize,
    stream: RngStream,
) -> Result<EstimateWithError<Complex64>> {
    let cutoff = spec.m_bound();
    for p in [z, w] {
        if distance_to_interval(p, cutoff) <= 0.0 {
            return Err(Error::Domain(format!(
                "{p} must lie off the interval [-{cutoff}, {cutoff}]"
            )));
        }
    }
    if replicas < MIN_G2_REPLICAS {
        return Err(Error::Configuration(format!(
            "g2_empirical needs at least {MIN_G2_REPLICAS} replicas, got {replicas}"
        )));
    }
    let rows = replicate(replicas, stream, |s| {
        let spectrum = spec.sample_spectrum(s)?;
        Ok((
            truncated_resolvent_trace(&spectrum, z, cutoff),
            truncated_resolvent_trace(&spectrum, w, cutoff),
            spectrum.norm() > cutoff,
        ))
    })?;
    let a: Vec<Complex64> = rows.iter().map(|r| r.0).collect();
    let b: Vec<Complex64> = rows.iter().map(|r| r.1).collect();
    let exceed = rows.iter().filter(|r| r.2).count();
    let (cov, se) = covariance_jackknife(&a, &b);
    Ok(EstimateWithError::new(cov, se, replicas, stream)
        .with_diagnostic("norm_exceedances", exceed as f64))
}
