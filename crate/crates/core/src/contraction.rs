//! Contraction certification for the constant-activity scalar map.
//!
//! On constant fields the density recursion collapses to one complex scalar
//! map per step. In the coordinate `z = psi(x) = log(1 + C x)` that map is
//!
//! ```text
//! g(lambda, z) = log(1 + C lambda e exp(-exp(z)))
//! ```
//!
//! with `C` the temperedness constant. For real activities up to `lambda0 <
//! e/C` the derivative of `g` in `z` stays below `1 - delta` on the segment
//! `[0, log(1+e)]`, with `delta` explicit. This module evaluates `g` and its
//! derivatives, computes `delta`, and searches for neighborhood radii
//! `eps1` (around the activity segment `[0, lambda0]`) and `eps2` (around
//! the `z` segment) on which grid sweeps confirm `|g'| <= 1 - delta/2` and
//! the activity-derivative bound. The resulting certificate is advisory:
//! bounds are checked on grids, not proved.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::E;

use crate::error::{Error, Result};

/// `log(1 + e)`, the right endpoint of the invariant segment in
/// `psi`-coordinates.
pub const LOG_ONE_PLUS_E: f64 = 1.3132616875182228;

/// Grid-verified contraction neighborhood around the activity segment
/// `[0, lambda0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate {
    pub lambda0: f64,
    pub c_phi: f64,
    /// Neighborhood radius around the activity segment.
    pub eps1: f64,
    /// Neighborhood radius around the `z` segment `[0, log(1+e)]`.
    pub eps2: f64,
    /// Post-step radius `eps2 * (1 - delta/4)`.
    pub eps3: f64,
    pub delta: f64,
    /// Points per grid axis used in the verification sweeps.
    pub grid_resolution: usize,
    pub max_abs_gprime_on_grid: f64,
    pub passed: bool,
}

impl ContractionCertificate {
    /// The region of field values certified to stay inside the contraction
    /// neighborhood, or `None` for a failed certificate.
    pub fn certified_region(&self) -> Option<CertifiedRegion> {
        if self.passed {
            Some(CertifiedRegion {
                eps2: self.eps2,
                c_phi: self.c_phi,
            })
        } else {
            None
        }
    }
}

/// Closure of the `psi`-preimage of the `eps2`-neighborhood of
/// `[0, log(1+e)]`: the set recursion intermediates must stay inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedRegion {
    pub eps2: f64,
    pub c_phi: f64,
}

impl CertifiedRegion {
    /// Distance of `psi(x)` from the segment `[0, log(1+e)]`; infinite when
    /// `1 + C x` falls on the branch cut.
    pub fn psi_distance(&self, x: Complex64) -> f64 {
        let arg = Complex64::new(1.0, 0.0) + self.c_phi * x;
        if arg.re <= 0.0 && arg.im == 0.0 {
            return f64::INFINITY;
        }
        segment_distance(arg.ln(), LOG_ONE_PLUS_E)
    }

    pub fn contains(&self, x: Complex64) -> bool {
        self.psi_distance(x) <= self.eps2 + 1e-12
    }
}

/// Distance from `z` to the real segment `[0, length]`.
pub fn segment_distance(z: Complex64, length: f64) -> f64 {
    let t = z.re.clamp(0.0, length);
    (z.re - t).hypot(z.im)
}

/// Coordinate change `psi(x) = log(1 + C x)` on the principal branch.
pub fn psi(x: Complex64, c_phi: f64) -> Result<Complex64> {
    let arg = Complex64::new(1.0, 0.0) + c_phi * x;
    if arg.re <= 0.0 && arg.im == 0.0 {
        return Err(Error::OutsidePrincipalDomain);
    }
    Ok(arg.ln())
}

/// Inverse coordinate change `psi_inv(z) = (e^z - 1)/C`.
pub fn psi_inv(z: Complex64, c_phi: f64) -> Complex64 {
    (z.exp() - 1.0) / c_phi
}

fn g_inner(lambda: Complex64, z: Complex64, c_phi: f64) -> Complex64 {
    c_phi * lambda * E * (-z.exp()).exp()
}

/// The scalar map `g(lambda, z) = log(1 + C lambda e exp(-exp(z)))`.
pub fn g(lambda: Complex64, z: Complex64, c_phi: f64) -> Result<Complex64> {
    let arg = Complex64::new(1.0, 0.0) + g_inner(lambda, z, c_phi);
    if arg.re <= 0.0 && arg.im == 0.0 {
        return Err(Error::OutsidePrincipalDomain);
    }
    Ok(arg.ln())
}

/// Derivative of `g` in `z`.
pub fn g_prime(lambda: Complex64, z: Complex64, c_phi: f64) -> Result<Complex64> {
    let w = g_inner(lambda, z, c_phi);
    let denom = Complex64::new(1.0, 0.0) + w;
    if denom.norm() == 0.0 {
        return Err(Error::OutsidePrincipalDomain);
    }
    Ok(-w * z.exp() / denom)
}

/// Derivative of `g` in the activity.
pub fn g_lambda_derivative(lambda: Complex64, z: Complex64, c_phi: f64) -> Result<Complex64> {
    let w = g_inner(lambda, z, c_phi);
    let denom = Complex64::new(1.0, 0.0) + w;
    if denom.norm() == 0.0 {
        return Err(Error::OutsidePrincipalDomain);
    }
    Ok(c_phi * E * (-z.exp()).exp() / denom)
}

/// The explicit contraction margin for real activities in `[0, lambda0]`:
/// the minimum of `(1 - b e^{-2})/(1 + b e)` over `b` in `[0, C e lambda0]`.
/// The objective decreases in `b`, so the minimum sits at the endpoint; a
/// grid sweep confirms it.
pub fn delta_bound(lambda0: f64, c_phi: f64) -> Result<f64> {
    if !(lambda0 > 0.0) || !(c_phi > 0.0) {
        return Err(Error::InvalidParameter(
            "delta_bound needs positive lambda0 and c_phi".into(),
        ));
    }
    if lambda0 >= E / c_phi {
        return Err(Error::SupercriticalActivity);
    }
    let beta_max = c_phi * E * lambda0;
    let objective = |beta: f64| (1.0 - beta * (-2.0f64).exp()) / (1.0 + beta * E);
    let mut min = objective(beta_max);
    let n = 10_000;
    for i in 0..=n {
        let beta = beta_max * i as f64 / n as f64;
        min = min.min(objective(beta));
    }
    Ok(min)
}

/// Points covering the closure of the `eps`-neighborhood of `[0, length]`:
/// an interior lattice plus a dense boundary trace. `n` points per axis.
fn stadium_points(length: f64, eps: f64, n: usize) -> Vec<Complex64> {
    let n = n.max(8);
    let mut pts = Vec::new();
    // Interior lattice over the bounding box, clipped to the closed set.
    let n_int = (n / 2).max(8);
    for i in 0..=n_int {
        let re = -eps + (length + 2.0 * eps) * i as f64 / n_int as f64;
        for j in 0..=n_int {
            let im = -eps + 2.0 * eps * j as f64 / n_int as f64;
            let z = Complex64::new(re, im);
            if segment_distance(z, length) <= eps {
                pts.push(z);
            }
        }
    }
    // Boundary: two straight edges and two end half-circles.
    let m = 2 * n;
    for i in 0..m {
        let t = i as f64 / m as f64;
        pts.push(Complex64::new(length * t, eps));
        pts.push(Complex64::new(length * t, -eps));
        let a = std::f64::consts::PI * (0.5 + t);
        pts.push(Complex64::new(eps * a.cos(), eps * a.sin()));
        let b = std::f64::consts::PI * (t - 0.5);
        pts.push(Complex64::new(length + eps * b.cos(), eps * b.sin()));
    }
    pts
}

/// Maximum of `|f(lambda, z)|` over the product grid, requiring
/// `1 + C lambda e exp(-exp(z))` to stay in the right half-plane; returns
/// `None` when an evaluation approaches the branch cut.
fn grid_max(
    lambdas: &[Complex64],
    zs: &[Complex64],
    c_phi: f64,
    f: impl Fn(Complex64, Complex64, f64) -> Result<Complex64> + Sync,
) -> Option<f64> {
    let per_z: Vec<Option<f64>> = zs
        .par_iter()
        .map(|&z| {
            let mut local: f64 = 0.0;
            for &lam in lambdas {
                let arg = Complex64::new(1.0, 0.0) + g_inner(lam, z, c_phi);
                if arg.re <= 0.0 {
                    return None;
                }
                match f(lam, z, c_phi) {
                    Ok(v) => local = local.max(v.norm()),
                    Err(_) => return None,
                }
            }
            Some(local)
        })
        .collect();
    let mut max: f64 = 0.0;
    for v in per_z {
        max = max.max(v?);
    }
    Some(max)
}

/// Searches for neighborhood radii `eps1`, `eps2` on which grid sweeps
/// confirm the contraction bound `|g'| <= 1 - delta/2` and the
/// activity-derivative bound `|dg/dlambda| <= delta eps2 / (4 eps1)`.
/// Failure is encoded in `passed`, never as an error.
pub fn certify_neighborhood(
    lambda0: f64,
    c_phi: f64,
    grid_resolution: usize,
) -> ContractionCertificate {
    let n = grid_resolution.max(8);
    let failed = |max_gprime: f64| ContractionCertificate {
        lambda0,
        c_phi,
        eps1: 0.0,
        eps2: 0.0,
        eps3: 0.0,
        delta: 0.0,
        grid_resolution,
        max_abs_gprime_on_grid: max_gprime,
        passed: false,
    };

    let delta = match delta_bound(lambda0, c_phi) {
        Ok(d) => d,
        Err(_) => {
            // Supercritical: report the derivative maximum on the real
            // domain, which exceeds the contraction target near z = ln 2.
            let lambdas: Vec<Complex64> = (0..=n)
                .map(|i| Complex64::new(lambda0 * i as f64 / n as f64, 0.0))
                .collect();
            let zs: Vec<Complex64> = (0..=n)
                .map(|i| Complex64::new(LOG_ONE_PLUS_E * i as f64 / n as f64, 0.0))
                .collect();
            let max = grid_max(&lambdas, &zs, c_phi, g_prime).unwrap_or(f64::INFINITY);
            return failed(max);
        }
    };
    let target = 1.0 - delta / 2.0;

    // Feasibility of a candidate eps2: find eps1 from the measured
    // activity-derivative maximum, then verify both bounds.
    let try_eps2 = |eps2: f64| -> Option<(f64, f64)> {
        let zs = stadium_points(LOG_ONE_PLUS_E, eps2, n);
        let lam_segment: Vec<Complex64> = (0..=n)
            .map(|i| Complex64::new(lambda0 * i as f64 / n as f64, 0.0))
            .collect();
        let m0 = grid_max(&lam_segment, &zs, c_phi, g_lambda_derivative)?;
        if m0 <= 0.0 {
            return None;
        }
        let mut eps1 = delta * eps2 / (4.0 * m0);
        let mut m = m0;
        for _ in 0..4 {
            let lambdas = stadium_points(lambda0, eps1, n);
            m = grid_max(&lambdas, &zs, c_phi, g_lambda_derivative)?;
            let shrunk = delta * eps2 / (4.0 * m);
            if shrunk >= eps1 {
                break;
            }
            eps1 = shrunk;
        }
        if m * eps1 > delta * eps2 / 4.0 * (1.0 + 1e-12) {
            return None;
        }
        let lambdas = stadium_points(lambda0, eps1, n);
        let gp = grid_max(&lambdas, &zs, c_phi, g_prime)?;
        if gp <= target {
            Some((eps1, gp))
        } else {
            None
        }
    };

    let mut hi = 1.0;
    let mut best: Option<(f64, f64, f64)> = try_eps2(hi).map(|(e1, gp)| (hi, e1, gp));
    if best.is_none() {
        let mut lo = 0.0;
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            match try_eps2(mid) {
                Some((e1, gp)) => {
                    best = Some((mid, e1, gp));
                    lo = mid;
                }
                None => hi = mid,
            }
            if hi - lo < 1e-4 {
                break;
            }
        }
    }

    match best {
        Some((eps2, eps1, gp)) => ContractionCertificate {
            lambda0,
            c_phi,
            eps1,
            eps2,
            eps3: eps2 * (1.0 - delta / 4.0),
            delta,
            grid_resolution,
            max_abs_gprime_on_grid: gp,
            passed: true,
        },
        None => failed(f64::INFINITY),
    }
}

/// Largest modulus over the closure of the certified region: the
/// finite-volume pressure bound constant. The region is the image of a
/// neighborhood under the holomorphic `psi_inv`, so the maximum sits on the
/// boundary.
pub fn u2_max_modulus(eps2: f64, c_phi: f64) -> f64 {
    let m = 4096;
    let mut max: f64 = 0.0;
    for i in 0..m {
        let t = i as f64 / m as f64;
        let candidates = [
            Complex64::new(LOG_ONE_PLUS_E * t, eps2),
            Complex64::new(LOG_ONE_PLUS_E * t, -eps2),
            Complex64::new(
                eps2 * (std::f64::consts::PI * (0.5 + t)).cos(),
                eps2 * (std::f64::consts::PI * (0.5 + t)).sin(),
            ),
            Complex64::new(
                LOG_ONE_PLUS_E + eps2 * (std::f64::consts::PI * (t - 0.5)).cos(),
                eps2 * (std::f64::consts::PI * (t - 0.5)).sin(),
            ),
        ];
        for z in candidates {
            max = max.max(psi_inv(z, c_phi).norm());
        }
    }
    max
}

/// Checks on sampled pairs that the image of the closed `eps`-neighborhood
/// of `[0, radius]` under `exp` is convex: midpoints of image points must
/// lie within 1e-9 of the image.
pub fn convexity_probe(radius: f64, eps: f64, samples: usize) -> bool {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let re = rng.gen_range(-eps..=radius + eps);
        let im = rng.gen_range(-eps..=eps);
        let z = Complex64::new(re, im);
        if segment_distance(z, radius) <= eps {
            return z;
        }
    };
    for _ in 0..samples {
        let z1 = draw(&mut rng);
        let z2 = draw(&mut rng);
        let mid = 0.5 * (z1.exp() + z2.exp());
        if mid.norm() == 0.0 {
            return false;
        }
        let w = mid.ln();
        let d = segment_distance(w, radius);
        if d <= eps {
            continue;
        }
        // Project onto the closed neighborhood and test the image distance.
        let t = w.re.clamp(0.0, radius);
        let anchor = Complex64::new(t, 0.0);
        let proj = anchor + (w - anchor) * (eps / d);
        if (proj.exp() - mid).norm() > 1e-9 {
            return false;
        }
    }
    true
}

/// The scalar coordinate whose exponential equals the weighted average of
/// the exponentials of `z_values`: the averaging step that reduces a
/// field-valued recursion update to one scalar map application.
pub fn effective_coordinate(z_values: &[Complex64], weights: &[f64]) -> Result<Complex64> {
    if z_values.len() != weights.len() {
        return Err(Error::InvalidParameter(
            "z_values and weights must have equal length".into(),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-12 {
        return Err(Error::NotProbabilityVector);
    }
    let avg: Complex64 = z_values
        .iter()
        .zip(weights)
        .map(|(z, &w)| w * z.exp())
        .sum();
    if avg.norm() == 0.0 {
        return Err(Error::OutsidePrincipalDomain);
    }
    Ok(avg.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn psi_fixed_values() {
        assert_eq!(psi(c(0.0, 0.0), 1.0).unwrap(), c(0.0, 0.0));
        for c_phi in [1.0, 2.0, 0.3] {
            let z = psi(c(E / c_phi, 0.0), c_phi).unwrap();
            assert_relative_eq!(z.re, LOG_ONE_PLUS_E, epsilon = 1e-15);
            assert_eq!(z.im, 0.0);
        }
        assert_relative_eq!(LOG_ONE_PLUS_E, (1.0 + E).ln(), epsilon = 1e-16);
    }

    #[test]
    fn psi_round_trip() {
        let x = c(0.5, 0.1);
        let back = psi_inv(psi(x, 1.0).unwrap(), 1.0);
        assert!((back - x).norm() < 1e-14);
        let y = c(-0.2, 0.7);
        let back = psi_inv(psi(y, 2.5).unwrap(), 2.5);
        assert!((back - y).norm() < 1e-14);
    }

    #[test]
    fn psi_branch_cut_rejected() {
        assert!(matches!(
            psi(c(-1.5, 0.0), 1.0),
            Err(Error::OutsidePrincipalDomain)
        ));
        assert!(matches!(
            psi(c(-1.0, 0.0), 1.0),
            Err(Error::OutsidePrincipalDomain)
        ));
    }

    #[test]
    fn g_fixed_values() {
        for z in [c(0.0, 0.0), c(0.7, 0.2), c(1.3, -0.4)] {
            assert_eq!(g(c(0.0, 0.0), z, 1.0).unwrap(), c(0.0, 0.0));
        }
        // At the critical activity the left endpoint maps to the right one.
        let v = g(c(E, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(v.re, LOG_ONE_PLUS_E, epsilon = 1e-15);
        let v = g(c(E / 2.0, 0.0), c(0.0, 0.0), 2.0).unwrap();
        assert_relative_eq!(v.re, LOG_ONE_PLUS_E, epsilon = 1e-15);
    }

    #[test]
    fn g_maps_segment_into_itself() {
        let n = 101;
        for i in 0..=n {
            let lam = c(E * i as f64 / n as f64, 0.0);
            for j in 0..=n {
                let z = c(LOG_ONE_PLUS_E * j as f64 / n as f64, 0.0);
                let v = g(lam, z, 1.0).unwrap();
                assert_eq!(v.im, 0.0);
                assert!(v.re >= -1e-12 && v.re <= LOG_ONE_PLUS_E + 1e-12);
            }
        }
    }

    #[test]
    fn g_prime_matches_finite_difference() {
        let h = 1e-5;
        for (lam, z, c_phi) in [
            (c(1.0, 0.0), c(0.5, 0.0), 1.0),
            (c(2.0, 0.3), c(0.9, -0.2), 1.7),
            (c(0.4, -0.1), c(0.1, 0.05), 0.6),
        ] {
            let fd = (g(lam, z + c(h, 0.0), c_phi).unwrap()
                - g(lam, z - c(h, 0.0), c_phi).unwrap())
                / c(2.0 * h, 0.0);
            let an = g_prime(lam, z, c_phi).unwrap();
            assert!((fd - an).norm() < 1e-6);
        }
    }

    #[test]
    fn g_lambda_derivative_matches_finite_difference() {
        let h = 1e-5;
        for (lam, z, c_phi) in [
            (c(1.0, 0.0), c(0.5, 0.0), 1.0),
            (c(2.0, 0.3), c(0.9, -0.2), 1.7),
        ] {
            let fd = (g(lam + c(h, 0.0), z, c_phi).unwrap()
                - g(lam - c(h, 0.0), z, c_phi).unwrap())
                / c(2.0 * h, 0.0);
            let an = g_lambda_derivative(lam, z, c_phi).unwrap();
            assert!((fd - an).norm() < 1e-6);
        }
    }

    #[test]
    fn g_prime_critical_values() {
        // Maximizer at z = ln 2 has unit modulus.
        let v = g_prime(c(E, 0.0), c(2.0f64.ln(), 0.0), 1.0).unwrap();
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-14);
        // Left endpoint value e/(1+e).
        let v = g_prime(c(E, 0.0), c(0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(v.norm(), 0.73105857863000488, epsilon = 1e-14);
        assert_eq!(g_prime(c(0.0, 0.0), c(0.4, 0.1), 1.0).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn g_prime_grid_maximizer_sits_at_ln_two() {
        let n = 100_000;
        let mut max = 0.0;
        let mut arg = 0.0;
        for i in 0..=n {
            let z = 5.0 * i as f64 / n as f64;
            let v = g_prime(c(E, 0.0), c(z, 0.0), 1.0).unwrap().norm();
            if v > max {
                max = v;
                arg = z;
            }
        }
        assert!(max >= 1.0 - 1e-6 && max <= 1.0 + 1e-9);
        assert!((arg - 2.0f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn delta_bound_frozen_values() {
        assert_relative_eq!(
            delta_bound(1.0, 1.0).unwrap(),
            0.075350617682617934,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            delta_bound(2.0, 1.0).unwrap(),
            0.016747321501043252,
            epsilon = 1e-14
        );
        assert!((delta_bound(2.0, 1.0).unwrap() - 0.016746).abs() < 1e-5);
        assert!(delta_bound(1e-9, 1.0).unwrap() > 1.0 - 1e-6);
        assert!(matches!(
            delta_bound(2.8, 1.0),
            Err(Error::SupercriticalActivity)
        ));
        assert!(matches!(
            delta_bound(E, 1.0),
            Err(Error::SupercriticalActivity)
        ));
    }

    #[test]
    fn delta_bounds_the_real_derivative() {
        let lambda0 = 2.0;
        let delta = delta_bound(lambda0, 1.0).unwrap();
        let n = 200;
        for i in 0..=n {
            let lam = c(lambda0 * i as f64 / n as f64, 0.0);
            for j in 0..=n {
                let z = c(LOG_ONE_PLUS_E * j as f64 / n as f64, 0.0);
                let v = g_prime(lam, z, 1.0).unwrap().norm();
                assert!(v <= 1.0 - delta + 1e-9);
            }
        }
    }

    #[test]
    fn certify_subcritical_passes() {
        let cert = certify_neighborhood(2.0, 1.0, 40);
        assert!(cert.passed);
        assert!(cert.eps1 > 0.0 && cert.eps2 > 0.0);
        assert_relative_eq!(
            cert.eps3,
            cert.eps2 * (1.0 - cert.delta / 4.0),
            epsilon = 1e-15
        );
        assert!(cert.eps3 < cert.eps2);
        assert!(cert.max_abs_gprime_on_grid <= 1.0 - cert.delta / 2.0);
        assert_relative_eq!(cert.delta, 0.016747321501043252, epsilon = 1e-12);
        let region = cert.certified_region().unwrap();
        assert!(region.contains(c(0.5, 0.0)));
        assert!(!region.contains(c(100.0, 0.0)));
    }

    #[test]
    fn certify_deep_subcritical_has_large_delta() {
        let cert = certify_neighborhood(0.1, 1.0, 30);
        assert!(cert.passed);
        assert!(cert.delta > 0.5);
    }

    #[test]
    fn certify_supercritical_fails() {
        let cert = certify_neighborhood(3.0, 1.0, 40);
        assert!(!cert.passed);
        assert!(cert.certified_region().is_none());
        assert!(cert.max_abs_gprime_on_grid > 1.0 - 1e-6);
    }

    #[test]
    fn convexity_probe_small_eps() {
        assert!(convexity_probe(LOG_ONE_PLUS_E, 1e-3, 500));
        assert!(convexity_probe(1.0, 0.0, 0));
    }

    #[test]
    fn effective_coordinate_examples() {
        let v = effective_coordinate(&[c(0.7, 0.2), c(0.7, 0.2)], &[0.5, 0.5]).unwrap();
        assert!((v - c(0.7, 0.2)).norm() < 1e-14);
        let v = effective_coordinate(&[c(0.0, 0.0), c(3.0f64.ln(), 0.0)], &[0.5, 0.5]).unwrap();
        assert_relative_eq!(v.re, 2.0f64.ln(), epsilon = 1e-14);
        let zs = [c(0.3, 0.4), c(-0.2, 0.1), c(0.9, -0.5)];
        let ws = [0.2, 0.5, 0.3];
        let v = effective_coordinate(&zs, &ws).unwrap();
        let avg: Complex64 = zs.iter().zip(&ws).map(|(z, &w)| w * z.exp()).sum();
        assert!((v.exp() - avg).norm() < 1e-12);
        assert!(matches!(
            effective_coordinate(&zs, &[0.2, 0.5, 0.4]),
            Err(Error::NotProbabilityVector)
        ));
        assert!(matches!(
            effective_coordinate(&zs, &[1.2, 0.3, -0.5]),
            Err(Error::NotProbabilityVector)
        ));
    }

    #[test]
    fn u2_modulus_grows_with_eps2() {
        let a = u2_max_modulus(0.1, 1.0);
        let b = u2_max_modulus(0.5, 1.0);
        assert!(a > E - 1.0);
        assert!(b > a);
    }
}
