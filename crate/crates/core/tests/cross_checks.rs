//! Cross-engine consistency: the recursion, the series oracle, the
//! contraction map, and the sampler must agree on shared instances.

use num_complex::Complex64;
use repgas::activity::ActivityField;
use repgas::contraction::{certify_neighborhood, g, psi, u2_max_modulus};
use repgas::mc::{run_birth_death, McConfig};
use repgas::oracle::{density_oracle, kpoint_oracle, logz_bound_check, mean_density};
use repgas::potential::Potential;
use repgas::quadrature::{QuadratureScheme, Region};
use repgas::recursion::{
    apply_f, density_with, kpoint_density_with, log_partition_with, RecursionParams,
};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn hard_rod_field(lambda: f64) -> (ActivityField, Region) {
    let region = Region::Interval { a: 0.0, b: 1.0 };
    let p = Potential::hard_core(1, 0.5).unwrap();
    let f = ActivityField::constant(p, region.clone(), c(lambda)).unwrap();
    (f, region)
}

#[test]
fn one_step_map_is_conjugate_to_the_scalar_model() {
    // Applying the recursion's one-step map to a constant density field and
    // changing coordinates by psi must reproduce the scalar map g exactly,
    // because the Mayer integral of a constant is the temperedness constant.
    let p = Potential::unit_hard_core(1).unwrap();
    let region = Region::Interval { a: -3.0, b: 3.0 };
    let scheme = QuadratureScheme::for_dimension(1);
    for (lam, x) in [
        (c(0.9), c(0.35)),
        (Complex64::new(1.4, 0.2), Complex64::new(0.4, -0.1)),
        (c(2.0), Complex64::new(0.05, 0.02)),
    ] {
        let mut rho = |_w: &[f64]| Ok(x);
        let mapped = apply_f(lam, &mut rho, &p, &[0.0], &region, &scheme).unwrap();
        let lhs = psi(mapped, 1.0).unwrap();
        let rhs = g(lam, psi(x, 1.0).unwrap(), 1.0).unwrap();
        assert!(
            (lhs - rhs).norm() < 1e-12,
            "lambda {lam} x {x}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn recursion_density_matches_the_oracle_off_center() {
    let (f, region) = hard_rod_field(1.0);
    let params = RecursionParams::for_dimension(1);
    let rec = density_with(&f, &[0.3], 7, &params).unwrap().estimate;
    let ora = density_oracle(&f, &region, &[0.3], 8, 2048).unwrap();
    assert!(rec.value.im.abs() < 1e-12);
    assert!(
        (rec.value.re - ora.re).abs() < 1e-4,
        "recursion {} oracle {}",
        rec.value.re,
        ora.re
    );
}

#[test]
fn recursion_density_matches_the_oracle_for_a_soft_potential() {
    // Soft restrictions jump at every finite discount edge, so the tree is
    // denser than for hard cores; a weaker coupling keeps depth 4 accurate.
    let region = Region::Interval { a: 0.0, b: 1.0 };
    let p = Potential::gaussian(1, 1.0, 0.3).unwrap();
    let f = ActivityField::constant(p, region.clone(), c(0.5)).unwrap();
    let mut params = RecursionParams::for_dimension(1);
    params.branch_orders = vec![8, 6, 5, 4];
    params.kink_split_levels = 1;
    let rec = density_with(&f, &[0.5], 4, &params).unwrap().estimate;
    let ora = density_oracle(&f, &region, &[0.5], 10, 4096).unwrap();
    assert!(
        (rec.value.re - ora.re).abs() < 1e-3,
        "recursion {} oracle {}",
        rec.value.re,
        ora.re
    );
}

#[test]
fn log_partition_is_center_independent() {
    let (f, region) = hard_rod_field(1.0);
    let params = RecursionParams::for_dimension(1);
    let left = log_partition_with(&f, &region, &[0.2], 4, &params).unwrap();
    let right = log_partition_with(&f, &region, &[0.6], 4, &params).unwrap();
    assert!(
        (left.value - right.value).norm() < 1e-3,
        "center 0.2 {} center 0.6 {}",
        left.value,
        right.value
    );
    assert!((left.value.re - 2.125f64.ln()).abs() < 1e-3);
}

#[test]
fn telescoping_two_point_density_matches_the_oracle() {
    let (f, region) = hard_rod_field(1.0);
    let params = RecursionParams::for_dimension(1);
    let points = vec![vec![0.1], vec![0.9]];
    let rec = kpoint_density_with(&f, &points, 5, &params).unwrap();
    let ora = kpoint_oracle(&f, &region, &points, 8, 2048).unwrap();
    assert!(
        (rec - ora).norm() < 1e-3,
        "telescoping {rec} oracle {ora}"
    );
}

#[test]
fn certificate_controls_the_recursion_and_the_partition_function() {
    let cert = certify_neighborhood(1.0, 1.0, 32);
    assert!(cert.passed);
    let region = cert.certified_region().unwrap();
    let (f, volume_region) = hard_rod_field(1.0);
    let mut params = RecursionParams::for_dimension(1);
    params.certified = Some(region);
    let report = density_with(&f, &[0.5], 5, &params).unwrap();
    assert!(report.estimate.in_certified_region);
    assert!(report.max_psi_distance.unwrap() <= cert.eps2);

    let constant = u2_max_modulus(cert.eps2, 1.0);
    let bound = logz_bound_check(&f, &volume_region, 8, 2048, constant).unwrap();
    assert!(bound.holds);
}

#[test]
fn sampler_agrees_with_the_oracle_mean_density() {
    let (f, region) = hard_rod_field(1.0);
    let cfg = McConfig {
        steps: 60_000,
        burn_in: 6_000,
        chains: 2,
        seed: 41,
        thinning: 10,
    };
    let mc = run_birth_death(&f, &region, &cfg).unwrap();
    let exact = mean_density(&f, &region, 8, 2048).unwrap().density;
    let gap = (mc.mean_count / region.volume() - exact).abs();
    assert!(
        gap <= 4.0 * mc.mean_count_stderr,
        "mc {} oracle {exact} stderr {}",
        mc.mean_count,
        mc.mean_count_stderr
    );
}
