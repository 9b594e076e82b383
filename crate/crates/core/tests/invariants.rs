//! Property tests for structural invariants: quadrature exactness, the
//! persistence and commutativity of activity modifications, closed-form
//! agreement of the series oracle, and coordinate-map round trips.

use num_complex::Complex64;
use proptest::prelude::*;
use repgas::activity::ActivityField;
use repgas::contraction::{psi, psi_inv};
use repgas::oracle::{hard_rod_partition, mean_density, partition_polynomial};
use repgas::potential::Potential;
use repgas::quadrature::{gauss_legendre, integrate_region, QuadratureScheme, Region};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn gauss_legendre_is_exact_on_polynomials() {
    for n in 2..=40usize {
        let (nodes, weights) = gauss_legendre(n);
        let total: f64 = weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-12, "order {n} weight sum {total}");
        assert!(weights.iter().all(|&w| w > 0.0));
        // Degree 2n-1 monomials integrate exactly; odd ones vanish.
        let odd: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(2 * n as i32 - 1))
            .sum();
        assert!(odd.abs() < 1e-12);
        let quad: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x * x).sum();
        assert!((quad - 2.0 / 3.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn box_volume_is_recovered_by_quadrature(
        dims in prop::collection::vec((-2.0f64..2.0, 0.1f64..2.0), 1..=3)
    ) {
        let lo: Vec<f64> = dims.iter().map(|(a, _)| *a).collect();
        let hi: Vec<f64> = dims.iter().map(|(a, w)| a + w).collect();
        let region = Region::Box { lo: lo.clone(), hi: hi.clone() };
        let scheme = QuadratureScheme::for_dimension(lo.len());
        let got = integrate_region(&mut |_x: &[f64]| Ok(c(1.0)), &region, &scheme).unwrap();
        prop_assert!((got.re - region.volume()).abs() < 1e-10 * region.volume().max(1.0));
        prop_assert!(got.im.abs() < 1e-14);
    }

    #[test]
    fn discounts_commute(
        u in 0.05f64..0.95,
        w in 0.05f64..0.95,
        x in 0.0f64..1.0,
    ) {
        let p = Potential::gaussian(1, 1.2, 0.5).unwrap();
        let f = ActivityField::constant(
            p,
            Region::Interval { a: 0.0, b: 1.0 },
            Complex64::new(1.3, 0.4),
        )
        .unwrap();
        let ab = f.discount_at(&[u]).discount_at(&[w]);
        let ba = f.discount_at(&[w]).discount_at(&[u]);
        let va = ab.evaluate(&[x]).unwrap();
        let vb = ba.evaluate(&[x]).unwrap();
        prop_assert!((va - vb).norm() < 1e-14);
    }

    #[test]
    fn faraway_restriction_acts_like_a_full_discount(
        v in 0.2f64..0.8,
        x in 0.0f64..1.0,
    ) {
        let p = Potential::hard_core(1, 0.3).unwrap();
        let f = ActivityField::constant(p, Region::Interval { a: 0.0, b: 1.0 }, c(1.0))
            .unwrap();
        // A witness far outside the support makes the restriction ball cover
        // the whole region, so it cannot differ from the unrestricted discount.
        let restricted = f.restrict_toward(&[v], &[50.0]).unwrap();
        let discounted = f.discount_at(&[v]);
        let a = restricted.evaluate(&[x]).unwrap();
        let b = discounted.evaluate(&[x]).unwrap();
        prop_assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn modifications_never_raise_the_sup(
        u in 0.0f64..1.0,
        lam in 0.1f64..3.0,
    ) {
        let p = Potential::gaussian(1, 0.8, 0.6).unwrap();
        let f = ActivityField::constant(p, Region::Interval { a: 0.0, b: 1.0 }, c(lam))
            .unwrap();
        let g = f.discount_at(&[u]);
        prop_assert!(g.sup_abs() <= f.sup_abs() + 1e-15);
    }

    #[test]
    fn psi_round_trips_on_the_right_half_plane(
        re in 0.01f64..5.0,
        im in -2.0f64..2.0,
        c_phi in 0.2f64..3.0,
    ) {
        let x = Complex64::new(re, im);
        let z = psi(x, c_phi).unwrap();
        let back = psi_inv(z, c_phi);
        prop_assert!((back - x).norm() < 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn subcritical_density_dominates_the_independence_bound(
        lam in 0.05f64..2.5,
    ) {
        let p = Potential::hard_core(1, 0.5).unwrap();
        let region = Region::Interval { a: 0.0, b: 1.0 };
        let f = ActivityField::constant(p, region.clone(), c(lam)).unwrap();
        let out = mean_density(&f, &region, 4, 512).unwrap();
        prop_assert!(out.density >= out.lower_bound - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn series_oracle_matches_the_closed_form(
        l in 0.6f64..1.6,
        r in 0.15f64..0.6,
        lam in 0.2f64..2.0,
    ) {
        let region = Region::Interval { a: 0.0, b: l };
        let p = Potential::hard_core(1, r).unwrap();
        let f = ActivityField::constant(p, region.clone(), c(lam)).unwrap();
        // Truncating both sides at the deterministic order keeps the
        // comparison exact whatever fits in the interval.
        let poly = partition_polynomial(&f, &region, 3, 256).unwrap();
        let direct = poly.eval(c(lam));
        let closed = hard_rod_partition(l, r, c(lam), 3);
        prop_assert!(
            (direct - closed).norm() < 1e-9 * closed.norm(),
            "direct {direct} closed {closed}"
        );
    }
}
