//! Depth-truncated correlation-decay recursion for one-point densities.
//!
//! The density of the gas at a point `v` satisfies an exact identity: it is
//! the activity at `v` damped by the exponential of a Mayer-weighted
//! integral of densities of *restricted* fields, each restriction
//! discounting the activity on the ball around `v` reaching toward the
//! integration node. Truncating that self-reference at a finite depth and
//! discretizing each Mayer integral turns the identity into a finite tree
//! evaluation.
//!
//! Every tree node returns the whole sequence of values for depths `0..=k`
//! computed from one shared set of children, so a single evaluation yields
//! the convergence profile and its last step, not just the deepest value.
//! Subtrees rooted at a point of zero activity are exactly zero at every
//! depth and are cut off without recursing.
//!
//! Quadrature layout matters more than raw order here: the branch integrand
//! has kinks at predictable radii (mirror images of structure points of the
//! field through `v`, and half the hard-core radius), so the top
//! `kink_split_levels` levels split their cells there, while deeper levels
//! run cheap low orders. The same machinery integrates the log-partition
//! identity and telescoping k-point densities.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::activity::ActivityField;
use crate::contraction::CertifiedRegion;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::{
    integrate_mayer_ball, integrate_region, mayer_ball_nodes, nodes_01, split_cells, Integrand,
    MayerNode, QuadratureScheme, Region,
};

/// Tuning knobs of the tree evaluation.
#[derive(Debug, Clone)]
pub struct RecursionParams {
    /// Scheme for region-level integrals (outer integral of the
    /// log-partition identity) and the descriptor stored in estimates.
    pub scheme: QuadratureScheme,
    /// Mayer-ball quadrature order per tree level; the last entry repeats
    /// for all deeper levels.
    pub branch_orders: Vec<usize>,
    /// Number of top levels whose cells are split at predicted integrand
    /// kinks (one dimension only).
    pub kink_split_levels: usize,
    /// Branches with |quadrature weight x Mayer factor| below this are
    /// skipped.
    pub prune_tol: f64,
    /// Hard cap on evaluated tree nodes per call.
    pub node_budget: u64,
    /// When set, every intermediate value is checked against this region
    /// and the maximum transformed distance is reported.
    pub certified: Option<CertifiedRegion>,
}

impl RecursionParams {
    /// Parameters implied by a bare quadrature scheme: the graded branch
    /// ladder capped by the scheme's order, since branch cells multiply with
    /// depth and per-level orders above ten buy nothing.
    pub fn from_scheme(scheme: QuadratureScheme) -> Self {
        let cap = scheme.order_per_dimension.max(2);
        RecursionParams {
            scheme,
            branch_orders: [10, 8, 6, 5, 4, 3].iter().map(|&o| cap.min(o)).collect(),
            kink_split_levels: 2,
            prune_tol: 1e-10,
            node_budget: 50_000_000,
            certified: None,
        }
    }

    /// Tuned defaults per dimension.
    pub fn for_dimension(d: usize) -> Self {
        let mut p = RecursionParams::from_scheme(QuadratureScheme::for_dimension(d));
        p.branch_orders = if d == 1 {
            vec![10, 8, 6, 5, 4, 3]
        } else {
            vec![3, 2]
        };
        p.kink_split_levels = if d == 1 { 2 } else { 0 };
        p
    }

    fn order_at(&self, level: usize) -> usize {
        *self
            .branch_orders
            .get(level)
            .or_else(|| self.branch_orders.last())
            .unwrap_or(&3)
    }
}

/// Result of one truncated recursion evaluation.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub value: Complex64,
    pub depth: usize,
    pub scheme: QuadratureScheme,
    /// |value(depth) - value(depth-1)|; at depth 0 the distance from the
    /// zero seed, |value|.
    pub last_step_delta: f64,
    /// True only when a certified region was supplied and every
    /// intermediate value of the tree stayed inside it.
    pub in_certified_region: bool,
}

/// Estimate plus evaluation diagnostics.
#[derive(Debug, Clone)]
pub struct DensityReport {
    pub estimate: DensityEstimate,
    /// Values at depths `0..=depth`, all from the same tree.
    pub profile: Vec<Complex64>,
    pub nodes: u64,
    /// Maximum transformed distance of any intermediate from the invariant
    /// segment; `None` without a certified region.
    pub max_psi_distance: Option<f64>,
}

/// Log-partition value with evaluation diagnostics.
#[derive(Debug, Clone)]
pub struct LogPartitionReport {
    pub value: Complex64,
    pub nodes: u64,
    pub max_psi_distance: Option<f64>,
}

/// One step of the recursion as a standalone functional: the activity value
/// damped by the Mayer-weighted integral of a density field around `v`.
pub fn apply_f(
    lambda_value: Complex64,
    rho_field: &mut Integrand,
    p: &Potential,
    v: &[f64],
    region: &Region,
    scheme: &QuadratureScheme,
) -> Result<Complex64> {
    if lambda_value == Complex64::new(0.0, 0.0) {
        return Ok(lambda_value);
    }
    let integral = integrate_mayer_ball(rho_field, p, v, region, scheme)?;
    Ok(lambda_value * (-integral).exp())
}

struct Ctx<'a> {
    params: &'a RecursionParams,
    region: &'a Region,
    budget: AtomicU64,
}

/// Radii at which the branch integrand `w -> density(restricted field, w)`
/// kinks: mirror images through `v` of the field's structure points, plus
/// half the hard-core radius on both sides.
fn kink_break_points(f: &ActivityField, v: f64, region: &Region) -> Vec<f64> {
    let mut sources = f.break_points_1d();
    if let Some((a, b)) = region.interval_bounds() {
        sources.push(a);
        sources.push(b);
    }
    for (l, h) in f.zero_intervals_1d() {
        sources.push(l);
        sources.push(h);
    }
    let mut out: Vec<f64> = sources
        .iter()
        .filter(|e| e.is_finite())
        .map(|e| 2.0 * v - e)
        .collect();
    if let Some(r) = f.potential().hard_core_radius() {
        out.push(v - 0.5 * r);
        out.push(v + 0.5 * r);
    }
    out
}

fn recurse(
    f: &ActivityField,
    v: &[f64],
    depth: usize,
    level: usize,
    ctx: &Ctx<'_>,
) -> Result<(Vec<Complex64>, f64)> {
    let used = ctx.budget.fetch_add(1, Ordering::Relaxed) + 1;
    if used > ctx.params.node_budget {
        return Err(Error::RecursionBudgetExceeded);
    }
    let zero = Complex64::new(0.0, 0.0);
    let lam = f.evaluate(v)?;
    if lam == zero {
        return Ok((vec![zero; depth + 1], 0.0));
    }
    let mut dist_max = match &ctx.params.certified {
        Some(reg) => reg.psi_distance(lam),
        None => 0.0,
    };
    if depth == 0 {
        return Ok((vec![lam], dist_max));
    }

    let d = v.len();
    let (breaks, dead) = if d == 1 {
        let mut breaks = f.break_points_1d();
        if level < ctx.params.kink_split_levels {
            breaks.extend(kink_break_points(f, v[0], ctx.region));
        }
        (breaks, f.zero_intervals_1d())
    } else {
        (Vec::new(), Vec::new())
    };
    let nodes = mayer_ball_nodes(
        f.potential(),
        v,
        ctx.region,
        ctx.params.order_at(level),
        ctx.params.scheme.rule,
        ctx.params.scheme.radial_layers,
        &breaks,
        &dead,
    )?;
    let kept: Vec<&MayerNode> = nodes
        .iter()
        .filter(|n| n.weight.abs() >= ctx.params.prune_tol)
        .collect();

    let expand = |n: &MayerNode| -> Result<(Vec<Complex64>, f64)> {
        let child = f.restrict_toward(v, &n.point)?;
        recurse(&child, &n.point, depth - 1, level + 1, ctx)
    };
    let children: Vec<Result<(Vec<Complex64>, f64)>> = if level < 2 && depth >= 2 && kept.len() > 1
    {
        kept.par_iter().map(|n| expand(n)).collect()
    } else {
        kept.iter().map(|n| expand(n)).collect()
    };

    let mut sums = vec![zero; depth];
    for (n, res) in kept.iter().zip(children) {
        let (prof, child_max) = res?;
        dist_max = dist_max.max(child_max);
        for (sum, val) in sums.iter_mut().zip(&prof) {
            *sum += val * n.weight;
        }
    }
    let mut profile = Vec::with_capacity(depth + 1);
    profile.push(lam);
    for s in &sums {
        let val = lam * (-s).exp();
        if let Some(reg) = &ctx.params.certified {
            dist_max = dist_max.max(reg.psi_distance(val));
        }
        profile.push(val);
    }
    Ok((profile, dist_max))
}

/// Truncated density with full diagnostics. The integration region is the
/// field's support.
pub fn density_with(
    f: &ActivityField,
    v: &[f64],
    depth: usize,
    params: &RecursionParams,
) -> Result<DensityReport> {
    let ctx = Ctx {
        params,
        region: f.support(),
        budget: AtomicU64::new(0),
    };
    let (profile, dist_max) = recurse(f, v, depth, 0, &ctx)?;
    let value = *profile.last().unwrap();
    let last_step_delta = if depth == 0 {
        value.norm()
    } else {
        (profile[depth] - profile[depth - 1]).norm()
    };
    let in_certified_region = match &params.certified {
        Some(reg) => dist_max <= reg.eps2 + 1e-12,
        None => false,
    };
    Ok(DensityReport {
        estimate: DensityEstimate {
            value,
            depth,
            scheme: params.scheme,
            last_step_delta,
            in_certified_region,
        },
        profile,
        nodes: ctx.budget.load(Ordering::Relaxed),
        max_psi_distance: params.certified.as_ref().map(|_| dist_max),
    })
}

fn implied_params(f: &ActivityField, scheme: &QuadratureScheme) -> RecursionParams {
    let mut params = RecursionParams::for_dimension(f.dimension());
    params.scheme = *scheme;
    params
}

/// Depth-truncated density of the field at `v`.
pub fn density(
    f: &ActivityField,
    v: &[f64],
    depth: usize,
    scheme: &QuadratureScheme,
) -> Result<DensityEstimate> {
    density_with(f, v, depth, &implied_params(f, scheme)).map(|r| r.estimate)
}

/// Log of the partition function by the annihilation identity: integrate
/// over `x` in the region the density of the field annihilated on the ball
/// around `center` of radius `dist(center, x)`. The center only re-anchors
/// the sweep; the integral is center-independent up to quadrature and
/// truncation error.
pub fn log_partition_with(
    f: &ActivityField,
    region: &Region,
    center: &[f64],
    depth: usize,
    params: &RecursionParams,
) -> Result<LogPartitionReport> {
    region.validate()?;
    if center.len() != region.dimension() {
        return Err(Error::DimensionMismatch {
            expected: region.dimension(),
            got: center.len(),
        });
    }
    let mut nodes_total = 0u64;
    let mut dist_max: Option<f64> = params.certified.as_ref().map(|_| 0.0);
    if let Some((a, b)) = region.interval_bounds() {
        // The hat density kinks where the annihilated ball or the Mayer
        // window of x crosses support structure.
        let c = center[0];
        let mut breaks = f.break_points_1d();
        breaks.extend_from_slice(&[c, 2.0 * c - a, 2.0 * c - b]);
        if let Some(r) = f.potential().hard_core_radius() {
            breaks.extend_from_slice(&[c - r, c + r, a + r, b - r]);
        }
        let (xs, ws) = nodes_01(params.scheme.rule, params.scheme.order_per_dimension);
        let mut points = Vec::new();
        for (lo, hi) in split_cells(a, b, &breaks) {
            let len = hi - lo;
            for (xi, wi) in xs.iter().zip(&ws) {
                points.push((lo + len * xi, len * wi));
            }
        }
        let evals: Vec<Result<(Vec<Complex64>, f64, u64)>> = points
            .par_iter()
            .map(|(x, _)| {
                let hat = f.hat_at(center, &[*x]);
                let ctx = Ctx {
                    params,
                    region: f.support(),
                    budget: AtomicU64::new(0),
                };
                let (profile, dmax) = recurse(&hat, &[*x], depth, 0, &ctx)?;
                Ok((profile, dmax, ctx.budget.load(Ordering::Relaxed)))
            })
            .collect();
        let mut value = Complex64::new(0.0, 0.0);
        for ((_, w), res) in points.iter().zip(evals) {
            let (profile, dmax, n) = res?;
            value += profile.last().unwrap() * *w;
            nodes_total += n;
            if let Some(m) = dist_max.as_mut() {
                *m = m.max(dmax);
            }
        }
        return Ok(LogPartitionReport {
            value,
            nodes: nodes_total,
            max_psi_distance: dist_max,
        });
    }
    let mut integrand = |x: &[f64]| -> Result<Complex64> {
        let hat = f.hat_at(center, x);
        let report = density_with(&hat, x, depth, params)?;
        nodes_total += report.nodes;
        if let (Some(m), Some(d)) = (dist_max.as_mut(), report.max_psi_distance) {
            *m = m.max(d);
        }
        Ok(report.estimate.value)
    };
    let value = integrate_region(&mut integrand, region, &params.scheme)?;
    Ok(LogPartitionReport {
        value,
        nodes: nodes_total,
        max_psi_distance: dist_max,
    })
}

/// Log-partition identity with parameters implied by the scheme.
pub fn log_partition_via_identity(
    f: &ActivityField,
    region: &Region,
    center: &[f64],
    depth: usize,
    scheme: &QuadratureScheme,
) -> Result<Complex64> {
    log_partition_with(f, region, center, depth, &implied_params(f, scheme)).map(|r| r.value)
}

/// k-point density as the telescoping product: the j-th factor is the
/// density at `v_j` of the field fully discounted at `v_1..v_{j-1}`.
pub fn kpoint_density_with(
    f: &ActivityField,
    points: &[Vec<f64>],
    depth: usize,
    params: &RecursionParams,
) -> Result<Complex64> {
    if points.is_empty() {
        return Err(Error::InvalidParameter(
            "k-point density needs at least one point".into(),
        ));
    }
    let mut product = Complex64::new(1.0, 0.0);
    let mut field = f.clone();
    for (j, v) in points.iter().enumerate() {
        let report = density_with(&field, v, depth, params)?;
        product *= report.estimate.value;
        if product == Complex64::new(0.0, 0.0) {
            return Ok(product);
        }
        if j + 1 < points.len() {
            field = field.discount_at(v);
        }
    }
    Ok(product)
}

/// Telescoping k-point density with parameters implied by the scheme.
pub fn kpoint_density_telescoping(
    f: &ActivityField,
    points: &[Vec<f64>],
    depth: usize,
    scheme: &QuadratureScheme,
) -> Result<Complex64> {
    kpoint_density_with(f, points, depth, &implied_params(f, scheme))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::certify_neighborhood;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn hard_rod_field(lambda: f64) -> ActivityField {
        let p = Potential::hard_core(1, 0.5).unwrap();
        ActivityField::constant(p, Region::Interval { a: 0.0, b: 1.0 }, c(lambda)).unwrap()
    }

    #[test]
    fn ideal_gas_density_is_exact() {
        let p = Potential::free(1).unwrap();
        let f =
            ActivityField::constant(p, Region::Interval { a: 0.0, b: 1.0 }, c(2.0)).unwrap();
        let q = QuadratureScheme::for_dimension(1);
        let d0 = density(&f, &[0.5], 0, &q).unwrap();
        assert_eq!(d0.value, c(2.0));
        assert_eq!(d0.last_step_delta, 2.0);
        let d3 = density(&f, &[0.5], 3, &q).unwrap();
        assert_eq!(d3.value, c(2.0));
        assert_eq!(d3.last_step_delta, 0.0);
    }

    #[test]
    fn zero_field_stays_zero() {
        let f = hard_rod_field(0.0);
        let q = QuadratureScheme::for_dimension(1);
        let est = density(&f, &[0.5], 4, &q).unwrap();
        assert_eq!(est.value, c(0.0));
        assert_eq!(est.last_step_delta, 0.0);
    }

    #[test]
    fn depth_zero_returns_the_activity() {
        let f = hard_rod_field(2.0);
        let q = QuadratureScheme::for_dimension(1);
        let est = density(&f, &[0.25], 0, &q).unwrap();
        assert_eq!(est.value, c(2.0));
    }

    #[test]
    fn hard_rod_density_approaches_the_oracle_ratio() {
        let f = hard_rod_field(1.0);
        let params = RecursionParams::for_dimension(1);
        let report = density_with(&f, &[0.5], 6, &params).unwrap();
        assert!((report.estimate.value.re - 8.0 / 17.0).abs() < 2e-3);
        assert!(report.estimate.value.im.abs() < 1e-12);
        assert!(report.profile.len() == 7);
        assert!(report.nodes > 0);
    }

    #[test]
    fn density_stays_within_activity_bounds() {
        let f = hard_rod_field(1.0);
        let params = RecursionParams::for_dimension(1);
        for depth in 0..=4 {
            let report = density_with(&f, &[0.3], depth, &params).unwrap();
            let v = report.estimate.value;
            assert!(v.im.abs() < 1e-12);
            assert!(v.re >= 0.0 && v.re <= 1.0);
        }
    }

    #[test]
    fn apply_f_examples() {
        let p = Potential::hard_core(1, 0.5).unwrap();
        let region = Region::Interval { a: -1.0, b: 2.0 };
        let q = QuadratureScheme::for_dimension(1);
        let mut zero = |_: &[f64]| Ok(Complex64::new(0.0, 0.0));
        let v = apply_f(c(1.5), &mut zero, &p, &[0.5], &region, &q).unwrap();
        assert_eq!(v, c(1.5));
        let mut constant = |_: &[f64]| Ok(c(0.7));
        let v = apply_f(c(1.5), &mut constant, &p, &[0.5], &region, &q).unwrap();
        let c_phi = p.temperedness_constant().unwrap();
        assert_relative_eq!(v.re, 1.5 * (-0.7 * c_phi).exp(), epsilon = 1e-12);
        let mut failing = |_: &[f64]| Ok(c(1.0));
        let v = apply_f(c(0.0), &mut failing, &p, &[0.5], &region, &q).unwrap();
        assert_eq!(v, c(0.0));
    }

    #[test]
    fn budget_is_enforced() {
        let f = hard_rod_field(1.0);
        let mut params = RecursionParams::for_dimension(1);
        params.node_budget = 10;
        let err = density_with(&f, &[0.5], 5, &params).unwrap_err();
        assert!(matches!(err, Error::RecursionBudgetExceeded));
    }

    #[test]
    fn certified_region_tracking() {
        let cert = certify_neighborhood(2.0, 1.0, 24);
        assert!(cert.passed);
        let mut params = RecursionParams::for_dimension(1);
        params.certified = cert.certified_region();
        let f = hard_rod_field(1.0);
        let report = density_with(&f, &[0.5], 4, &params).unwrap();
        assert!(report.estimate.in_certified_region);
        let dmax = report.max_psi_distance.unwrap();
        assert!(dmax <= cert.eps2 + 1e-12);
    }

    #[test]
    fn log_partition_ideal_gas() {
        let p = Potential::free(1).unwrap();
        let region = Region::Interval { a: 0.0, b: 1.0 };
        let f = ActivityField::constant(p, region.clone(), c(0.75)).unwrap();
        let q = QuadratureScheme::for_dimension(1);
        let v = log_partition_via_identity(&f, &region, &[0.0], 2, &q).unwrap();
        assert_relative_eq!(v.re, 0.75, epsilon = 1e-10);
        assert!(v.im.abs() < 1e-14);
        let zero = ActivityField::constant(Potential::free(1).unwrap(), region.clone(), c(0.0))
            .unwrap();
        let v0 = log_partition_via_identity(&zero, &region, &[0.0], 2, &q).unwrap();
        assert_eq!(v0, c(0.0));
    }

    #[test]
    fn telescoping_overlap_is_exactly_zero() {
        let f = hard_rod_field(1.0);
        let params = RecursionParams::for_dimension(1);
        let v = kpoint_density_with(&f, &[vec![0.4], vec![0.6]], 3, &params).unwrap();
        assert_eq!(v, c(0.0));
    }

    #[test]
    fn telescoping_single_point_matches_density() {
        let f = hard_rod_field(1.0);
        let params = RecursionParams::for_dimension(1);
        let single = kpoint_density_with(&f, &[vec![0.25]], 3, &params).unwrap();
        let direct = density_with(&f, &[0.25], 3, &params).unwrap();
        assert_eq!(single, direct.estimate.value);
    }
}
