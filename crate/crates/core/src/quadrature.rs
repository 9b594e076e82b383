//! Bounded regions and deterministic quadrature.
//!
//! Two kinds of integrals appear throughout the crate: plain volume
//! integrals over a region, and Mayer-weighted integrals over the
//! interaction ball around a point. Both are computed from fixed node lists
//! (Gauss-Legendre or midpoint), summed in node order so results are
//! bit-reproducible.
//!
//! Hard-core integrands are discontinuous on a sphere; the Mayer-ball
//! integrator therefore works in radial coordinates with a cell boundary
//! exactly at the core radius, and in one dimension it additionally splits
//! the domain at caller-supplied breakpoints (support edges, dead zones of
//! the activity field) so every cell sees a smooth integrand.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::Potential;

/// A bounded integration domain in `R^d` with closed-form volume.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// `[a, b]` in one dimension.
    Interval { a: f64, b: f64 },
    /// Axis-parallel box `prod_i [lo_i, hi_i]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Euclidean ball of the given center and radius.
    Ball { center: Vec<f64>, radius: f64 },
}

impl Region {
    /// Spatial dimension of the region.
    pub fn dimension(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            Region::Box { lo, .. } => lo.len(),
            Region::Ball { center, .. } => center.len(),
        }
    }

    /// Exact volume.
    pub fn volume(&self) -> f64 {
        match self {
            Region::Interval { a, b } => b - a,
            Region::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            Region::Ball { center, radius } => {
                unit_ball_volume(center.len()) * radius.powi(center.len() as i32)
            }
        }
    }

    /// Membership test (boundary counts as inside).
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Interval { a, b } => x.len() == 1 && x[0] >= *a && x[0] <= *b,
            Region::Box { lo, hi } => {
                x.len() == lo.len()
                    && x.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(xi, (l, h))| *xi >= *l && *xi <= *h)
            }
            Region::Ball { center, radius } => {
                x.len() == center.len() && dist(x, center) <= *radius
            }
        }
    }

    /// Smallest axis-parallel box containing the region.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Interval { a, b } => (vec![*a], vec![*b]),
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
            Region::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Diameter of the region (largest distance between two points).
    pub fn diameter(&self) -> f64 {
        match self {
            Region::Interval { a, b } => b - a,
            Region::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| (h - l) * (h - l))
                .sum::<f64>()
                .sqrt(),
            Region::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Checks that the region is nondegenerate and finite.
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Region::Interval { a, b } => a.is_finite() && b.is_finite() && a < b,
            Region::Box { lo, hi } => {
                !lo.is_empty()
                    && lo.len() == hi.len()
                    && lo
                        .iter()
                        .zip(hi)
                        .all(|(l, h)| l.is_finite() && h.is_finite() && l < h)
            }
            Region::Ball { center, radius } => {
                !center.is_empty() && center.iter().all(|c| c.is_finite()) && *radius > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ZeroVolumeRegion)
        }
    }

    /// For one-dimensional regions, the endpoints `(a, b)`.
    pub fn interval_bounds(&self) -> Option<(f64, f64)> {
        match self {
            Region::Interval { a, b } => Some((*a, *b)),
            Region::Box { lo, hi } if lo.len() == 1 => Some((lo[0], hi[0])),
            Region::Ball { center, radius } if center.len() == 1 => {
                Some((center[0] - radius, center[0] + radius))
            }
            _ => None,
        }
    }
}

/// Euclidean distance between two points.
pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = V_{d-2} * 2 pi / d.
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Surface area of the unit sphere in `R^d` (boundary of the unit ball).
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// Node-placement rule for one-dimensional cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    GaussLegendre,
    Midpoint,
}

/// Descriptor for all deterministic quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureScheme {
    /// Nodes per dimension for region integrals.
    pub order_per_dimension: usize,
    /// Node-placement rule.
    pub rule: QuadRule,
    /// Number of radial cells for ball-shaped Mayer supports.
    pub radial_layers: usize,
}

impl QuadratureScheme {
    /// Default scheme for the given dimension: 32 nodes per dimension in 1D,
    /// 16 in higher dimensions, Gauss-Legendre, two radial layers.
    pub fn for_dimension(d: usize) -> Self {
        QuadratureScheme {
            order_per_dimension: if d == 1 { 32 } else { 16 },
            rule: QuadRule::GaussLegendre,
            radial_layers: 2,
        }
    }
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme::for_dimension(1)
    }
}

/// Nodes and weights on `[0, 1]` for the given rule and order.
pub fn nodes_01(rule: QuadRule, order: usize) -> (Vec<f64>, Vec<f64>) {
    match rule {
        QuadRule::GaussLegendre => {
            let (x, w) = gauss_legendre(order);
            (
                x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
                w.iter().map(|wi| 0.5 * wi).collect(),
            )
        }
        QuadRule::Midpoint => {
            let h = 1.0 / order as f64;
            (
                (0..order).map(|i| (i as f64 + 0.5) * h).collect(),
                vec![h; order],
            )
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th positive root.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(z) and P_n'(z).
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Complex-valued integrand over points of `R^d`.
pub type Integrand<'a> = dyn FnMut(&[f64]) -> Result<Complex64> + 'a;

/// Integrates `f` over the region with a tensor-product rule (interval, box)
/// or a radial-angular product rule (ball, d <= 2). Balls in d >= 3 fall
/// back to an indicator over the bounding box and are only suitable for
/// rough checks.
pub fn integrate_region(
    f: &mut Integrand,
    region: &Region,
    scheme: &QuadratureScheme,
) -> Result<Complex64> {
    region.validate()?;
    match region {
        Region::Interval { a, b } => integrate_interval(f, *a, *b, &[], scheme),
        Region::Box { lo, hi } => {
            if lo.len() == 1 {
                integrate_interval(f, lo[0], hi[0], &[], scheme)
            } else {
                integrate_box(f, lo, hi, scheme)
            }
        }
        Region::Ball { center, radius } => match center.len() {
            1 => integrate_interval(f, center[0] - radius, center[0] + radius, &[], scheme),
            2 => integrate_disc(f, center, *radius, scheme),
            _ => {
                let (lo, hi) = region.bounding_box();
                let r = region.clone();
                let mut g = |x: &[f64]| {
                    if r.contains(x) {
                        f(x)
                    } else {
                        Ok(Complex64::new(0.0, 0.0))
                    }
                };
                integrate_box(&mut g, &lo, &hi, scheme)
            }
        },
    }
}

/// Integrates `f` over `[a, b]`, splitting at the supplied interior
/// breakpoints so each cell sees a smooth integrand.
pub fn integrate_interval(
    f: &mut Integrand,
    a: f64,
    b: f64,
    breaks: &[f64],
    scheme: &QuadratureScheme,
) -> Result<Complex64> {
    let cells = split_cells(a, b, breaks);
    let (xs, ws) = nodes_01(scheme.rule, scheme.order_per_dimension);
    let mut acc = Complex64::new(0.0, 0.0);
    for (lo, hi) in cells {
        let len = hi - lo;
        for (xi, wi) in xs.iter().zip(&ws) {
            acc += f(&[lo + len * xi])? * (wi * len);
        }
    }
    Ok(acc)
}

fn integrate_box(
    f: &mut Integrand,
    lo: &[f64],
    hi: &[f64],
    scheme: &QuadratureScheme,
) -> Result<Complex64> {
    let d = lo.len();
    let (xs, ws) = nodes_01(scheme.rule, scheme.order_per_dimension);
    let n = xs.len();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        let mut weight = 1.0;
        for k in 0..d {
            point[k] = lo[k] + (hi[k] - lo[k]) * xs[idx[k]];
            weight *= ws[idx[k]] * (hi[k] - lo[k]);
        }
        acc += f(&point)? * weight;
        // Advance the multi-index.
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return Ok(acc);
            }
        }
    }
}

fn integrate_disc(
    f: &mut Integrand,
    center: &[f64],
    radius: f64,
    scheme: &QuadratureScheme,
) -> Result<Complex64> {
    // Radial Gauss-Legendre (weight s) times a uniform angular rule, which is
    // spectrally accurate for periodic integrands.
    let (xs, ws) = nodes_01(scheme.rule, scheme.order_per_dimension);
    let n_ang = (2 * scheme.order_per_dimension).max(8);
    let dtheta = 2.0 * std::f64::consts::PI / n_ang as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, wi) in xs.iter().zip(&ws) {
        let s = radius * xi;
        let w_rad = wi * radius * s;
        for j in 0..n_ang {
            let theta = (j as f64 + 0.5) * dtheta;
            let p = [center[0] + s * theta.cos(), center[1] + s * theta.sin()];
            acc += f(&p)? * (w_rad * dtheta);
        }
    }
    Ok(acc)
}

/// One node of a Mayer-ball rule: a point together with its quadrature
/// weight multiplied by the Mayer factor `1 - e^{-phi(v-w)}`.
#[derive(Debug, Clone)]
pub struct MayerNode {
    pub point: Vec<f64>,
    /// Quadrature weight times the Mayer factor at the node.
    pub weight: f64,
}

/// Builds the node list for `int f(w) mayer(v - w) dw` over the effective
/// Mayer support of `p` around `v`, clipped to `region`. Nodes outside the
/// region are dropped (they contribute 0).
///
/// In one dimension the domain is split at `v`, at the hard-core radius, and
/// at any caller-supplied breakpoints; sub-intervals covered by
/// `dead` (intervals where the integrand is identically zero) are removed.
/// In two dimensions the rule is radial-angular with `radial_layers` cells.
pub fn mayer_ball_nodes(
    p: &Potential,
    v: &[f64],
    region: &Region,
    order: usize,
    rule: QuadRule,
    radial_layers: usize,
    breaks: &[f64],
    dead: &[(f64, f64)],
) -> Result<Vec<MayerNode>> {
    let d = region.dimension();
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v.len(),
        });
    }
    let reach = p.mayer_support_radius();
    if reach <= 0.0 {
        return Ok(Vec::new());
    }
    match d {
        1 => {
            let (a, b) = region
                .interval_bounds()
                .expect("one-dimensional region has interval bounds");
            let lo = (v[0] - reach).max(a);
            let hi = (v[0] + reach).min(b);
            if hi <= lo {
                return Ok(Vec::new());
            }
            let mut cuts: Vec<f64> = vec![v[0]];
            cuts.extend_from_slice(breaks);
            if let Some(r) = p.hard_core_radius() {
                cuts.push(v[0] - r);
                cuts.push(v[0] + r);
            }
            let alive = subtract_intervals(lo, hi, dead);
            let (xs, ws) = nodes_01(rule, order);
            let mut nodes = Vec::new();
            for (al, ah) in alive {
                for (cl, ch) in split_cells(al, ah, &cuts) {
                    let len = ch - cl;
                    for (xi, wi) in xs.iter().zip(&ws) {
                        let w = cl + len * xi;
                        let mayer = p.mayer_radial((w - v[0]).abs())?;
                        let weight = wi * len * mayer;
                        if weight != 0.0 {
                            nodes.push(MayerNode {
                                point: vec![w],
                                weight,
                            });
                        }
                    }
                }
            }
            Ok(nodes)
        }
        2 => {
            let mut radial_cuts: Vec<f64> = Vec::new();
            if let Some(r) = p.hard_core_radius() {
                radial_cuts.push(r);
            }
            radial_cuts.extend_from_slice(breaks);
            let layer = reach / radial_layers.max(1) as f64;
            for k in 1..radial_layers.max(1) {
                radial_cuts.push(k as f64 * layer);
            }
            let (xs, ws) = nodes_01(rule, order);
            let n_ang = (4 * order).max(8);
            let dtheta = 2.0 * std::f64::consts::PI / n_ang as f64;
            let mut nodes = Vec::new();
            for (cl, ch) in split_cells(0.0, reach, &radial_cuts) {
                let len = ch - cl;
                for (xi, wi) in xs.iter().zip(&ws) {
                    let s = cl + len * xi;
                    let mayer = p.mayer_radial(s)?;
                    if mayer == 0.0 {
                        continue;
                    }
                    let w_rad = wi * len * s * mayer;
                    for j in 0..n_ang {
                        let theta = (j as f64 + 0.5) * dtheta;
                        let pt = vec![v[0] + s * theta.cos(), v[1] + s * theta.sin()];
                        if region.contains(&pt) {
                            nodes.push(MayerNode {
                                point: pt,
                                weight: w_rad * dtheta,
                            });
                        }
                    }
                }
            }
            Ok(nodes)
        }
        _ => Err(Error::InvalidParameter(
            "Mayer-ball quadrature supports dimensions 1 and 2".into(),
        )),
    }
}

/// Integrates `f(w) * mayer(v - w)` over the Mayer support of `p` around
/// `v`, clipped to the region.
pub fn integrate_mayer_ball(
    f: &mut Integrand,
    p: &Potential,
    v: &[f64],
    region: &Region,
    scheme: &QuadratureScheme,
) -> Result<Complex64> {
    let nodes = mayer_ball_nodes(
        p,
        v,
        region,
        scheme.order_per_dimension,
        scheme.rule,
        scheme.radial_layers,
        &[],
        &[],
    )?;
    let mut acc = Complex64::new(0.0, 0.0);
    for node in &nodes {
        acc += f(&node.point)? * node.weight;
    }
    Ok(acc)
}

/// Splits `[a, b]` at the interior breakpoints, dropping empty cells and
/// deduplicating nearby cuts.
pub fn split_cells(a: f64, b: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    const MIN_CELL: f64 = 1e-13;
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|c| *c > a + MIN_CELL && *c < b - MIN_CELL)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut cells = Vec::with_capacity(cuts.len() + 1);
    let mut left = a;
    for c in cuts {
        if c - left > MIN_CELL {
            cells.push((left, c));
            left = c;
        }
    }
    if b - left > MIN_CELL {
        cells.push((left, b));
    }
    cells
}

/// Removes the `dead` intervals from `[lo, hi]`, returning the surviving
/// sub-intervals in increasing order.
pub fn subtract_intervals(lo: f64, hi: f64, dead: &[(f64, f64)]) -> Vec<(f64, f64)> {
    const MIN_CELL: f64 = 1e-13;
    let mut segs = vec![(lo, hi)];
    for &(dl, dh) in dead {
        let mut next = Vec::with_capacity(segs.len() + 1);
        for (l, h) in segs {
            if dh <= l || dl >= h {
                next.push((l, h));
                continue;
            }
            if dl > l {
                next.push((l, dl));
            }
            if dh < h {
                next.push((dh, h));
            }
        }
        segs = next;
    }
    segs.retain(|(l, h)| h - l > MIN_CELL);
    segs
}

/// Adaptive Gauss-Legendre integration of a real function on `[a, b]`:
/// bisects until an order-8 and order-16 estimate agree to the requested
/// relative tolerance.
pub fn adaptive_integrate(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    fn fixed(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, xs: &[f64], ws: &[f64]) -> f64 {
        let len = b - a;
        xs.iter()
            .zip(ws)
            .map(|(x, w)| f(a + len * x) * w * len)
            .sum()
    }
    fn recurse(
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        b: f64,
        coarse: f64,
        scale: f64,
        rel_tol: f64,
        depth: usize,
        lo_rule: &(Vec<f64>, Vec<f64>),
        hi_rule: &(Vec<f64>, Vec<f64>),
    ) -> Result<f64> {
        let fine = fixed(f, a, b, &hi_rule.0, &hi_rule.1);
        if (fine - coarse).abs() <= rel_tol * scale.max(fine.abs()) {
            return Ok(fine);
        }
        if depth == 0 {
            return Err(Error::TemperednessDiverged);
        }
        let mid = 0.5 * (a + b);
        let left = fixed(f, a, mid, &lo_rule.0, &lo_rule.1);
        let right = fixed(f, mid, b, &lo_rule.0, &lo_rule.1);
        Ok(
            recurse(f, a, mid, left, scale, rel_tol, depth - 1, lo_rule, hi_rule)?
                + recurse(f, mid, b, right, scale, rel_tol, depth - 1, lo_rule, hi_rule)?,
        )
    }
    let lo_rule = nodes_01(QuadRule::GaussLegendre, 8);
    let hi_rule = nodes_01(QuadRule::GaussLegendre, 16);
    let coarse = fixed(f, a, b, &lo_rule.0, &lo_rule.1);
    recurse(
        f,
        a,
        b,
        coarse,
        coarse.abs(),
        rel_tol,
        48,
        &lo_rule,
        &hi_rule,
    )
}
