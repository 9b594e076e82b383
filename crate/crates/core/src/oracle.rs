//! Brute-force ground truth from the defining series.
//!
//! The grand-canonical partition function is the sum over particle numbers
//! of activity-weighted configuration integrals. This module evaluates that
//! series head-on: low orders by nested deterministic quadrature, higher
//! orders by low-discrepancy sampling, with an explicit factorial tail
//! bound. Densities come out as ratios of two such series, never from the
//! recursion, so the two engines stay independent. A hard-rod closed form,
//! polynomial zero finding, and a mean-density lower bound round out the
//! cross-checks.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::activity::ActivityField;
use crate::error::{Error, Result};
use crate::potential::boltzmann;
use crate::quadrature::{gauss_legendre, split_cells, subtract_intervals, Region};

/// Orders evaluated by nested deterministic quadrature instead of sampling.
const DETERMINISTIC_ORDERS: usize = 3;
/// Tensor grids beyond this node count fall back to sampling.
const TENSOR_NODE_BUDGET: usize = 2_000_000;
/// Denominators below this magnitude count as a numerical zero of Z.
const ZERO_PARTITION_TOL: f64 = 1e-9;

const PRIMES: [usize; 40] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173,
];

/// Partition function of a real constant activity as a polynomial in the
/// activity: `Z(x) = sum c_k x^k` with `c_k` the order-`k` configuration
/// integral over the region divided by `k!`.
#[derive(Debug, Clone)]
pub struct PartitionPolynomial {
    pub coefficients: Vec<f64>,
    pub truncation: usize,
    pub tail_estimate: f64,
    pub region_volume: f64,
}

impl PartitionPolynomial {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_derivative(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in self.coefficients.iter().enumerate().skip(1).rev() {
            acc = acc * x + k as f64 * c;
        }
        acc
    }

    /// Text form: one coefficient per line, then truncation and tail.
    pub fn text_block(&self) -> String {
        let mut out = String::new();
        for c in &self.coefficients {
            out.push_str(&format!("{:.8e}\n", c));
        }
        out.push_str(&format!("truncation = {}\n", self.truncation));
        out.push_str(&format!("tail_estimate = {:.8e}\n", self.tail_estimate));
        out
    }
}

/// Truncated series value of the partition function for a general field.
#[derive(Debug, Clone)]
pub struct SeriesEstimate {
    pub value: Complex64,
    /// Term of each order, `orders[0] = 1`.
    pub orders: Vec<Complex64>,
    /// Combined sampling standard error of the sampled orders.
    pub stderr: f64,
    pub truncation: usize,
    pub tail_estimate: f64,
}

/// Mean density with the subcritical lower bound `lambda/(1 + lambda C)`.
#[derive(Debug, Clone, Copy)]
pub struct MeanDensity {
    pub density: f64,
    pub lower_bound: f64,
    pub margin: f64,
}

/// Outcome of checking `|log Z|` against a volume-proportional bound.
#[derive(Debug, Clone, Copy)]
pub struct LogZBoundReport {
    pub log_z: Complex64,
    pub volume: f64,
    pub constant: f64,
    pub holds: bool,
}

/// `sum_{k > truncation} x^k / k!` for `x = sup|activity| * volume`.
fn factorial_tail(x: f64, truncation: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    for k in 1..=truncation + 1 {
        term *= x / k as f64;
    }
    let mut sum = 0.0;
    let mut k = truncation + 2;
    while term > 1e-300 && k < truncation + 400 {
        sum += term;
        term *= x / k as f64;
        k += 1;
    }
    sum + term
}

fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Boltzmann weight of a configuration: product of pair factors.
fn config_weight(f: &ActivityField, points: &[&[f64]]) -> Result<f64> {
    let p = f.potential();
    let mut w = 1.0;
    for i in 0..points.len() {
        for j in 0..i {
            w *= boltzmann(p.phi_dist(points[i], points[j])?);
            if w == 0.0 {
                return Ok(0.0);
            }
        }
    }
    Ok(w)
}

/// Nested one-dimensional configuration integral
/// `int prod f(x_i) prod e^{-phi(x_i - x_j)} dx`, with integration cells
/// split at field discontinuities and at hard-core distances from the outer
/// points, so piecewise-smooth integrands are resolved exactly.
fn config_integral_nested_1d(
    f: &ActivityField,
    a: f64,
    b: f64,
    k: usize,
) -> Result<Complex64> {
    let order = match k {
        1 => 64,
        2 => 32,
        _ => 16,
    };
    let (nodes, weights) = gauss_legendre(order);
    let core = f.potential().hard_core_radius();
    let field_breaks = f.break_points_1d();
    let field_dead = f.zero_intervals_1d();

    fn level(
        f: &ActivityField,
        a: f64,
        b: f64,
        fixed: &mut Vec<f64>,
        remaining: usize,
        nodes: &[f64],
        weights: &[f64],
        core: Option<f64>,
        field_breaks: &[f64],
        field_dead: &[(f64, f64)],
    ) -> Result<Complex64> {
        let mut breaks = field_breaks.to_vec();
        let mut dead = field_dead.to_vec();
        if let Some(r) = core {
            // After the inner variables are integrated out, the integrand is
            // piecewise polynomial in x with kinks on the lattice generated
            // by the structural points shifted by multiples of the core
            // radius; exclusion balls overlapping each other double the
            // shift, so the lattice extends one multiple past the number of
            // inner variables.
            let mut anchors = vec![a, b];
            anchors.extend_from_slice(field_breaks);
            anchors.extend(fixed.iter().copied());
            for &c in &anchors {
                for m in 1..=remaining {
                    let off = m as f64 * r;
                    breaks.push(c - off);
                    breaks.push(c + off);
                }
            }
            for &x in fixed.iter() {
                breaks.push(x - r);
                breaks.push(x + r);
                dead.push((x - r, x + r));
            }
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (lo, hi) in subtract_intervals(a, b, &dead) {
            for (ca, cb) in split_cells(lo, hi, &breaks) {
                let half = 0.5 * (cb - ca);
                let mid = 0.5 * (ca + cb);
                for (&t, &w) in nodes.iter().zip(weights) {
                    let x = mid + half * t;
                    let fx = f.evaluate(&[x])?;
                    if fx == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut pair = 1.0;
                    for &y in fixed.iter() {
                        pair *= boltzmann(f.potential().phi_radial((x - y).abs())?);
                        if pair == 0.0 {
                            break;
                        }
                    }
                    if pair == 0.0 {
                        continue;
                    }
                    let inner = if remaining == 1 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        fixed.push(x);
                        let v = level(
                            f,
                            a,
                            b,
                            fixed,
                            remaining - 1,
                            nodes,
                            weights,
                            core,
                            field_breaks,
                            field_dead,
                        );
                        fixed.pop();
                        v?
                    };
                    total += fx * pair * inner * (w * half);
                }
            }
        }
        Ok(total)
    }

    let mut fixed = Vec::with_capacity(k);
    level(
        f,
        a,
        b,
        &mut fixed,
        k,
        &nodes,
        &weights,
        core,
        &field_breaks,
        &field_dead,
    )
}

/// Tensor-grid configuration integral over the bounding box of the region,
/// with an indicator for non-box regions. Used for low orders in dimension
/// two and above.
fn config_integral_tensor(f: &ActivityField, region: &Region, k: usize) -> Result<Complex64> {
    let d = region.dimension();
    let order = match k {
        1 => 24,
        2 => 12,
        _ => 8,
    };
    let (nodes, weights) = gauss_legendre(order);
    let (lo, hi) = region.bounding_box();
    let dims = k * d;
    let mut idx = vec![0usize; dims];
    let mut total = Complex64::new(0.0, 0.0);
    let mut point = vec![0.0; dims];
    loop {
        let mut w = 1.0;
        for (axis, &i) in idx.iter().enumerate() {
            let (l, h) = (lo[axis % d], hi[axis % d]);
            let half = 0.5 * (h - l);
            point[axis] = 0.5 * (l + h) + half * nodes[i];
            w *= weights[i] * half;
        }
        let mut val = Complex64::new(w, 0.0);
        'outer: for i in 0..k {
            let xi = &point[i * d..(i + 1) * d];
            if !region.contains(xi) {
                val = Complex64::new(0.0, 0.0);
                break;
            }
            let fx = f.evaluate(xi)?;
            if fx == Complex64::new(0.0, 0.0) {
                val = Complex64::new(0.0, 0.0);
                break;
            }
            val *= fx;
            for j in 0..i {
                let xj = &point[j * d..(j + 1) * d];
                let pair = boltzmann(f.potential().phi_dist(xi, xj)?);
                if pair == 0.0 {
                    val = Complex64::new(0.0, 0.0);
                    break 'outer;
                }
                val *= pair;
            }
        }
        total += val;
        let mut axis = dims;
        loop {
            if axis == 0 {
                return Ok(total);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < order {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Low-discrepancy configuration integral: Halton points over the bounding
/// box, block means for the standard error. Deterministic for fixed inputs.
fn config_integral_halton(
    f: &ActivityField,
    region: &Region,
    k: usize,
    samples: usize,
) -> Result<(Complex64, f64)> {
    let d = region.dimension();
    let dims = k * d;
    if dims > PRIMES.len() {
        return Err(Error::InvalidParameter(format!(
            "sampled order {} in dimension {} exceeds the coordinate budget",
            k, d
        )));
    }
    let (lo, hi) = region.bounding_box();
    let mut box_vol = 1.0;
    for (l, h) in lo.iter().zip(&hi) {
        box_vol *= h - l;
    }
    let scale = box_vol.powi(k as i32);
    let blocks = 16;
    let per_block = (samples + blocks - 1) / blocks;
    let n = per_block * blocks;
    let mut block_sums = vec![Complex64::new(0.0, 0.0); blocks];
    let mut point = vec![0.0; dims];
    for s in 0..n {
        let mut val = Complex64::new(1.0, 0.0);
        for axis in 0..dims {
            point[axis] = lo[axis % d]
                + (hi[axis % d] - lo[axis % d]) * halton(s + 1, PRIMES[axis]);
        }
        'outer: for i in 0..k {
            let xi = &point[i * d..(i + 1) * d];
            if !region.contains(xi) {
                val = Complex64::new(0.0, 0.0);
                break;
            }
            let fx = f.evaluate(xi)?;
            if fx == Complex64::new(0.0, 0.0) {
                val = Complex64::new(0.0, 0.0);
                break;
            }
            val *= fx;
            for j in 0..i {
                let xj = &point[j * d..(j + 1) * d];
                let pair = boltzmann(f.potential().phi_dist(xi, xj)?);
                if pair == 0.0 {
                    val = Complex64::new(0.0, 0.0);
                    break 'outer;
                }
                val *= pair;
            }
        }
        block_sums[s / per_block] += val;
    }
    let mean = block_sums.iter().sum::<Complex64>() / n as f64;
    let block_means: Vec<Complex64> = block_sums.iter().map(|b| b / per_block as f64).collect();
    let var: f64 = block_means
        .iter()
        .map(|m| (m - mean).norm_sqr())
        .sum::<f64>()
        / (blocks as f64 - 1.0);
    let stderr = (var / blocks as f64).sqrt() * scale;
    Ok((mean * scale, stderr))
}

fn config_integral_deterministic(
    f: &ActivityField,
    region: &Region,
    k: usize,
    samples: usize,
) -> Result<(Complex64, f64)> {
    if let Some((a, b)) = region.interval_bounds() {
        return Ok((config_integral_nested_1d(f, a, b, k)?, 0.0));
    }
    let d = region.dimension();
    let order = match k {
        1 => 24usize,
        2 => 12,
        _ => 8,
    };
    if order.pow((k * d) as u32) <= TENSOR_NODE_BUDGET {
        Ok((config_integral_tensor(f, region, k)?, 0.0))
    } else {
        config_integral_halton(f, region, k, samples)
    }
}

/// Truncated partition series `1 + sum_{k=1..K} (1/k!) int prod f prod
/// e^{-phi}`. Orders up to three use nested quadrature; higher orders use
/// Halton sampling with `samples_per_order` points each.
pub fn partition_series(
    f: &ActivityField,
    region: &Region,
    truncation: usize,
    samples_per_order: usize,
) -> Result<SeriesEstimate> {
    if truncation < 1 {
        return Err(Error::InvalidParameter(
            "series truncation must be at least 1".into(),
        ));
    }
    region.validate()?;
    let terms: Vec<Result<(Complex64, f64)>> = (1..=truncation)
        .into_par_iter()
        .map(|k| {
            let (integral, err) = if k <= DETERMINISTIC_ORDERS {
                config_integral_deterministic(f, region, k, samples_per_order)?
            } else {
                config_integral_halton(f, region, k, samples_per_order)?
            };
            let mut fact = 1.0;
            for j in 2..=k {
                fact *= j as f64;
            }
            Ok((integral / fact, err / fact))
        })
        .collect();
    let mut orders = vec![Complex64::new(1.0, 0.0)];
    let mut value = Complex64::new(1.0, 0.0);
    let mut var = 0.0;
    for t in terms {
        let (term, err) = t?;
        orders.push(term);
        value += term;
        var += err * err;
    }
    Ok(SeriesEstimate {
        value,
        orders,
        stderr: var.sqrt(),
        truncation,
        tail_estimate: factorial_tail(f.sup_abs() * region.volume(), truncation),
    })
}

/// The partition polynomial of a real constant activity: configuration
/// integrals with a unit activity profile, so the activity enters only
/// through the polynomial variable.
pub fn partition_polynomial(
    f: &ActivityField,
    region: &Region,
    truncation: usize,
    samples_per_order: usize,
) -> Result<PartitionPolynomial> {
    let lambda = f
        .real_constant_lambda()
        .ok_or_else(|| Error::InvalidParameter(
            "partition polynomial needs an unmodified real constant activity".into(),
        ))?;
    let unit = ActivityField::constant(
        f.potential().clone(),
        f.support().clone(),
        Complex64::new(1.0, 0.0),
    )?;
    let series = partition_series(&unit, region, truncation, samples_per_order)?;
    let coefficients = series.orders.iter().map(|t| t.re).collect();
    Ok(PartitionPolynomial {
        coefficients,
        truncation,
        tail_estimate: factorial_tail(lambda * region.volume(), truncation),
        region_volume: region.volume(),
    })
}

/// Closed-form truncated hard-rod partition function on a segment of length
/// `l` with rod exclusion length `r`:
/// `sum_k x^k max(l - (k-1) r, 0)^k / k!`. Exact once the max reaches zero.
pub fn hard_rod_partition(l: f64, r: f64, lambda: Complex64, truncation: usize) -> Complex64 {
    let mut value = Complex64::new(1.0, 0.0);
    let mut lam_pow = Complex64::new(1.0, 0.0);
    let mut fact = 1.0;
    for k in 1..=truncation {
        lam_pow *= lambda;
        fact *= k as f64;
        let free = (l - (k as f64 - 1.0) * r).max(0.0);
        if free == 0.0 {
            break;
        }
        value += lam_pow * free.powi(k as i32) / fact;
    }
    value
}

/// One-point density as the defining ratio of two partition series: the
/// activity at `v` times the partition function of the discounted field
/// over the partition function of the field itself.
pub fn density_oracle(
    f: &ActivityField,
    region: &Region,
    v: &[f64],
    truncation: usize,
    samples_per_order: usize,
) -> Result<Complex64> {
    let den = partition_series(f, region, truncation, samples_per_order)?;
    if den.value.norm() <= ZERO_PARTITION_TOL {
        return Err(Error::OracleZeroPartition);
    }
    let lam_v = f.evaluate(v)?;
    if lam_v == Complex64::new(0.0, 0.0) {
        return Ok(lam_v);
    }
    let num = partition_series(&f.discount_at(v), region, truncation, samples_per_order)?;
    Ok(lam_v * num.value / den.value)
}

/// k-point density: activity product times the partition ratio of the
/// multiply-discounted field, times the Boltzmann weight of the points
/// themselves.
pub fn kpoint_oracle(
    f: &ActivityField,
    region: &Region,
    points: &[Vec<f64>],
    truncation: usize,
    samples_per_order: usize,
) -> Result<Complex64> {
    let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
    let mut prefactor = Complex64::new(config_weight(f, &refs)?, 0.0);
    for p in points {
        if prefactor == Complex64::new(0.0, 0.0) {
            return Ok(prefactor);
        }
        prefactor *= f.evaluate(p)?;
    }
    if prefactor == Complex64::new(0.0, 0.0) {
        return Ok(prefactor);
    }
    let den = partition_series(f, region, truncation, samples_per_order)?;
    if den.value.norm() <= ZERO_PARTITION_TOL {
        return Err(Error::OracleZeroPartition);
    }
    let mut discounted = f.clone();
    for p in points {
        discounted = discounted.discount_at(p);
    }
    let num = partition_series(&discounted, region, truncation, samples_per_order)?;
    Ok(prefactor * num.value / den.value)
}

/// Mean density of a real constant activity from the polynomial derivative,
/// with the subcritical lower bound `lambda/(1 + lambda C)` and the margin
/// above it.
pub fn mean_density(
    f: &ActivityField,
    region: &Region,
    truncation: usize,
    samples_per_order: usize,
) -> Result<MeanDensity> {
    let lambda = f
        .real_constant_lambda()
        .ok_or_else(|| Error::InvalidParameter(
            "mean density needs an unmodified real constant activity".into(),
        ))?;
    let poly = partition_polynomial(f, region, truncation, samples_per_order)?;
    let x = Complex64::new(lambda, 0.0);
    let z = poly.eval(x).re;
    let zp = poly.eval_derivative(x).re;
    let density = if lambda == 0.0 {
        0.0
    } else {
        lambda * zp / (poly.region_volume * z)
    };
    let c_phi = f.potential().temperedness_constant()?;
    let lower_bound = if lambda == 0.0 {
        0.0
    } else {
        lambda / (1.0 + lambda * c_phi)
    };
    Ok(MeanDensity {
        density,
        lower_bound,
        margin: density - lower_bound,
    })
}

/// All complex roots of the partition polynomial, by Durand-Kerner
/// iteration with Newton polishing, sorted by real then imaginary part.
/// Degree zero gives an empty list.
pub fn partition_zeros(poly: &PartitionPolynomial) -> Vec<Complex64> {
    let mut coeffs: Vec<Complex64> = poly
        .coefficients
        .iter()
        .map(|&c| Complex64::new(c, 0.0))
        .collect();
    while coeffs.len() > 1 && coeffs.last().map(|c| c.norm()) == Some(0.0) {
        coeffs.pop();
    }
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |x: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    let eval_prime = |x: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in monic.iter().enumerate().skip(1).rev() {
            acc = acc * x + k as f64 * c;
        }
        acc
    };
    let cauchy = 1.0
        + monic[..degree]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|i| 0.5 * cauchy * seed.powu(i as u32 + 1))
        .collect();
    for _ in 0..500 {
        let mut max_move = 0.0f64;
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_move = max_move.max(step.norm());
        }
        if max_move < 1e-14 * (1.0 + cauchy) {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let dp = eval_prime(*r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = eval(*r) / dp;
            *r -= step;
            if step.norm() < 1e-15 * (1.0 + r.norm()) {
                break;
            }
        }
    }
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    roots
}

/// Checks the volume-proportional pressure bound `|log Z| <= constant *
/// |region|` on the truncated series value.
pub fn logz_bound_check(
    f: &ActivityField,
    region: &Region,
    truncation: usize,
    samples_per_order: usize,
    constant: f64,
) -> Result<LogZBoundReport> {
    let series = partition_series(f, region, truncation, samples_per_order)?;
    if series.value.norm() <= ZERO_PARTITION_TOL {
        return Err(Error::OracleZeroPartition);
    }
    let log_z = series.value.ln();
    let volume = region.volume();
    Ok(LogZBoundReport {
        log_z,
        volume,
        constant,
        holds: log_z.norm() <= constant * volume + 1e-12,
    })
}
