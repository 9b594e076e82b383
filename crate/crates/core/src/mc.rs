//! Grand-canonical birth-death Monte Carlo for validating the deterministic
//! engines against direct simulation.
//!
//! Each sweep step flips a fair coin between inserting a uniform point and
//! deleting a uniform existing point, with Metropolis acceptance ratios
//! `min(1, lambda(x) |region| e^{-dU} / (n+1))` for birth and
//! `min(1, n e^{dU'} / (lambda(x) |region|))` for death. Chains run fully
//! independently and are merged afterwards; the stream source is the ChaCha8
//! counter-based generator, with the per-chain stream derived from the
//! configured seed and the chain index, so every run is reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::activity::ActivityField;
use crate::error::{Error, Result};
use crate::potential::{boltzmann, Potential};
use crate::quadrature::Region;

/// Number of consecutive batches feeding the batch-means error estimate.
const BATCHES: usize = 32;
/// Spatial resolution of the first-coordinate density histogram.
const DENSITY_BINS: usize = 32;

/// Sampler schedule: total steps per chain, warm-up discarded from
/// statistics, chain count, base seed, and the thinning stride for
/// histogram samples.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub steps: u64,
    pub burn_in: u64,
    pub chains: usize,
    pub seed: u64,
    pub thinning: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.steps {
            return Err(Error::InvalidParameter(
                "burn-in must be shorter than the chain".into(),
            ));
        }
        if self.chains == 0 || self.thinning == 0 {
            return Err(Error::InvalidParameter(
                "need at least one chain and a positive thinning stride".into(),
            ));
        }
        Ok(())
    }
}

/// Per-chain summary, one JSON-lines record per entry.
#[derive(Debug, Clone, Copy)]
pub struct ChainStats {
    pub seed: u64,
    pub chain: usize,
    pub steps: u64,
    pub mean_count: f64,
    pub stderr: f64,
}

/// Merged output of a birth-death run.
#[derive(Debug, Clone)]
pub struct McResult {
    /// Time-averaged particle number across all chains.
    pub mean_count: f64,
    /// Batch-means standard error of `mean_count`, chains combined.
    pub mean_count_stderr: f64,
    /// Point density binned along the first coordinate of the bounding box,
    /// normalized per unit length so an interval run estimates `rho(x)`.
    pub density_histogram: Vec<f64>,
    /// Occupancy tally: entry `n` counts thinned samples with `n` points.
    pub count_histogram: Vec<u64>,
    pub chains: Vec<ChainStats>,
}

/// Birth acceptance probability for inserting at activity `lambda_at` into a
/// region of the given volume, with `boltzmann_product` the product of
/// `e^{-phi}` factors against the `n_before` existing points.
pub fn birth_acceptance(
    lambda_at: f64,
    volume: f64,
    boltzmann_product: f64,
    n_before: usize,
) -> f64 {
    if lambda_at <= 0.0 || boltzmann_product <= 0.0 {
        return 0.0;
    }
    (lambda_at * volume * boltzmann_product / (n_before as f64 + 1.0)).min(1.0)
}

/// Death acceptance probability for removing one of `n_before` points, with
/// `boltzmann_product` the product of `e^{-phi}` factors between the victim
/// and the points that remain.
pub fn death_acceptance(
    lambda_at: f64,
    volume: f64,
    boltzmann_product: f64,
    n_before: usize,
) -> f64 {
    if n_before == 0 {
        return 0.0;
    }
    let scale = lambda_at * volume * boltzmann_product;
    if scale <= 0.0 {
        return 1.0;
    }
    (n_before as f64 / scale).min(1.0)
}

fn real_activity(f: &ActivityField, x: &[f64]) -> Result<f64> {
    let v = f.evaluate(x)?;
    if v.im != 0.0 || v.re < 0.0 {
        return Err(Error::InvalidParameter(
            "sampler needs a real nonnegative activity".into(),
        ));
    }
    Ok(v.re)
}

fn sample_point(region: &Region, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (lo, hi) = region.bounding_box();
    loop {
        let x: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| a + rng.gen::<f64>() * (b - a))
            .collect();
        if region.contains(&x) {
            return x;
        }
    }
}

fn pair_boltzmann(
    p: &Potential,
    y: &[f64],
    points: &[Vec<f64>],
    skip: Option<usize>,
) -> Result<f64> {
    let mut prod = 1.0;
    for (i, xi) in points.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        prod *= boltzmann(p.phi_dist(y, xi)?);
        if prod == 0.0 {
            break;
        }
    }
    Ok(prod)
}

struct ChainData {
    stats: ChainStats,
    bin_counts: Vec<u64>,
    count_hist: Vec<u64>,
    samples: u64,
}

fn run_chain(
    f: &ActivityField,
    region: &Region,
    cfg: &McConfig,
    chain: usize,
) -> Result<ChainData> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);
    let volume = region.volume();
    let potential = f.potential().clone();
    let (lo, hi) = region.bounding_box();
    let bin_width = (hi[0] - lo[0]) / DENSITY_BINS as f64;

    let post = cfg.steps - cfg.burn_in;
    let batches = (BATCHES as u64).min(post) as usize;
    let batch_len = post / batches as u64;
    let measured = batch_len * batches as u64;

    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut batch_sums = vec![0.0f64; batches];
    let mut bin_counts = vec![0u64; DENSITY_BINS];
    let mut count_hist: Vec<u64> = Vec::new();
    let mut samples = 0u64;

    for step in 0..cfg.steps {
        if rng.gen::<f64>() < 0.5 {
            let y = sample_point(region, &mut rng);
            let lam = real_activity(f, &y)?;
            let b = pair_boltzmann(&potential, &y, &points, None)?;
            if rng.gen::<f64>() < birth_acceptance(lam, volume, b, points.len()) {
                points.push(y);
            }
        } else if !points.is_empty() {
            let idx = rng.gen_range(0..points.len());
            let lam = real_activity(f, &points[idx])?;
            let b = pair_boltzmann(&potential, &points[idx], &points, Some(idx))?;
            if rng.gen::<f64>() < death_acceptance(lam, volume, b, points.len()) {
                points.swap_remove(idx);
            }
        }

        if step < cfg.burn_in {
            continue;
        }
        let tick = step - cfg.burn_in;
        if tick < measured {
            batch_sums[(tick / batch_len) as usize] += points.len() as f64;
        }
        if tick % cfg.thinning == 0 {
            samples += 1;
            if count_hist.len() <= points.len() {
                count_hist.resize(points.len() + 1, 0);
            }
            count_hist[points.len()] += 1;
            for pnt in &points {
                let rel = (pnt[0] - lo[0]) / bin_width;
                let bin = (rel as usize).min(DENSITY_BINS - 1);
                bin_counts[bin] += 1;
            }
        }
    }

    let batch_means: Vec<f64> = batch_sums
        .iter()
        .map(|s| s / batch_len as f64)
        .collect();
    let mean = batch_means.iter().sum::<f64>() / batches as f64;
    let stderr = if batches > 1 {
        let var = batch_means
            .iter()
            .map(|m| (m - mean) * (m - mean))
            .sum::<f64>()
            / (batches as f64 - 1.0);
        (var / batches as f64).sqrt()
    } else {
        0.0
    };

    Ok(ChainData {
        stats: ChainStats {
            seed: cfg.seed,
            chain,
            steps: cfg.steps,
            mean_count: mean,
            stderr,
        },
        bin_counts,
        count_hist,
        samples,
    })
}

/// Run independent birth-death chains and merge their statistics.
pub fn run_birth_death(f: &ActivityField, region: &Region, cfg: &McConfig) -> Result<McResult> {
    cfg.validate()?;
    region.validate()?;
    if region.volume() <= 0.0 {
        return Err(Error::ZeroVolumeRegion);
    }
    if region.dimension() != f.dimension() {
        return Err(Error::DimensionMismatch {
            expected: f.dimension(),
            got: region.dimension(),
        });
    }

    let chains: Vec<ChainData> = (0..cfg.chains)
        .into_par_iter()
        .map(|chain| run_chain(f, region, cfg, chain))
        .collect::<Result<_>>()?;

    let n = cfg.chains as f64;
    let mean_count = chains.iter().map(|c| c.stats.mean_count).sum::<f64>() / n;
    let mean_count_stderr = chains
        .iter()
        .map(|c| c.stats.stderr * c.stats.stderr)
        .sum::<f64>()
        .sqrt()
        / n;

    let total_samples: u64 = chains.iter().map(|c| c.samples).sum();
    let (lo, hi) = region.bounding_box();
    let bin_width = (hi[0] - lo[0]) / DENSITY_BINS as f64;
    let mut density_histogram = vec![0.0f64; DENSITY_BINS];
    for c in &chains {
        for (acc, count) in density_histogram.iter_mut().zip(&c.bin_counts) {
            *acc += *count as f64;
        }
    }
    for acc in &mut density_histogram {
        *acc /= total_samples as f64 * bin_width;
    }

    let max_n = chains.iter().map(|c| c.count_hist.len()).max().unwrap_or(0);
    let mut count_histogram = vec![0u64; max_n];
    for c in &chains {
        for (acc, count) in count_histogram.iter_mut().zip(&c.count_hist) {
            *acc += count;
        }
    }

    Ok(McResult {
        mean_count,
        mean_count_stderr,
        density_histogram,
        count_histogram,
        chains: chains.into_iter().map(|c| c.stats).collect(),
    })
}

/// Natural log of the gamma function by the Lanczos approximation.
pub fn ln_gamma(z: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if z < 0.5 {
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * z).sin().ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Upper regularized incomplete gamma `Q(a, x)`, by power series for small
/// `x` and a Lentz continued fraction otherwise.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    if a <= 0.0 || x < 0.0 {
        return Err(Error::InvalidParameter(
            "gamma_q needs a > 0 and x >= 0".into(),
        ));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        for n in 1..500 {
            term *= x / (a + n as f64);
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        Ok((1.0 - sum * log_prefactor.exp()).clamp(0.0, 1.0))
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-15 {
                break;
            }
        }
        Ok((log_prefactor.exp() * h).clamp(0.0, 1.0))
    }
}

/// Chi-square goodness-of-fit p-value of an occupancy histogram against a
/// Poisson law with the given intensity. Adjacent cells are pooled until
/// every expected count reaches five.
pub fn poisson_gof(count_histogram: &[u64], intensity: f64) -> Result<f64> {
    let total: u64 = count_histogram.iter().sum();
    if total == 0 || !(intensity > 0.0) {
        return Err(Error::InvalidParameter(
            "goodness-of-fit needs samples and a positive intensity".into(),
        ));
    }
    let n = total as f64;
    let pmf = |k: usize| -> f64 {
        (k as f64 * intensity.ln() - intensity - ln_gamma(k as f64 + 1.0)).exp()
    };
    let mut cum = 0.0;
    let mut expected: Vec<f64> = (0..count_histogram.len())
        .map(|k| {
            let p = pmf(k);
            cum += p;
            n * p
        })
        .collect();
    if let Some(last) = expected.last_mut() {
        *last += n * (1.0 - cum).max(0.0);
    }

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut obs_acc = 0.0;
    let mut exp_acc = 0.0;
    for (o, e) in count_histogram.iter().zip(&expected) {
        obs_acc += *o as f64;
        exp_acc += e;
        if exp_acc >= 5.0 {
            cells.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if exp_acc > 0.0 || obs_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += obs_acc;
                last.1 += exp_acc;
            }
            None => cells.push((obs_acc, exp_acc)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::InvalidParameter(
            "goodness-of-fit needs at least two pooled cells".into(),
        ));
    }
    let stat: f64 = cells
        .iter()
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = (cells.len() - 1) as f64;
    gamma_q(0.5 * df, 0.5 * stat)
}

fn flow_ratio(
    lambda: f64,
    volume: f64,
    boltzmann_product: f64,
    n_before: usize,
) -> f64 {
    let birth_flow = (1.0 / volume) * birth_acceptance(lambda, volume, boltzmann_product, n_before);
    let weight_gain = lambda * boltzmann_product;
    let death_flow = weight_gain / (n_before as f64 + 1.0)
        * death_acceptance(lambda, volume, boltzmann_product, n_before + 1);
    birth_flow / death_flow
}

/// Verify detailed balance of the acceptance formulas on zero-, one-, and
/// two-point configurations: forward and reverse probability flows must
/// agree for the free and Gaussian cases, and hard-core overlaps must be
/// rejected outright.
pub fn detailed_balance_unit_checks() -> bool {
    let free_ok = (flow_ratio(1.0, 1.0, 1.0, 0) - 1.0).abs() <= 1e-12;

    let hard = match Potential::hard_core(1, 0.5) {
        Ok(p) => p,
        Err(_) => return false,
    };
    let x = [0.2];
    let y = [0.4];
    let overlap = match hard.phi_dist(&x, &y) {
        Ok(phi) => boltzmann(phi),
        Err(_) => return false,
    };
    let hard_ok = birth_acceptance(1.0, 2.0, overlap, 1) == 0.0;

    let gauss = match Potential::gaussian(1, 1.0, 0.7) {
        Ok(p) => p,
        Err(_) => return false,
    };
    let b = match gauss.phi_dist(&[0.2], &[0.5]) {
        Ok(phi) => boltzmann(phi),
        Err(_) => return false,
    };
    let gauss_ok = (flow_ratio(0.8, 1.0, b, 1) - 1.0).abs() <= 1e-12;

    free_ok && hard_ok && gauss_ok
}
