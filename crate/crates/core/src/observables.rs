//! Thermodynamic outputs: finite-volume pressure, density as the activity
//! derivative of pressure, and hard-sphere packing conversions.
//!
//! Pressure is `log Z` per unit volume. Both computational engines are
//! exposed behind one switch: the correlation-decay recursion (via the
//! annihilation identity) and the truncated-series oracle. Density follows
//! by centered finite differences in the activity, with optional Richardson
//! extrapolation. The recursion's pointwise density and the oracle's
//! polynomial-derivative density are distinct finite-truncation objects;
//! callers report both, labeled by engine, rather than blending them.

use num_complex::Complex64;

use crate::activity::ActivityField;
use crate::error::{Error, Result};
use crate::oracle::partition_series;
use crate::potential::PotentialKind;
use crate::quadrature::{unit_ball_volume, Region};
use crate::recursion::{log_partition_with, RecursionParams};

/// Which machinery computes the log-partition value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Recursion,
    Oracle,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Engine::Recursion => write!(f, "recursion"),
            Engine::Oracle => write!(f, "oracle"),
        }
    }
}

/// Knobs shared by the observable computations.
#[derive(Debug, Clone)]
pub struct ObservableParams {
    /// Recursion truncation depth.
    pub depth: usize,
    pub recursion: RecursionParams,
    /// Series truncation order.
    pub truncation: usize,
    pub samples_per_order: usize,
    /// Anchor of the annihilation sweep; region midpoint when absent.
    pub hat_center: Option<Vec<f64>>,
    /// Relative finite-difference step for densities, `h = step * lambda`.
    pub fd_step_rel: f64,
    /// Combine steps `h` and `h/2` into a fourth-order estimate.
    pub richardson: bool,
}

impl ObservableParams {
    pub fn for_dimension(d: usize) -> Self {
        ObservableParams {
            depth: 6,
            recursion: RecursionParams::for_dimension(d),
            truncation: 12,
            samples_per_order: 2048,
            hat_center: None,
            fd_step_rel: 1e-3,
            richardson: false,
        }
    }

    fn center_for(&self, region: &Region) -> Vec<f64> {
        match &self.hat_center {
            Some(c) => c.clone(),
            None => {
                let (lo, hi) = region.bounding_box();
                lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect()
            }
        }
    }
}

/// One row of a thermodynamic sweep.
#[derive(Debug, Clone)]
pub struct ThermoPoint {
    pub lambda: f64,
    pub pressure: f64,
    pub density: f64,
    /// Covered-volume fraction; populated for hard-core potentials only.
    pub packing_density: Option<f64>,
    pub source: Engine,
}

/// Critical packing fractions under the unit-exclusion-ball normalization.
#[derive(Debug, Clone, Copy)]
pub struct PackingConstants {
    pub critical_packing: f64,
    /// Rounded d = 2 value used as a cross-check target.
    pub reference_d2: f64,
}

/// Critical packing fraction `e/(1+e) * 2^{-d}` for the unit-normalized
/// hard-sphere model.
pub fn packing_constants(d: usize) -> PackingConstants {
    let e = std::f64::consts::E;
    PackingConstants {
        critical_packing: e / (1.0 + e) * 0.5f64.powi(d as i32),
        reference_d2: 0.18276,
    }
}

/// Fraction of space covered by spheres of radius `r/2` at number density
/// `rho`; equals `2^{-d} rho` under the unit-exclusion-ball normalization.
pub fn packing_density(f: &ActivityField, rho: f64) -> Option<f64> {
    let p = f.potential();
    if p.kind() != PotentialKind::HardCore {
        return None;
    }
    let d = p.dimension();
    let r = p.range();
    Some(rho * unit_ball_volume(d) * (0.5 * r).powi(d as i32))
}

fn real_constant(f: &ActivityField) -> Result<f64> {
    f.real_constant_lambda().ok_or_else(|| {
        Error::InvalidParameter("observable needs an unmodified real constant activity".into())
    })
}

/// Finite-volume pressure `log Z / |region|` by the chosen engine.
pub fn pressure_finite_volume(
    f: &ActivityField,
    region: &Region,
    engine: Engine,
    params: &ObservableParams,
) -> Result<f64> {
    real_constant(f)?;
    let volume = region.volume();
    let log_z = match engine {
        Engine::Recursion => {
            let center = params.center_for(region);
            log_partition_with(f, region, &center, params.depth, &params.recursion)?.value
        }
        Engine::Oracle => {
            let series = partition_series(f, region, params.truncation, params.samples_per_order)?;
            if series.value.norm() <= 1e-9 {
                return Err(Error::OracleZeroPartition);
            }
            series.value.ln()
        }
    };
    Ok(log_z.re / volume)
}

fn pressure_at(
    f: &ActivityField,
    region: &Region,
    lambda: f64,
    engine: Engine,
    params: &ObservableParams,
) -> Result<f64> {
    let shifted = ActivityField::constant(
        f.potential().clone(),
        f.support().clone(),
        Complex64::new(lambda, 0.0),
    )?;
    pressure_finite_volume(&shifted, region, engine, params)
}

/// Density `lambda d/dlambda` of the finite-volume pressure by centered
/// finite differences at step `h`.
pub fn density_from_pressure(
    f: &ActivityField,
    region: &Region,
    lambda: f64,
    h: f64,
    engine: Engine,
    params: &ObservableParams,
) -> Result<f64> {
    if !(h > 0.0) || lambda - h <= 0.0 {
        return Err(Error::InvalidParameter(
            "finite-difference step must satisfy 0 < h < lambda".into(),
        ));
    }
    let diff = |step: f64| -> Result<f64> {
        let hi = pressure_at(f, region, lambda + step, engine, params)?;
        let lo = pressure_at(f, region, lambda - step, engine, params)?;
        Ok(lambda * (hi - lo) / (2.0 * step))
    };
    let d_h = diff(h)?;
    if params.richardson {
        let d_half = diff(0.5 * h)?;
        Ok((4.0 * d_half - d_h) / 3.0)
    } else {
        Ok(d_h)
    }
}

/// Pressure, density, and packing fraction of one activity value.
pub fn thermo_point(
    f: &ActivityField,
    region: &Region,
    engine: Engine,
    params: &ObservableParams,
) -> Result<ThermoPoint> {
    let lambda = real_constant(f)?;
    if lambda == 0.0 {
        return Ok(ThermoPoint {
            lambda,
            pressure: 0.0,
            density: 0.0,
            packing_density: packing_density(f, 0.0),
            source: engine,
        });
    }
    let pressure = pressure_finite_volume(f, region, engine, params)?;
    let h = params.fd_step_rel * lambda;
    let density = density_from_pressure(f, region, lambda, h, engine, params)?;
    Ok(ThermoPoint {
        lambda,
        pressure,
        density,
        packing_density: packing_density(f, density),
        source: engine,
    })
}
