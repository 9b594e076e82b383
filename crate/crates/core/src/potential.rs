//! Repulsive pair potentials and their temperedness integrals.
//!
//! A potential `phi` is radial, nonnegative, and tempered: the Mayer
//! function `1 - e^{-phi}` must be integrable over `R^d`. Its integral
//!
//! ```text
//! c_phi = int_{R^d} (1 - e^{-phi(x)}) dx
//! ```
//!
//! sets the scale of everything else in the crate: activities below
//! `e / c_phi` are subcritical. For hard cores `c_phi` is the volume of the
//! exclusion ball, so normalizing the exclusion radius to the radius of a
//! unit-volume ball gives `c_phi = 1` and the subcritical window `(0, e)`.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, split_cells, unit_ball_volume, unit_sphere_area};

/// Supported potential families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// `phi(x) = +inf` for `|x| < range`, else 0.
    HardCore,
    /// `phi(x) = amplitude * exp(-(|x|/range)^2)`.
    Gaussian,
    /// `phi(x) = amplitude * exp(-|x|/range)`.
    ExponentialDecay,
    /// Piecewise-linear interpolation of a radius table.
    Tabulated,
}

/// A radial repulsive pair potential on `R^d`.
#[derive(Debug, Clone)]
pub struct Potential {
    kind: PotentialKind,
    dimension: usize,
    range: f64,
    amplitude: f64,
    /// Strictly increasing `(radius, value)` pairs for the tabulated kind.
    table: Vec<(f64, f64)>,
    /// Mayer factors below this threshold are treated as zero when choosing
    /// the effective support radius of soft tails.
    mayer_cutoff_tol: f64,
}

/// Default truncation threshold for soft Mayer tails.
pub const DEFAULT_MAYER_CUTOFF_TOL: f64 = 1e-12;

impl Potential {
    /// Hard core of exclusion radius `range` (two particles closer than
    /// `range` have infinite energy).
    pub fn hard_core(dimension: usize, range: f64) -> Result<Arc<Self>> {
        if dimension == 0 || !(range > 0.0) || !range.is_finite() {
            return Err(Error::InvalidParameter(
                "hard core needs dimension >= 1 and finite range > 0".into(),
            ));
        }
        Ok(Arc::new(Potential {
            kind: PotentialKind::HardCore,
            dimension,
            range,
            amplitude: f64::INFINITY,
            table: Vec::new(),
            mayer_cutoff_tol: DEFAULT_MAYER_CUTOFF_TOL,
        }))
    }

    /// Hard core whose exclusion ball has unit volume, so `c_phi = 1` and
    /// the critical activity is `e`.
    pub fn unit_hard_core(dimension: usize) -> Result<Arc<Self>> {
        let r = (1.0 / unit_ball_volume(dimension)).powf(1.0 / dimension as f64);
        Potential::hard_core(dimension, r)
    }

    /// Gaussian bump `amplitude * exp(-(s/range)^2)`.
    pub fn gaussian(dimension: usize, amplitude: f64, range: f64) -> Result<Arc<Self>> {
        Potential::soft(PotentialKind::Gaussian, dimension, amplitude, range)
    }

    /// Exponential tail `amplitude * exp(-s/range)`.
    pub fn exponential_decay(dimension: usize, amplitude: f64, range: f64) -> Result<Arc<Self>> {
        Potential::soft(PotentialKind::ExponentialDecay, dimension, amplitude, range)
    }

    /// The free gas, `phi` identically zero.
    pub fn free(dimension: usize) -> Result<Arc<Self>> {
        Potential::gaussian(dimension, 0.0, 1.0)
    }

    fn soft(
        kind: PotentialKind,
        dimension: usize,
        amplitude: f64,
        range: f64,
    ) -> Result<Arc<Self>> {
        if dimension == 0
            || !(range > 0.0)
            || !range.is_finite()
            || !(amplitude >= 0.0)
            || !amplitude.is_finite()
        {
            return Err(Error::InvalidParameter(
                "soft potential needs dimension >= 1, finite range > 0, amplitude >= 0".into(),
            ));
        }
        Ok(Arc::new(Potential {
            kind,
            dimension,
            range,
            amplitude,
            table: Vec::new(),
            mayer_cutoff_tol: DEFAULT_MAYER_CUTOFF_TOL,
        }))
    }

    /// Tabulated potential from `(radius, value)` pairs, interpolated
    /// piecewise-linearly. Radii must be strictly increasing and values
    /// nonnegative; evaluation outside the tabulated radius range is an
    /// error.
    pub fn tabulated(dimension: usize, table: Vec<(f64, f64)>) -> Result<Arc<Self>> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if table.len() < 2 {
            return Err(Error::InvalidTable("needs at least two rows".into()));
        }
        for (i, &(r, v)) in table.iter().enumerate() {
            if !r.is_finite() || r < 0.0 || !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidTable(format!(
                    "row {i}: radius and value must be finite and nonnegative"
                )));
            }
            if i > 0 && r <= table[i - 1].0 {
                return Err(Error::InvalidTable(format!(
                    "row {i}: radii must be strictly increasing"
                )));
            }
        }
        let range = table.last().unwrap().0;
        Ok(Arc::new(Potential {
            kind: PotentialKind::Tabulated,
            dimension,
            range,
            amplitude: table.iter().map(|&(_, v)| v).fold(0.0, f64::max),
            table,
            mayer_cutoff_tol: DEFAULT_MAYER_CUTOFF_TOL,
        }))
    }

    /// Tabulated potential from a two-column text file (radius, value),
    /// whitespace-separated, with `#` comments.
    pub fn tabulated_from_file(dimension: usize, path: &Path) -> Result<Arc<Self>> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| {
                    Error::InvalidTable(format!("line {}: expected two numbers", lineno + 1))
                })
            };
            let r = parse(cols.next())?;
            let v = parse(cols.next())?;
            if cols.next().is_some() {
                return Err(Error::InvalidTable(format!(
                    "line {}: expected exactly two columns",
                    lineno + 1
                )));
            }
            rows.push((r, v));
        }
        Potential::tabulated(dimension, rows)
    }

    /// Returns a copy with a different soft-tail truncation threshold.
    pub fn with_mayer_cutoff_tol(&self, tol: f64) -> Result<Arc<Self>> {
        if !(tol > 0.0) || tol >= 1.0 {
            return Err(Error::InvalidParameter(
                "mayer cutoff tolerance must lie in (0, 1)".into(),
            ));
        }
        let mut p = self.clone();
        p.mayer_cutoff_tol = tol;
        Ok(Arc::new(p))
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Range parameter: exclusion radius (hard core), decay scale (soft
    /// kinds), or last tabulated radius.
    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// The exclusion radius if this is a hard core.
    pub fn hard_core_radius(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::HardCore => Some(self.range),
            _ => None,
        }
    }

    /// `phi` at separation radius `s >= 0`. May be `+inf` (hard core).
    pub fn phi_radial(&self, s: f64) -> Result<f64> {
        debug_assert!(s >= 0.0);
        match self.kind {
            PotentialKind::HardCore => Ok(if s < self.range { f64::INFINITY } else { 0.0 }),
            PotentialKind::Gaussian => {
                let t = s / self.range;
                Ok(self.amplitude * (-t * t).exp())
            }
            PotentialKind::ExponentialDecay => Ok(self.amplitude * (-s / self.range).exp()),
            PotentialKind::Tabulated => {
                let first = self.table[0].0;
                let last = self.table[self.table.len() - 1].0;
                if s < first || s > last {
                    return Err(Error::UntabulatedRadius { radius: s });
                }
                let idx = match self
                    .table
                    .binary_search_by(|&(r, _)| r.partial_cmp(&s).unwrap())
                {
                    Ok(i) => return Ok(self.table[i].1),
                    Err(i) => i,
                };
                let (r0, v0) = self.table[idx - 1];
                let (r1, v1) = self.table[idx];
                Ok(v0 + (v1 - v0) * (s - r0) / (r1 - r0))
            }
        }
    }

    /// `phi(x)` for a separation vector `x`.
    pub fn phi(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        self.phi_radial(norm(x))
    }

    /// `phi` of the separation between two points.
    pub fn phi_dist(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.phi_radial(crate::quadrature::dist(a, b))
    }

    /// Boltzmann factor `e^{-phi}` at separation radius `s` (0 inside a hard
    /// core).
    pub fn boltzmann_radial(&self, s: f64) -> Result<f64> {
        Ok(boltzmann(self.phi_radial(s)?))
    }

    /// Mayer function `1 - e^{-phi}` at separation radius `s`; lies in
    /// `[0, 1]` for repulsive potentials.
    pub fn mayer_radial(&self, s: f64) -> Result<f64> {
        Ok(1.0 - boltzmann(self.phi_radial(s)?))
    }

    /// Mayer function at separation vector `x`.
    pub fn mayer(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        self.mayer_radial(norm(x))
    }

    /// Radius beyond which the Mayer factor is treated as zero: the
    /// exclusion radius for hard cores, a tolerance-based truncation radius
    /// for soft tails.
    pub fn mayer_support_radius(&self) -> f64 {
        let tol = self.mayer_cutoff_tol;
        // mayer(s) <= tol  <=>  phi(s) <= -ln(1 - tol) =: eps.
        let eps = -(-tol).ln_1p();
        match self.kind {
            PotentialKind::HardCore => self.range,
            PotentialKind::Gaussian => {
                if self.amplitude <= eps {
                    0.0
                } else {
                    self.range * (self.amplitude / eps).ln().sqrt()
                }
            }
            PotentialKind::ExponentialDecay => {
                if self.amplitude <= eps {
                    0.0
                } else {
                    self.range * (self.amplitude / eps).ln()
                }
            }
            PotentialKind::Tabulated => {
                // Last tabulated radius whose linear segment still reaches a
                // Mayer factor above the threshold.
                let mut reach = 0.0;
                for pair in self.table.windows(2) {
                    if pair[0].1 > eps || pair[1].1 > eps {
                        reach = pair[1].0;
                    }
                }
                reach
            }
        }
    }

    /// The temperedness integral `c_phi = int (1 - e^{-phi}) dx` over
    /// `R^d`: closed form for hard cores, adaptive radial quadrature to
    /// relative tolerance 1e-8 otherwise.
    pub fn temperedness_constant(&self) -> Result<f64> {
        match self.kind {
            PotentialKind::HardCore => {
                Ok(unit_ball_volume(self.dimension) * self.range.powi(self.dimension as i32))
            }
            PotentialKind::Tabulated => {
                if self.table[0].0 > 1e-12 {
                    // The integral needs phi on [0, first radius).
                    return Err(Error::UntabulatedRadius { radius: 0.0 });
                }
                let area = unit_sphere_area(self.dimension);
                let d = self.dimension as i32;
                // Piecewise-smooth integrand: fixed-order cells between the
                // table nodes.
                let cuts: Vec<f64> = self.table.iter().map(|&(r, _)| r).collect();
                let (xs, ws) = crate::quadrature::nodes_01(crate::QuadRule::GaussLegendre, 16);
                let mut acc = 0.0;
                for (cl, ch) in split_cells(self.table[0].0, self.range, &cuts) {
                    let len = ch - cl;
                    for (xi, wi) in xs.iter().zip(&ws) {
                        let s = cl + len * xi;
                        acc += self.mayer_radial(s)? * s.powi(d - 1) * wi * len;
                    }
                }
                Ok(area * acc)
            }
            _ => {
                let reach = self.mayer_support_radius();
                if reach == 0.0 {
                    return Ok(0.0);
                }
                let area = unit_sphere_area(self.dimension);
                let d = self.dimension as i32;
                let mut bad = false;
                let mut f = |s: f64| match self.mayer_radial(s) {
                    Ok(m) => m * s.powi(d - 1),
                    Err(_) => {
                        bad = true;
                        0.0
                    }
                };
                let radial = adaptive_integrate(&mut f, 0.0, reach, 1e-8)?;
                if bad {
                    return Err(Error::TemperednessDiverged);
                }
                Ok(area * radial)
            }
        }
    }

    /// Critical activity `e / c_phi` (infinite for the free gas).
    pub fn critical_activity(&self) -> Result<f64> {
        let c = self.temperedness_constant()?;
        if c == 0.0 {
            Ok(f64::INFINITY)
        } else {
            Ok(crate::E / c)
        }
    }
}

/// `e^{-phi}` with the hard-core convention `e^{-inf} = 0`.
pub fn boltzmann(phi: f64) -> f64 {
    if phi.is_infinite() {
        0.0
    } else {
        (-phi).exp()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hard_core_evaluation() {
        let p = Potential::hard_core(1, 0.5).unwrap();
        assert!(p.phi(&[0.3]).unwrap().is_infinite());
        assert_eq!(p.phi(&[0.5]).unwrap(), 0.0);
        assert_eq!(p.phi(&[0.7]).unwrap(), 0.0);
        assert_eq!(p.mayer(&[0.3]).unwrap(), 1.0);
        assert_eq!(p.mayer(&[0.6]).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_evaluation() {
        let p = Potential::gaussian(1, 1.0, 1.0).unwrap();
        assert_relative_eq!(p.phi(&[0.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            p.mayer(&[0.0]).unwrap(),
            1.0 - (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_relative_eq!(p.phi(&[2.0]).unwrap(), (-4.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn hard_core_temperedness_is_ball_volume() {
        let p = Potential::hard_core(1, 0.5).unwrap();
        assert_relative_eq!(p.temperedness_constant().unwrap(), 1.0, epsilon = 1e-15);
        let p = Potential::hard_core(2, 1.0).unwrap();
        assert_relative_eq!(
            p.temperedness_constant().unwrap(),
            std::f64::consts::PI,
            epsilon = 1e-15
        );
        // Unit-volume normalization in any dimension.
        for d in 1..=3 {
            let p = Potential::unit_hard_core(d).unwrap();
            assert_relative_eq!(p.temperedness_constant().unwrap(), 1.0, epsilon = 1e-13);
            assert_relative_eq!(
                p.critical_activity().unwrap(),
                std::f64::consts::E,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn free_gas_has_zero_temperedness() {
        let p = Potential::free(1).unwrap();
        assert_eq!(p.temperedness_constant().unwrap(), 0.0);
        assert!(p.critical_activity().unwrap().is_infinite());
    }

    #[test]
    fn tabulated_interpolation_and_range_errors() {
        let p = Potential::tabulated(1, vec![(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert_relative_eq!(p.phi(&[0.5]).unwrap(), 1.5, epsilon = 1e-15);
        assert_relative_eq!(p.phi(&[1.5]).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(p.phi(&[1.0]).unwrap(), 1.0, epsilon = 1e-15);
        let err = p.phi(&[2.5]).unwrap_err();
        assert!(matches!(err, Error::UntabulatedRadius { .. }));
        assert!(p.phi(&[2.5]).unwrap_err().to_string().contains("untabulated radius"));
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        assert!(Potential::tabulated(1, vec![(0.0, 1.0)]).is_err());
        assert!(Potential::tabulated(1, vec![(0.0, 1.0), (0.0, 0.5)]).is_err());
        assert!(Potential::tabulated(1, vec![(0.0, -1.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn soft_support_radius_honors_tolerance() {
        let p = Potential::gaussian(1, 1.0, 1.0).unwrap();
        let reach = p.mayer_support_radius();
        assert!(p.mayer_radial(reach).unwrap() <= 1.001e-12);
        assert!(p.mayer_radial(reach * 0.99).unwrap() > 1e-12);
    }
}
