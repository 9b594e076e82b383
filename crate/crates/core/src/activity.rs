//! Complex activity fields and their ball-shaped modifications.
//!
//! An activity field is a base profile (a complex constant, or
//! piecewise-constant over axis-parallel boxes) supported on a region,
//! together with an ordered stack of modifications. Each modification is a
//! ball: a *discount* multiplies the activity by the Boltzmann factor
//! `e^{-phi(center - x)}` inside the ball, an *annihilation* zeroes it. The
//! recursion appends one discount per tree edge, the log-partition identity
//! appends one annihilation per outer point, and boundary conditions are
//! full-radius discounts centered at points outside the support.
//!
//! The stack is persistent: appending returns a new field sharing the tail
//! with the original, so branching a recursion tree never copies earlier
//! modifications. Evaluation multiplies factors, so stack order never
//! matters.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{boltzmann, Potential};
use crate::quadrature::{dist, Region};

/// How a modification acts inside its ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModKind {
    /// Multiply by `e^{-phi(center - x)}`.
    Discount,
    /// Set the activity to zero.
    Annihilate,
}

/// One ball-shaped modification of an activity field.
#[derive(Debug, Clone)]
pub struct Modification {
    pub center: Vec<f64>,
    /// Ball radius; `+inf` means the modification applies everywhere.
    pub radius: f64,
    pub kind: ModKind,
}

impl Modification {
    /// Whether the modification acts at `x` (strictly inside the ball; the
    /// sphere itself is left undiscounted, which changes no integral).
    fn applies(&self, x: &[f64]) -> bool {
        self.radius.is_infinite() || dist(&self.center, x) < self.radius
    }
}

/// Base profile of a field before modifications.
#[derive(Debug, Clone)]
enum Base {
    Constant(Complex64),
    /// First matching box wins; `default` elsewhere on the support.
    Piecewise {
        default: Complex64,
        boxes: Vec<(Vec<f64>, Vec<f64>, Complex64)>,
    },
}

/// A complex activity field on a region.
#[derive(Clone)]
pub struct ActivityField {
    base: Base,
    support: Region,
    potential: Arc<Potential>,
    mods: Option<Arc<ModNode>>,
    depth: usize,
}

struct ModNode {
    m: Modification,
    next: Option<Arc<ModNode>>,
}

impl ActivityField {
    /// Constant activity `lambda` on `support`.
    pub fn constant(
        potential: Arc<Potential>,
        support: Region,
        lambda: Complex64,
    ) -> Result<Self> {
        support.validate()?;
        if potential.dimension() != support.dimension() {
            return Err(Error::DimensionMismatch {
                expected: potential.dimension(),
                got: support.dimension(),
            });
        }
        Ok(ActivityField {
            base: Base::Constant(lambda),
            support,
            potential,
            mods: None,
            depth: 0,
        })
    }

    /// Piecewise-constant activity: `default` on the support, overridden by
    /// the first matching box of `boxes` (given as `(lo, hi, value)`).
    pub fn piecewise(
        potential: Arc<Potential>,
        support: Region,
        default: Complex64,
        boxes: Vec<(Vec<f64>, Vec<f64>, Complex64)>,
    ) -> Result<Self> {
        support.validate()?;
        let d = support.dimension();
        if potential.dimension() != d {
            return Err(Error::DimensionMismatch {
                expected: potential.dimension(),
                got: d,
            });
        }
        for (lo, hi, _) in &boxes {
            if lo.len() != d || hi.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: lo.len().max(hi.len()),
                });
            }
            if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                return Err(Error::InvalidParameter(
                    "piecewise box needs lo < hi in every coordinate".into(),
                ));
            }
        }
        Ok(ActivityField {
            base: Base::Piecewise { default, boxes },
            support,
            potential,
            mods: None,
            depth: 0,
        })
    }

    pub fn support(&self) -> &Region {
        &self.support
    }

    pub fn potential(&self) -> &Arc<Potential> {
        &self.potential
    }

    pub fn dimension(&self) -> usize {
        self.support.dimension()
    }

    /// Number of modifications on the stack.
    pub fn mod_depth(&self) -> usize {
        self.depth
    }

    /// The modifications, most recent first.
    pub fn modifications(&self) -> Vec<Modification> {
        let mut out = Vec::with_capacity(self.depth);
        let mut node = self.mods.as_deref();
        while let Some(n) = node {
            out.push(n.m.clone());
            node = n.next.as_deref();
        }
        out
    }

    fn base_value(&self, x: &[f64]) -> Complex64 {
        match &self.base {
            Base::Constant(v) => *v,
            Base::Piecewise { default, boxes } => {
                for (lo, hi, v) in boxes {
                    if x.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(xi, (l, h))| *xi >= *l && *xi <= *h)
                    {
                        return *v;
                    }
                }
                *default
            }
        }
    }

    /// The field value at `x`: zero outside the support, otherwise the base
    /// value times the product of modification factors.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        if !self.support.contains(x) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut value = self.base_value(x);
        if value == Complex64::new(0.0, 0.0) {
            return Ok(value);
        }
        let mut node = self.mods.as_deref();
        while let Some(n) = node {
            if n.m.applies(x) {
                match n.m.kind {
                    ModKind::Annihilate => return Ok(Complex64::new(0.0, 0.0)),
                    ModKind::Discount => {
                        let factor = boltzmann(self.potential.phi_dist(&n.m.center, x)?);
                        if factor == 0.0 {
                            return Ok(Complex64::new(0.0, 0.0));
                        }
                        value *= factor;
                    }
                }
            }
            node = n.next.as_deref();
        }
        Ok(value)
    }

    fn push(&self, m: Modification) -> Self {
        ActivityField {
            base: self.base.clone(),
            support: self.support.clone(),
            potential: Arc::clone(&self.potential),
            mods: Some(Arc::new(ModNode {
                m,
                next: self.mods.clone(),
            })),
            depth: self.depth + 1,
        }
    }

    /// Full discount at `v`: multiplies the whole field by
    /// `e^{-phi(v - x)}`.
    pub fn discount_at(&self, v: &[f64]) -> Self {
        self.push(Modification {
            center: v.to_vec(),
            radius: f64::INFINITY,
            kind: ModKind::Discount,
        })
    }

    /// Discount at `v` limited to the ball of radius `dist(v, w)`: the
    /// field seen by a recursion branch expanding from `v` toward `w`.
    pub fn restrict_toward(&self, v: &[f64], w: &[f64]) -> Result<Self> {
        let radius = dist(v, w);
        if radius == 0.0 {
            return Err(Error::DegenerateRestriction);
        }
        Ok(self.push(Modification {
            center: v.to_vec(),
            radius,
            kind: ModKind::Discount,
        }))
    }

    /// Annihilates the ball around `center` of radius `dist(center, x)`:
    /// the field integrated by the log-partition identity.
    pub fn hat_at(&self, center: &[f64], x: &[f64]) -> Self {
        self.push(Modification {
            center: center.to_vec(),
            radius: dist(center, x),
            kind: ModKind::Annihilate,
        })
    }

    /// Imposes boundary conditions: one full discount per point of `Y`. All
    /// points must lie outside the support.
    pub fn apply_boundary(&self, points: &[Vec<f64>]) -> Result<Self> {
        let mut field = self.clone();
        for y in points {
            if y.len() != self.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension(),
                    got: y.len(),
                });
            }
            if self.support.contains(y) {
                return Err(Error::BoundaryPointInsideRegion);
            }
            field = field.discount_at(y);
        }
        Ok(field)
    }

    /// Supremum of `|base|`; modification factors only shrink the modulus,
    /// so this bounds `|field|` everywhere.
    pub fn sup_abs(&self) -> f64 {
        match &self.base {
            Base::Constant(v) => v.norm(),
            Base::Piecewise { default, boxes } => boxes
                .iter()
                .map(|(_, _, v)| v.norm())
                .fold(default.norm(), f64::max),
        }
    }

    /// If the field is an unmodified real nonnegative constant, its value.
    pub fn real_constant_lambda(&self) -> Option<f64> {
        match &self.base {
            Base::Constant(v) if self.depth == 0 && v.im == 0.0 && v.re >= 0.0 => Some(v.re),
            _ => None,
        }
    }

    /// If the field is an unmodified constant, its value.
    pub fn constant_lambda(&self) -> Option<Complex64> {
        match &self.base {
            Base::Constant(v) if self.depth == 0 => Some(*v),
            _ => None,
        }
    }

    /// Returns a field with the same support, potential, and modifications
    /// but the base scaled by `factor`.
    pub fn scale_base(&self, factor: Complex64) -> Self {
        let base = match &self.base {
            Base::Constant(v) => Base::Constant(v * factor),
            Base::Piecewise { default, boxes } => Base::Piecewise {
                default: default * factor,
                boxes: boxes
                    .iter()
                    .map(|(lo, hi, v)| (lo.clone(), hi.clone(), v * factor))
                    .collect(),
            },
        };
        ActivityField {
            base,
            support: self.support.clone(),
            potential: Arc::clone(&self.potential),
            mods: self.mods.clone(),
            depth: self.depth,
        }
    }

    /// Intervals of one-dimensional supports where the field is exactly
    /// zero: annihilated balls, hard-core discount zones, and base boxes
    /// with value zero.
    pub fn zero_intervals_1d(&self) -> Vec<(f64, f64)> {
        debug_assert_eq!(self.dimension(), 1);
        let mut dead = Vec::new();
        if let Base::Piecewise { default, boxes } = &self.base {
            let zero = Complex64::new(0.0, 0.0);
            for (lo, hi, v) in boxes {
                if *v == zero {
                    dead.push((lo[0], hi[0]));
                }
            }
            // A zero default only zeroes what no box covers; that geometry
            // is not reconstructed here, so it contributes no dead interval.
            let _ = default;
        }
        let core = self.potential.hard_core_radius();
        let mut node = self.mods.as_deref();
        while let Some(n) = node {
            let c = n.m.center[0];
            match n.m.kind {
                ModKind::Annihilate => {
                    if n.m.radius > 0.0 {
                        dead.push((c - n.m.radius, c + n.m.radius));
                    }
                }
                ModKind::Discount => {
                    if let Some(r) = core {
                        let t = r.min(n.m.radius);
                        if t > 0.0 {
                            dead.push((c - t, c + t));
                        }
                    }
                }
            }
            node = n.next.as_deref();
        }
        dead
    }

    /// Points of a one-dimensional support where the field value can jump:
    /// edges of base boxes, annihilated balls, and discount balls whose
    /// factor is nontrivial at the ball boundary.
    pub fn break_points_1d(&self) -> Vec<f64> {
        debug_assert_eq!(self.dimension(), 1);
        let mut breaks = Vec::new();
        if let Base::Piecewise { boxes, .. } = &self.base {
            for (lo, hi, _) in boxes {
                breaks.push(lo[0]);
                breaks.push(hi[0]);
            }
        }
        let core = self.potential.hard_core_radius();
        let mut node = self.mods.as_deref();
        while let Some(n) = node {
            let c = n.m.center[0];
            match n.m.kind {
                ModKind::Annihilate => {
                    breaks.push(c - n.m.radius);
                    breaks.push(c + n.m.radius);
                }
                ModKind::Discount => {
                    if let Some(r) = core {
                        let t = r.min(n.m.radius);
                        breaks.push(c - t);
                        breaks.push(c + t);
                    } else if n.m.radius.is_finite() {
                        // A soft factor jumps by mayer(radius) at the ball
                        // boundary.
                        if self.potential.mayer_radial(n.m.radius).unwrap_or(1.0) > 1e-14 {
                            breaks.push(c - n.m.radius);
                            breaks.push(c + n.m.radius);
                        }
                    }
                }
            }
            node = n.next.as_deref();
        }
        breaks
    }
}

impl std::fmt::Debug for ActivityField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ActivityField")
            .field("base", &self.base)
            .field("support", &self.support)
            .field("mod_depth", &self.depth)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn rods() -> ActivityField {
        let p = Potential::hard_core(1, 0.5).unwrap();
        ActivityField::constant(p, Region::Interval { a: 0.0, b: 1.0 }, c(1.0)).unwrap()
    }

    #[test]
    fn constant_field_evaluation() {
        let f = rods();
        assert_eq!(f.evaluate(&[0.25]).unwrap(), c(1.0));
        assert_eq!(f.evaluate(&[1.5]).unwrap(), c(0.0));
        assert_eq!(f.evaluate(&[-0.1]).unwrap(), c(0.0));
    }

    #[test]
    fn discount_zeroes_hard_core_ball() {
        let f = rods().discount_at(&[0.5]);
        assert_eq!(f.evaluate(&[0.5]).unwrap(), c(0.0));
        assert_eq!(f.evaluate(&[0.2]).unwrap(), c(0.0));
        assert_eq!(f.evaluate(&[0.99]).unwrap(), c(0.0));
        // The core is the open ball, so its boundary keeps full activity.
        assert_eq!(f.evaluate(&[0.0]).unwrap(), c(1.0));
        assert_eq!(f.evaluate(&[1.0]).unwrap(), c(1.0));
    }

    #[test]
    fn restrict_toward_limits_the_discount() {
        let f = rods().restrict_toward(&[0.5], &[0.8]).unwrap();
        // Ball of radius 0.3 around 0.5 is zeroed (inside the core).
        assert_eq!(f.evaluate(&[0.4]).unwrap(), c(0.0));
        assert_eq!(f.evaluate(&[0.75]).unwrap(), c(0.0));
        // Outside the ball the core no longer matters.
        assert_eq!(f.evaluate(&[0.85]).unwrap(), c(1.0));
        assert_eq!(f.evaluate(&[0.15]).unwrap(), c(1.0));
    }

    #[test]
    fn degenerate_restriction_is_rejected() {
        let err = rods().restrict_toward(&[0.5], &[0.5]).unwrap_err();
        assert!(matches!(err, Error::DegenerateRestriction));
    }

    #[test]
    fn hat_annihilates_the_inner_ball() {
        let f = rods().hat_at(&[0.0], &[0.5]);
        assert_eq!(f.evaluate(&[0.25]).unwrap(), c(0.0));
        assert_eq!(f.evaluate(&[0.5]).unwrap(), c(1.0));
        assert_eq!(f.evaluate(&[0.75]).unwrap(), c(1.0));
        // Radius-zero hat changes nothing.
        let g = rods().hat_at(&[0.0], &[0.0]);
        assert_eq!(g.evaluate(&[0.1]).unwrap(), c(1.0));
    }

    #[test]
    fn boundary_points_must_lie_outside() {
        let err = rods().apply_boundary(&[vec![0.5]]).unwrap_err();
        assert!(matches!(err, Error::BoundaryPointInsideRegion));
        let f = rods().apply_boundary(&[vec![1.25]]).unwrap();
        // Hard core: activity vanishes within r of the boundary point.
        assert_eq!(f.evaluate(&[0.9]).unwrap(), c(0.0));
        assert_eq!(f.evaluate(&[0.7]).unwrap(), c(1.0));
    }

    #[test]
    fn soft_discounts_multiply() {
        let p = Potential::gaussian(1, 1.0, 1.0).unwrap();
        let f = ActivityField::constant(p.clone(), Region::Interval { a: 0.0, b: 1.0 }, c(2.0))
            .unwrap();
        let g = f.discount_at(&[0.5]).discount_at(&[0.5]);
        let phi = p.phi(&[0.25]).unwrap();
        assert_relative_eq!(
            g.evaluate(&[0.75]).unwrap().re,
            2.0 * (-2.0 * phi).exp(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn stack_is_persistent() {
        let f = rods();
        let g = f.restrict_toward(&[0.5], &[0.9]).unwrap();
        assert_eq!(f.mod_depth(), 0);
        assert_eq!(g.mod_depth(), 1);
        assert_eq!(f.evaluate(&[0.45]).unwrap(), c(1.0));
        assert_eq!(g.evaluate(&[0.45]).unwrap(), c(0.0));
    }

    #[test]
    fn zero_intervals_track_mods() {
        let f = rods()
            .restrict_toward(&[0.5], &[0.7])
            .unwrap()
            .hat_at(&[0.0], &[0.1]);
        let dead = f.zero_intervals_1d();
        let close = |(lo, hi): (f64, f64), a: f64, b: f64| {
            (lo - a).abs() < 1e-12 && (hi - b).abs() < 1e-12
        };
        assert!(dead.iter().any(|&iv| close(iv, 0.3, 0.7)));
        assert!(dead.iter().any(|&iv| close(iv, -0.1, 0.1)));
    }

    #[test]
    fn piecewise_base_and_breaks() {
        let p = Potential::hard_core(1, 0.5).unwrap();
        let f = ActivityField::piecewise(
            p,
            Region::Interval { a: 0.0, b: 1.0 },
            c(1.0),
            vec![(vec![0.2], vec![0.4], c(0.0)), (vec![0.6], vec![0.8], c(3.0))],
        )
        .unwrap();
        assert_eq!(f.evaluate(&[0.3]).unwrap(), c(0.0));
        assert_eq!(f.evaluate(&[0.7]).unwrap(), c(3.0));
        assert_eq!(f.evaluate(&[0.5]).unwrap(), c(1.0));
        assert!(f.zero_intervals_1d().contains(&(0.2, 0.4)));
        let breaks = f.break_points_1d();
        for b in [0.2, 0.4, 0.6, 0.8] {
            assert!(breaks.contains(&b));
        }
        assert_relative_eq!(f.sup_abs(), 3.0, epsilon = 1e-15);
    }
}
