//! Numerical tools for repulsive classical gasses in the grand canonical
//! ensemble.
//!
//! The library computes finite-volume pressures and one- and k-point
//! densities for a gas of particles interacting through a repulsive pair
//! potential, at real or complex activity. Three independent engines are
//! provided and cross-checked against each other:
//!
//! * [`recursion`]: a correlation-decay recursion that expresses the
//!   one-point density at `v` in terms of densities of modified activity
//!   fields at neighboring points, truncated at a configurable depth. The
//!   log partition function follows from an integral identity over the
//!   region.
//! * [`oracle`]: brute-force truncated cluster series: low orders by
//!   deterministic nested quadrature, higher orders by low-discrepancy
//!   sampling, plus the closed-form partition function for 1D hard rods.
//! * [`mc`]: a grand canonical birth-death Metropolis sampler used as a
//!   stochastic validator.
//!
//! The [`contraction`] module certifies, with explicit constants, the
//! complex activity neighborhood on which the recursion's one-step map is a
//! contraction in the coordinate `psi(x) = log(1 + c_phi * x)`; inside that
//! neighborhood the partition function is zero-free and `|log Z|` grows at
//! most linearly in the volume.
//!
//! Activities up to `e / c_phi` are subcritical, where `c_phi` is the
//! temperedness integral of the pair potential. Hard spheres are normalized
//! so that the exclusion ball has unit volume, making `c_phi = 1` and the
//! subcritical window `(0, e)`.

pub mod activity;
pub mod contraction;
pub mod error;
pub mod mc;
pub mod observables;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod recursion;

pub use activity::{ActivityField, ModKind, Modification};
pub use contraction::{CertifiedRegion, ContractionCertificate};
pub use error::{Error, Result};
pub use mc::{McConfig, McResult};
pub use observables::{Engine, ObservableParams, ThermoPoint};
pub use oracle::{PartitionPolynomial, SeriesEstimate};
pub use potential::{Potential, PotentialKind};
pub use quadrature::{QuadRule, QuadratureScheme, Region};
pub use recursion::{DensityEstimate, RecursionParams};

/// Base of the natural logarithm, the critical activity for `c_phi = 1`.
pub const E: f64 = std::f64::consts::E;
