//! Computable core for generalized critical values of polynomial maps.
//!
//! The crate is organised around a handful of independent pieces:
//!
//! * [`expr`] parses polynomial maps, differentiates them symbolically and
//!   evaluates them over any [`expr::Scalar`] ring.
//! * [`rcf`] is a truncated Puiseux series field with `T` a positive
//!   infinitesimal.
//! * [`rabier`] computes the distance of a linear operator to the singular
//!   operators.
//! * [`critical`] samples and polishes near-critical points and estimates
//!   the sets `K0`, `Kinf` and `K1` of a map.
//! * [`thin`] measures how thin a point cloud is, along with Hausdorff
//!   distances, box dimension and family sweeps.
//!
//! The `sardkit` binary exposes all of it as batch subcommands.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod critical;
pub mod expr;
pub mod rabier;
pub mod rcf;
pub mod rng;
pub mod thin;

pub use critical::{CriticalValueEstimate, Domain, Schedule, SearchBudget};
pub use expr::{JacobianMap, PolynomialMap};
pub use rabier::OperatorMatrix;
pub use rcf::{ConvexSubgroup, PuiseuxSeries};
pub use thin::{PointCloud, ThinnessReport};

/// Version string embedded in every CLI report.
pub const VERSION: &str = concat!("sardkit ", env!("CARGO_PKG_VERSION"));
