//! Numerical laboratory for a random-walk polymer pinned on equispaced
//! interfaces `T·ℤ`: first-passage kernels, free energy, the tilted renewal
//! representation, exact transfer-matrix oracles, exact samplers of the
//! contact skeleton, and Monte Carlo scaling experiments.

pub mod error;
pub mod experiments;
pub mod exact;
pub mod free_energy;
pub mod kernels;
pub mod path;
pub mod renewal;
pub mod rng;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
pub use kernels::Geometry;
