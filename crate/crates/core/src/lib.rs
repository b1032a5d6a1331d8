//! Heston and Bates calibration from asset prices alone.
//!
//! The latent variance path is reconstructed with a particle filter whose
//! resampler draws from a connected piecewise-linear CDF; static parameters
//! are drawn from conjugate regression posteriors given that path, and the
//! two steps alternate. With jumps, jump particles give a per-step jump
//! probability and size, which are used to neutralize returns before the
//! regressions.

pub mod bayes;
pub mod calibrate;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod io;
pub mod priors;
pub mod rng;
pub mod sde;

pub use calibrate::{calibrate, CalibrationOptions, CalibrationReport, ChainRecord, PointEstimates, TrueParams};
pub use error::{Error, Result};
pub use priors::PriorConfig;
pub use sde::{HestonParams, JumpParams, SimulatedPath, TimeGrid};
