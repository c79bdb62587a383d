//! Modelling, design optimisation and control simulation for a wrist
//! exosuit actuated by fabric pneumatic artificial muscles.
//!
//! All quantities are SI (m, Pa, N, rad) unless a field or function name
//! says otherwise. The controller works in kPa and degrees, matching how
//! its gains are specified.

pub mod config;
pub mod control;
pub mod designopt;
pub mod error;
pub mod fpam;
pub mod mountstretch;
pub mod optim;
pub mod units;
pub mod wristgeom;

pub use error::{Error, Result};
pub use fpam::FpamSpec;
pub use mountstretch::StretchModel;
pub use wristgeom::{GeometrySolution, PlacementParams, Regime};
