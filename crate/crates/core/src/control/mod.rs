//! Antagonistic pressure feedback and a passive-wrist plant for closed-loop
//! trajectory simulation.

mod controller;
mod plant;
mod tracking;
mod trajectory;

pub use controller::{
    controller_step, regulator_step, ControllerConfig, ControllerState, PairPressures,
};
pub use plant::{plant_step, AxisPlant, AxisState, Muscle, PlantParams, OMEGA_LIMIT};
pub use tracking::{
    dwell_end_errors, run_tracking, sample_trajectory, LogRow, PlantConfig, TrackingLog,
    TrackingOptions, TrajectoryPoint,
};
pub use trajectory::{sinusoids, staircase, SinusoidSpec};
