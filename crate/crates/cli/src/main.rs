//! `fpam-exo`: batch front end for the fPAM exosuit models.
//!
//! CSV columns and numeric flags use the unit system chosen with `--units`
//! (cm, kPa, degrees by default); JSON artifacts are always SI.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpam_exo::units::UnitSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Units {
    /// cm, kPa, degrees
    Paper,
    /// m, Pa, radians
    Si,
}

impl From<Units> for UnitSystem {
    fn from(u: Units) -> Self {
        match u {
            Units::Paper => UnitSystem::Paper,
            Units::Si => UnitSystem::Si,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fpam-exo", version, about = "Fabric pneumatic muscle exosuit modelling tools")]
struct Cli {
    #[arg(long, value_enum, default_value = "paper", global = true)]
    units: Units,
    /// Reserved; recorded in run metadata.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArg {
    /// Output file; stdout when omitted (no metadata sidecar then).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajectoryKind {
    Staircase,
    Sinusoid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit tensile curves and identify an fPAM spec.
    /// CSV columns: pressure, epsilon, force_n.
    FitFpam {
        input: PathBuf,
        /// Measured fully stretched length.
        #[arg(long)]
        l0: f64,
        /// Measured fully stretched radius.
        #[arg(long)]
        r0: f64,
        #[arg(long, default_value_t = 8)]
        degree: usize,
        #[arg(long, default_value_t = 11)]
        window: usize,
        /// Hold the nearest tabulated ε_max outside the tested pressures.
        #[arg(long)]
        clamp: bool,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Torque of one muscle over a sweep of its own joint angle.
    TorqueProfile {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "flexor")]
        muscle: String,
        #[arg(long)]
        pressure: f64,
        /// start:stop:step, inclusive; defaults to -67.5:90:22.5 degrees.
        #[arg(long, allow_hyphen_values = true)]
        theta_range: Option<String>,
        /// Apply mounting-point stretching (the muscle's model, else the
        /// measured flexor coefficients).
        #[arg(long)]
        stretch: bool,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Optimise (d1, w1, d2, w2) against a reference torque.
    /// Reference CSV columns: theta, tau_nm.
    OptimizePlacement {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Resample the reference with a natural cubic spline to this many points.
        #[arg(long)]
        resample: Option<usize>,
        /// Also write the per-seed trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Smallest pressure whose optimised placement covers the reference.
    FindMinPressure {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        resample: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long)]
        p_max: f64,
        /// Bisection resolution (default 1 kPa).
        #[arg(long, conflicts_with = "grid_step")]
        resolution: Option<f64>,
        /// Scan upward in fixed steps instead of bisecting.
        #[arg(long)]
        grid_step: Option<f64>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Fit mounting stretch coefficients. CSV columns: force_n, dx1, dx2.
    FitStretch {
        input: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Scan the wrist radius against measured torque.
    /// CSV columns: pressure, theta, tau_nm.
    FitWristRadius {
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "flexor")]
        muscle: String,
        #[arg(long)]
        stretch: bool,
        #[arg(long)]
        rw_min: Option<f64>,
        #[arg(long)]
        rw_max: Option<f64>,
        #[arg(long)]
        rw_step: Option<f64>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Joint limits of all four muscles at one pressure.
    PredictRom {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the controller's maximum pressure.
        #[arg(long)]
        pressure: Option<f64>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Closed-loop tracking of a trajectory.
    /// CSV columns: t_s, theta_fe, theta_ur. Log columns: t_s, fe_des,
    /// fe_act, ur_des, ur_act, p_flex, p_ext, p_uln, p_rad.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        /// Seconds excluded from the RMS summary.
        #[arg(long, default_value_t = 0.0)]
        settle: f64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Write the default four-muscle configuration.
    InitConfig {
        #[command(flatten)]
        out: OutputArg,
    },
    /// Write the default flexor placement problem.
    InitProblem {
        /// Supply pressure.
        #[arg(long)]
        pressure: f64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Write a demonstration trajectory.
    MakeTrajectory {
        #[arg(value_enum)]
        kind: TrajectoryKind,
        /// Staircase dwell per step, s.
        #[arg(long, default_value_t = 10.0)]
        dwell: f64,
        /// Sinusoid periods.
        #[arg(long, default_value_t = 3)]
        periods: usize,
        #[command(flatten)]
        out: OutputArg,
    },
}

/// Flags shared by every command.
pub struct Globals {
    pub units: UnitSystem,
    pub seed: u64,
    pub verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let globals = Globals {
        units: cli.units.into(),
        seed: cli.seed,
        verbose: cli.verbose,
    };
    match commands::run(&globals, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
