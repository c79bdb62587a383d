use serde::{Deserialize, Serialize};

use super::controller::{regulator_step, ControllerConfig, ControllerState, PairPressures};
use super::plant::{plant_step, AxisPlant, AxisState, PlantParams};
use crate::error::{Error, Result};
use crate::units::{deg_to_rad, rad_to_deg};

/// Desired wrist angles from `t_s` onward, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t_s: f64,
    pub theta_fe_deg: f64,
    pub theta_ur_deg: f64,
}

/// Both axes of the simulated wrist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub params: PlantParams,
    pub fe: AxisPlant,
    pub ur: AxisPlant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingOptions {
    /// Samples earlier than this (relative to the first trajectory time)
    /// are left out of the RMS error.
    pub settle_s: f64,
    pub initial_fe_deg: f64,
    pub initial_ur_deg: f64,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        Self {
            settle_s: 0.0,
            initial_fe_deg: 0.0,
            initial_ur_deg: 0.0,
        }
    }
}

/// One logged control tick; angles in degrees, commanded pressures in kPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub t_s: f64,
    pub fe_des: f64,
    pub fe_act: f64,
    pub ur_des: f64,
    pub ur_act: f64,
    pub p_flex_kpa: f64,
    pub p_ext_kpa: f64,
    pub p_uln_kpa: f64,
    pub p_rad_kpa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingLog {
    pub rows: Vec<LogRow>,
    pub rms_fe_deg: f64,
    pub rms_ur_deg: f64,
}

/// Desired angles at `t` under a zero-order hold.
pub fn sample_trajectory(trajectory: &[TrajectoryPoint], t: f64) -> (f64, f64) {
    let idx = trajectory.partition_point(|p| p.t_s <= t).max(1) - 1;
    (trajectory[idx].theta_fe_deg, trajectory[idx].theta_ur_deg)
}

fn validate_trajectory(trajectory: &[TrajectoryPoint]) -> Result<()> {
    if trajectory.is_empty() {
        return Err(Error::InvalidInput("trajectory is empty".into()));
    }
    for w in trajectory.windows(2) {
        if !(w[1].t_s >= w[0].t_s) {
            return Err(Error::InvalidInput(format!(
                "trajectory is not time-sorted ({} after {})",
                w[1].t_s, w[0].t_s
            )));
        }
    }
    if trajectory
        .iter()
        .any(|p| !(p.t_s.is_finite() && p.theta_fe_deg.is_finite() && p.theta_ur_deg.is_finite()))
    {
        return Err(Error::InvalidInput(
            "trajectory contains non-finite values".into(),
        ));
    }
    Ok(())
}

/// Closed-loop simulation of both axes at the controller period from the
/// first trajectory time until the last one is reached; the final tick may
/// overshoot it by less than one period.
pub fn run_tracking(
    cfg: &ControllerConfig,
    plant: &PlantConfig,
    trajectory: &[TrajectoryPoint],
    options: &TrackingOptions,
) -> Result<TrackingLog> {
    cfg.validate()?;
    plant.params.validate()?;
    validate_trajectory(trajectory)?;
    let t0 = trajectory[0].t_s;
    let t_end = trajectory[trajectory.len() - 1].t_s;
    let ticks = ((t_end - t0) / cfg.dt_s - 1e-9).ceil().max(0.0) as usize;

    let mut command = ControllerState::initial(cfg);
    let mut applied = command;
    let mut fe = AxisState {
        theta: deg_to_rad(options.initial_fe_deg),
        omega: 0.0,
    };
    let mut ur = AxisState {
        theta: deg_to_rad(options.initial_ur_deg),
        omega: 0.0,
    };
    let mut rows = Vec::with_capacity(ticks + 1);
    let (mut sq_fe, mut sq_ur, mut counted) = (0.0, 0.0, 0usize);

    for k in 0..=ticks {
        let t = t0 + k as f64 * cfg.dt_s;
        let (fe_des, ur_des) = sample_trajectory(trajectory, t);
        let actual = [rad_to_deg(fe.theta), rad_to_deg(ur.theta)];
        rows.push(LogRow {
            t_s: t,
            fe_des,
            fe_act: actual[0],
            ur_des,
            ur_act: actual[1],
            p_flex_kpa: command.fe.positive_kpa,
            p_ext_kpa: command.fe.negative_kpa,
            p_uln_kpa: command.ur.positive_kpa,
            p_rad_kpa: command.ur.negative_kpa,
        });
        if t - t0 >= options.settle_s {
            sq_fe += (fe_des - actual[0]).powi(2);
            sq_ur += (ur_des - actual[1]).powi(2);
            counted += 1;
        }
        if k == ticks {
            break;
        }
        command = command.step(cfg, [fe_des, ur_des], actual);
        let lag = |a: f64, c: f64| regulator_step(a, c, cfg.regulator_lag_s, cfg.dt_s);
        applied = ControllerState {
            fe: PairPressures {
                positive_kpa: lag(applied.fe.positive_kpa, command.fe.positive_kpa),
                negative_kpa: lag(applied.fe.negative_kpa, command.fe.negative_kpa),
            },
            ur: PairPressures {
                positive_kpa: lag(applied.ur.positive_kpa, command.ur.positive_kpa),
                negative_kpa: lag(applied.ur.negative_kpa, command.ur.negative_kpa),
            },
        };
        fe = plant_step(
            &plant.params,
            &plant.fe,
            fe,
            (applied.fe.positive_kpa, applied.fe.negative_kpa),
            cfg.dt_s,
        )?;
        ur = plant_step(
            &plant.params,
            &plant.ur,
            ur,
            (applied.ur.positive_kpa, applied.ur.negative_kpa),
            cfg.dt_s,
        )?;
    }
    let rms = |sq: f64| {
        if counted == 0 {
            0.0
        } else {
            (sq / counted as f64).sqrt()
        }
    };
    Ok(TrackingLog {
        rows,
        rms_fe_deg: rms(sq_fe),
        rms_ur_deg: rms(sq_ur),
    })
}

/// Tracking error at the last logged tick of every constant-setpoint
/// segment, `(segment start, |fe error|, |ur error|)`.
pub fn dwell_end_errors(log: &TrackingLog, trajectory: &[TrajectoryPoint]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for (i, seg) in trajectory.iter().enumerate() {
        let end = trajectory.get(i + 1).map_or(f64::INFINITY, |n| n.t_s);
        if end <= seg.t_s {
            continue;
        }
        if let Some(row) = log
            .rows
            .iter()
            .rev()
            .find(|r| r.t_s >= seg.t_s && r.t_s < end)
        {
            out.push((
                seg.t_s,
                (row.fe_des - row.fe_act).abs(),
                (row.ur_des - row.ur_act).abs(),
            ));
        }
    }
    out
}
