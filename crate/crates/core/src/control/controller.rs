use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Antagonistic pressure controller settings. Pressures in kPa, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub gain_kpa_per_deg: f64,
    pub dt_s: f64,
    pub p_init_kpa: f64,
    /// Above this pressure the antagonist is released twice as fast.
    pub p_threshold_kpa: f64,
    pub p_min_kpa: f64,
    pub p_max_kpa: f64,
    /// Time constant of an optional first-order regulator lag; `None` means
    /// the regulator reaches its setpoint instantly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regulator_lag_s: Option<f64>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            gain_kpa_per_deg: 0.0083,
            dt_s: 0.014,
            p_init_kpa: 13.8,
            p_threshold_kpa: 13.8,
            p_min_kpa: 0.0,
            p_max_kpa: 137.0,
            regulator_lag_s: None,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain_kpa_per_deg > 0.0) {
            return Err(Error::InvalidInput(format!(
                "gain must be > 0, got {}",
                self.gain_kpa_per_deg
            )));
        }
        if !(self.dt_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "dt must be > 0, got {}",
                self.dt_s
            )));
        }
        if !(self.p_min_kpa <= self.p_init_kpa && self.p_init_kpa <= self.p_max_kpa) {
            return Err(Error::InvalidInput(format!(
                "initial pressure {} kPa outside [{}, {}]",
                self.p_init_kpa, self.p_min_kpa, self.p_max_kpa
            )));
        }
        if let Some(tau) = self.regulator_lag_s {
            if !(tau > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "regulator lag must be > 0, got {tau}"
                )));
            }
        }
        Ok(())
    }

    fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.p_min_kpa, self.p_max_kpa)
    }
}

/// Pressures of one antagonistic pair, kPa. `positive` drives the joint
/// angle up (flexion, ulnar deviation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPressures {
    pub positive_kpa: f64,
    pub negative_kpa: f64,
}

impl PairPressures {
    pub fn uniform(p: f64) -> Self {
        Self {
            positive_kpa: p,
            negative_kpa: p,
        }
    }
}

/// Pressures of all four muscles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub fe: PairPressures,
    pub ur: PairPressures,
}

impl ControllerState {
    pub fn initial(cfg: &ControllerConfig) -> Self {
        Self {
            fe: PairPressures::uniform(cfg.p_init_kpa),
            ur: PairPressures::uniform(cfg.p_init_kpa),
        }
    }

    /// Updates both pairs independently; angles are `[fe, ur]` in degrees.
    pub fn step(
        &self,
        cfg: &ControllerConfig,
        desired_deg: [f64; 2],
        actual_deg: [f64; 2],
    ) -> Self {
        Self {
            fe: controller_step(cfg, &self.fe, desired_deg[0], actual_deg[0]),
            ur: controller_step(cfg, &self.ur, desired_deg[1], actual_deg[1]),
        }
    }
}

/// One control tick for a pair. The agonist (the muscle pulling toward the
/// desired angle) gains `G·|e|`; the antagonist loses `G·|e|`, doubled when
/// its pressure is strictly above the threshold.
pub fn controller_step(
    cfg: &ControllerConfig,
    state: &PairPressures,
    desired_deg: f64,
    actual_deg: f64,
) -> PairPressures {
    let e = desired_deg - actual_deg;
    if e == 0.0 {
        return *state;
    }
    let (agonist, antagonist) = if e > 0.0 {
        (state.positive_kpa, state.negative_kpa)
    } else {
        (state.negative_kpa, state.positive_kpa)
    };
    let delta = cfg.gain_kpa_per_deg * e.abs();
    let release = if antagonist > cfg.p_threshold_kpa {
        2.0 * delta
    } else {
        delta
    };
    let agonist = cfg.clamp(agonist + delta);
    let antagonist = cfg.clamp(antagonist - release);
    if e > 0.0 {
        PairPressures {
            positive_kpa: agonist,
            negative_kpa: antagonist,
        }
    } else {
        PairPressures {
            positive_kpa: antagonist,
            negative_kpa: agonist,
        }
    }
}

/// First-order regulator: moves `actual` toward `commanded` over `dt`.
pub fn regulator_step(actual: f64, commanded: f64, lag_s: Option<f64>, dt: f64) -> f64 {
    match lag_s {
        Some(tau) => actual + (commanded - actual) * (1.0 - (-dt / tau).exp()),
        None => commanded,
    }
}
