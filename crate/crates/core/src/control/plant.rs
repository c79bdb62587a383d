use serde::{Deserialize, Serialize};

use crate::designopt::{model_torque, predict_rom, RomOptions};
use crate::error::{Error, Result};
use crate::fpam::FpamSpec;
use crate::mountstretch::StretchModel;
use crate::units::kpa_to_pa;
use crate::wristgeom::PlacementParams;

/// Angular speed above which a simulation is declared unstable, rad/s.
pub const OMEGA_LIMIT: f64 = 100.0;

/// One muscle as mounted on the suit, described in its own frame: positive
/// local angles shorten it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Muscle {
    pub spec: FpamSpec,
    pub placement: PlacementParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stretch: Option<StretchModel>,
}

impl Muscle {
    /// Torque about the joint (own frame, ≥ 0 pulls toward positive local angles).
    pub fn torque(&self, pressure_kpa: f64, local_theta: f64) -> Result<f64> {
        model_torque(
            &self.spec,
            kpa_to_pa(pressure_kpa),
            &self.placement,
            self.stretch.as_ref(),
            local_theta,
        )
        .map(|t| t.0)
    }

    /// Local angle at which this muscle stops pulling at `pressure_kpa`;
    /// `max` when it pulls over the whole scanned range.
    pub fn limit(&self, pressure_kpa: f64, max: f64) -> Result<f64> {
        let opts = RomOptions {
            max_deg: max.to_degrees(),
            ..RomOptions::default()
        };
        match predict_rom(
            &self.spec,
            kpa_to_pa(pressure_kpa),
            &self.placement,
            self.stretch.as_ref(),
            opts,
        ) {
            Ok(t) => Ok(t),
            Err(Error::NoCrossing(_)) => Ok(max),
            Err(e) => Err(e),
        }
    }
}

/// One rotational degree of freedom driven by an antagonistic pair.
/// The negative muscle sees the joint angle mirrored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisPlant {
    pub positive: Muscle,
    pub negative: Muscle,
    /// Hard stops `(min, max)`, rad.
    pub limits: (f64, f64),
}

impl AxisPlant {
    /// Pair with hard stops at each muscle's torque zero at `p_max_kpa`.
    pub fn with_modeled_limits(positive: Muscle, negative: Muscle, p_max_kpa: f64) -> Result<Self> {
        let max = std::f64::consts::FRAC_PI_2;
        let hi = positive.limit(p_max_kpa, max)?;
        let lo = -negative.limit(p_max_kpa, max)?;
        Ok(Self {
            positive,
            negative,
            limits: (lo, hi),
        })
    }

    /// Net muscle torque at joint angle `theta`.
    pub fn muscle_torque(&self, pressures_kpa: (f64, f64), theta: f64) -> Result<f64> {
        Ok(self.positive.torque(pressures_kpa.0, theta)?
            - self.negative.torque(pressures_kpa.1, -theta)?)
    }
}

/// Passive wrist surrogate: `I·θ'' = τ_muscles − k·θ − b·ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    /// Viscous coefficient b, N·m·s/rad.
    pub damping: f64,
    /// Passive stiffness k, N·m/rad.
    pub stiffness: f64,
    /// Rotational inertia of the hand, kg·m².
    pub inertia: f64,
    /// Integration substeps per control tick.
    pub substeps: usize,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            damping: 0.1,
            stiffness: 1.0,
            inertia: 0.003,
            substeps: 4,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0) {
            return Err(Error::InvalidInput(format!(
                "damping must be > 0, got {}",
                self.damping
            )));
        }
        if !(self.stiffness >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "stiffness must be >= 0, got {}",
                self.stiffness
            )));
        }
        if !(self.inertia > 0.0) {
            return Err(Error::InvalidInput(format!(
                "inertia must be > 0, got {}",
                self.inertia
            )));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidInput("substeps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisState {
    pub theta: f64,
    pub omega: f64,
}

/// Advances one axis by `dt` with semi-implicit Euler over `params.substeps`
/// substeps. Pressures are `(positive, negative)` in kPa.
pub fn plant_step(
    params: &PlantParams,
    axis: &AxisPlant,
    state: AxisState,
    pressures_kpa: (f64, f64),
    dt: f64,
) -> Result<AxisState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    let h = dt / params.substeps as f64;
    let AxisState {
        mut theta,
        mut omega,
    } = state;
    for _ in 0..params.substeps {
        let tau = axis.muscle_torque(pressures_kpa, theta)?
            - params.stiffness * theta
            - params.damping * omega;
        omega += h * tau / params.inertia;
        if omega.abs() > OMEGA_LIMIT || !omega.is_finite() {
            return Err(Error::Instability {
                omega,
                limit: OMEGA_LIMIT,
            });
        }
        theta += h * omega;
        let (lo, hi) = axis.limits;
        if theta > hi || theta < lo {
            theta = theta.clamp(lo, hi);
            omega = 0.0;
        }
    }
    Ok(AxisState { theta, omega })
}
