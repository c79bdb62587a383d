//! Whole-suit configuration: muscle specs, placements, controller and plant.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::control::{AxisPlant, ControllerConfig, Muscle, PlantConfig, PlantParams};
use crate::designopt::size_initial_length;
use crate::error::{Error, Result};
use crate::fpam::{presets::design_muscle, FpamSpec};
use crate::mountstretch::StretchModel;
use crate::units::{deg_to_rad, UnitSystem};
use crate::wristgeom::{presets::optimized_flexor, PlacementParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuscleName {
    Flexor,
    Extensor,
    Ulnar,
    Radial,
}

impl MuscleName {
    pub const ALL: [MuscleName; 4] = [
        MuscleName::Flexor,
        MuscleName::Extensor,
        MuscleName::Ulnar,
        MuscleName::Radial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MuscleName::Flexor => "flexor",
            MuscleName::Extensor => "extensor",
            MuscleName::Ulnar => "ulnar",
            MuscleName::Radial => "radial",
        }
    }
}

impl std::str::FromStr for MuscleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MuscleName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown muscle {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuscleEntry {
    pub name: MuscleName,
    /// Key into [`ExosuitConfig::fpam_specs`].
    pub fpam: String,
    /// Overrides the referenced spec's fully stretched length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0_m: Option<f64>,
    pub placement: PlacementParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stretch: Option<StretchModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExosuitConfig {
    /// Units used at the command-line boundary; the file itself is SI.
    #[serde(default)]
    pub units: UnitSystem,
    pub fpam_specs: BTreeMap<String, FpamSpec>,
    pub muscles: Vec<MuscleEntry>,
    #[serde(default)]
    pub controller: ControllerConfig,
    #[serde(default)]
    pub plant: PlantParams,
}

impl ExosuitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.muscles.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "expected 4 muscles, found {}",
                self.muscles.len()
            )));
        }
        for name in MuscleName::ALL {
            if !self.muscles.iter().any(|m| m.name == name) {
                return Err(Error::InvalidInput(format!(
                    "muscle {} is missing",
                    name.as_str()
                )));
            }
        }
        for m in &self.muscles {
            m.placement.validate()?;
            if let Some(s) = &m.stretch {
                s.validate()?;
            }
            self.muscle(m.name)?.spec.validate()?;
        }
        self.controller.validate()?;
        self.plant.validate()
    }

    /// Resolved muscle with its spec reference and length override applied.
    pub fn muscle(&self, name: MuscleName) -> Result<Muscle> {
        let entry = self
            .muscles
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("muscle {} is missing", name.as_str())))?;
        let mut spec =
            self.fpam_specs.get(&entry.fpam).cloned().ok_or_else(|| {
                Error::InvalidInput(format!("unknown fpam spec {:?}", entry.fpam))
            })?;
        if let Some(l0) = entry.l0_m {
            spec.l0 = l0;
        }
        Ok(Muscle {
            spec,
            placement: entry.placement,
            stretch: entry.stretch,
        })
    }

    pub fn build_plant(&self) -> Result<PlantConfig> {
        self.validate()?;
        let p_max = self.controller.p_max_kpa;
        Ok(PlantConfig {
            params: self.plant,
            fe: AxisPlant::with_modeled_limits(
                self.muscle(MuscleName::Flexor)?,
                self.muscle(MuscleName::Extensor)?,
                p_max,
            )?,
            ur: AxisPlant::with_modeled_limits(
                self.muscle(MuscleName::Ulnar)?,
                self.muscle(MuscleName::Radial)?,
                p_max,
            )?,
        })
    }
}

/// Angle at which the default muscles are fully stretched, degrees.
pub const DEFAULT_SIZING_DEG: f64 = -65.4;

impl Default for ExosuitConfig {
    /// Four identical muscles on the optimised flexor placement, each sized
    /// to be fully stretched at 65.4° in its own extension direction.
    fn default() -> Self {
        let placement = optimized_flexor();
        let l0 = size_initial_length(&placement, deg_to_rad(DEFAULT_SIZING_DEG))
            .expect("default placement has a valid path");
        let muscles = MuscleName::ALL
            .into_iter()
            .map(|name| MuscleEntry {
                name,
                fpam: "design".into(),
                l0_m: Some(l0),
                placement,
                stretch: None,
            })
            .collect();
        Self {
            units: UnitSystem::Paper,
            fpam_specs: BTreeMap::from([("design".to_string(), design_muscle())]),
            muscles,
            controller: ControllerConfig::default(),
            plant: PlantParams::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = ExosuitConfig::default();
        c.validate().unwrap();
        let json = serde_json::to_string_pretty(&c).unwrap();
        let back: ExosuitConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn missing_muscle_rejected() {
        let mut c = ExosuitConfig::default();
        c.muscles[3].name = MuscleName::Flexor;
        assert!(matches!(c.validate(), Err(Error::InvalidInput(_))));
        c.muscles.pop();
        assert!(c.validate().is_err());
    }

    #[test]
    fn unresolved_spec_rejected() {
        let mut c = ExosuitConfig::default();
        c.muscles[1].fpam = "nope".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_limits_cover_demonstrations() {
        let plant = ExosuitConfig::default().build_plant().unwrap();
        for axis in [&plant.fe, &plant.ur] {
            assert!(
                axis.limits.0 < deg_to_rad(-40.0) && axis.limits.1 > deg_to_rad(40.0),
                "{:?}",
                axis.limits
            );
        }
    }

    #[test]
    fn muscle_names_parse() {
        for m in MuscleName::ALL {
            assert_eq!(m.as_str().parse::<MuscleName>().unwrap(), m);
        }
        assert!("biceps".parse::<MuscleName>().is_err());
    }
}
