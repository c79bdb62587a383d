//! Unit conversions between the SI values used internally and the
//! cm / kPa / degree values used in tables, CSV files and command-line flags.

use serde::{Deserialize, Serialize};

pub const CM_PER_M: f64 = 100.0;
pub const PA_PER_KPA: f64 = 1000.0;

pub fn cm_to_m(cm: f64) -> f64 {
    cm / CM_PER_M
}

pub fn m_to_cm(m: f64) -> f64 {
    m * CM_PER_M
}

pub fn kpa_to_pa(kpa: f64) -> f64 {
    kpa * PA_PER_KPA
}

pub fn pa_to_kpa(pa: f64) -> f64 {
    pa / PA_PER_KPA
}

pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

/// N/cm² to N/m².
pub fn n_per_cm2_to_n_per_m2(k: f64) -> f64 {
    k * (CM_PER_M * CM_PER_M)
}

pub fn n_per_m2_to_n_per_cm2(k: f64) -> f64 {
    k / (CM_PER_M * CM_PER_M)
}

/// Unit convention for values crossing the command-line boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    /// cm, kPa, degrees.
    #[default]
    Paper,
    /// m, Pa, radians.
    Si,
}

impl UnitSystem {
    pub fn length_to_si(self, v: f64) -> f64 {
        match self {
            UnitSystem::Paper => cm_to_m(v),
            UnitSystem::Si => v,
        }
    }

    pub fn length_from_si(self, v: f64) -> f64 {
        match self {
            UnitSystem::Paper => m_to_cm(v),
            UnitSystem::Si => v,
        }
    }

    pub fn pressure_to_si(self, v: f64) -> f64 {
        match self {
            UnitSystem::Paper => kpa_to_pa(v),
            UnitSystem::Si => v,
        }
    }

    pub fn pressure_from_si(self, v: f64) -> f64 {
        match self {
            UnitSystem::Paper => pa_to_kpa(v),
            UnitSystem::Si => v,
        }
    }

    pub fn angle_to_si(self, v: f64) -> f64 {
        match self {
            UnitSystem::Paper => deg_to_rad(v),
            UnitSystem::Si => v,
        }
    }

    pub fn angle_from_si(self, v: f64) -> f64 {
        match self {
            UnitSystem::Paper => rad_to_deg(v),
            UnitSystem::Si => v,
        }
    }

    pub fn length_label(self) -> &'static str {
        match self {
            UnitSystem::Paper => "cm",
            UnitSystem::Si => "m",
        }
    }

    pub fn pressure_label(self) -> &'static str {
        match self {
            UnitSystem::Paper => "kPa",
            UnitSystem::Si => "Pa",
        }
    }

    pub fn angle_label(self) -> &'static str {
        match self {
            UnitSystem::Paper => "deg",
            UnitSystem::Si => "rad",
        }
    }
}
