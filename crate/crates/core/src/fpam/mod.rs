//! Fabric pneumatic artificial muscle (fPAM) force law.
//!
//! The axial tension of an fPAM is the sum of an ideal McKibben pressure term
//! and a linear elastic term contributed by the stretched fabric:
//!
//! ```text
//! F = π P r0² (3 (1 - ε)² / tan²α0 - 1 / sin²α0) + 2 π E t (ε0 - ε) r0
//! ```
//!
//! with ε = (L0 - L) / L0. The fibre angle α0 is not a free parameter: it is
//! chosen per pressure so that the pressure term vanishes at the measured
//! free-contraction limit ε_max(P). Tension is reported as a positive number;
//! a muscle cannot push, so negative totals are clamped to zero.

mod fit;

pub use fit::{
    fit_force_curves, identify_spec, CurveFit, CurveModel, Fabric, FitOptions, ForceCurveFit,
    Polynomial, TensileDataset, TensileLevel,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest contraction ratio a McKibben-type pressure term can reach,
/// `1 - 1/sqrt(3)`. Beyond it no fibre angle zeroes the pressure term.
pub const CONTRACTION_LIMIT: f64 = 0.422_649_730_810_374_26;

/// A value tabulated against pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressurePoint {
    pub p_pa: f64,
    pub value: f64,
}

impl PressurePoint {
    pub fn new(p_pa: f64, value: f64) -> Self {
        Self { p_pa, value }
    }
}

/// Behaviour when a pressure falls outside the tabulated range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    #[default]
    Disabled,
    /// Hold the nearest tabulated value.
    Clamp,
}

/// Directly measured dimensions kept alongside identified parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredDims {
    pub l0_m: f64,
    pub r0_m: f64,
}

/// Geometry and material parameters of one fPAM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpamSpec {
    /// Fully stretched, uninflated length.
    #[serde(rename = "l0_m")]
    pub l0: f64,
    /// Fully stretched radius used by the force law.
    #[serde(rename = "r0_m")]
    pub r0: f64,
    /// Fabric thickness.
    #[serde(rename = "t_m")]
    pub thickness: f64,
    /// Fabric elastic modulus.
    #[serde(rename = "e_pa")]
    pub modulus: f64,
    /// Contraction ratio at which the deflated elastic force vanishes.
    pub eps0: f64,
    /// Free-contraction limit per pressure, sorted by pressure.
    pub eps_max: Vec<PressurePoint>,
    #[serde(default)]
    pub extrapolation: Extrapolation,
    /// Per-pressure radii from identification; informational, the force law uses `r0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r0_by_pressure: Vec<PressurePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<MeasuredDims>,
}

impl FpamSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("l0", self.l0),
            ("r0", self.r0),
            ("thickness", self.thickness),
            ("modulus", self.modulus),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.eps0) {
            return Err(Error::InvalidInput(format!(
                "eps0 must lie in [0, 1), got {}",
                self.eps0
            )));
        }
        if self.eps_max.is_empty() {
            return Err(Error::InvalidInput("eps_max table is empty".into()));
        }
        for w in self.eps_max.windows(2) {
            if w[1].p_pa <= w[0].p_pa {
                return Err(Error::InvalidInput(
                    "eps_max pressures must be strictly increasing".into(),
                ));
            }
        }
        for pt in &self.eps_max {
            if !(pt.p_pa >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "negative pressure {}",
                    pt.p_pa
                )));
            }
            if !(pt.value >= self.eps0 && pt.value < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "eps_max {} at {} Pa must lie in [eps0, 1)",
                    pt.value, pt.p_pa
                )));
            }
        }
        Ok(())
    }

    /// Contraction ratio of a muscle of current length `length`.
    pub fn contraction(&self, length: f64) -> f64 {
        (self.l0 - length) / self.l0
    }

    /// Pressure range covered by the `eps_max` table.
    pub fn calibrated_range(&self) -> (f64, f64) {
        let first = self.eps_max.first().map_or(0.0, |p| p.p_pa);
        let last = self.eps_max.last().map_or(0.0, |p| p.p_pa);
        (first, last)
    }

    /// ε_max at `pressure`, piecewise linear between tabulated pressures.
    pub fn eps_max_at(&self, pressure: f64) -> Result<f64> {
        interpolate_table(&self.eps_max, pressure, self.extrapolation)
    }

    /// Fibre angle α0 that places the pressure-term root at ε_max(`pressure`).
    pub fn fiber_angle_at(&self, pressure: f64) -> Result<f64> {
        fiber_orientation(self.eps_max_at(pressure)?)
    }

    /// Pressure-dependent contribution at contraction `eps`, tension positive.
    pub fn pressure_force(&self, pressure: f64, eps: f64) -> Result<f64> {
        if pressure == 0.0 {
            return Ok(0.0);
        }
        let alpha0 = self.fiber_angle_at(pressure)?;
        Ok(PI * pressure * self.r0 * self.r0 * pressure_shape(alpha0, eps))
    }

    /// Fabric elasticity contribution; zero for contraction beyond ε0.
    pub fn elastic_force(&self, eps: f64) -> f64 {
        if eps >= self.eps0 {
            0.0
        } else {
            2.0 * PI * self.modulus * self.thickness * (self.eps0 - eps) * self.r0
        }
    }

    /// Tension at contraction ratio `eps`.
    pub fn force_at_contraction(&self, pressure: f64, eps: f64) -> Result<f64> {
        if !(pressure >= 0.0) {
            return Err(Error::Domain(format!(
                "pressure must be >= 0, got {pressure}"
            )));
        }
        if !(eps < 1.0) {
            return Err(Error::Domain(format!(
                "contraction ratio must be < 1, got {eps}"
            )));
        }
        let total = self.pressure_force(pressure, eps)? + self.elastic_force(eps);
        Ok(total.max(0.0))
    }

    /// Tension of the muscle when its path length is `length`.
    pub fn force(&self, pressure: f64, length: f64) -> Result<f64> {
        if !(length > 0.0) {
            return Err(Error::Domain(format!("length must be > 0, got {length}")));
        }
        self.force_at_contraction(pressure, self.contraction(length))
    }

    /// Copy of the spec using the identified radius for `pressure`, when one was recorded.
    pub fn with_pressure_r0(&self, pressure: f64) -> Result<FpamSpec> {
        let mut out = self.clone();
        if !self.r0_by_pressure.is_empty() {
            out.r0 = interpolate_table(&self.r0_by_pressure, pressure, Extrapolation::Clamp)?;
        }
        Ok(out)
    }

    /// Mean of the per-pressure radii, or `r0` when none were identified.
    pub fn mean_r0(&self) -> f64 {
        if self.r0_by_pressure.is_empty() {
            self.r0
        } else {
            self.r0_by_pressure.iter().map(|p| p.value).sum::<f64>()
                / self.r0_by_pressure.len() as f64
        }
    }
}

/// `3 (1 - ε)² / tan²α0 - 1 / sin²α0`.
///
/// This is the printed pressure bracket with its sign reversed so that the
/// term is positive (pulling) for ε below its root.
pub fn pressure_shape(alpha0: f64, eps: f64) -> f64 {
    let s2 = alpha0.sin().powi(2);
    let t2 = alpha0.tan().powi(2);
    3.0 * (1.0 - eps).powi(2) / t2 - 1.0 / s2
}

/// Fibre orientation α0 for which the pressure term vanishes at `eps_max`:
/// `α0 = -asin(sqrt(ε² - 2ε + 2/3) / (ε - 1))`.
pub fn fiber_orientation(eps_max: f64) -> Result<f64> {
    if !(eps_max > 0.0 && eps_max < 1.0) {
        return Err(Error::Domain(format!(
            "eps_max must lie in (0, 1), got {eps_max}"
        )));
    }
    let mut radicand = eps_max * eps_max - 2.0 * eps_max + 2.0 / 3.0;
    if radicand < 0.0 {
        if radicand > -1e-12 {
            radicand = 0.0;
        } else {
            return Err(Error::Domain(format!(
                "eps_max {eps_max} exceeds the attainable contraction {CONTRACTION_LIMIT:.6}"
            )));
        }
    }
    Ok(-(radicand.sqrt() / (eps_max - 1.0)).asin())
}

/// Root of the pressure term for a given fibre angle: `1 - 1 / (sqrt(3) cos α0)`.
pub fn max_contraction(alpha0: f64) -> f64 {
    1.0 - 1.0 / (3f64.sqrt() * alpha0.cos())
}

/// Free function form of [`FpamSpec::force`].
pub fn fpam_force(spec: &FpamSpec, pressure: f64, length: f64) -> Result<f64> {
    spec.force(pressure, length)
}

pub(crate) fn interpolate_table(
    table: &[PressurePoint],
    pressure: f64,
    extrapolation: Extrapolation,
) -> Result<f64> {
    let (first, last) = match (table.first(), table.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InvalidInput("empty pressure table".into())),
    };
    if pressure < first.p_pa || pressure > last.p_pa {
        return match extrapolation {
            Extrapolation::Clamp if pressure < first.p_pa => Ok(first.value),
            Extrapolation::Clamp => Ok(last.value),
            Extrapolation::Disabled => Err(Error::OutOfCalibratedRange {
                pressure_pa: pressure,
                min_pa: first.p_pa,
                max_pa: last.p_pa,
            }),
        };
    }
    let idx = table.partition_point(|p| p.p_pa <= pressure);
    if idx == 0 {
        return Ok(first.value);
    }
    let lo = table[idx - 1];
    if idx == table.len() || lo.p_pa == pressure {
        return Ok(lo.value);
    }
    let hi = table[idx];
    let s = (pressure - lo.p_pa) / (hi.p_pa - lo.p_pa);
    Ok(lo.value + s * (hi.value - lo.value))
}

/// Reference parameter sets for the fabricated flexor muscle.
pub mod presets {
    use super::*;
    use crate::units::{cm_to_m, kpa_to_pa};

    /// Tabulated pressure levels of the tensile test, kPa.
    pub const TENSILE_PRESSURES_KPA: [f64; 5] = [0.0, 34.0, 68.0, 103.0, 137.0];
    /// Identified ε_max per tensile pressure level.
    pub const TENSILE_EPS_MAX: [f64; 5] = [0.153, 0.303, 0.296, 0.301, 0.277];
    /// Identified radius per tensile pressure level, cm.
    pub const TENSILE_R0_CM: [f64; 5] = [1.23, 1.27, 1.22, 1.19, 1.26];
    pub const MEASURED_L0_CM: f64 = 34.0;
    pub const MEASURED_R0_CM: f64 = 1.02;
    pub const FABRIC_THICKNESS_M: f64 = 0.08e-3;
    pub const FABRIC_MODULUS_PA: f64 = 9.06e6;

    /// The identified flexor muscle. `r0` is the 137 kPa radius; the
    /// per-pressure radii are kept in `r0_by_pressure`.
    pub fn flexor_tensile() -> FpamSpec {
        FpamSpec {
            l0: cm_to_m(MEASURED_L0_CM),
            r0: cm_to_m(1.26),
            thickness: FABRIC_THICKNESS_M,
            modulus: FABRIC_MODULUS_PA,
            eps0: TENSILE_EPS_MAX[0],
            eps_max: TENSILE_PRESSURES_KPA
                .iter()
                .zip(TENSILE_EPS_MAX)
                .map(|(&p, e)| PressurePoint::new(kpa_to_pa(p), e))
                .collect(),
            extrapolation: Extrapolation::Disabled,
            r0_by_pressure: TENSILE_PRESSURES_KPA
                .iter()
                .zip(TENSILE_R0_CM)
                .map(|(&p, r)| PressurePoint::new(kpa_to_pa(p), cm_to_m(r)))
                .collect(),
            measured: Some(MeasuredDims {
                l0_m: cm_to_m(MEASURED_L0_CM),
                r0_m: cm_to_m(MEASURED_R0_CM),
            }),
        }
    }

    /// Muscle assumed during placement optimisation: r0 = 1.23 cm and
    /// ε_max = 0.28 held for every pressure.
    pub fn design_muscle() -> FpamSpec {
        FpamSpec {
            l0: cm_to_m(30.0),
            r0: cm_to_m(1.23),
            thickness: FABRIC_THICKNESS_M,
            modulus: FABRIC_MODULUS_PA,
            eps0: TENSILE_EPS_MAX[0],
            eps_max: vec![PressurePoint::new(kpa_to_pa(137.0), 0.28)],
            extrapolation: Extrapolation::Clamp,
            r0_by_pressure: Vec::new(),
            measured: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;
    use crate::units::{cm_to_m, kpa_to_pa};

    /// Independent evaluation of the pressure bracket straight from its
    /// printed form, `1/sin² - 3(ε-1)²/tan²`, negated to tension-positive.
    fn printed_bracket(alpha0: f64, eps: f64) -> f64 {
        let s = alpha0.sin();
        let c = alpha0.cos();
        -(1.0 / (s * s) - 3.0 * (eps - 1.0) * (eps - 1.0) * (c * c) / (s * s))
    }

    fn spec_137() -> FpamSpec {
        FpamSpec {
            l0: cm_to_m(34.0),
            r0: cm_to_m(1.26),
            thickness: 0.08e-3,
            modulus: 9.06e6,
            eps0: 0.153,
            eps_max: vec![PressurePoint::new(kpa_to_pa(137.0), 0.277)],
            extrapolation: Extrapolation::Disabled,
            r0_by_pressure: Vec::new(),
            measured: None,
        }
    }

    #[test]
    fn fiber_orientation_at_028() {
        let a = fiber_orientation(0.28).unwrap();
        assert!((a - 0.641).abs() < 1e-3, "{a}");
        assert!(printed_bracket(a, 0.28).abs() < 1e-12);
    }

    #[test]
    fn fiber_orientation_at_0277_zeroes_bracket() {
        let a = fiber_orientation(0.277).unwrap();
        assert!(a > 0.0 && a < PI / 2.0);
        assert!(printed_bracket(a, 0.277).abs() < 1e-12);
    }

    #[test]
    fn fiber_orientation_domain_boundary() {
        let a = fiber_orientation(CONTRACTION_LIMIT).unwrap();
        assert!(a.is_finite());
        assert!(a.abs() < 1e-6);
        assert!(matches!(fiber_orientation(0.45), Err(Error::Domain(_))));
        assert!(matches!(fiber_orientation(0.0), Err(Error::Domain(_))));
        assert!(matches!(fiber_orientation(1.0), Err(Error::Domain(_))));
        assert!(matches!(fiber_orientation(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn force_vanishes_at_eps_max() {
        let spec = spec_137();
        let f = spec.force_at_contraction(kpa_to_pa(137.0), 0.277).unwrap();
        assert!(f.abs() < 1e-9, "{f}");
    }

    #[test]
    fn force_at_zero_contraction_137kpa() {
        // Scripted by hand:
        //   radicand = 0.277² - 2·0.277 + 2/3 = 0.189395667
        //   sin²α0 = radicand / 0.723² = 0.362319
        //   tan²α0 = 0.362319 / 0.637681 = 0.568181
        //   bracket = 3 / 0.568181 - 1 / 0.362319 = 2.519991
        //   pressure term = π · 137e3 · 0.0126² · 2.519991 = 172.20 N
        //   elastic term  = 2π · 9.06e6 · 0.08e-3 · 0.153 · 0.0126 = 8.779 N
        let f = spec_137()
            .force_at_contraction(kpa_to_pa(137.0), 0.0)
            .unwrap();
        assert!((f - 180.98).abs() < 0.05, "{f}");
        assert!((f - 181.0).abs() < 0.5);
    }

    #[test]
    fn deflated_slack_muscle_has_no_force() {
        let spec = spec_137();
        assert_eq!(spec.force_at_contraction(0.0, 0.2).unwrap(), 0.0);
        assert_eq!(spec.force_at_contraction(0.0, 0.153).unwrap(), 0.0);
        assert!(spec.force_at_contraction(0.0, 0.1).unwrap() > 0.0);
    }

    #[test]
    fn overcontracted_muscle_is_clamped() {
        let spec = spec_137();
        assert_eq!(
            spec.force_at_contraction(kpa_to_pa(137.0), 0.35).unwrap(),
            0.0
        );
    }

    #[test]
    fn elastic_term_continuous_at_eps0() {
        let spec = spec_137();
        let below = spec.elastic_force(spec.eps0 - 1e-12);
        let at = spec.elastic_force(spec.eps0);
        assert!(below < 1e-6);
        assert_eq!(at, 0.0);
        assert_eq!(spec.elastic_force(0.5), 0.0);
    }

    #[test]
    fn domain_errors() {
        let spec = spec_137();
        assert!(matches!(
            spec.force_at_contraction(kpa_to_pa(137.0), 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            spec.force(kpa_to_pa(137.0), 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            spec.force(kpa_to_pa(200.0), 0.3),
            Err(Error::OutOfCalibratedRange { .. })
        ));
        let mut clamped = spec.clone();
        clamped.extrapolation = Extrapolation::Clamp;
        assert!(clamped.force(kpa_to_pa(200.0), 0.3).is_ok());
    }

    #[test]
    fn eps_max_interpolates_linearly() {
        let spec = flexor_tensile();
        spec.validate().unwrap();
        let mid = spec.eps_max_at(kpa_to_pa(51.0)).unwrap();
        assert!((mid - (0.303 + 0.296) / 2.0).abs() < 1e-12);
        assert_eq!(spec.eps_max_at(kpa_to_pa(137.0)).unwrap(), 0.277);
        assert_eq!(spec.eps_max_at(0.0).unwrap(), 0.153);
    }

    #[test]
    fn mean_radius() {
        let spec = flexor_tensile();
        assert!((spec.mean_r0() - cm_to_m(1.234)).abs() < 1e-12);
        let at68 = spec.with_pressure_r0(kpa_to_pa(68.0)).unwrap();
        assert!((at68.r0 - cm_to_m(1.22)).abs() < 1e-15);
    }

    #[test]
    fn validate_rejects_bad_specs() {
        let mut s = spec_137();
        s.eps0 = 0.3;
        assert!(s.validate().is_err());
        let mut s = spec_137();
        s.r0 = 0.0;
        assert!(s.validate().is_err());
        let mut s = flexor_tensile();
        s.eps_max.swap(1, 2);
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_keys_are_unit_suffixed() {
        let json = serde_json::to_value(spec_137()).unwrap();
        for key in ["l0_m", "r0_m", "t_m", "e_pa", "eps0", "eps_max"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(json["eps_max"][0].get("p_pa").is_some());
        assert!(json["eps_max"][0].get("value").is_some());
        let back: FpamSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec_137());
    }
}
