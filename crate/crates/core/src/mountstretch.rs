//! Displacement of the muscle mounting points under load.
//!
//! The glove, the elbow band and the soft tissue under them give way as the
//! muscle pulls. Each endpoint moves toward the other along the tension by
//! `Δx = sqrt(F / |K|)` (the square-root law of `F = K Δx²`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpam::FpamSpec;
use crate::wristgeom::{
    endpoint_directions, muscle_path, torque, GeometrySolution, PlacementParams,
};

/// Quadratic stretching coefficients, N/m², stored as magnitudes.
///
/// Published coefficients carry a negative sign that only encodes the
/// direction of travel (endpoints pulled together); constructors take the
/// absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchModel {
    #[serde(rename = "k1_n_per_m2")]
    pub k1: f64,
    #[serde(rename = "k2_n_per_m2")]
    pub k2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Forearm,
    Hand,
}

impl StretchModel {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self {
            k1: k1.abs(),
            k2: k2.abs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "stretching coefficients must be nonzero, got k1={} k2={}",
                self.k1, self.k2
            )));
        }
        Ok(())
    }

    pub fn coefficient(&self, endpoint: Endpoint) -> f64 {
        match endpoint {
            Endpoint::Forearm => self.k1.abs(),
            Endpoint::Hand => self.k2.abs(),
        }
    }

    /// Displacement of `endpoint` under tension `force`.
    pub fn displacement(&self, force: f64, endpoint: Endpoint) -> f64 {
        if force <= 0.0 {
            return 0.0;
        }
        (force / self.coefficient(endpoint)).sqrt()
    }

    /// Inverse of [`StretchModel::displacement`].
    pub fn force_for(&self, displacement: f64, endpoint: Endpoint) -> f64 {
        self.coefficient(endpoint) * displacement * displacement
    }
}

pub fn displacement(model: &StretchModel, force: f64, endpoint: Endpoint) -> f64 {
    model.displacement(force, endpoint)
}

/// How the displaced placement is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StretchMode {
    /// Tension from the initial placement, one displacement, one evaluation.
    #[default]
    SinglePass,
    /// Extension: repeat until the displaced endpoints move less than `tol`.
    FixedPoint { tol: f64, max_iterations: usize },
}

impl StretchMode {
    pub fn fixed_point() -> Self {
        StretchMode::FixedPoint {
            tol: 1e-6,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchedTorque {
    pub torque: f64,
    pub solution: GeometrySolution,
    /// Placement after displacing the endpoints.
    pub placement: PlacementParams,
    /// Tension used to size the displacement.
    pub sizing_force: f64,
    pub iterations: usize,
}

fn displaced_placement(
    p: &PlacementParams,
    theta: f64,
    sol: &GeometrySolution,
    model: &StretchModel,
    force: f64,
) -> Result<PlacementParams> {
    let (u1, u2) = endpoint_directions(p, theta, sol);
    let dx1 = model.displacement(force, Endpoint::Forearm);
    let dx2 = model.displacement(force, Endpoint::Hand);
    let start1 = p.forearm_point();
    let start2 = p.hand_point(theta);
    // The endpoints may not slide past the wrist contact points (or past
    // each other on a straight path).
    let overrun = match &sol.wrap {
        Some(c) => dx1 >= (c.q1 - start1).norm() || dx2 >= (c.q2 - start2).norm(),
        None => dx1 + dx2 >= sol.length,
    };
    let p1 = start1 + u1 * dx1;
    let p2 = start2 + u2 * dx2;
    if overrun || p1.norm() <= p.rw || p2.norm() <= p.rw {
        return Err(Error::Geometry(format!(
            "stretching moves a mounting point inside the wrist circle at theta={theta}"
        )));
    }
    Ok(PlacementParams::from_points(p1, p2, theta, p.rw))
}

/// Torque with the mounting points displaced by the stretching model.
///
/// `placement` is the unstretched placement. The tension at that placement
/// sizes the displacement; each endpoint then moves along the tension
/// direction it experiences there, and the torque is evaluated at the
/// displaced placement.
pub fn stretched_torque(
    spec: &FpamSpec,
    pressure: f64,
    placement: &PlacementParams,
    model: &StretchModel,
    theta: f64,
    mode: StretchMode,
) -> Result<StretchedTorque> {
    let initial = muscle_path(placement, theta)?;
    let mut force = spec.force(pressure, initial.length)?;
    let mut moved = displaced_placement(placement, theta, &initial, model, force)?;
    let mut iterations = 1;
    if let StretchMode::FixedPoint {
        tol,
        max_iterations,
    } = mode
    {
        while iterations < max_iterations {
            let sol = muscle_path(&moved, theta)?;
            force = spec.force(pressure, sol.length)?;
            let next = displaced_placement(placement, theta, &initial, model, force)?;
            iterations += 1;
            let shift = (next.forearm_point() - moved.forearm_point())
                .norm()
                .max((next.hand_point(theta) - moved.hand_point(theta)).norm());
            moved = next;
            if shift < tol {
                break;
            }
        }
    }
    let (tau, solution) = torque(spec, pressure, &moved, theta)?;
    Ok(StretchedTorque {
        torque: tau,
        solution,
        placement: moved,
        sizing_force: force,
        iterations,
    })
}

/// One tracked measurement: tension and the displacement of each endpoint
/// along it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchRecord {
    pub force_n: f64,
    pub dx1_m: f64,
    pub dx2_m: f64,
}

/// Per-record `K = F / Δx²`, averaged arithmetically for each endpoint.
/// Records with zero displacement at an endpoint do not contribute to it.
pub fn fit_coefficients(records: &[StretchRecord]) -> Result<StretchModel> {
    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    for r in records {
        if !(r.force_n >= 0.0) || !(r.dx1_m >= 0.0) || !(r.dx2_m >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid stretch record {r:?}")));
        }
        if r.dx1_m > 0.0 {
            k1.push(r.force_n / (r.dx1_m * r.dx1_m));
        }
        if r.dx2_m > 0.0 {
            k2.push(r.force_n / (r.dx2_m * r.dx2_m));
        }
    }
    if k1.is_empty() || k2.is_empty() {
        return Err(Error::InvalidInput(
            "every record has zero displacement at one endpoint".into(),
        ));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let model = StretchModel {
        k1: mean(&k1),
        k2: mean(&k2),
    };
    if !(model.k1 > 0.0 && model.k2 > 0.0) {
        return Err(Error::FitFailure(format!(
            "degenerate coefficients {model:?}"
        )));
    }
    Ok(model)
}

pub mod presets {
    use super::StretchModel;
    use crate::units::n_per_cm2_to_n_per_m2;

    /// Coefficients identified for the flexor (−43.36 and
    /// −1097.50 N/cm², stored as magnitudes).
    pub fn measured_flexor() -> StretchModel {
        StretchModel::new(
            n_per_cm2_to_n_per_m2(-43.36),
            n_per_cm2_to_n_per_m2(-1097.50),
        )
    }
}
