//! Planar torque geometry of one muscle spanning the wrist.
//!
//! Frame: origin at the wrist centre O, x along the forearm toward the hand,
//! z along the joint axis. The forearm mounting point is `P1 = (-d1, w1)`;
//! the hand mounting point is `(d2, w2)` in the hand frame, rotated by the
//! joint angle θ. Positive θ is the direction this muscle pulls.
//!
//! While the chord P1P2 clears the wrist circle (radius rw) the muscle runs
//! straight. Once the chord would cut the circle the muscle wraps over it:
//! tangent from P1 to Q1, arc Q1→Q2 clockwise, tangent from Q2 to P2.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpam::FpamSpec;

pub type Point = Vector2<f64>;

/// |D| / rw⁴ below this counts as tangency.
pub const TANGENCY_TOL: f64 = 1e-12;
/// Wrap angles more negative than this are a regime error, not round-off.
pub const PHI_TOL: f64 = 1e-9;

/// Mounting geometry of one muscle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementParams {
    #[serde(rename = "d1_m")]
    pub d1: f64,
    #[serde(rename = "w1_m")]
    pub w1: f64,
    #[serde(rename = "d2_m")]
    pub d2: f64,
    #[serde(rename = "w2_m")]
    pub w2: f64,
    /// Wrist circle radius.
    #[serde(rename = "rw_m")]
    pub rw: f64,
}

impl PlacementParams {
    pub fn new(d1: f64, w1: f64, d2: f64, w2: f64, rw: f64) -> Self {
        Self { d1, w1, d2, w2, rw }
    }

    /// Distance from O to the forearm mounting point.
    pub fn r1(&self) -> f64 {
        self.d1.hypot(self.w1)
    }

    /// Distance from O to the hand mounting point.
    pub fn r2(&self) -> f64 {
        self.d2.hypot(self.w2)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d1", self.d1),
            ("w1", self.w1),
            ("d2", self.d2),
            ("w2", self.w2),
            ("rw", self.rw),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be > 0, got {v}")));
            }
        }
        self.check_outside_circle()
    }

    pub(crate) fn check_outside_circle(&self) -> Result<()> {
        if self.rw >= self.r1() || self.rw >= self.r2() {
            return Err(Error::Geometry(format!(
                "mounting points must lie outside the wrist circle (rw={}, R1={}, R2={})",
                self.rw,
                self.r1(),
                self.r2()
            )));
        }
        Ok(())
    }

    pub fn forearm_point(&self) -> Point {
        Point::new(-self.d1, self.w1)
    }

    pub fn hand_point(&self, theta: f64) -> Point {
        rotate(Point::new(self.d2, self.w2), theta)
    }

    /// Placement whose mounting points are `p1` (forearm frame) and `p2`
    /// (world frame at joint angle `theta`).
    pub fn from_points(p1: Point, p2: Point, theta: f64, rw: f64) -> Self {
        let hand = rotate(p2, -theta);
        Self {
            d1: -p1.x,
            w1: p1.y,
            d2: hand.x,
            w2: hand.y,
            rw,
        }
    }

    pub fn with_rw(&self, rw: f64) -> Self {
        Self { rw, ..*self }
    }
}

pub fn rotate(v: Point, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    Point::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// z-component of the planar cross product.
pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Which side of the joint a muscle pulls toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PullDirection {
    Positive,
    Negative,
}

impl PullDirection {
    pub fn sign(self) -> f64 {
        match self {
            PullDirection::Positive => 1.0,
            PullDirection::Negative => -1.0,
        }
    }

    /// Joint angle expressed in the muscle's own frame. The opposing muscle
    /// of a pair lives in the reflection of the joint frame about the x axis.
    pub fn local_angle(self, theta: f64) -> f64 {
        self.sign() * theta
    }

    /// Torque in the joint frame from a torque computed in the muscle frame.
    pub fn joint_torque(self, local_torque: f64) -> f64 {
        self.sign() * local_torque
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Straight,
    Tangent,
    Wrapped,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Straight => "straight",
            Regime::Tangent => "tangent",
            Regime::Wrapped => "wrapped",
        }
    }
}

/// Contact details of a wrapped path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrapContact {
    /// Clockwise angle from +y to OQ1.
    pub psi: f64,
    /// Arc angle from Q1 to Q2.
    pub phi: f64,
    pub q1: Point,
    pub q2: Point,
    /// True when φ exceeded π and was clamped.
    pub phi_clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySolution {
    /// Straight or Wrapped; tangency reports Straight.
    pub regime: Regime,
    pub length: f64,
    /// Torque per unit tension.
    pub moment_arm: f64,
    pub wrap: Option<WrapContact>,
}

/// Discriminant of the intersection of `y = a x + b` with the circle of
/// radius `rw` about O: `(2ab)² - 4(1 + a²)(b² - rw²)`.
pub fn line_discriminant(a: f64, b: f64, rw: f64) -> f64 {
    (2.0 * a * b).powi(2) - 4.0 * (1.0 + a * a) * (b * b - rw * rw)
}

/// Signed clearance of the chord: distance from O to the line P1P2,
/// positive when the chord passes on the muscle's side of the centre (the
/// path from P2 to P1 turns counter-clockwise about O), and whether the foot
/// of the perpendicular lies strictly inside the segment.
fn signed_clearance(p1: &Point, p2: &Point) -> (f64, bool) {
    let d = p2 - p1;
    let t = -p1.dot(&d) / d.norm_squared();
    (cross(p2, p1) / d.norm(), t > 0.0 && t < 1.0)
}

/// Normalised discriminant `(rw² - h·|h|) / rw²` of the chord, where `h` is
/// its signed clearance: negative when the chord clears the circle on the
/// muscle's side, zero at tangency, positive when the circle is in the way.
///
/// For `h ≥ 0` this equals `D / (4 (1 + a²) rw²)` with `D` from
/// [`line_discriminant`]. Unlike `D`, it stays positive once the chord has
/// swept past the centre, where the muscle must still wrap.
pub fn chord_discriminant(p: &PlacementParams, theta: f64) -> Result<f64> {
    let p1 = p.forearm_point();
    let p2 = p.hand_point(theta);
    if (p2 - p1).norm() <= f64::EPSILON * p1.norm().max(1.0) {
        return Err(Error::Geometry("mounting points coincide".into()));
    }
    let (h, interior) = signed_clearance(&p1, &p2);
    let rw2 = p.rw * p.rw;
    if !interior && h >= 0.0 {
        // The nearest point is an endpoint, which lies outside the circle.
        return Ok(-(h * h - rw2).abs().max(f64::MIN_POSITIVE) / rw2);
    }
    Ok((rw2 - h * h.abs()) / rw2)
}

fn wrap_angles(p: &PlacementParams, theta: f64) -> (f64, f64, Point) {
    let p1 = p.forearm_point();
    let r1 = p.r1();
    let r2 = p.r2();
    // Thales: the tangent point from P1 lies on the circle with diameter OP1,
    // at angle ±acos(rw/R1) from OP1. The clockwise-wrapping tangent is the
    // one rotated toward +y for the valid mounting half-plane.
    let gamma = (p.rw / r1).acos();
    let q1 = rotate(p1 * (p.rw / r1), -gamma);
    let y_hat = Point::new(0.0, 1.0);
    let psi = -cross(&y_hat, &q1).atan2(y_hat.dot(&q1));
    let phi = FRAC_PI_2 - theta - (psi + (p.rw / r2).acos() + (p.w2 / r2).asin());
    (psi, phi, q1)
}

/// Distance from O to the segment `p1 p2`.
fn segment_distance(p1: &Point, p2: &Point) -> f64 {
    let d = p2 - p1;
    let t = (-p1.dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (p1 + d * t).norm()
}

/// Decides which path model applies at `theta`.
///
/// Near tangency the chord discriminant decides. Elsewhere the sign of the
/// wrap angle φ does: it is linear in θ, so it keeps a muscle wrapped after
/// its chord has swept past the centre, and keeps it straight when the hand
/// point has rotated beyond the forearm point.
pub fn classify_regime(p: &PlacementParams, theta: f64) -> Result<Regime> {
    let disc = chord_discriminant(p, theta)?;
    if disc.abs() < TANGENCY_TOL {
        return Ok(Regime::Tangent);
    }
    p.check_outside_circle()?;
    let (_, phi, _) = wrap_angles(p, theta);
    if phi > 0.0 {
        return Ok(Regime::Wrapped);
    }
    if segment_distance(&p.forearm_point(), &p.hand_point(theta)) >= p.rw || phi > -PHI_TOL {
        return Ok(Regime::Straight);
    }
    Err(Error::Geometry(format!(
        "chord crosses the wrist circle on the far side at theta={theta} (phi={phi})"
    )))
}

/// Euclidean distance between the mounting points.
pub fn straight_length(p: &PlacementParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let dx = -p.d1 - p.d2 * c + p.w2 * s;
    let dy = p.w1 - p.d2 * s - p.w2 * c;
    dx.hypot(dy)
}

/// Torque of tension `force` along the straight chord.
pub fn straight_torque(force: f64, p: &PlacementParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let num = (p.d1 * p.d2 - p.w1 * p.w2) * s + (p.d1 * p.w2 + p.d2 * p.w1) * c;
    force * num / straight_length(p, theta)
}

/// Tangent–arc–tangent path around the wrist circle.
pub fn wrapped_geometry(p: &PlacementParams, theta: f64) -> Result<GeometrySolution> {
    p.check_outside_circle()?;
    let (psi, raw_phi, q1) = wrap_angles(p, theta);
    if raw_phi < -PHI_TOL {
        return Err(Error::Regime(format!(
            "muscle does not wrap at theta={theta} (phi={raw_phi}); use the straight model"
        )));
    }
    let phi_clamped = raw_phi > PI;
    let phi = raw_phi.clamp(0.0, PI);
    let a = psi + phi;
    let q2 = Point::new(p.rw * a.sin(), p.rw * a.cos());
    let rw2 = p.rw * p.rw;
    let r1 = p.r1();
    let r2 = p.r2();
    let length = (r1 * r1 - rw2).sqrt() + p.rw * phi + (r2 * r2 - rw2).sqrt();
    let contact = WrapContact {
        psi,
        phi,
        q1,
        q2,
        phi_clamped,
    };
    Ok(GeometrySolution {
        regime: Regime::Wrapped,
        length,
        moment_arm: wrapped_torque_with(1.0, p, theta, &contact),
        wrap: Some(contact),
    })
}

fn wrapped_torque_with(force: f64, p: &PlacementParams, theta: f64, c: &WrapContact) -> f64 {
    let (s, co) = theta.sin_cos();
    // Clockwise angle of OQ2 from +y.
    let a = c.psi + c.phi;
    let (sa, ca) = a.sin_cos();
    let x2 = p.d2 * co - p.w2 * s;
    let y2 = p.d2 * s + p.w2 * co;
    let p2q2 = (p.rw * sa - x2).hypot(p.rw * ca - y2);
    force * p.rw / p2q2 * (x2 * ca - y2 * sa)
}

/// Torque of tension `force` leaving the hand point toward Q2.
pub fn wrapped_torque(force: f64, p: &PlacementParams, theta: f64) -> Result<f64> {
    let sol = wrapped_geometry(p, theta)?;
    let contact = sol
        .wrap
        .ok_or_else(|| Error::Regime("no wrap contact".into()))?;
    Ok(wrapped_torque_with(force, p, theta, &contact))
}

/// Path of the muscle at `theta`, whichever regime applies.
pub fn muscle_path(p: &PlacementParams, theta: f64) -> Result<GeometrySolution> {
    match classify_regime(p, theta)? {
        Regime::Straight | Regime::Tangent => Ok(GeometrySolution {
            regime: Regime::Straight,
            length: straight_length(p, theta),
            moment_arm: straight_torque(1.0, p, theta),
            wrap: None,
        }),
        Regime::Wrapped => wrapped_geometry(p, theta),
    }
}

/// Unit vectors of the tension at the forearm and hand mounting points
/// (each pointing along the path, away from its endpoint).
pub fn endpoint_directions(
    p: &PlacementParams,
    theta: f64,
    sol: &GeometrySolution,
) -> (Point, Point) {
    let p1 = p.forearm_point();
    let p2 = p.hand_point(theta);
    match &sol.wrap {
        Some(c) => ((c.q1 - p1).normalize(), (c.q2 - p2).normalize()),
        None => {
            let u = (p2 - p1).normalize();
            (u, -u)
        }
    }
}

/// Joint torque of one muscle at `pressure`: path, length, tension, then the
/// regime's torque formula.
pub fn torque(
    spec: &FpamSpec,
    pressure: f64,
    p: &PlacementParams,
    theta: f64,
) -> Result<(f64, GeometrySolution)> {
    let sol = muscle_path(p, theta)?;
    let force = spec.force(pressure, sol.length)?;
    let tau = match sol.wrap {
        Some(ref c) => wrapped_torque_with(force, p, theta, c),
        None => straight_torque(force, p, theta),
    };
    Ok((tau, sol))
}

/// Bisects the straight/wrapped boundary inside `[lo, hi]`, which must
/// bracket a sign change of the chord discriminant.
pub fn find_tangency(p: &PlacementParams, lo: f64, hi: f64) -> Result<f64> {
    let f = |t: f64| chord_discriminant(p, t);
    let (mut a, mut b) = (lo, hi);
    let fa = f(a)?;
    let fb = f(b)?;
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidInput(format!(
            "[{lo}, {hi}] does not bracket a tangency"
        )));
    }
    let a_positive = fa > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m)? > 0.0) == a_positive {
            a = m;
        } else {
            b = m;
        }
        if b - a <= f64::EPSILON * m.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

pub mod presets {
    use super::PlacementParams;
    use crate::units::cm_to_m;

    /// Flexor placement during the torque measurements.
    pub fn measured_flexor() -> PlacementParams {
        PlacementParams::new(
            cm_to_m(19.47),
            cm_to_m(4.93),
            cm_to_m(8.30),
            cm_to_m(3.38),
            cm_to_m(3.99),
        )
    }

    /// Optimised flexor placement, wrist radius 2 cm.
    pub fn optimized_flexor() -> PlacementParams {
        PlacementParams::new(
            cm_to_m(22.0),
            cm_to_m(3.5),
            cm_to_m(9.0),
            cm_to_m(1.5),
            cm_to_m(2.0),
        )
    }

    /// Placements derived at the joint limits (flexor, extensor, ulnar, radial),
    /// paired with their measured fully stretched lengths in cm.
    pub fn rom_placements() -> [(PlacementParams, f64); 4] {
        let p = |d1: f64, w1: f64, d2: f64, w2: f64| {
            PlacementParams::new(
                cm_to_m(d1),
                cm_to_m(w1),
                cm_to_m(d2),
                cm_to_m(w2),
                cm_to_m(2.0),
            )
        };
        [
            (p(20.5, 5.7, 4.0, 4.0), 29.0),
            (p(24.5, 3.7, 5.4, 4.1), 32.0),
            (p(21.1, 7.1, 1.0, 3.4), 28.5),
            (p(21.3, 4.8, 2.3, 6.0), 27.0),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::presets::measured_flexor;
    use super::*;
    use crate::units::{cm_to_m, deg_to_rad};

    /// Independent route: explicit endpoint coordinates and a planar cross
    /// product of O→P2 with the tension vector.
    fn cross_oracle(force: f64, p: &PlacementParams, theta: f64, toward: Point) -> f64 {
        let (s, c) = theta.sin_cos();
        let p2 = Point::new(p.d2 * c - p.w2 * s, p.d2 * s + p.w2 * c);
        let dir = toward - p2;
        let f = dir * (force / dir.norm());
        p2.x * f.y - p2.y * f.x
    }

    #[test]
    fn horizontal_tangent_chord() {
        // y = rw: a = 0, b = rw.
        assert_eq!(line_discriminant(0.0, 0.02, 0.02), 0.0);
        let rw = 0.02;
        // θ = 0 with w1 = w2 = rw gives the chord y = rw.
        let p = PlacementParams::new(0.2, rw, 0.08, rw, rw);
        assert_eq!(classify_regime(&p, 0.0).unwrap(), Regime::Tangent);
    }

    #[test]
    fn far_horizontal_chord_is_straight() {
        assert!(line_discriminant(0.0, 0.04, 0.02) < 0.0);
        let p = PlacementParams::new(0.2, 0.04, 0.08, 0.04, 0.02);
        assert_eq!(classify_regime(&p, 0.0).unwrap(), Regime::Straight);
    }

    #[test]
    fn measured_flexor_wraps_in_extension() {
        let p = measured_flexor();
        // Point-to-segment distance computed by dense sampling of the chord.
        let min_dist = |theta: f64| {
            let p1 = p.forearm_point();
            let p2 = p.hand_point(theta);
            (0..=100_000)
                .map(|k| (p1 + (p2 - p1) * (k as f64 / 100_000.0)).norm())
                .fold(f64::INFINITY, f64::min)
        };
        for deg in [-45.0, 0.0] {
            let theta = deg_to_rad(deg);
            assert!(min_dist(theta) < p.rw);
            assert_eq!(classify_regime(&p, theta).unwrap(), Regime::Wrapped);
        }
        let flexed = deg_to_rad(40.0);
        assert!(min_dist(flexed) > p.rw);
        assert_eq!(classify_regime(&p, flexed).unwrap(), Regime::Straight);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        // P1 = (-d1, w1) equals P2 at θ = π when (d2, w2) = (d1, -w1); use
        // θ = 0 with a reflected placement instead.
        let p = PlacementParams {
            d1: -0.05,
            w1: 0.03,
            d2: 0.05,
            w2: 0.03,
            rw: 0.01,
        };
        assert!(matches!(classify_regime(&p, 0.0), Err(Error::Geometry(_))));
    }

    #[test]
    fn discriminant_agrees_with_printed_form() {
        let p = measured_flexor();
        for deg in [-30.0, -10.0, 0.0, 20.0, 50.0] {
            let t = deg_to_rad(deg);
            let p1 = p.forearm_point();
            let p2 = p.hand_point(t);
            let a = (p2.y - p1.y) / (p2.x - p1.x);
            let b = p1.y - a * p1.x;
            assert!(b > 0.0, "{deg}: chord must pass above the centre");
            let d = line_discriminant(a, b, p.rw);
            let ours = chord_discriminant(&p, t).unwrap();
            assert_eq!(d > 0.0, ours > 0.0, "{deg}");
            let scaled = d / (4.0 * (1.0 + a * a) * p.rw * p.rw);
            assert!((scaled - ours).abs() < 1e-9, "{deg}: {scaled} vs {ours}");
        }
    }

    #[test]
    fn chord_past_the_centre_still_wraps() {
        // At -85° the chord passes below O by more than rw: the printed
        // discriminant reports no intersection, but the muscle cannot have
        // crossed the wrist.
        let p = measured_flexor();
        let t = deg_to_rad(-85.0);
        let p1 = p.forearm_point();
        let p2 = p.hand_point(t);
        let a = (p2.y - p1.y) / (p2.x - p1.x);
        let b = p1.y - a * p1.x;
        assert!(line_discriminant(a, b, p.rw) < 0.0 && b < 0.0);
        assert!(chord_discriminant(&p, t).unwrap() > 0.0);
        assert_eq!(classify_regime(&p, t).unwrap(), Regime::Wrapped);
    }

    #[test]
    fn straight_length_at_zero() {
        let p = measured_flexor();
        let l = straight_length(&p, 0.0);
        let oracle = (p.forearm_point() - Point::new(p.d2, p.w2)).norm();
        assert!((l - oracle).abs() < 1e-15);
        assert!((l - cm_to_m(27.81)).abs() < cm_to_m(0.005), "{l}");
    }

    #[test]
    fn hand_point_at_origin() {
        let p = PlacementParams {
            d2: 0.0,
            w2: 0.0,
            ..measured_flexor()
        };
        for deg in [-80.0, 0.0, 35.0] {
            let l = straight_length(&p, deg_to_rad(deg));
            assert!((l - p.r1()).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_offsets_collinear() {
        let p = PlacementParams::new(0.2, 0.03, 0.08, 0.03, 0.02);
        assert!((straight_length(&p, 0.0) - 0.28).abs() < 1e-15);
    }

    #[test]
    fn straight_torque_at_30_deg() {
        let p = measured_flexor();
        let theta = deg_to_rad(30.0);
        let tau = straight_torque(50.0, &p, theta);
        let oracle = cross_oracle(50.0, &p, theta, p.forearm_point());
        assert!((tau - oracle).abs() < 1e-12 * oracle.abs());
        assert!((tau - 3.29).abs() < 0.005, "{tau}");
        assert_eq!(straight_torque(0.0, &p, theta), 0.0);
    }

    #[test]
    fn zero_offsets_zero_torque() {
        let p = PlacementParams {
            w1: 0.0,
            w2: 0.0,
            ..measured_flexor()
        };
        assert_eq!(straight_torque(100.0, &p, 0.0), 0.0);
    }

    #[test]
    fn wrapped_torque_matches_oracle() {
        let p = measured_flexor();
        let theta = deg_to_rad(-45.0);
        let sol = wrapped_geometry(&p, theta).unwrap();
        let c = sol.wrap.unwrap();
        let tau = wrapped_torque(100.0, &p, theta).unwrap();
        let oracle = cross_oracle(100.0, &p, theta, c.q2);
        assert!((tau - oracle).abs() < 1e-9 * oracle.abs());
        assert!((tau - 100.0 * p.rw).abs() < 1e-9 * tau.abs());
        assert_eq!(wrapped_torque(0.0, &p, theta).unwrap(), 0.0);
        // Both segments are tangent: OQ ⟂ QP.
        assert!(c.q1.dot(&(p.forearm_point() - c.q1)).abs() < 1e-12);
        assert!(c.q2.dot(&(p.hand_point(theta) - c.q2)).abs() < 1e-12);
    }

    /// Convex hull (counter-clockwise, monotone chain) of a point set.
    fn hull(mut pts: Vec<Point>) -> Vec<Point> {
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let turn = |o: &Point, a: &Point, b: &Point| cross(&(a - o), &(b - o));
        let mut lower: Vec<Point> = Vec::new();
        for p in &pts {
            while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(*p);
        }
        let mut upper: Vec<Point> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(*p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        lower
    }

    /// Shortest path from the hand point to the forearm point passing over
    /// the top of a finely inscribed polygon: the counter-clockwise hull
    /// chain from P2 to P1.
    fn hull_path_length(p: &PlacementParams, theta: f64) -> f64 {
        let n = 400_000;
        let p1 = p.forearm_point();
        let p2 = p.hand_point(theta);
        let mut pts: Vec<Point> = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                Point::new(p.rw * a.cos(), p.rw * a.sin())
            })
            .collect();
        pts.push(p1);
        pts.push(p2);
        let h = hull(pts);
        let start = h.iter().position(|q| *q == p2).unwrap();
        let mut len = 0.0;
        let mut i = start;
        loop {
            let j = (i + 1) % h.len();
            len += (h[j] - h[i]).norm();
            if h[j] == p1 {
                return len;
            }
            i = j;
        }
    }

    #[test]
    fn wrapped_length_matches_shortest_path() {
        let p = measured_flexor();
        for deg in [-67.5, -45.0, 0.0] {
            let theta = deg_to_rad(deg);
            let sol = wrapped_geometry(&p, theta).unwrap();
            let oracle = hull_path_length(&p, theta);
            assert!((sol.length - oracle).abs() < 1e-7, "{deg}: {} vs {oracle}", sol.length);
            assert!(sol.length > straight_length(&p, theta));
        }
    }

    #[test]
    fn dispatched_path_tends_to_chord_as_radius_vanishes() {
        let theta = deg_to_rad(40.0);
        for rw in [1e-3, 1e-5, 1e-7] {
            let p = measured_flexor().with_rw(rw);
            let sol = muscle_path(&p, theta).unwrap();
            assert_eq!(sol.regime, Regime::Straight);
            assert_eq!(sol.length, straight_length(&p, theta));
        }
    }

    #[test]
    fn forced_wrap_around_a_vanishing_circle_passes_through_the_centre() {
        let theta = deg_to_rad(-45.0);
        for rw in [1e-3, 1e-4, 1e-5] {
            let p = measured_flexor().with_rw(rw);
            let sol = wrapped_geometry(&p, theta).unwrap();
            assert!((sol.length - (p.r1() + p.r2())).abs() < 5.0 * rw);
        }
    }

    #[test]
    fn continuity_at_tangency() {
        let p = measured_flexor();
        let t = find_tangency(&p, 0.0, deg_to_rad(40.0)).unwrap();
        let wrapped = wrapped_geometry(&p, t).unwrap();
        assert!(wrapped.wrap.unwrap().phi.abs() < 1e-6);
        assert!((wrapped.length - straight_length(&p, t)).abs() < 1e-9);
        let f = 80.0;
        let ts = straight_torque(f, &p, t);
        let tw = wrapped_torque(f, &p, t).unwrap();
        assert!((ts - tw).abs() < 1e-6);
    }

    #[test]
    fn wrapped_geometry_rejects_straight_configuration() {
        let p = measured_flexor();
        assert!(matches!(
            wrapped_geometry(&p, deg_to_rad(60.0)),
            Err(Error::Regime(_))
        ));
        let inside = p.with_rw(0.095);
        assert!(matches!(
            wrapped_geometry(&inside, 0.0),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn mirrored_muscle_pulls_the_other_way() {
        let spec = crate::fpam::presets::design_muscle();
        let p = super::presets::optimized_flexor();
        let pressure = 100e3;
        let theta = deg_to_rad(10.0);
        let (local, _) = torque(
            &spec,
            pressure,
            &p,
            PullDirection::Negative.local_angle(theta),
        )
        .unwrap();
        let joint = PullDirection::Negative.joint_torque(local);
        assert!(joint < 0.0);
        let (pos, _) = torque(
            &spec,
            pressure,
            &p,
            PullDirection::Positive.local_angle(-theta),
        )
        .unwrap();
        assert!((pos + joint).abs() < 1e-12);
    }

    #[test]
    fn placement_json_keys() {
        let json = serde_json::to_value(measured_flexor()).unwrap();
        for key in ["d1_m", "w1_m", "d2_m", "w2_m", "rw_m"] {
            assert!(json.get(key).is_some());
        }
    }
}
