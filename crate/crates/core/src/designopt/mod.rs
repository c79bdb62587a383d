//! Placement optimisation against a reference torque profile, and the
//! auxiliary searches built on the same torque model: minimal pressure,
//! wrist radius and range of motion.

mod spline;

pub use spline::{interpolate_reference, NaturalCubicSpline, ReferenceTorque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpam::FpamSpec;
use crate::mountstretch::{stretched_torque, StretchMode, StretchModel};
use crate::optim::{
    bisect_predicate, multistart, seed_grid, BoundedNelderMead, NelderMeadOptions, SeedOutcome,
};
use crate::units::{deg_to_rad, rad_to_deg};
use crate::wristgeom::{muscle_path, torque, PlacementParams, Regime};

/// Fully stretched length that makes the muscle exactly uncontracted at
/// `theta_max_stretch`.
pub fn size_initial_length(p: &PlacementParams, theta_max_stretch: f64) -> Result<f64> {
    Ok(muscle_path(p, theta_max_stretch)?.length)
}

/// Quantities held fixed while the placement is optimised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignContext {
    /// Muscle parameters; `l0` is replaced by the sized length for every candidate.
    pub fpam: FpamSpec,
    pub pressure_pa: f64,
    pub rw_m: f64,
    /// Joint angle at which the muscle is fully stretched.
    pub theta_sizing_deg: f64,
}

impl DesignContext {
    pub fn placement(&self, x: &[f64]) -> PlacementParams {
        PlacementParams::new(x[0], x[1], x[2], x[3], self.rw_m)
    }

    /// Muscle spec sized for placement `p`.
    pub fn sized_spec(&self, p: &PlacementParams) -> Result<FpamSpec> {
        let mut spec = self.fpam.clone();
        spec.l0 = size_initial_length(p, deg_to_rad(self.theta_sizing_deg))?;
        Ok(spec)
    }

    /// Modelled torque of placement `p` at every angle of `thetas`.
    pub fn torque_curve(
        &self,
        p: &PlacementParams,
        thetas: impl IntoIterator<Item = f64>,
    ) -> Result<Vec<f64>> {
        p.validate()?;
        let spec = self.sized_spec(p)?;
        thetas
            .into_iter()
            .map(|t| torque(&spec, self.pressure_pa, p, t).map(|(tau, _)| tau))
            .collect()
    }
}

/// Sum over the reference grid of the torque deficit `max(0, τ_ref - τ_mod)`.
/// Placements whose torque cannot be evaluated score `+∞`.
pub fn objective(x: &PlacementParams, reference: &ReferenceTorque, ctx: &DesignContext) -> f64 {
    match ctx.torque_curve(x, reference.grid.iter().map(|g| g.0)) {
        Ok(curve) => deficit(reference, &curve),
        Err(_) => f64::INFINITY,
    }
}

/// `Σ max(0, τ_ref - τ_mod)` over aligned samples.
pub fn deficit(reference: &ReferenceTorque, modeled: &[f64]) -> f64 {
    reference
        .grid
        .iter()
        .zip(modeled)
        .map(|(&(_, r), &m)| (r - m).max(0.0))
        .sum()
}

/// Lower/upper bound of one placement parameter, m.
pub type Bound = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementBounds {
    #[serde(rename = "d1_m")]
    pub d1: Bound,
    #[serde(rename = "w1_m")]
    pub w1: Bound,
    #[serde(rename = "d2_m")]
    pub d2: Bound,
    #[serde(rename = "w2_m")]
    pub w2: Bound,
}

impl PlacementBounds {
    pub fn lower(&self) -> Vec<f64> {
        vec![self.d1.0, self.w1.0, self.d2.0, self.w2.0]
    }

    pub fn upper(&self) -> Vec<f64> {
        vec![self.d1.1, self.w1.1, self.d2.1, self.w2.1]
    }

    pub fn contains(&self, p: &PlacementParams) -> bool {
        let inside = |v: f64, b: Bound| v >= b.0 && v <= b.1;
        inside(p.d1, self.d1)
            && inside(p.w1, self.w1)
            && inside(p.d2, self.d2)
            && inside(p.w2, self.w2)
    }
}

/// Seed spacing per placement parameter, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementGrid {
    #[serde(rename = "d1_m")]
    pub d1: f64,
    #[serde(rename = "w1_m")]
    pub w1: f64,
    #[serde(rename = "d2_m")]
    pub d2: f64,
    #[serde(rename = "w2_m")]
    pub w2: f64,
}

impl PlacementGrid {
    pub fn steps(&self) -> Vec<f64> {
        vec![self.d1, self.w1, self.d2, self.w2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub bounds: PlacementBounds,
    pub grid: PlacementGrid,
    #[serde(flatten)]
    pub context: DesignContext,
    #[serde(default)]
    pub optimizer: NelderMeadOptions,
}

impl OptimizationProblem {
    pub fn validate(&self) -> Result<()> {
        for ((lo, hi), step) in self
            .bounds
            .lower()
            .iter()
            .zip(self.bounds.upper())
            .zip(self.grid.steps())
        {
            if !(lo < &hi) {
                return Err(Error::InvalidInput(format!("bound [{lo}, {hi}] is empty")));
            }
            if !(step > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "grid resolution {step} must be > 0"
                )));
            }
        }
        if !(self.context.rw_m > 0.0) {
            return Err(Error::InvalidInput("rw_m must be > 0".into()));
        }
        if !(self.context.pressure_pa >= 0.0) {
            return Err(Error::InvalidInput("pressure_pa must be >= 0".into()));
        }
        Ok(())
    }

    pub fn with_pressure(&self, pressure_pa: f64) -> Self {
        let mut out = self.clone();
        out.context.pressure_pa = pressure_pa;
        out
    }

    pub fn seeds(&self) -> Result<Vec<Vec<f64>>> {
        seed_grid(
            &self.bounds.lower(),
            &self.bounds.upper(),
            &self.grid.steps(),
        )
    }

    /// Default flexor problem: forearm/hand bounds in cm as optimised for the
    /// flexor, wrist radius 2 cm, sizing at 65.4° extension, and a
    /// 3×2×3×2 seed grid.
    pub fn flexor_design(fpam: FpamSpec, pressure_pa: f64) -> Self {
        use crate::units::cm_to_m as cm;
        Self {
            bounds: PlacementBounds {
                d1: (cm(2.0), cm(22.0)),
                w1: (cm(3.5), cm(5.0)),
                d2: (cm(1.5), cm(9.0)),
                w2: (cm(1.5), cm(3.5)),
            },
            grid: PlacementGrid {
                d1: cm(10.0),
                w1: cm(1.5),
                d2: cm(3.75),
                w2: cm(2.0),
            },
            context: DesignContext {
                fpam,
                pressure_pa,
                rw_m: cm(2.0),
                theta_sizing_deg: -65.4,
            },
            optimizer: NelderMeadOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_params: PlacementParams,
    pub objective_value: f64,
    /// Sized fully stretched length of the best placement.
    pub l0_m: f64,
    pub trace: Vec<SeedOutcome>,
}

/// Multi-start bounded Nelder–Mead over (d1, w1, d2, w2), one start per grid seed.
pub fn optimize_placement(
    problem: &OptimizationProblem,
    reference: &ReferenceTorque,
) -> Result<OptimizationResult> {
    problem.validate()?;
    let ctx = &problem.context;
    let solver = BoundedNelderMead::new(
        problem.bounds.lower(),
        problem.bounds.upper(),
        problem.optimizer,
    )?;
    let seeds = problem.seeds()?;
    let f = |x: &[f64]| objective(&ctx.placement(x), reference, ctx);
    let run = multistart(&solver, f, &seeds)?;
    let best = run.best();
    if !best.value.is_finite() {
        return Err(Error::Infeasible(
            "every seed produced infeasible geometry".into(),
        ));
    }
    let best_params = ctx.placement(&best.x);
    let l0_m = size_initial_length(&best_params, deg_to_rad(ctx.theta_sizing_deg))?;
    Ok(OptimizationResult {
        best_params,
        objective_value: best.value,
        l0_m,
        trace: run.outcomes,
    })
}

/// How [`find_min_pressure`] walks the pressure axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum PressureSearch {
    /// Bisection to `resolution_pa`; assumes feasibility is monotone in pressure.
    Bisection { resolution_pa: f64 },
    /// Upward scan in `step_pa` increments, for non-monotone feasibility.
    Grid { step_pa: f64 },
}

impl Default for PressureSearch {
    fn default() -> Self {
        PressureSearch::Bisection {
            resolution_pa: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinPressure {
    pub pressure_pa: f64,
    pub result: OptimizationResult,
}

/// Smallest pressure in `[p_min, p_max]` at which the optimised placement
/// covers the reference torque everywhere (objective 0).
pub fn find_min_pressure(
    problem: &OptimizationProblem,
    reference: &ReferenceTorque,
    p_min: f64,
    p_max: f64,
    search: PressureSearch,
) -> Result<MinPressure> {
    if !(p_min >= 0.0 && p_min < p_max) {
        return Err(Error::InvalidInput(format!(
            "pressure range [{p_min}, {p_max}] is invalid"
        )));
    }
    let solve = |p: f64| optimize_placement(&problem.with_pressure(p), reference);
    let feasible = |r: &OptimizationResult| r.objective_value <= 0.0;

    let top = solve(p_max)?;
    if !feasible(&top) {
        return Err(Error::Infeasible(format!(
            "reference torque is not reachable even at {p_max} Pa (deficit {})",
            top.objective_value
        )));
    }
    let bottom = solve(p_min)?;
    if feasible(&bottom) {
        return Ok(MinPressure {
            pressure_pa: p_min,
            result: bottom,
        });
    }
    match search {
        PressureSearch::Bisection { resolution_pa } => {
            let mut failure = None;
            let (_, hi) = bisect_predicate(p_min, p_max, resolution_pa, |p| match solve(p) {
                Ok(r) => feasible(&r),
                Err(e) => {
                    failure.get_or_insert(e);
                    false
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            let result = if hi == p_max { top } else { solve(hi)? };
            Ok(MinPressure {
                pressure_pa: hi,
                result,
            })
        }
        PressureSearch::Grid { step_pa } => {
            if !(step_pa > 0.0) {
                return Err(Error::InvalidInput("grid step must be > 0".into()));
            }
            let mut k = 1usize;
            loop {
                let p = (p_min + step_pa * k as f64).min(p_max);
                let r = if p == p_max { top.clone() } else { solve(p)? };
                if feasible(&r) {
                    return Ok(MinPressure {
                        pressure_pa: p,
                        result: r,
                    });
                }
                k += 1;
            }
        }
    }
}

/// One measured torque sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorqueSample {
    pub pressure_pa: f64,
    pub theta: f64,
    pub torque: f64,
}

/// Search range for [`fit_wrist_radius`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusScan {
    pub min_m: f64,
    pub max_m: f64,
    pub step_m: f64,
}

impl Default for RadiusScan {
    fn default() -> Self {
        Self {
            min_m: 0.01,
            max_m: 0.07,
            step_m: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusFit {
    pub rw_m: f64,
    /// RMS error of straight-regime samples plus that of wrapped-regime samples.
    pub cost: f64,
}

fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        (v.iter().map(|r| r * r).sum::<f64>() / v.len() as f64).sqrt()
    }
}

/// Modelled torque of one muscle, with or without endpoint stretching.
pub fn model_torque(
    spec: &FpamSpec,
    pressure: f64,
    p: &PlacementParams,
    stretch: Option<&StretchModel>,
    theta: f64,
) -> Result<(f64, Regime)> {
    match stretch {
        Some(m) => {
            let s = stretched_torque(spec, pressure, p, m, theta, StretchMode::SinglePass)?;
            Ok((s.torque, s.solution.regime))
        }
        None => {
            let (tau, sol) = torque(spec, pressure, p, theta)?;
            Ok((tau, sol.regime))
        }
    }
}

/// Exhaustive scan of the wrist radius minimising the summed per-regime RMS
/// error between measured and modelled torque. Ties go to the smaller radius.
pub fn fit_wrist_radius(
    measured: &[TorqueSample],
    spec: &FpamSpec,
    placement: &PlacementParams,
    stretch: Option<&StretchModel>,
    scan: RadiusScan,
) -> Result<RadiusFit> {
    if measured.is_empty() {
        return Err(Error::InvalidInput("no torque measurements".into()));
    }
    if !(scan.step_m > 0.0 && scan.min_m > 0.0 && scan.max_m >= scan.min_m) {
        return Err(Error::InvalidInput(format!("invalid radius scan {scan:?}")));
    }
    let count = ((scan.max_m - scan.min_m) / scan.step_m + 1e-9).floor() as usize;
    let cost_at = |rw: f64| -> f64 {
        let p = placement.with_rw(rw);
        let mut straight = Vec::new();
        let mut wrapped = Vec::new();
        for s in measured {
            match model_torque(spec, s.pressure_pa, &p, stretch, s.theta) {
                Ok((tau, Regime::Wrapped)) => wrapped.push(s.torque - tau),
                Ok((tau, _)) => straight.push(s.torque - tau),
                Err(_) => return f64::INFINITY,
            }
        }
        rms(&straight) + rms(&wrapped)
    };
    let mut best: Option<RadiusFit> = None;
    for k in 0..=count {
        let rw = scan.min_m + scan.step_m * k as f64;
        let cost = cost_at(rw);
        if best.as_ref().map_or(true, |b| cost < b.cost) {
            best = Some(RadiusFit { rw_m: rw, cost });
        }
    }
    match best {
        Some(b) if b.cost.is_finite() => Ok(b),
        _ => Err(Error::Infeasible(
            "no radius in the scan range gives a valid geometry".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RomOptions {
    pub max_deg: f64,
    pub scan_step_deg: f64,
    pub tol_deg: f64,
}

impl Default for RomOptions {
    fn default() -> Self {
        Self {
            max_deg: 90.0,
            scan_step_deg: 0.25,
            tol_deg: 0.01,
        }
    }
}

/// Joint limit predicted for one muscle: the smallest positive angle at
/// which its torque reaches zero.
pub fn predict_rom(
    spec: &FpamSpec,
    pressure: f64,
    placement: &PlacementParams,
    stretch: Option<&StretchModel>,
    options: RomOptions,
) -> Result<f64> {
    let tau =
        |deg: f64| model_torque(spec, pressure, placement, stretch, deg_to_rad(deg)).map(|t| t.0);
    let start = tau(0.0)?;
    if !(start > 0.0) {
        return Err(Error::NoCrossing(format!(
            "torque at 0 deg is {start} N·m; the muscle must pull at the neutral angle"
        )));
    }
    let steps = (options.max_deg / options.scan_step_deg).ceil() as usize;
    let mut prev = 0.0;
    for k in 1..=steps {
        let deg = (k as f64 * options.scan_step_deg).min(options.max_deg);
        if tau(deg)? <= 0.0 {
            let mut failure = None;
            let (lo, hi) = bisect_predicate(prev, deg, options.tol_deg, |d| match tau(d) {
                Ok(t) => t <= 0.0,
                Err(e) => {
                    failure.get_or_insert(e);
                    true
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            return Ok(deg_to_rad(0.5 * (lo + hi)));
        }
        prev = deg;
    }
    Err(Error::NoCrossing(format!(
        "torque stays positive up to {} deg",
        rad_to_deg(deg_to_rad(options.max_deg))
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpam::presets::{design_muscle, flexor_tensile};
    use crate::units::{cm_to_m, kpa_to_pa};
    use crate::wristgeom::presets::{measured_flexor, optimized_flexor};
    use crate::wristgeom::straight_length;

    fn ctx(pressure_kpa: f64) -> DesignContext {
        DesignContext {
            fpam: design_muscle(),
            pressure_pa: kpa_to_pa(pressure_kpa),
            rw_m: cm_to_m(2.0),
            theta_sizing_deg: -65.4,
        }
    }

    fn grid_thetas(n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| deg_to_rad(-67.5 + 157.5 * k as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn sizing_makes_muscle_uncontracted() {
        let p = optimized_flexor();
        let c = ctx(137.0);
        let spec = c.sized_spec(&p).unwrap();
        let sol = muscle_path(&p, deg_to_rad(-65.4)).unwrap();
        assert_eq!(spec.contraction(sol.length), 0.0);
    }

    #[test]
    fn sizing_at_vanishing_radius_is_chord() {
        let p = measured_flexor().with_rw(1e-9);
        let t = deg_to_rad(-20.0);
        let l0 = size_initial_length(&p, t).unwrap();
        assert!((l0 - straight_length(&p, t)).abs() < 1e-8);
    }

    #[test]
    fn sizing_agrees_across_regimes_at_tangency() {
        let p = measured_flexor();
        let t = crate::wristgeom::find_tangency(&p, 0.0, deg_to_rad(40.0)).unwrap();
        let l0 = size_initial_length(&p, t).unwrap();
        let wrapped = crate::wristgeom::wrapped_geometry(&p, t).unwrap().length;
        assert!((l0 - straight_length(&p, t)).abs() < 1e-9);
        assert!((l0 - wrapped).abs() < 1e-9);
    }

    #[test]
    fn objective_zero_when_dominated() {
        let c = ctx(137.0);
        let p = optimized_flexor();
        let thetas = grid_thetas(50);
        let curve = c.torque_curve(&p, thetas.clone()).unwrap();
        let reference = ReferenceTorque::from_grid(
            thetas
                .iter()
                .zip(&curve)
                .map(|(&t, &m)| (t, m - 0.1))
                .collect(),
        );
        assert_eq!(objective(&p, &reference, &c), 0.0);
    }

    #[test]
    fn objective_of_zero_model_is_positive_reference_sum() {
        let reference = ReferenceTorque::from_grid(vec![(0.0, 1.0), (0.1, -2.0), (0.2, 0.5)]);
        assert_eq!(deficit(&reference, &[0.0, 0.0, 0.0]), 1.5);
    }

    #[test]
    fn objective_counts_only_the_gap() {
        let c = ctx(137.0);
        let p = optimized_flexor();
        let thetas = grid_thetas(140);
        let curve = c.torque_curve(&p, thetas.clone()).unwrap();
        // Below the curve except on samples 40..60 where it exceeds by a known gap.
        let gap = |k: usize| {
            if (40..60).contains(&k) {
                0.01 * (k - 39) as f64
            } else {
                -0.5
            }
        };
        let reference = ReferenceTorque::from_grid(
            thetas
                .iter()
                .zip(&curve)
                .enumerate()
                .map(|(k, (&t, &m))| (t, m + gap(k)))
                .collect(),
        );
        let expected: f64 = (40..60).map(|k| 0.01 * (k - 39) as f64).sum();
        assert!((objective(&p, &reference, &c) - expected).abs() < 1e-9);
    }

    #[test]
    fn infeasible_geometry_scores_infinity() {
        let c = DesignContext {
            rw_m: 0.5,
            ..ctx(137.0)
        };
        let reference = ReferenceTorque::from_grid(vec![(0.0, 1.0)]);
        assert_eq!(
            objective(&optimized_flexor().with_rw(0.5), &reference, &c),
            f64::INFINITY
        );
    }

    #[test]
    fn rom_from_planted_zero() {
        let mut spec = flexor_tensile();
        let p = measured_flexor();
        let planted = deg_to_rad(35.0);
        let p137 = kpa_to_pa(137.0);
        spec.l0 = straight_length(&p, planted) / (1.0 - spec.eps_max_at(p137).unwrap());
        let rom = predict_rom(&spec, p137, &p, None, RomOptions::default()).unwrap();
        assert!(
            (rad_to_deg(rom) - 35.0).abs() <= 0.01,
            "{}",
            rad_to_deg(rom)
        );
    }

    #[test]
    fn rom_requires_pull_at_neutral() {
        let mut spec = flexor_tensile();
        spec.l0 = 0.5;
        let r = predict_rom(&spec, 0.0, &measured_flexor(), None, RomOptions::default());
        assert!(matches!(r, Err(Error::NoCrossing(_))));
    }

    #[test]
    fn wrist_radius_single_sample() {
        let spec = {
            let mut s = flexor_tensile();
            s.l0 = cm_to_m(32.0);
            s
        };
        let planted = measured_flexor().with_rw(cm_to_m(2.5));
        let theta = deg_to_rad(-50.0);
        let p = kpa_to_pa(137.0);
        let (tau, regime) = model_torque(&spec, p, &planted, None, theta).unwrap();
        assert_eq!(regime, Regime::Wrapped);
        let fit = fit_wrist_radius(
            &[TorqueSample {
                pressure_pa: p,
                theta,
                torque: tau,
            }],
            &spec,
            &planted,
            None,
            RadiusScan::default(),
        )
        .unwrap();
        assert!((fit.rw_m - cm_to_m(2.5)).abs() < 1e-12, "{}", fit.rw_m);
    }
}
