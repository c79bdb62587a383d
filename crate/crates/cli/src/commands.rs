use std::path::Path;

use fpam_exo::config::{ExosuitConfig, MuscleName};
use fpam_exo::control::{
    run_tracking, sinusoids, staircase, SinusoidSpec, TrackingOptions, TrajectoryPoint,
};
use fpam_exo::designopt::{
    find_min_pressure, fit_wrist_radius, interpolate_reference, model_torque, optimize_placement, predict_rom,
    OptimizationProblem, OptimizationResult, PressureSearch, RadiusScan, ReferenceTorque, RomOptions, TorqueSample,
};
use fpam_exo::error::Error as ModelError;
use fpam_exo::fpam::presets::design_muscle;
use fpam_exo::fpam::{fit_force_curves, identify_spec, Extrapolation, Fabric, FitOptions, MeasuredDims, TensileDataset};
use fpam_exo::mountstretch::{fit_coefficients, presets as stretch_presets, StretchRecord};
use fpam_exo::units::{deg_to_rad, kpa_to_pa, rad_to_deg, UnitSystem};
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::io::{num, read_json, read_table, Output};
use crate::{Command, Globals, OutputArg, TrajectoryKind};

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    units: UnitSystem,
    seed: u64,
    inputs: Vec<String>,
    summary: serde_json::Value,
}

struct Ctx<'a> {
    g: &'a Globals,
    command: &'static str,
    out: Output,
    inputs: Vec<String>,
}

impl Ctx<'_> {
    fn log(&self, msg: impl AsRef<str>) {
        if self.g.verbose {
            eprintln!("[{}] {}", self.command, msg.as_ref());
        }
    }

    fn finish(&self, summary: serde_json::Value) -> Result<()> {
        self.log(summary.to_string());
        self.out.sidecar(&Meta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            units: self.g.units,
            seed: self.g.seed,
            inputs: self.inputs.clone(),
            summary,
        })
    }

    fn u(&self) -> UnitSystem {
        self.g.units
    }
}

fn suffix(label: &str) -> String {
    label.to_ascii_lowercase()
}

fn angle_col(u: UnitSystem, base: &str) -> String {
    format!("{base}_{}", suffix(u.angle_label()))
}

fn length_col(u: UnitSystem, base: &str) -> String {
    format!("{base}_{}", suffix(u.length_label()))
}

fn pressure_col(u: UnitSystem, base: &str) -> String {
    format!("{base}_{}", suffix(u.pressure_label()))
}

/// Degrees (the controller's native unit) to the output unit.
fn deg_out(u: UnitSystem, deg: f64) -> f64 {
    match u {
        UnitSystem::Paper => deg,
        UnitSystem::Si => deg_to_rad(deg),
    }
}

fn deg_in(u: UnitSystem, v: f64) -> f64 {
    match u {
        UnitSystem::Paper => v,
        UnitSystem::Si => rad_to_deg(v),
    }
}

fn kpa_out(u: UnitSystem, kpa: f64) -> f64 {
    match u {
        UnitSystem::Paper => kpa,
        UnitSystem::Si => kpa_to_pa(kpa),
    }
}

fn load_config(path: &Path) -> Result<ExosuitConfig> {
    let cfg: ExosuitConfig = read_json(path)?;
    cfg.validate()?;
    Ok(cfg)
}

fn muscle_name(s: &str) -> Result<MuscleName> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("unknown muscle {s:?}; expected flexor, extensor, ulnar or radial")))
}

/// Inclusive `start:stop:step` sweep.
fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("range {s:?} must be start:stop:step")))?;
    let [start, stop, step] = parts[..] else {
        return Err(CliError::Usage(format!("range {s:?} must be start:stop:step")));
    };
    if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
        return Err(CliError::Usage(format!("range {s:?} needs step > 0 and stop >= start")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + step * k as f64).collect())
}

fn read_reference(u: UnitSystem, path: &Path, resample: Option<usize>) -> Result<ReferenceTorque> {
    let rows = read_table(path, &[&angle_col(u, "theta"), "tau_nm"])?;
    let raw: Vec<(f64, f64)> = rows.iter().map(|r| (u.angle_to_si(r[0]), r[1])).collect();
    if raw.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(CliError::Usage(format!(
            "{}: angles must be strictly increasing",
            path.display()
        )));
    }
    match resample {
        Some(n) => Ok(interpolate_reference(&raw, n)?),
        None => Ok(ReferenceTorque::from_grid(raw)),
    }
}

fn load_problem(path: &Path) -> Result<OptimizationProblem> {
    let problem: OptimizationProblem = read_json(path)?;
    problem.validate()?;
    Ok(problem)
}

fn placement_summary(u: UnitSystem, r: &OptimizationResult) -> serde_json::Value {
    let l = |v: f64| u.length_from_si(v);
    let p = &r.best_params;
    json!({
        "objective": r.objective_value,
        length_col(u, "d1"): l(p.d1),
        length_col(u, "w1"): l(p.w1),
        length_col(u, "d2"): l(p.d2),
        length_col(u, "w2"): l(p.w2),
        length_col(u, "l0"): l(r.l0_m),
        "seeds": r.trace.len(),
    })
}

pub fn run(g: &Globals, command: Command) -> Result<()> {
    let ctx = |name: &'static str, out: OutputArg, inputs: &[&Path]| Ctx {
        g,
        command: name,
        out: Output { path: out.output },
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
    };
    match command {
        Command::FitFpam {
            input,
            l0,
            r0,
            degree,
            window,
            clamp,
            out,
        } => fit_fpam(&ctx("fit-fpam", out, &[&input]), &input, l0, r0, degree, window, clamp),
        Command::TorqueProfile {
            config,
            muscle,
            pressure,
            theta_range,
            stretch,
            out,
        } => torque_profile(
            &ctx("torque-profile", out, &[&config]),
            &config,
            &muscle,
            pressure,
            theta_range.as_deref(),
            stretch,
        ),
        Command::OptimizePlacement {
            problem,
            reference,
            resample,
            trace,
            out,
        } => {
            let c = ctx("optimize-placement", out, &[&problem, &reference]);
            let problem = load_problem(&problem)?;
            let reference = read_reference(c.u(), &reference, resample)?;
            c.log(format!("{} seeds", problem.seeds()?.len()));
            let result = optimize_placement(&problem, &reference)?;
            c.out.json(&result)?;
            if let Some(path) = trace {
                write_trace(c.u(), &Output { path: Some(path) }, &result)?;
            }
            c.finish(placement_summary(c.u(), &result))
        }
        Command::FindMinPressure {
            problem,
            reference,
            resample,
            p_min,
            p_max,
            resolution,
            grid_step,
            out,
        } => {
            let c = ctx("find-min-pressure", out, &[&problem, &reference]);
            let u = c.u();
            let problem = load_problem(&problem)?;
            let reference = read_reference(u, &reference, resample)?;
            let search = match (grid_step, resolution) {
                (Some(step), _) => PressureSearch::Grid {
                    step_pa: u.pressure_to_si(step),
                },
                (None, Some(res)) => PressureSearch::Bisection {
                    resolution_pa: u.pressure_to_si(res),
                },
                (None, None) => PressureSearch::default(),
            };
            let found = find_min_pressure(
                &problem,
                &reference,
                u.pressure_to_si(p_min),
                u.pressure_to_si(p_max),
                search,
            )?;
            c.out.json(&json!({
                "pressure_pa": found.pressure_pa,
                "search": search,
                "result": found.result,
            }))?;
            let mut summary = placement_summary(u, &found.result);
            summary[pressure_col(u, "pressure")] = json!(u.pressure_from_si(found.pressure_pa));
            c.finish(summary)
        }
        Command::FitStretch { input, out } => {
            let c = ctx("fit-stretch", out, &[&input]);
            let u = c.u();
            let rows = read_table(&input, &["force_n", &length_col(u, "dx1"), &length_col(u, "dx2")])?;
            let records: Vec<StretchRecord> = rows
                .iter()
                .map(|r| StretchRecord {
                    force_n: r[0],
                    dx1_m: u.length_to_si(r[1]),
                    dx2_m: u.length_to_si(r[2]),
                })
                .collect();
            let model = fit_coefficients(&records)?;
            c.out.json(&model)?;
            c.finish(json!({ "records": records.len(), "k1_n_per_m2": model.k1, "k2_n_per_m2": model.k2 }))
        }
        Command::FitWristRadius {
            input,
            config,
            muscle,
            stretch,
            rw_min,
            rw_max,
            rw_step,
            out,
        } => {
            let c = ctx("fit-wrist-radius", out, &[&input, &config]);
            let u = c.u();
            let cfg = load_config(&config)?;
            let m = cfg.muscle(muscle_name(&muscle)?)?;
            let rows = read_table(&input, &[&pressure_col(u, "pressure"), &angle_col(u, "theta"), "tau_nm"])?;
            let samples: Vec<TorqueSample> = rows
                .iter()
                .map(|r| TorqueSample {
                    pressure_pa: u.pressure_to_si(r[0]),
                    theta: u.angle_to_si(r[1]),
                    torque: r[2],
                })
                .collect();
            let d = RadiusScan::default();
            let scan = RadiusScan {
                min_m: rw_min.map_or(d.min_m, |v| u.length_to_si(v)),
                max_m: rw_max.map_or(d.max_m, |v| u.length_to_si(v)),
                step_m: rw_step.map_or(d.step_m, |v| u.length_to_si(v)),
            };
            let model = stretch.then(|| m.stretch.unwrap_or_else(stretch_presets::measured_flexor));
            let fit = fit_wrist_radius(&samples, &m.spec, &m.placement, model.as_ref(), scan)?;
            let report = json!({
                length_col(u, "rw"): u.length_from_si(fit.rw_m),
                "cost_nm": fit.cost,
                "samples": samples.len(),
                "stretch": stretch,
            });
            c.out.json(&report)?;
            c.finish(report)
        }
        Command::PredictRom {
            config,
            pressure,
            out,
        } => {
            let c = ctx("predict-rom", out, &[&config]);
            let u = c.u();
            let cfg = load_config(&config)?;
            let p = pressure.map_or(kpa_to_pa(cfg.controller.p_max_kpa), |v| u.pressure_to_si(v));
            let mut report = serde_json::Map::new();
            report.insert(pressure_col(u, "pressure"), json!(u.pressure_from_si(p)));
            for (name, motion) in [
                (MuscleName::Flexor, "flexion"),
                (MuscleName::Extensor, "extension"),
                (MuscleName::Ulnar, "ulnar_deviation"),
                (MuscleName::Radial, "radial_deviation"),
            ] {
                let m = cfg.muscle(name)?;
                let limit = match predict_rom(&m.spec, p, &m.placement, m.stretch.as_ref(), RomOptions::default()) {
                    Ok(t) => Some(u.angle_from_si(t)),
                    Err(ModelError::NoCrossing(why)) => {
                        c.log(format!("{}: {why}", name.as_str()));
                        None
                    }
                    Err(e) => return Err(e.into()),
                };
                report.insert(angle_col(u, motion), json!(limit));
            }
            let report = serde_json::Value::Object(report);
            c.out.json(&report)?;
            c.finish(report)
        }
        Command::Simulate {
            config,
            trajectory,
            settle,
            out,
        } => simulate(&ctx("simulate", out, &[&config, &trajectory]), &config, &trajectory, settle),
        Command::InitConfig { out } => {
            let c = ctx("init-config", out, &[]);
            let cfg = ExosuitConfig {
                units: c.u(),
                ..ExosuitConfig::default()
            };
            c.out.json(&cfg)?;
            c.finish(json!({}))
        }
        Command::InitProblem { pressure, out } => {
            let c = ctx("init-problem", out, &[]);
            let problem = OptimizationProblem::flexor_design(design_muscle(), c.u().pressure_to_si(pressure));
            c.out.json(&problem)?;
            c.finish(json!({ "seeds": problem.seeds()?.len() }))
        }
        Command::MakeTrajectory {
            kind,
            dwell,
            periods,
            out,
        } => {
            let c = ctx("make-trajectory", out, &[]);
            let u = c.u();
            let points = match kind {
                TrajectoryKind::Staircase => {
                    if !(dwell > 0.0) {
                        return Err(CliError::Usage("dwell must be > 0".into()));
                    }
                    staircase(dwell)
                }
                TrajectoryKind::Sinusoid => {
                    if periods == 0 {
                        return Err(CliError::Usage("periods must be >= 1".into()));
                    }
                    sinusoids(&SinusoidSpec {
                        periods,
                        ..SinusoidSpec::default()
                    })
                }
            };
            let header = ["t_s".to_string(), angle_col(u, "theta_fe"), angle_col(u, "theta_ur")];
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| vec![num(p.t_s), num(deg_out(u, p.theta_fe_deg)), num(deg_out(u, p.theta_ur_deg))])
                .collect();
            c.out.table(&header, &rows)?;
            c.finish(json!({ "points": points.len(), "duration_s": points.last().map_or(0.0, |p| p.t_s) }))
        }
    }
}

/// One row per seed: start point, end point, objective values.
fn write_trace(u: UnitSystem, out: &Output, result: &OptimizationResult) -> Result<()> {
    let names = ["d1", "w1", "d2", "w2"];
    let header: Vec<String> = names
        .iter()
        .map(|n| length_col(u, &format!("seed_{n}")))
        .chain(["seed_objective".to_string()])
        .chain(names.iter().map(|n| length_col(u, n)))
        .chain(["objective", "iterations", "converged"].map(String::from))
        .collect();
    let rows: Vec<Vec<String>> = result
        .trace
        .iter()
        .map(|o| {
            o.seed
                .iter()
                .map(|&v| num(u.length_from_si(v)))
                .chain([num(o.seed_value)])
                .chain(o.x.iter().map(|&v| num(u.length_from_si(v))))
                .chain([num(o.value), o.iterations.to_string(), o.converged.to_string()])
                .collect()
        })
        .collect();
    out.table(&header, &rows)
}

fn fit_fpam(c: &Ctx, input: &Path, l0: f64, r0: f64, degree: usize, window: usize, clamp: bool) -> Result<()> {
    let u = c.u();
    let rows = read_table(input, &[&pressure_col(u, "pressure"), "epsilon", "force_n"])?;
    let data = TensileDataset::from_rows(rows.iter().map(|r| (u.pressure_to_si(r[0]), r[1], r[2])));
    let measured = MeasuredDims {
        l0_m: u.length_to_si(l0),
        r0_m: u.length_to_si(r0),
    };
    if !(measured.l0_m > 0.0 && measured.r0_m > 0.0) {
        return Err(CliError::Usage("--l0 and --r0 must be > 0".into()));
    }
    let fit = fit_force_curves(
        &data,
        FitOptions {
            smoothing_window: window,
            degree,
        },
    )?;
    for curve in &fit.curves {
        c.log(format!(
            "{} {}: rms {:.4} N",
            u.pressure_from_si(curve.pressure_pa),
            u.pressure_label(),
            curve.rms
        ));
    }
    let mut spec = identify_spec(&fit, measured, Fabric::default())?;
    if clamp {
        spec.extrapolation = Extrapolation::Clamp;
    }
    spec.validate()?;
    c.out.json(&spec)?;
    let eps_max: Vec<_> = spec
        .eps_max
        .iter()
        .map(|pt| json!({ pressure_col(u, "pressure"): u.pressure_from_si(pt.p_pa), "eps_max": pt.value }))
        .collect();
    c.finish(json!({
        "levels": fit.curves.len(),
        "eps0": spec.eps0,
        length_col(u, "r0"): u.length_from_si(spec.r0),
        "eps_max": eps_max,
    }))
}

fn torque_profile(
    c: &Ctx,
    config: &Path,
    muscle: &str,
    pressure: f64,
    theta_range: Option<&str>,
    stretch: bool,
) -> Result<()> {
    let u = c.u();
    let cfg = load_config(config)?;
    let m = cfg.muscle(muscle_name(muscle)?)?;
    let thetas = match theta_range {
        Some(r) => parse_range(r)?,
        None => parse_range("-67.5:90:22.5")?
            .into_iter()
            .map(|d| deg_out(u, d))
            .collect(),
    };
    let p = u.pressure_to_si(pressure);
    let model = stretch.then(|| m.stretch.unwrap_or_else(stretch_presets::measured_flexor));
    let mut rows = Vec::with_capacity(thetas.len());
    let mut switches = 0;
    let mut prev = None;
    for &t in &thetas {
        let (tau, regime) = model_torque(&m.spec, p, &m.placement, model.as_ref(), u.angle_to_si(t))?;
        if prev.is_some_and(|r| r != regime) {
            switches += 1;
        }
        prev = Some(regime);
        rows.push(vec![num(t), num(tau), regime.as_str().to_string()]);
    }
    c.out
        .table(&[angle_col(u, "theta"), "tau_nm".into(), "regime".into()], &rows)?;
    c.finish(json!({
        "muscle": muscle,
        pressure_col(u, "pressure"): pressure,
        "points": rows.len(),
        "regime_switches": switches,
        "stretch": model,
    }))
}

fn simulate(c: &Ctx, config: &Path, trajectory: &Path, settle: f64) -> Result<()> {
    let u = c.u();
    let cfg = load_config(config)?;
    let rows = read_table(
        trajectory,
        &["t_s", &angle_col(u, "theta_fe"), &angle_col(u, "theta_ur")],
    )?;
    let points: Vec<TrajectoryPoint> = rows
        .iter()
        .map(|r| TrajectoryPoint {
            t_s: r[0],
            theta_fe_deg: deg_in(u, r[1]),
            theta_ur_deg: deg_in(u, r[2]),
        })
        .collect();
    let plant = cfg.build_plant()?;
    c.log(format!(
        "flexion/extension stops {:.2}..{:.2} deg, ulnar/radial {:.2}..{:.2} deg",
        rad_to_deg(plant.fe.limits.0),
        rad_to_deg(plant.fe.limits.1),
        rad_to_deg(plant.ur.limits.0),
        rad_to_deg(plant.ur.limits.1)
    ));
    let log = run_tracking(
        &cfg.controller,
        &plant,
        &points,
        &TrackingOptions {
            settle_s: settle,
            ..TrackingOptions::default()
        },
    )?;
    let header: Vec<String> = ["t_s".to_string()]
        .into_iter()
        .chain(["fe_des", "fe_act", "ur_des", "ur_act"].map(|b| match u {
            // Degrees are the log's native unit and stay unsuffixed.
            UnitSystem::Paper => b.to_string(),
            UnitSystem::Si => angle_col(u, b),
        }))
        .chain(["p_flex", "p_ext", "p_uln", "p_rad"].map(|b| pressure_col(u, b)))
        .collect();
    let body: Vec<Vec<String>> = log
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.t_s),
                num(deg_out(u, r.fe_des)),
                num(deg_out(u, r.fe_act)),
                num(deg_out(u, r.ur_des)),
                num(deg_out(u, r.ur_act)),
                num(kpa_out(u, r.p_flex_kpa)),
                num(kpa_out(u, r.p_ext_kpa)),
                num(kpa_out(u, r.p_uln_kpa)),
                num(kpa_out(u, r.p_rad_kpa)),
            ]
        })
        .collect();
    c.out.table(&header, &body)?;
    let worst = log
        .rows
        .iter()
        .fold(0.0f64, |m, r| m.max((r.fe_des - r.fe_act).abs()).max((r.ur_des - r.ur_act).abs()));
    c.finish(json!({
        "rows": log.rows.len(),
        "duration_s": log.rows.last().map_or(0.0, |r| r.t_s - log.rows[0].t_s),
        angle_col(u, "rms_fe"): deg_out(u, log.rms_fe_deg),
        angle_col(u, "rms_ur"): deg_out(u, log.rms_ur_deg),
        angle_col(u, "max_abs_error"): deg_out(u, worst),
        pressure_col(u, "p_max_used"): kpa_out(u, log.rows.iter().map(|r| r.p_flex_kpa.max(r.p_ext_kpa).max(r.p_uln_kpa).max(r.p_rad_kpa)).fold(0.0, f64::max)),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_inclusive() {
        let r = parse_range("-67.5:90:22.5").unwrap();
        assert_eq!(r.len(), 8);
        assert_eq!(r[0], -67.5);
        assert_eq!(r[7], 90.0);
    }

    #[test]
    fn malformed_ranges_rejected() {
        for s in ["1:2", "a:b:c", "0:10:0", "10:0:1", "0:1:2:3"] {
            assert!(parse_range(s).is_err(), "{s}");
        }
    }

    #[test]
    fn column_names_follow_units() {
        assert_eq!(angle_col(UnitSystem::Paper, "theta"), "theta_deg");
        assert_eq!(angle_col(UnitSystem::Si, "theta"), "theta_rad");
        assert_eq!(pressure_col(UnitSystem::Paper, "p"), "p_kpa");
        assert_eq!(length_col(UnitSystem::Si, "dx1"), "dx1_m");
    }

    #[test]
    fn paper_passthrough_is_exact() {
        for v in [0.1, -37.25, 1e-9, 137.0] {
            assert_eq!(deg_out(UnitSystem::Paper, v), v);
            assert_eq!(deg_in(UnitSystem::Paper, v), v);
            assert_eq!(kpa_out(UnitSystem::Paper, v), v);
        }
    }
}
