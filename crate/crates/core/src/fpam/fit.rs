//! Tensile-test curve fitting and fPAM parameter identification.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{fiber_orientation, pressure_shape, FpamSpec, MeasuredDims, PressurePoint};
use crate::error::{Error, Result};
use crate::optim::{golden_section, BoundedNelderMead, NelderMeadOptions};

/// Force–contraction samples recorded at one pressure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensileLevel {
    pub pressure_pa: f64,
    /// `(ε, force N)` pairs, in recording order.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TensileDataset {
    pub levels: Vec<TensileLevel>,
}

impl TensileDataset {
    /// Groups `(pressure Pa, ε, force N)` rows by pressure, sorted ascending.
    pub fn from_rows(rows: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        let mut levels: Vec<TensileLevel> = Vec::new();
        for (p, eps, f) in rows {
            match levels.iter_mut().find(|l| l.pressure_pa == p) {
                Some(level) => level.samples.push((eps, f)),
                None => levels.push(TensileLevel {
                    pressure_pa: p,
                    samples: vec![(eps, f)],
                }),
            }
        }
        levels.sort_by(|a, b| a.pressure_pa.total_cmp(&b.pressure_pa));
        Self { levels }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidInput(
                "tensile dataset has no pressure levels".into(),
            ));
        }
        for level in &self.levels {
            if !(level.pressure_pa >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "negative pressure {}",
                    level.pressure_pa
                )));
            }
            if level.samples.len() < 10 {
                return Err(Error::InvalidInput(format!(
                    "pressure {} Pa has {} samples, need at least 10",
                    level.pressure_pa,
                    level.samples.len()
                )));
            }
            for &(eps, f) in &level.samples {
                if !(-0.1..1.0).contains(&eps) || !f.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "sample (eps={eps}, F={f}) at {} Pa is out of range",
                        level.pressure_pa
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Moving-average window, in samples, applied after sorting by ε.
    pub smoothing_window: usize,
    pub degree: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            smoothing_window: 11,
            degree: 8,
        }
    }
}

/// Polynomial in the normalised variable `(x - center) / half_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    /// Coefficients in increasing power order.
    pub coeffs: Vec<f64>,
    pub center: f64,
    pub half_width: f64,
}

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.half_width;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    /// Least-squares fit of the given degree.
    pub fn fit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Polynomial> {
        let mut distinct: Vec<f64> = xs.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() <= degree {
            return Err(Error::FitFailure(format!(
                "degree-{degree} fit needs at least {} distinct abscissae, got {}",
                degree + 1,
                distinct.len()
            )));
        }
        let lo = distinct[0];
        let hi = distinct[distinct.len() - 1];
        let center = 0.5 * (lo + hi);
        let half_width = 0.5 * (hi - lo);
        let cols = degree + 1;
        let a = DMatrix::from_fn(xs.len(), cols, |r, c| {
            ((xs[r] - center) / half_width).powi(c as i32)
        });
        let b = DVector::from_column_slice(ys);
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > smax * 1e-13) {
            return Err(Error::FitFailure("normal equations are singular".into()));
        }
        let sol = svd
            .solve(&b, smax * 1e-14)
            .map_err(|e| Error::FitFailure(e.to_string()))?;
        Ok(Polynomial {
            coeffs: sol.iter().copied().collect(),
            center,
            half_width,
        })
    }
}

/// Form of one fitted force curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveModel {
    Polynomial(Polynomial),
    /// `A (exp(B (ε0 - ε)) - 1)` below ε0 and exactly zero from ε0 on,
    /// stored as the slope `s = A·B` at the knot and the rate `B`.
    ExponentialKnee {
        slope: f64,
        rate: f64,
        eps0: f64,
    },
}

impl CurveModel {
    pub fn eval(&self, eps: f64) -> f64 {
        match self {
            CurveModel::Polynomial(p) => p.eval(eps),
            CurveModel::ExponentialKnee { slope, rate, eps0 } => {
                slope * knee_basis(*rate, eps0 - eps)
            }
        }
    }
}

/// `(exp(B x) - 1) / B` for `x > 0`, zero otherwise; the `B → 0` limit is `x`.
fn knee_basis(rate: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if rate.abs() < 1e-12 {
        x
    } else {
        (rate * x).exp_m1() / rate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub pressure_pa: f64,
    pub model: CurveModel,
    /// Range of ε covered by the data.
    pub eps_range: (f64, f64),
    /// RMS residual against the smoothed samples.
    pub rms: f64,
}

impl CurveFit {
    pub fn eval(&self, eps: f64) -> f64 {
        self.model.eval(eps)
    }

    /// First downward zero crossing within the fitted range (and inside (0, 1)).
    pub fn zero_crossing(&self) -> Result<f64> {
        if let CurveModel::ExponentialKnee { eps0, .. } = self.model {
            return Ok(eps0);
        }
        let lo = self.eps_range.0.max(0.0);
        let hi = self.eps_range.1.min(1.0 - 1e-9);
        let steps = 4000;
        let mut prev_e = lo;
        let mut prev_f = self.eval(lo);
        for k in 1..=steps {
            let e = lo + (hi - lo) * k as f64 / steps as f64;
            let f = self.eval(e);
            if prev_f > 0.0 && f <= 0.0 {
                let (mut a, mut b) = (prev_e, e);
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    if self.eval(m) > 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                return Ok(0.5 * (a + b));
            }
            prev_e = e;
            prev_f = f;
        }
        Err(Error::NoCrossing(format!(
            "force curve at {} Pa has no zero crossing in ({lo}, {hi})",
            self.pressure_pa
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceCurveFit {
    pub curves: Vec<CurveFit>,
}

impl ForceCurveFit {
    pub fn at_pressure(&self, pressure_pa: f64) -> Option<&CurveFit> {
        self.curves.iter().find(|c| c.pressure_pa == pressure_pa)
    }
}

/// Sorts by ε and applies a centred moving average whose window shrinks
/// symmetrically near the ends.
pub(crate) fn smooth(samples: &[(f64, f64)], window: usize) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = window.max(1) / 2;
    let n = sorted.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let span = &sorted[i - h..=i + h];
            let k = span.len() as f64;
            let e = span.iter().map(|s| s.0).sum::<f64>() / k;
            let f = span.iter().map(|s| s.1).sum::<f64>() / k;
            (e, f)
        })
        .collect()
}

fn rms_of(curve: &CurveModel, data: &[(f64, f64)]) -> f64 {
    let ss: f64 = data.iter().map(|&(e, f)| (curve.eval(e) - f).powi(2)).sum();
    (ss / data.len() as f64).sqrt()
}

fn fit_knee(data: &[(f64, f64)]) -> Result<CurveModel> {
    let peak = data.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::FitFailure(
            "zero-pressure curve has no positive force".into(),
        ));
    }
    let eps_lo = data[0].0;
    let eps_hi = data[data.len() - 1].0;
    // Initial knot: first ε where the smoothed force falls below 2 % of its peak.
    let knot_guess = data
        .iter()
        .find(|s| s.1 < 0.02 * peak)
        .map_or(eps_hi, |s| s.0);

    // The slope is linear given (rate, knot) and is profiled out.
    let profile = |rate: f64, knot: f64| -> (f64, f64) {
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &(e, f) in data {
            let g = knee_basis(rate, knot - e);
            sxy += g * f;
            sxx += g * g;
        }
        if sxx <= 0.0 {
            return (0.0, data.iter().map(|s| s.1 * s.1).sum());
        }
        let slope = sxy / sxx;
        let ss = data
            .iter()
            .map(|&(e, f)| (slope * knee_basis(rate, knot - e) - f).powi(2))
            .sum();
        (slope, ss)
    };

    let nm = BoundedNelderMead::new(
        vec![-50.0, eps_lo],
        vec![50.0, eps_hi],
        NelderMeadOptions {
            x_tol: 1e-10,
            f_tol: 1e-14,
            max_iterations: 4000,
            ..Default::default()
        },
    )?;
    let mut best: Option<(f64, f64, f64)> = None;
    for rate0 in [-10.0, 0.0, 10.0] {
        let m = nm.minimize(|x| profile(x[0], x[1]).1, &[rate0, knot_guess])?;
        if best.map_or(true, |b| m.value < b.2) {
            best = Some((m.x[0], m.x[1], m.value));
        }
    }
    let (rate, knot, _) = best.ok_or_else(|| Error::FitFailure("knee fit did not run".into()))?;
    let (slope, _) = profile(rate, knot);
    if !(slope > 0.0) || !(0.0..1.0).contains(&knot) {
        return Err(Error::FitFailure(format!(
            "zero-pressure fit produced slope {slope} and knot {knot}"
        )));
    }
    Ok(CurveModel::ExponentialKnee {
        slope,
        rate,
        eps0: knot,
    })
}

/// Fits one curve per pressure level: a polynomial for pressurised levels and
/// an exponential knee for the deflated level.
pub fn fit_force_curves(data: &TensileDataset, options: FitOptions) -> Result<ForceCurveFit> {
    data.validate()?;
    let mut curves = Vec::with_capacity(data.levels.len());
    for level in &data.levels {
        let smoothed = smooth(&level.samples, options.smoothing_window);
        let eps_range = (smoothed[0].0, smoothed[smoothed.len() - 1].0);
        let model = if level.pressure_pa == 0.0 {
            fit_knee(&smoothed)?
        } else {
            let xs: Vec<f64> = smoothed.iter().map(|s| s.0).collect();
            let ys: Vec<f64> = smoothed.iter().map(|s| s.1).collect();
            CurveModel::Polynomial(Polynomial::fit(&xs, &ys, options.degree)?)
        };
        let rms = rms_of(&model, &smoothed);
        curves.push(CurveFit {
            pressure_pa: level.pressure_pa,
            model,
            eps_range,
            rms,
        });
    }
    Ok(ForceCurveFit { curves })
}

/// Fabric constants that identification does not estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fabric {
    pub thickness_m: f64,
    pub modulus_pa: f64,
}

impl Default for Fabric {
    fn default() -> Self {
        Self {
            thickness_m: super::presets::FABRIC_THICKNESS_M,
            modulus_pa: super::presets::FABRIC_MODULUS_PA,
        }
    }
}

const R0_SEARCH_MAX_M: f64 = 0.1;

/// Derives an [`FpamSpec`] from fitted curves.
///
/// ε_max per pressure is the zero crossing of that pressure's curve; ε0 is the
/// knot of the deflated curve (zero when no deflated level was measured).
/// Each level gets the radius minimising the squared mismatch between the
/// force law and the fitted curve over ε ∈ [0, ε_max]; the spec's `r0` is
/// their mean.
pub fn identify_spec(
    fit: &ForceCurveFit,
    measured: MeasuredDims,
    fabric: Fabric,
) -> Result<FpamSpec> {
    if fit.curves.len() < 2 {
        return Err(Error::InvalidInput(
            "identification needs fits for at least 2 pressure levels".into(),
        ));
    }
    let mut curves: Vec<&CurveFit> = fit.curves.iter().collect();
    curves.sort_by(|a, b| a.pressure_pa.total_cmp(&b.pressure_pa));

    let eps0 = match curves.first() {
        Some(c) if c.pressure_pa == 0.0 => c.zero_crossing()?,
        _ => 0.0,
    };
    let elastic_unit = |eps: f64| -> f64 {
        if eps >= eps0 {
            0.0
        } else {
            2.0 * PI * fabric.modulus_pa * fabric.thickness_m * (eps0 - eps)
        }
    };

    let mut eps_max = Vec::with_capacity(curves.len());
    let mut radii = Vec::with_capacity(curves.len());
    for curve in curves {
        let p = curve.pressure_pa;
        let em = curve.zero_crossing()?;
        if !(em > 0.0 && em < 1.0) {
            return Err(Error::NoCrossing(format!(
                "zero crossing {em} at {p} Pa is outside (0, 1)"
            )));
        }
        let hi = em;
        let lo = curve.eps_range.0.max(0.0).min(hi);
        let n = 200;
        let grid: Vec<f64> = (0..=n)
            .map(|k| lo + (hi - lo) * k as f64 / n as f64)
            .collect();
        let target: Vec<f64> = grid.iter().map(|&e| curve.eval(e)).collect();

        let r0 = if p == 0.0 {
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (&e, &y) in grid.iter().zip(&target) {
                let b = elastic_unit(e);
                sxy += b * y;
                sxx += b * b;
            }
            if sxx > 0.0 {
                Some(sxy / sxx)
            } else {
                None
            }
        } else {
            let alpha0 = fiber_orientation(em)?;
            let quad: Vec<f64> = grid
                .iter()
                .map(|&e| PI * p * pressure_shape(alpha0, e))
                .collect();
            let lin: Vec<f64> = grid.iter().map(|&e| elastic_unit(e)).collect();
            let sse = |r: f64| -> f64 {
                quad.iter()
                    .zip(&lin)
                    .zip(&target)
                    .map(|((a, b), y)| (a * r * r + b * r - y).powi(2))
                    .sum()
            };
            let steps = 1000;
            let coarse = (1..=steps)
                .map(|k| R0_SEARCH_MAX_M * k as f64 / steps as f64)
                .min_by(|a, b| sse(*a).total_cmp(&sse(*b)))
                .unwrap_or(measured.r0_m);
            let h = R0_SEARCH_MAX_M / steps as f64;
            Some(golden_section(
                sse,
                (coarse - h).max(0.0),
                coarse + h,
                1e-12,
            ))
        };
        eps_max.push(PressurePoint::new(p, em));
        if let Some(r) = r0 {
            if !(r > 0.0) {
                return Err(Error::FitFailure(format!(
                    "identified radius {r} at {p} Pa is not positive"
                )));
            }
            radii.push(PressurePoint::new(p, r));
        }
    }
    if radii.is_empty() {
        return Err(Error::FitFailure("no radius could be identified".into()));
    }
    let mean_r0 = radii.iter().map(|r| r.value).sum::<f64>() / radii.len() as f64;
    let spec = FpamSpec {
        l0: measured.l0_m,
        r0: mean_r0,
        thickness: fabric.thickness_m,
        modulus: fabric.modulus_pa,
        eps0,
        eps_max,
        extrapolation: Default::default(),
        r0_by_pressure: radii,
        measured: Some(measured),
    };
    spec.validate()?;
    Ok(spec)
}
