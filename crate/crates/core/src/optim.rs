//! Derivative-free minimisers: a box-constrained Nelder–Mead simplex with
//! multi-start driver, and golden-section search for scalar problems.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rules and coefficients for [`BoundedNelderMead`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    /// Stop when the simplex diameter in parameter space falls below this.
    pub x_tol: f64,
    /// Stop when the spread of objective values across the simplex falls below this.
    pub f_tol: f64,
    pub max_iterations: usize,
    /// Edge length of the initial simplex in the transformed coordinates.
    pub initial_step: f64,
    /// Results within this distance of a bound are snapped onto it.
    pub snap_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-6,
            f_tol: 1e-9,
            max_iterations: 2000,
            initial_step: 0.25,
            snap_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Box-constrained Nelder–Mead.
///
/// Each coordinate is searched through `x = lo + (hi - lo) sin²(u)`, which is
/// smooth, keeps every trial point feasible and reaches the bounds exactly at
/// `u = 0` and `u = π/2`. Coordinates with `lo == hi` are held fixed.
#[derive(Debug, Clone)]
pub struct BoundedNelderMead {
    lower: Vec<f64>,
    upper: Vec<f64>,
    options: NelderMeadOptions,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl BoundedNelderMead {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, options: NelderMeadOptions) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidInput(
                "bound vectors must be non-empty and equal length".into(),
            ));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidInput(format!("invalid bound [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            lower,
            upper,
            options,
        })
    }

    pub fn options(&self) -> &NelderMeadOptions {
        &self.options
    }

    fn free(&self) -> Vec<usize> {
        (0..self.lower.len())
            .filter(|&i| self.upper[i] > self.lower[i])
            .collect()
    }

    fn to_inner(&self, i: usize, x: f64) -> f64 {
        let s = ((x - self.lower[i]) / (self.upper[i] - self.lower[i])).clamp(0.0, 1.0);
        s.sqrt().asin()
    }

    fn to_outer(&self, i: usize, u: f64) -> f64 {
        let s = u.sin();
        self.lower[i] + (self.upper[i] - self.lower[i]) * s * s
    }

    fn expand_point(&self, free: &[usize], base: &[f64], u: &[f64]) -> Vec<f64> {
        let mut x = base.to_vec();
        for (k, &i) in free.iter().enumerate() {
            x[i] = self.to_outer(i, u[k]);
        }
        x
    }

    fn snap(&self, x: &mut [f64]) {
        for i in 0..x.len() {
            if (x[i] - self.lower[i]).abs() <= self.options.snap_tol {
                x[i] = self.lower[i];
            } else if (x[i] - self.upper[i]).abs() <= self.options.snap_tol {
                x[i] = self.upper[i];
            }
        }
    }

    /// Minimise `f` starting from `start`, which is clipped into the box.
    pub fn minimize<F>(&self, f: F, start: &[f64]) -> Result<Minimum>
    where
        F: Fn(&[f64]) -> f64,
    {
        if start.len() != self.lower.len() {
            return Err(Error::InvalidInput(
                "start point has the wrong dimension".into(),
            ));
        }
        let base: Vec<f64> = start
            .iter()
            .enumerate()
            .map(|(i, &v)| v.clamp(self.lower[i], self.upper[i]))
            .collect();
        let free = self.free();
        let mut evaluations = 0usize;
        let mut eval = |u: &[f64]| {
            evaluations += 1;
            let v = f(&self.expand_point(&free, &base, u));
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        if free.is_empty() {
            let value = eval(&[]);
            return Ok(Minimum {
                x: base,
                value,
                iterations: 0,
                evaluations: 1,
                converged: true,
            });
        }

        let n = free.len();
        let u0: Vec<f64> = free.iter().map(|&i| self.to_inner(i, base[i])).collect();
        let mut simplex: Vec<Vec<f64>> = vec![u0.clone()];
        for k in 0..n {
            let mut v = u0.clone();
            // Step toward the interior so seeds on a bound do not produce a
            // degenerate (mirrored) vertex.
            let dir = if v[k] > std::f64::consts::FRAC_PI_4 {
                -1.0
            } else {
                1.0
            };
            v[k] += dir * self.options.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.options.max_iterations {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            if self.has_converged(&free, &base, &simplex, &values) {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let reflected = along(REFLECT);
            let fr = eval(&reflected);
            if fr < values[0] {
                let expanded = along(REFLECT * EXPAND);
                let fe = eval(&expanded);
                if fe < fr {
                    simplex[n] = expanded;
                    values[n] = fe;
                } else {
                    simplex[n] = reflected;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = reflected;
                values[n] = fr;
                continue;
            }
            let (trial, ft) = if fr < values[n] {
                let c = along(REFLECT * CONTRACT);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = along(-CONTRACT);
                let fc = eval(&c);
                (c, fc)
            };
            if ft < values[n].min(fr) {
                simplex[n] = trial;
                values[n] = ft;
                continue;
            }
            let best = simplex[0].clone();
            for k in 1..=n {
                let shrunk: Vec<f64> = best
                    .iter()
                    .zip(&simplex[k])
                    .map(|(b, x)| b + SHRINK * (x - b))
                    .collect();
                values[k] = eval(&shrunk);
                simplex[k] = shrunk;
            }
        }

        let best = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap_or(0);
        let mut x = self.expand_point(&free, &base, &simplex[best]);
        let value_before_snap = values[best];
        self.snap(&mut x);
        let snapped = f(&x);
        evaluations += 1;
        // Keep the snapped point only if it does not lose ground.
        let (x, value) = if snapped <= value_before_snap || !value_before_snap.is_finite() {
            (x, snapped)
        } else {
            (
                self.expand_point(&free, &base, &simplex[best]),
                value_before_snap,
            )
        };
        Ok(Minimum {
            x,
            value,
            iterations,
            evaluations,
            converged,
        })
    }

    fn has_converged(
        &self,
        free: &[usize],
        base: &[f64],
        simplex: &[Vec<f64>],
        values: &[f64],
    ) -> bool {
        let spread = values[values.len() - 1] - values[0];
        if values[0].is_finite() && spread.abs() < self.options.f_tol {
            return true;
        }
        let points: Vec<Vec<f64>> = simplex
            .iter()
            .map(|u| self.expand_point(free, base, u))
            .collect();
        let mut diameter = 0.0f64;
        for a in 0..points.len() {
            for b in (a + 1)..points.len() {
                let d = points[a]
                    .iter()
                    .zip(&points[b])
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                diameter = diameter.max(d);
            }
        }
        diameter < self.options.x_tol
    }
}

/// Grid of starting points covering `[lower, upper]` with the given step per
/// coordinate, in lexicographic order (first coordinate slowest).
pub fn seed_grid(lower: &[f64], upper: &[f64], step: &[f64]) -> Result<Vec<Vec<f64>>> {
    if lower.len() != upper.len() || lower.len() != step.len() {
        return Err(Error::InvalidInput("grid dimensions disagree".into()));
    }
    let mut axes = Vec::with_capacity(lower.len());
    for i in 0..lower.len() {
        if !(step[i] > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid step must be > 0, got {}",
                step[i]
            )));
        }
        let span = upper[i] - lower[i];
        let count = (span / step[i] + 1e-9).floor() as usize;
        let mut axis: Vec<f64> = (0..=count).map(|k| lower[i] + k as f64 * step[i]).collect();
        if let Some(last) = axis.last_mut() {
            if (*last - upper[i]).abs() < 1e-9 * step[i].max(span.abs()) {
                *last = upper[i];
            }
        }
        axes.push(axis);
    }
    let mut out = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Outcome of one start of a multi-start run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: Vec<f64>,
    pub seed_value: f64,
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartResult {
    pub best: usize,
    pub outcomes: Vec<SeedOutcome>,
}

impl MultiStartResult {
    pub fn best(&self) -> &SeedOutcome {
        &self.outcomes[self.best]
    }
}

/// Runs [`BoundedNelderMead`] from every seed in parallel and reduces
/// deterministically: lowest value wins, ties go to the earlier seed.
pub fn multistart<F>(
    solver: &BoundedNelderMead,
    f: F,
    seeds: &[Vec<f64>],
) -> Result<MultiStartResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if seeds.is_empty() {
        return Err(Error::InvalidInput("no seeds".into()));
    }
    let outcomes: Vec<SeedOutcome> = seeds
        .par_iter()
        .map(|seed| {
            let seed_value = f(seed);
            let m = solver.minimize(&f, seed)?;
            Ok(SeedOutcome {
                seed: seed.clone(),
                seed_value,
                x: m.x,
                value: m.value,
                iterations: m.iterations,
                converged: m.converged,
            })
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value < outcomes[best].value {
            best = i;
        }
    }
    Ok(MultiStartResult { best, outcomes })
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Bisection on a predicate that is `false` at `lo` and `true` at `hi`;
/// returns the bracket once narrower than `tol`.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut pred: P,
) -> (f64, f64) {
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver(lo: Vec<f64>, hi: Vec<f64>) -> BoundedNelderMead {
        BoundedNelderMead::new(lo, hi, NelderMeadOptions::default()).unwrap()
    }

    #[test]
    fn quadratic_bowl_inside_bounds() {
        let target = [0.123, 0.045, 0.067, 0.021];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&target)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
        };
        let nm = BoundedNelderMead::new(
            vec![0.02, 0.035, 0.015, 0.015],
            vec![0.22, 0.05, 0.09, 0.035],
            NelderMeadOptions {
                f_tol: 1e-16,
                x_tol: 1e-9,
                ..Default::default()
            },
        )
        .unwrap();
        let m = nm.minimize(f, &[0.1, 0.04, 0.05, 0.03]).unwrap();
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-4, "{:?}", m.x);
        }
    }

    #[test]
    fn minimiser_on_bound_is_returned_exactly() {
        // Unconstrained optimum lies outside the box in every coordinate.
        let f = |x: &[f64]| (x[0] - 0.5).powi(2) + (x[1] + 0.5).powi(2);
        let nm = solver(vec![0.0, 0.0], vec![0.22, 0.09]);
        let m = nm.minimize(f, &[0.1, 0.05]).unwrap();
        assert_eq!(m.x, vec![0.22, 0.0]);
    }

    #[test]
    fn already_optimal_seed_is_kept() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2);
        let nm = solver(vec![0.0], vec![2.0]);
        let m = nm.minimize(f, &[1.0]).unwrap();
        assert!(m.value <= 0.0 + 1e-18);
        assert!((m.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fixed_coordinates_are_untouched() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + x[1];
        let nm = solver(vec![0.0, 5.0], vec![1.0, 5.0]);
        let m = nm.minimize(f, &[0.9, 5.0]).unwrap();
        assert_eq!(m.x[1], 5.0);
        assert!((m.x[0] - 0.3).abs() < 1e-4);
    }

    #[test]
    fn infinite_regions_are_escaped() {
        let f = |x: &[f64]| {
            if x[0] > 0.8 {
                f64::INFINITY
            } else {
                (x[0] - 0.5).powi(2)
            }
        };
        let nm = solver(vec![0.0], vec![1.0]);
        let m = nm.minimize(f, &[0.79]).unwrap();
        assert!((m.x[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn grid_includes_both_bounds() {
        let g = seed_grid(&[0.02, 0.035], &[0.22, 0.05], &[0.02, 0.005]).unwrap();
        assert_eq!(g.len(), 11 * 4);
        assert_eq!(g[0], vec![0.02, 0.035]);
        assert_eq!(g[g.len() - 1], vec![0.22, 0.05]);
    }

    #[test]
    fn multistart_prefers_earlier_seed_on_ties() {
        let f = |_: &[f64]| 1.0;
        let nm = solver(vec![0.0], vec![1.0]);
        let r = multistart(&nm, f, &[vec![0.2], vec![0.7]]).unwrap();
        assert_eq!(r.best, 0);
    }

    #[test]
    fn golden_and_bisection() {
        let x = golden_section(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        let (lo, hi) = bisect_predicate(0.0, 1.0, 1e-12, |x| x > 0.25);
        assert!(lo <= 0.25 && hi >= 0.25 && hi - lo <= 1e-12);
    }
}
