use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural cubic spline (zero second derivative at both ends).
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidInput(
                "spline abscissae and ordinates differ in length".into(),
            ));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidInput("spline needs at least 2 knots".into()));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput(format!(
                    "spline abscissae must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior knots.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            for i in 1..k {
                let lower = xs[i + 1] - xs[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        })
    }

    /// Value at `x`; outside the knot range the end cubic pieces are extended.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&k| k <= x).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Reference torque: raw samples plus a dense uniform resampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTorque {
    /// `(θ rad, τ N·m)`, strictly increasing in θ.
    pub samples: Vec<(f64, f64)>,
    pub grid: Vec<(f64, f64)>,
}

impl ReferenceTorque {
    /// Uses the given points directly as the evaluation grid.
    pub fn from_grid(grid: Vec<(f64, f64)>) -> Self {
        Self {
            samples: grid.clone(),
            grid,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: &[(f64, f64)]| v.iter().map(|&(t, tau)| (t, tau * factor)).collect();
        Self {
            samples: s(&self.samples),
            grid: s(&self.grid),
        }
    }
}

/// Natural cubic spline through `raw`, resampled at `n` uniformly spaced
/// angles spanning the raw range.
pub fn interpolate_reference(raw: &[(f64, f64)], n: usize) -> Result<ReferenceTorque> {
    if raw.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "reference needs at least 4 samples, got {}",
            raw.len()
        )));
    }
    if n < raw.len() {
        return Err(Error::InvalidInput(format!(
            "resampling count {n} is below the number of raw samples {}",
            raw.len()
        )));
    }
    let xs: Vec<f64> = raw.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = raw.iter().map(|s| s.1).collect();
    let spline = NaturalCubicSpline::new(&xs, &ys)?;
    let lo = xs[0];
    let hi = xs[xs.len() - 1];
    let grid = (0..n)
        .map(|k| {
            let t = if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            };
            (t, spline.eval(t))
        })
        .collect();
    Ok(ReferenceTorque {
        samples: raw.to_vec(),
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::deg_to_rad;

    fn raw8() -> Vec<(f64, f64)> {
        (0..8)
            .map(|k| {
                let deg = -67.5 + 22.5 * k as f64;
                (deg_to_rad(deg), 4.0 + (deg / 40.0).sin())
            })
            .collect()
    }

    #[test]
    fn collinear_data_interpolates_linearly() {
        let raw: Vec<(f64, f64)> = (0..6).map(|k| (k as f64, 2.0 - 0.5 * k as f64)).collect();
        let r = interpolate_reference(&raw, 41).unwrap();
        for &(x, y) in &r.grid {
            assert!((y - (2.0 - 0.5 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn eight_to_one_forty() {
        let r = interpolate_reference(&raw8(), 140).unwrap();
        assert_eq!(r.grid.len(), 140);
        assert_eq!(r.grid[0].0, deg_to_rad(-67.5));
        assert_eq!(r.grid[139].0, deg_to_rad(90.0));
    }

    #[test]
    fn passes_through_knots() {
        let raw = raw8();
        let xs: Vec<f64> = raw.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = raw.iter().map(|s| s.1).collect();
        let s = NaturalCubicSpline::new(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn natural_end_conditions() {
        let raw = raw8();
        let xs: Vec<f64> = raw.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = raw.iter().map(|s| s.1).collect();
        let s = NaturalCubicSpline::new(&xs, &ys).unwrap();
        let h = 1e-4;
        for x in [xs[0] + h, xs[7] - h] {
            let d2 = (s.eval(x + h) - 2.0 * s.eval(x) + s.eval(x - h)) / (h * h);
            assert!(d2.abs() < 1e-2, "{d2}");
        }
    }

    #[test]
    fn duplicate_theta_rejected() {
        let mut raw = raw8();
        raw[3].0 = raw[2].0;
        assert!(interpolate_reference(&raw, 140).is_err());
        assert!(interpolate_reference(&raw8()[..3], 140).is_err());
    }
}
