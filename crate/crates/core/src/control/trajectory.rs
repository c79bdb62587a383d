use std::f64::consts::PI;

use super::tracking::TrajectoryPoint;

/// Flexion/extension staircase: 0° down to 30° extension, then up to 40°
/// flexion in 10° steps, each held for `dwell_s`. The last point marks the
/// end of the final dwell. Ulnar/radial is held at 0°.
pub fn staircase(dwell_s: f64) -> Vec<TrajectoryPoint> {
    let levels = [
        0.0, -10.0, -20.0, -30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0,
    ];
    let mut out: Vec<TrajectoryPoint> = levels
        .iter()
        .enumerate()
        .map(|(k, &fe)| TrajectoryPoint {
            t_s: k as f64 * dwell_s,
            theta_fe_deg: fe,
            theta_ur_deg: 0.0,
        })
        .collect();
    out.push(TrajectoryPoint {
        t_s: levels.len() as f64 * dwell_s,
        theta_fe_deg: 40.0,
        theta_ur_deg: 0.0,
    });
    out
}

/// Parameters of the two-axis sinusoidal demonstration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidSpec {
    pub fe_range_deg: (f64, f64),
    pub ur_range_deg: (f64, f64),
    pub period_s: f64,
    /// Lag of the ulnar/radial wave behind flexion/extension, rad.
    pub phase_shift: f64,
    pub periods: usize,
    pub sample_dt_s: f64,
}

impl Default for SinusoidSpec {
    fn default() -> Self {
        Self {
            fe_range_deg: (-40.0, 30.0),
            ur_range_deg: (-10.0, 30.0),
            period_s: 24.0,
            phase_shift: PI / 2.0,
            periods: 3,
            sample_dt_s: 0.014,
        }
    }
}

/// Sampled sinusoids covering `periods` full periods, both starting at the
/// middle of their range.
pub fn sinusoids(spec: &SinusoidSpec) -> Vec<TrajectoryPoint> {
    let total = spec.period_s * spec.periods as f64;
    let n = (total / spec.sample_dt_s).round() as usize;
    let wave = |range: (f64, f64), t: f64, phase: f64| {
        let mid = 0.5 * (range.0 + range.1);
        let amp = 0.5 * (range.1 - range.0);
        mid + amp * (2.0 * PI * t / spec.period_s - phase).sin()
    };
    (0..=n)
        .map(|k| {
            let t = if k == n {
                total
            } else {
                k as f64 * spec.sample_dt_s
            };
            TrajectoryPoint {
                t_s: t,
                theta_fe_deg: wave(spec.fe_range_deg, t, 0.0),
                theta_ur_deg: wave(spec.ur_range_deg, t, spec.phase_shift),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase_shape() {
        let s = staircase(10.0);
        assert_eq!(s.len(), 12);
        assert_eq!(s[3].theta_fe_deg, -30.0);
        assert_eq!(s[10].theta_fe_deg, 40.0);
        assert_eq!(s[11].t_s, 110.0);
        for w in s.windows(2).take(10) {
            assert_eq!((w[1].theta_fe_deg - w[0].theta_fe_deg).abs(), 10.0);
        }
    }

    #[test]
    fn sinusoids_cover_ranges_and_duration() {
        let s = sinusoids(&SinusoidSpec::default());
        assert_eq!(s.last().unwrap().t_s, 72.0);
        let (mut fmin, mut fmax) = (f64::MAX, f64::MIN);
        for p in &s {
            fmin = fmin.min(p.theta_fe_deg);
            fmax = fmax.max(p.theta_fe_deg);
            assert!(p.theta_ur_deg >= -10.0 - 1e-9 && p.theta_ur_deg <= 30.0 + 1e-9);
        }
        assert!((fmin + 40.0).abs() < 1e-3 && (fmax - 30.0).abs() < 1e-3);
    }

    #[test]
    fn quarter_period_shift() {
        let spec = SinusoidSpec::default();
        let s = sinusoids(&spec);
        // The ulnar/radial wave reaches its peak a quarter period after flexion/extension.
        let argmax = |f: &dyn Fn(&TrajectoryPoint) -> f64| {
            s.iter()
                .take_while(|p| p.t_s < spec.period_s)
                .max_by(|a, b| f(a).total_cmp(&f(b)))
                .unwrap()
                .t_s
        };
        let dt = argmax(&|p| p.theta_ur_deg) - argmax(&|p| p.theta_fe_deg);
        assert!((dt - spec.period_s / 4.0).abs() < 0.02, "{dt}");
    }
}
