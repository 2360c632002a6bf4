use crate::error::{ensure_positive, Error, Result};
use crate::rotor::TurbineTimeSeries;

/// Minimum number of excitation periods a series needs for pitch activity.
pub const MIN_ACTIVITY_PERIODS: f64 = 10.0;

/// Fluctuation of each channel per unit of ambient turbulence intensity:
/// power scales with `u³`, thrust and blade moment with `u²`.
pub const POWER_TI_SENSITIVITY: f64 = 3.0;
pub const THRUST_TI_SENSITIVITY: f64 = 2.0;
pub const MOMENT_TI_SENSITIVITY: f64 = 2.0;

/// Start of the averaging window: after `spinup` seconds, trimmed from the
/// front so that the window spans a whole number of excitation periods.
/// Falls back to the plain spin-up cut when less than one period remains.
pub fn analysis_window_start(duration: f64, spinup: f64, f_e: f64) -> f64 {
    let available = duration - spinup;
    if available <= 0.0 || f_e <= 0.0 {
        return spinup.max(0.0).min(duration);
    }
    let periods = (available * f_e + 1e-9).floor();
    if periods < 1.0 {
        spinup
    } else {
        duration - periods / f_e
    }
}

/// Index of the first sample at or after `start`.
pub fn first_index(series: &TurbineTimeSeries, start: f64) -> usize {
    series
        .samples
        .iter()
        .position(|s| s.t >= start - 1e-9 * series.dt)
        .unwrap_or(series.len())
}

/// Mean absolute pitch rate over all blades and samples, deg/s.
pub fn pitch_activity(series: &TurbineTimeSeries, f_e: f64) -> Result<f64> {
    ensure_positive("f_e", f_e)?;
    let needed = MIN_ACTIVITY_PERIODS / f_e;
    if series.len() < 2 || series.duration() + 1e-9 < needed {
        return Err(Error::invalid(
            "series",
            format!(
                "pitch activity needs {MIN_ACTIVITY_PERIODS} excitation periods ({needed:.0} s), got {:.0} s",
                series.duration()
            ),
        ));
    }
    let mut total = 0.0;
    for pair in series.samples.windows(2) {
        for b in 0..3 {
            total += (pair[1].pitch[b] - pair[0].pitch[b]).abs();
        }
    }
    Ok(total / (3.0 * (series.len() - 1) as f64 * series.dt))
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Relative change in percent, with `0/0` reported as 0.
pub fn relative_delta(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if value == 0.0 {
            0.0
        } else {
            f64::NAN
        }
    } else {
        100.0 * (value - reference) / reference
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelDelta {
    /// Change of the mean, percent.
    pub mean: f64,
    /// Change of the variance, percent.
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeriesStats {
    pub power: ChannelDelta,
    pub thrust: ChannelDelta,
    /// Flapwise root moment of blade 1.
    pub moment: ChannelDelta,
}

/// Variance with round-off level scatter around the mean treated as zero.
fn resolved_variance(x: &[f64]) -> f64 {
    let v = variance(x);
    if v <= (1e-12 * mean(x)).powi(2) {
        0.0
    } else {
        v
    }
}

/// Variance change relative to the baseline, where both variances carry an
/// ambient contribution `(sensitivity·TI·mean_baseline)²` from inflow
/// turbulence the rotor model does not resolve.
fn channel_delta(test: &[f64], base: &[f64], ambient_ti: f64, sensitivity: f64) -> ChannelDelta {
    let base_mean = mean(base);
    let ambient = (sensitivity * ambient_ti * base_mean).powi(2);
    let (vt, vb) = (resolved_variance(test), resolved_variance(base));
    let var_delta = if vb + ambient == 0.0 {
        if vt == 0.0 {
            0.0
        } else {
            f64::NAN
        }
    } else {
        100.0 * (vt - vb) / (vb + ambient)
    };
    ChannelDelta {
        mean: relative_delta(mean(test), base_mean),
        variance: var_delta,
    }
}

/// Mean and variance deltas of power, thrust and blade-1 root moment over
/// the samples at or after `window_start`.
pub fn series_stats(
    series: &TurbineTimeSeries,
    baseline: &TurbineTimeSeries,
    window_start: f64,
    ambient_ti: f64,
) -> Result<SeriesStats> {
    if series.len() != baseline.len() || (series.dt - baseline.dt).abs() > 1e-12 * series.dt {
        return Err(Error::invalid(
            "series",
            format!(
                "sampling mismatch: {} samples at {} s vs {} samples at {} s",
                series.len(),
                series.dt,
                baseline.len(),
                baseline.dt
            ),
        ));
    }
    let i0 = first_index(series, window_start);
    if i0 >= series.len() {
        return Err(Error::invalid("window_start", "leaves no samples to analyse"));
    }
    let cut = |v: Vec<f64>| v[i0..].to_vec();
    let stats = SeriesStats {
        power: channel_delta(&cut(series.power()), &cut(baseline.power()), ambient_ti, POWER_TI_SENSITIVITY),
        thrust: channel_delta(&cut(series.thrust()), &cut(baseline.thrust()), ambient_ti, THRUST_TI_SENSITIVITY),
        moment: channel_delta(
            &cut(series.blade_moment()),
            &cut(baseline.blade_moment()),
            ambient_ti,
            MOMENT_TI_SENSITIVITY,
        ),
    };
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::TurbineSample;
    use std::f64::consts::PI;

    fn series_from(f: impl Fn(f64) -> (f64, [f64; 3]), n: usize, dt: f64) -> TurbineTimeSeries {
        let samples = (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                let (value, pitch) = f(t);
                TurbineSample {
                    t,
                    psi: 0.0,
                    pitch,
                    force: [value; 3],
                    moment: [value; 3],
                    thrust: value,
                    m_tilt: 0.0,
                    m_yaw: 0.0,
                    power: value,
                }
            })
            .collect();
        TurbineTimeSeries { dt, samples }
    }

    #[test]
    fn window_covers_whole_periods() {
        let start = analysis_window_start(1200.0, 171.0, 0.0158);
        let periods = (1200.0 - start) * 0.0158;
        assert!((periods - periods.round()).abs() < 1e-9);
        assert!(start >= 171.0);
        assert_eq!(analysis_window_start(100.0, 171.0, 0.0158), 100.0);
    }

    #[test]
    fn activity_of_pure_tone() {
        // mean |d/dt A sin(2πft)| = 4·A·f
        let (a, f) = (2.5, 0.169);
        let s = series_from(|t| (0.0, [a * (2.0 * PI * f * t).sin(); 3]), 20_000, 0.05);
        let act = pitch_activity(&s, 0.0158).unwrap();
        assert!((act - 4.0 * a * f).abs() < 0.01, "{act}");
        assert!((act - 1.69).abs() < 0.01);
    }

    #[test]
    fn constant_pitch_has_zero_activity() {
        let s = series_from(|_| (1.0, [1.3, 1.3, 1.3]), 8000, 0.1);
        assert_eq!(pitch_activity(&s, 0.0158).unwrap(), 0.0);
    }

    #[test]
    fn short_series_rejected_for_activity() {
        let s = series_from(|_| (1.0, [0.0; 3]), 100, 0.1);
        assert!(pitch_activity(&s, 0.0158).is_err());
    }

    #[test]
    fn self_comparison_is_zero() {
        let s = series_from(|t| (1.0 + (0.3 * t).sin(), [0.0; 3]), 1000, 0.1);
        let st = series_stats(&s, &s, 0.0, 0.059).unwrap();
        assert_eq!(st.power, ChannelDelta::default());
        assert_eq!(st.moment, ChannelDelta::default());
    }

    #[test]
    fn constant_offset_signal() {
        let delta = 0.03;
        let base = series_from(|_| (5.0, [0.0; 3]), 500, 0.1);
        let test = series_from(|_| (5.0 * (1.0 + delta), [0.0; 3]), 500, 0.1);
        let st = series_stats(&test, &base, 0.0, 0.0).unwrap();
        assert!((st.power.mean - 3.0).abs() < 1e-9);
        assert_eq!(st.power.variance, 0.0);
    }

    #[test]
    fn mismatched_sampling_rejected() {
        let a = series_from(|_| (1.0, [0.0; 3]), 500, 0.1);
        let b = series_from(|_| (1.0, [0.0; 3]), 400, 0.1);
        assert!(series_stats(&a, &b, 0.0, 0.059).is_err());
    }
}
