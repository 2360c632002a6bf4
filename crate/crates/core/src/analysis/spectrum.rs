//! Windowed amplitude spectra and peak picking.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{ensure_positive, Error, Result};

pub const MIN_SPECTRUM_LEN: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub frequency: f64,
    /// Amplitude of the equivalent sinusoid.
    pub amplitude: f64,
}

/// One-sided amplitude spectrum of a mean-removed, Hann-windowed signal.
/// Returns `(bin width in Hz, amplitudes)`; bin 0 is DC.
pub fn amplitude_spectrum(signal: &[f64], dt: f64) -> Result<(f64, Vec<f64>)> {
    ensure_positive("dt", dt)?;
    let n = signal.len();
    if n < MIN_SPECTRUM_LEN {
        return Err(Error::invalid(
            "signal",
            format!("needs at least {MIN_SPECTRUM_LEN} samples, got {n}"),
        ));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("signal", "contains non-finite samples"));
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect();
    let coherent_gain: f64 = window.iter().sum();
    let mut buf: Vec<Complex<f64>> = signal
        .iter()
        .zip(&window)
        .map(|(&x, &w)| Complex::new((x - mean) * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let amps = buf[..n / 2 + 1]
        .iter()
        .map(|c| 2.0 * c.norm() / coherent_gain)
        .collect();
    Ok((1.0 / (n as f64 * dt), amps))
}

/// The `n_peaks` largest local maxima of the spectrum (DC excluded),
/// in descending amplitude.
pub fn spectrum_peaks(signal: &[f64], dt: f64, n_peaks: usize) -> Result<Vec<SpectralPeak>> {
    let (df, amps) = amplitude_spectrum(signal, dt)?;
    let mut peaks: Vec<SpectralPeak> = (1..amps.len())
        .filter(|&i| {
            let left = amps[i - 1];
            let right = amps.get(i + 1).copied().unwrap_or(0.0);
            amps[i] > 0.0 && amps[i] > left && amps[i] >= right
        })
        .map(|i| SpectralPeak {
            frequency: i as f64 * df,
            amplitude: amps[i],
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.amplitude
            .total_cmp(&a.amplitude)
            .then(a.frequency.total_cmp(&b.frequency))
    });
    peaks.truncate(n_peaks);
    Ok(peaks)
}
