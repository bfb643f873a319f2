//! Windowed periodograms of motion signals.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use super::MotionSignal;
use crate::error::{Error, Result};

/// Shortest analysis window in samples.
pub const MIN_WINDOW_SAMPLES: usize = 32;

/// Relative spread below which a window counts as constant.
const FLAT_TOLERANCE: f64 = 64.0 * f64::EPSILON;

/// One-sided power spectrum of one analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpectrum {
    /// Window start and end on the signal's time axis (s).
    pub start_s: f64,
    pub end_s: f64,
    /// Bin spacing `fps / N` (Hz); bin `k` sits at `k * resolution`.
    pub resolution: f64,
    /// Power density per bin, `N / 2 + 1` entries.
    pub power: Vec<f64>,
}

impl WindowSpectrum {
    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.resolution
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }
}

/// Samples per window and hop for `window_s` at `fps`.
pub fn window_geometry(fps: f64, window_s: f64, overlap: f64) -> Result<(usize, usize)> {
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::Config(format!(
            "overlap must be in [0, 1), got {overlap}"
        )));
    }
    let n = (window_s * fps).round();
    if n.is_nan() || n < MIN_WINDOW_SAMPLES as f64 {
        return Err(Error::Config(format!(
            "window of {window_s} s at {fps} fps has {n} samples, need at least {MIN_WINDOW_SAMPLES}"
        )));
    }
    let n = n as usize;
    let hop = ((n as f64 * (1.0 - overlap)).round() as usize).max(1);
    Ok((n, hop))
}

/// Hann-windowed, mean-removed periodograms over overlapping windows.
/// Density is one-sided and scaled by `1 / (fps * sum(w^2))`.
pub fn power_spectrum(
    signal: &MotionSignal,
    window_s: f64,
    overlap: f64,
) -> Result<Vec<WindowSpectrum>> {
    let fps = signal.fps;
    let (n, hop) = window_geometry(fps, window_s, overlap)?;
    let x = &signal.samples;
    if n > x.len() {
        return Err(Error::InvalidInput(format!(
            "window of {n} samples is longer than the {}-sample signal",
            x.len()
        )));
    }
    let w: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect();
    let norm = fps * w.iter().map(|v| v * v).sum::<f64>();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut out = Vec::new();
    let mut start = 0;
    while start + n <= x.len() {
        let seg = &x[start..start + n];
        let mean = seg.iter().sum::<f64>() / n as f64;
        let scale = seg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // A constant window leaves only rounding noise after mean removal.
        let flat = seg
            .iter()
            .all(|v| (v - mean).abs() <= FLAT_TOLERANCE * scale);
        let mut buf: Vec<Complex<f64>> = seg
            .iter()
            .zip(&w)
            .map(|(v, w)| Complex::new(if flat { 0.0 } else { (v - mean) * w }, 0.0))
            .collect();
        fft.process(&mut buf);
        let power = (0..=n / 2)
            .map(|k| {
                let p = buf[k].norm_sqr() / norm;
                if k == 0 || (n % 2 == 0 && k == n / 2) {
                    p
                } else {
                    2.0 * p
                }
            })
            .collect();
        out.push(WindowSpectrum {
            start_s: start as f64 / fps,
            end_s: (start + n) as f64 / fps,
            resolution: fps / n as f64,
            power,
        });
        start += hop;
    }
    Ok(out)
}

/// Bin-wise mean of equally sized spectra (Welch average).
pub fn average_spectra(spectra: &[WindowSpectrum]) -> Option<WindowSpectrum> {
    let first = spectra.first()?;
    let mut power = vec![0.0; first.power.len()];
    for s in spectra {
        if s.power.len() != power.len() {
            return None;
        }
        power.iter_mut().zip(&s.power).for_each(|(a, b)| *a += b);
    }
    power.iter_mut().for_each(|v| *v /= spectra.len() as f64);
    Some(WindowSpectrum {
        start_s: first.start_s,
        end_s: spectra.last().map_or(first.end_s, |s| s.end_s),
        resolution: first.resolution,
        power,
    })
}

/// Median bin power, ignoring the DC bin.
pub fn median_power(s: &WindowSpectrum) -> f64 {
    let mut v: Vec<f64> = s.power.iter().skip(1).copied().collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signal(samples: Vec<f64>, fps: f64) -> MotionSignal {
        MotionSignal {
            region: "all".into(),
            samples,
            fps,
        }
    }

    #[test]
    fn sinusoid_peaks_at_nearest_bin() {
        let fps = 30.0;
        let x: Vec<f64> = (0..300)
            .map(|i| 1.0 + (2.0 * PI * 5.0 * i as f64 / fps).sin())
            .collect();
        let spectra = power_spectrum(&signal(x, fps), 4.0, 0.5).unwrap();
        assert_eq!(spectra.len(), 4);
        for s in &spectra {
            assert!((s.resolution - 0.25).abs() < 1e-12);
            let (k, p) =
                s.power
                    .iter()
                    .enumerate()
                    .fold((0, 0.0), |a, (k, &p)| if p > a.1 { (k, p) } else { a });
            assert_eq!(k, 20);
            assert!(10.0 * (p / median_power(s)).log10() >= 20.0);
        }
    }

    // Parseval: the density integrates to the windowed signal's mean power.
    #[test]
    fn density_scaling_matches_parseval() {
        let fps = 20.0;
        let x: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64).sin()).collect();
        let s = &power_spectrum(&signal(x.clone(), fps), 3.2, 0.0).unwrap()[0];
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let w: Vec<f64> = (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
            .collect();
        let num: f64 = x
            .iter()
            .zip(&w)
            .map(|(v, w)| ((v - mean) * w).powi(2))
            .sum();
        let want = num / w.iter().map(|v| v * v).sum::<f64>();
        let got: f64 = s.power.iter().sum::<f64>() * s.resolution;
        assert!((got - want).abs() < 1e-9 * want.max(1.0), "{got} {want}");
    }

    #[test]
    fn constant_signal_has_zero_spectrum() {
        let s = power_spectrum(&signal(vec![0.3; 200], 30.0), 4.0, 0.5).unwrap();
        assert!(s.iter().all(|w| w.power.iter().all(|&p| p == 0.0)));
    }

    #[test]
    fn geometry_errors() {
        assert!(power_spectrum(&signal(vec![0.0; 100], 30.0), 4.0, 0.5).is_err());
        assert!(window_geometry(30.0, 1.0, 0.5).is_err());
        assert!(window_geometry(30.0, 4.0, 1.0).is_err());
        assert_eq!(window_geometry(30.0, 4.0, 0.5).unwrap(), (120, 60));
    }
}
