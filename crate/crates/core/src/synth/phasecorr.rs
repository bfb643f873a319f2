//! Global sub-pixel translation by phase correlation.
//!
//! Both images have their window-weighted mean removed and are
//! Hann-windowed. The normalised cross-power spectrum is multiplied by a
//! Gaussian frequency weight, which turns the correlation surface into a
//! sampled Gaussian centred on the shift; the sub-pixel offset then follows exactly from a parabola through
//! the logarithm of the peak and its two neighbours on each axis.
//!
//! A fixed window does not move with the content, which biases the estimate
//! towards zero. The frame's window is therefore re-centred on the current
//! estimate (`w(x + d)`, so windowed frame and windowed reference differ by a
//! pure shift) and the measurement repeated.
//!
//! Sign convention: for `frame(x) = reference(x + d)` the result is `d`.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Plane;
use crate::video::Frame;

/// Default correlation-peak width as a fraction of the shorter frame side.
/// Wide peaks weight the lowest spatial frequencies, where the phase of a
/// linearly magnified image still follows the commanded shift.
pub const PEAK_SIGMA_FRACTION: f64 = 1.0 / 12.0;
/// Narrowest default correlation peak (px).
pub const MIN_PEAK_SIGMA: f64 = 1.5;

/// Default correlation-peak standard deviation for a `w` x `h` frame.
pub fn default_peak_sigma(w: usize, h: usize) -> f64 {
    (w.min(h) as f64 * PEAK_SIGMA_FRACTION).max(MIN_PEAK_SIGMA)
}
/// Cross-power bins below this fraction of the strongest bin carry no phase.
const BIN_FLOOR: f64 = 1e-10;
/// Most window re-centring passes after the first estimate.
const MAX_REFINE_PASSES: usize = 16;
/// Re-centring stops once an update moves the estimate less than this (px).
const REFINE_TOLERANCE: f64 = 1e-5;
/// Peak height relative to a perfect match below which there is no dominant
/// translation.
const MIN_COHERENCE: f64 = 0.1;

type C = Complex<f64>;

/// Reusable estimator for one frame size.
pub struct PhaseCorrelator {
    w: usize,
    h: usize,
    weight: Vec<f64>,
    row_fwd: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

/// Spectrum of a prepared image, in column-major (transposed) layout.
pub struct Spectrum {
    data: Vec<C>,
    w: usize,
    h: usize,
}

/// Hann window of length `n` evaluated at `i + shift`, zero outside.
fn hann(n: usize, shift: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = i as f64 + shift;
            if (0.0..=last).contains(&x) {
                0.5 - 0.5 * (2.0 * PI * x / last).cos()
            } else {
                0.0
            }
        })
        .collect()
}

fn signed(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

fn transpose(src: &[C], w: usize, h: usize) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); w * h];
    for y in 0..h {
        for x in 0..w {
            out[x * h + y] = src[y * w + x];
        }
    }
    out
}

impl PhaseCorrelator {
    pub fn new(w: usize, h: usize) -> Self {
        Self::with_peak_sigma(w, h, default_peak_sigma(w, h))
    }

    /// Estimator whose correlation peak has standard deviation `sigma` px.
    /// Wider peaks weight low spatial frequencies more heavily.
    pub fn with_peak_sigma(w: usize, h: usize, sigma: f64) -> Self {
        // Transposed layout: index kx * h + ky.
        let mut weight = vec![0.0; w * h];
        for kx in 0..w {
            for ky in 0..h {
                let fx = signed(kx, w) / w as f64;
                let fy = signed(ky, h) / h as f64;
                weight[kx * h + ky] = (-2.0 * PI * PI * sigma * sigma * (fx * fx + fy * fy)).exp();
            }
        }
        let mut planner = FftPlanner::new();
        Self {
            w,
            h,
            weight,
            row_fwd: planner.plan_fft_forward(w),
            col_fwd: planner.plan_fft_forward(h),
            row_inv: planner.plan_fft_inverse(w),
            col_inv: planner.plan_fft_inverse(h),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.w, self.h)
    }

    /// Windowed spectrum of `plane`; errors on a flat image.
    pub fn spectrum(&self, plane: &Plane) -> Result<Spectrum> {
        self.spectrum_at(plane, (0.0, 0.0))
    }

    /// Spectrum of `plane` under the window `w(x + shift)`.
    fn spectrum_at(&self, plane: &Plane, shift: (f64, f64)) -> Result<Spectrum> {
        if plane.dims() != (self.w, self.h) {
            return Err(Error::ShapeMismatch(format!(
                "image is {:?}, correlator is {}x{}",
                plane.dims(),
                self.w,
                self.h
            )));
        }
        let n = plane.len() as f64;
        let mean = plane.as_slice().iter().sum::<f64>() / n;
        let var = plane
            .as_slice()
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / n;
        if var.is_nan() || var <= 1e-14 {
            return Err(Error::NoDominantPeak);
        }
        let (wx, wy) = (hann(self.w, shift.0), hann(self.h, shift.1));
        let weight = |i: usize| wx[i % self.w] * wy[i / self.w];
        // The mean under the window moves with the window, so a shifted copy
        // of the content gives the same windowed, mean-free signal.
        let (mut num, mut den) = (0.0, 0.0);
        for (i, v) in plane.as_slice().iter().enumerate() {
            num += v * weight(i);
            den += weight(i);
        }
        let wmean = if den > 0.0 { num / den } else { mean };
        let mut buf: Vec<C> = plane
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, v)| C::new((v - wmean) * weight(i), 0.0))
            .collect();
        self.row_fwd.process(&mut buf);
        let mut t = transpose(&buf, self.w, self.h);
        self.col_fwd.process(&mut t);
        Ok(Spectrum {
            data: t,
            w: self.w,
            h: self.h,
        })
    }

    /// Shift `d` with `frame(x) = reference(x + d)`.
    pub fn measure(&self, reference: &Spectrum, frame: &Spectrum) -> Result<(f64, f64)> {
        let (w, h) = (self.w, self.h);
        if (reference.w, reference.h) != (w, h) || (frame.w, frame.h) != (w, h) {
            return Err(Error::ShapeMismatch("spectra differ in size".into()));
        }
        let mut cross: Vec<C> = reference
            .data
            .iter()
            .zip(&frame.data)
            .map(|(a, b)| a * b.conj())
            .collect();
        let mags: Vec<f64> = cross.iter().map(|c| c.norm_sqr().sqrt()).collect();
        let floor = mags.iter().copied().fold(0.0, f64::max) * BIN_FLOOR;
        let mut total = 0.0;
        for ((c, g), m) in cross.iter_mut().zip(&self.weight).zip(mags) {
            if m > floor {
                *c *= g / m;
                total += g;
            } else {
                *c = C::new(0.0, 0.0);
            }
        }
        self.col_inv.process(&mut cross);
        let mut surf = transpose(&cross, h, w);
        self.row_inv.process(&mut surf);
        let s: Vec<f64> = surf.iter().map(|c| c.re).collect();

        let (imax, vmax) =
            s.iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |a, (i, v)| if v > a.1 { (i, v) } else { a },
                );
        if !(total > 0.0 && vmax / total >= MIN_COHERENCE) {
            return Err(Error::NoDominantPeak);
        }
        let (px, py) = (imax % w, imax / w);
        let at = |x: usize, y: usize| s[y * w + x];
        let left = at((px + w - 1) % w, py);
        let right = at((px + 1) % w, py);
        let up = at(px, (py + h - 1) % h);
        let down = at(px, (py + 1) % h);
        let dx = signed(px, w) + sub_bin(left, vmax, right);
        let dy = signed(py, h) + sub_bin(up, vmax, down);
        Ok((dx, dy))
    }

    /// Shift of `frame` against a prepared reference, with window
    /// re-centring.
    pub fn measure_plane(&self, reference: &Spectrum, frame: &Plane) -> Result<(f64, f64)> {
        let mut d = self.measure(reference, &self.spectrum(frame)?)?;
        for _ in 0..MAX_REFINE_PASSES {
            let next = self.measure(reference, &self.spectrum_at(frame, d)?)?;
            let step = (next.0 - d.0).abs().max((next.1 - d.1).abs());
            d = next;
            if step < REFINE_TOLERANCE {
                break;
            }
        }
        Ok(d)
    }

    /// Luma shift between two frames.
    pub fn measure_frames(&self, reference: &Frame, frame: &Frame) -> Result<(f64, f64)> {
        let a = self.spectrum(&reference.plane_f64(0))?;
        self.measure_plane(&a, &frame.plane_f64(0))
    }
}

/// Vertex offset of the parabola through `ln` of three samples (exact for a
/// Gaussian); plain parabola if a sample is not positive.
fn sub_bin(l: f64, c: f64, r: f64) -> f64 {
    let (a, b, d) = if l > 0.0 && c > 0.0 && r > 0.0 {
        (l.ln(), c.ln(), r.ln())
    } else {
        (l, c, r)
    };
    let den = a - 2.0 * b + d;
    if den.abs() < 1e-300 {
        return 0.0;
    }
    (0.5 * (a - d) / den).clamp(-0.5, 0.5)
}

/// Global luma translation `d` with `frame(x) ~ reference(x + d)`.
pub fn measure_displacement(reference: &Frame, frame: &Frame) -> Result<(f64, f64)> {
    if reference.dims() != frame.dims() {
        return Err(Error::ShapeMismatch(format!(
            "frames are {:?} and {:?}",
            reference.dims(),
            frame.dims()
        )));
    }
    let (w, h) = reference.dims();
    PhaseCorrelator::new(w, h).measure_frames(reference, frame)
}
