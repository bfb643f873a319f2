//! Second-order Butterworth sections designed with the bilinear transform.

use std::f64::consts::{PI, SQRT_2};

/// Normalised biquad coefficients (`a0 == 1`), transposed direct form II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Butterworth low-pass with cutoff `fc` (Hz) at sample rate `fs`, with
    /// the cutoff prewarped.
    pub fn lowpass(fc: f64, fs: f64) -> Self {
        let k = (PI * fc / fs).tan();
        let norm = 1.0 / (1.0 + SQRT_2 * k + k * k);
        let b0 = k * k * norm;
        Self {
            b0,
            b1: 2.0 * b0,
            b2: b0,
            a1: 2.0 * (k * k - 1.0) * norm,
            a2: (1.0 - SQRT_2 * k + k * k) * norm,
        }
    }

    /// Butterworth high-pass with cutoff `fc` (Hz) at sample rate `fs`.
    pub fn highpass(fc: f64, fs: f64) -> Self {
        let k = (PI * fc / fs).tan();
        let norm = 1.0 / (1.0 + SQRT_2 * k + k * k);
        Self {
            b0: norm,
            b1: -2.0 * norm,
            b2: norm,
            a1: 2.0 * (k * k - 1.0) * norm,
            a2: (1.0 - SQRT_2 * k + k * k) * norm,
        }
    }

    /// One sample through the section; `s` is the two-element state.
    #[inline(always)]
    pub fn step(&self, x: f64, s: &mut [f64; 2]) -> f64 {
        let y = self.b0 * x + s[0];
        s[0] = self.b1 * x - self.a1 * y + s[1];
        s[1] = self.b2 * x - self.a2 * y;
        y
    }

    pub fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// State that holds the output steady for a constant input `x`.
    pub fn steady_state(&self, x: f64) -> [f64; 2] {
        let y = self.dc_gain() * x;
        let s1 = self.b2 * x - self.a2 * y;
        let s0 = self.b1 * x - self.a1 * y + s1;
        [s0, s1]
    }

    /// Complex frequency response at `f` Hz as (re, im).
    pub fn response(&self, f: f64, fs: f64) -> (f64, f64) {
        let w = 2.0 * PI * f / fs;
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        let num = (
            self.b0 + self.b1 * c1 + self.b2 * c2,
            self.b1 * s1 + self.b2 * s2,
        );
        let den = (
            1.0 + self.a1 * c1 + self.a2 * c2,
            self.a1 * s1 + self.a2 * s2,
        );
        let d = den.0 * den.0 + den.1 * den.1;
        (
            (num.0 * den.0 + num.1 * den.1) / d,
            (num.1 * den.0 - num.0 * den.1) / d,
        )
    }
}

/// High-pass at `lo` followed by low-pass at `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPass {
    pub highpass: Biquad,
    pub lowpass: Biquad,
}

impl BandPass {
    pub fn new(lo: f64, hi: f64, fs: f64) -> Self {
        Self {
            highpass: Biquad::highpass(lo, fs),
            lowpass: Biquad::lowpass(hi, fs),
        }
    }

    /// Runs one sample; `s` holds `[hp0, hp1, lp0, lp1]`.
    #[inline(always)]
    pub fn step(&self, x: f64, s: &mut [f64; 4]) -> f64 {
        let mut hp = [s[0], s[1]];
        let mut lp = [s[2], s[3]];
        let y = self.lowpass.step(self.highpass.step(x, &mut hp), &mut lp);
        *s = [hp[0], hp[1], lp[0], lp[1]];
        y
    }

    /// State for a stream that has been constant at `x` forever.
    pub fn steady_state(&self, x: f64) -> [f64; 4] {
        let hp = self.highpass.steady_state(x);
        let lp = self.lowpass.steady_state(self.highpass.dc_gain() * x);
        [hp[0], hp[1], lp[0], lp[1]]
    }

    pub fn gain(&self, f: f64, fs: f64) -> f64 {
        let (a, b) = self.highpass.response(f, fs);
        let (c, d) = self.lowpass.response(f, fs);
        ((a * a + b * b) * (c * c + d * d)).sqrt()
    }
}
