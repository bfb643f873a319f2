//! Offline temporal-filter mode with an ideal (frequency-mask) band-pass.
//!
//! Band-passing along time commutes with the spatial pyramid (both are
//! linear and act on separate axes), so each pixel series is filtered once at
//! full resolution and the per-level gains are applied to the pyramid of the
//! filtered frame. This yields the same per-level band-passed coefficients as
//! filtering every pyramid coefficient separately.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::config::{FrequencyBand, MagnificationConfig, Mode, MIN_TEMPORAL_FRAMES};
use super::{assemble, ChannelAmplifiers};
use crate::error::{Error, Result};
use crate::grid::Plane;
use crate::video::{Frame, VideoSequence};

// Pixels per parallel task (pairs are packed into one complex series).
const PIXEL_BLOCK: usize = 512;

/// FFT bins kept by the ideal filter: `lo <= |f_k| <= hi`.
fn pass_mask(n: usize, fps: f64, band: FrequencyBand) -> Vec<bool> {
    (0..n)
        .map(|k| {
            let f = k.min(n - k) as f64 * fps / n as f64;
            f >= band.lo && f <= band.hi
        })
        .collect()
}

/// Ideal band-pass of one real series.
pub fn ideal_bandpass(signal: &[f64], fps: f64, band: FrequencyBand) -> Vec<f64> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mask = pass_mask(n, fps, band);
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (b, keep) in buf.iter_mut().zip(&mask) {
        if !keep {
            *b = Complex::new(0.0, 0.0);
        }
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Band-passes every pixel series of channel `c`. Output is pixel-major:
/// sample `t` of pixel `p` lives at `p * n + t`.
fn bandpass_channel(frames: &[Frame], c: usize, fps: f64, band: FrequencyBand) -> Vec<f32> {
    let n = frames.len();
    let npix = frames[0].width() * frames[0].height();
    let mask = pass_mask(n, fps, band);
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let planes: Vec<&[f32]> = frames.iter().map(|f| f.planes()[c].as_slice()).collect();
    let scale = 1.0 / n as f64;

    let mut out = vec![0.0f32; npix * n];
    out.par_chunks_mut(PIXEL_BLOCK * n)
        .enumerate()
        .for_each(|(block, chunk)| {
            let p0 = block * PIXEL_BLOCK;
            let count = chunk.len() / n;
            let mut buf = vec![Complex::new(0.0, 0.0); n];
            let mut scratch = vec![
                Complex::new(0.0, 0.0);
                fwd.get_inplace_scratch_len()
                    .max(inv.get_inplace_scratch_len())
            ];
            let mut i = 0;
            while i < count {
                // The mask is conjugate-symmetric, so two real series packed as
                // re/im come back out independently.
                let pa = p0 + i;
                let pb = (i + 1 < count).then_some(pa + 1);
                for (t, b) in buf.iter_mut().enumerate() {
                    let re = planes[t][pa] as f64;
                    let im = pb.map_or(0.0, |p| planes[t][p] as f64);
                    *b = Complex::new(re, im);
                }
                fwd.process_with_scratch(&mut buf, &mut scratch);
                for (b, keep) in buf.iter_mut().zip(&mask) {
                    if !keep {
                        *b = Complex::new(0.0, 0.0);
                    }
                }
                inv.process_with_scratch(&mut buf, &mut scratch);
                let (ra, rest) = chunk[i * n..].split_at_mut(n);
                for (dst, b) in ra.iter_mut().zip(&buf) {
                    *dst = (b.re * scale) as f32;
                }
                if pb.is_some() {
                    for (dst, b) in rest[..n].iter_mut().zip(&buf) {
                        *dst = (b.im * scale) as f32;
                    }
                }
                i += 2;
            }
        });
    out
}

fn check_temporal_input(
    seq: &VideoSequence,
    cfg: &MagnificationConfig,
) -> Result<(usize, usize, FrequencyBand)> {
    if cfg.mode != Mode::Temporal {
        return Err(Error::Config(format!(
            "expected temporal mode, got {}",
            cfg.mode
        )));
    }
    let (w, h) = seq
        .dims()
        .ok_or_else(|| Error::InvalidInput("empty sequence".into()))?;
    cfg.validate_for(seq.fps(), w, h)?;
    if seq.len() < MIN_TEMPORAL_FRAMES {
        return Err(Error::InvalidInput(format!(
            "temporal filter needs at least {MIN_TEMPORAL_FRAMES} frames, got {}",
            seq.len()
        )));
    }
    let band = cfg.band.expect("validated temporal config has a band");
    Ok((w, h, band))
}

/// Unclamped temporal-mode output planes `[Y, Cb, Cr]` per frame. Channels
/// that are not amplified are copied from the input.
pub fn magnify_temporal_unclamped(
    seq: &VideoSequence,
    cfg: &MagnificationConfig,
) -> Result<Vec<[Plane; 3]>> {
    let (w, h, band) = check_temporal_input(seq, cfg)?;
    let amps = ChannelAmplifiers::new(cfg, w, h)?;
    let frames = seq.frames();
    let n = frames.len();
    let filtered: Vec<(usize, Vec<f32>)> = amps
        .channels()
        .map(|(c, _)| (c, bandpass_channel(frames, c, seq.fps(), band)))
        .collect();

    frames
        .par_iter()
        .enumerate()
        .map(|(t, f)| {
            let mut planes = [f.plane_f64(0), f.plane_f64(1), f.plane_f64(2)];
            for ((c, amp), (_, series)) in amps.channels().zip(&filtered) {
                if amp.is_identity() {
                    continue;
                }
                let b =
                    Plane::from_vec(w, h, (0..w * h).map(|p| series[p * n + t] as f64).collect());
                let boost = amp.amplified_delta(&b)?;
                planes[c]
                    .as_mut_slice()
                    .iter_mut()
                    .zip(boost.as_slice())
                    .for_each(|(o, d)| *o += d);
            }
            Ok(planes)
        })
        .collect()
}

/// Temporal mode: `X_t + collapse(taper * alpha * build(bandpass(X)_t))`,
/// clamped.
pub fn magnify_temporal(seq: &VideoSequence, cfg: &MagnificationConfig) -> Result<VideoSequence> {
    let (w, h, _) = check_temporal_input(seq, cfg)?;
    let amps = ChannelAmplifiers::new(cfg, w, h)?;
    let planes = magnify_temporal_unclamped(seq, cfg)?;
    let frames = seq
        .frames()
        .par_iter()
        .zip(planes)
        .map(|(f, [y, cb, cr])| {
            let chroma = amps.chroma.is_some();
            assemble(f, [Some(y), chroma.then_some(cb), chroma.then_some(cr)])
        })
        .collect();
    VideoSequence::new(frames, seq.fps())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(n: usize, f: f64, fps: f64, amp: f64, dc: f64) -> Vec<f64> {
        (0..n)
            .map(|i| dc + amp * (2.0 * PI * f * i as f64 / fps).sin())
            .collect()
    }

    #[test]
    fn ideal_filter_passes_band_and_drops_dc() {
        let x = sine(150, 2.0, 30.0, 0.1, 0.5);
        let y = ideal_bandpass(&x, 30.0, FrequencyBand::new(1.0, 3.0));
        let want = sine(150, 2.0, 30.0, 0.1, 0.0);
        for (a, b) in y.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        let z = ideal_bandpass(&x, 30.0, FrequencyBand::new(4.0, 8.0));
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn packed_channel_filter_matches_scalar_filter() {
        let (w, h, n) = (5, 3, 24);
        let frames: Vec<Frame> = (0..n)
            .map(|t| {
                Frame::from_luma(
                    t,
                    &Plane::from_fn(w, h, |x, y| {
                        0.5 + 0.05 * ((t * (x + 1) + 3 * y) as f64 * 0.7).sin()
                    }),
                )
            })
            .collect();
        let band = FrequencyBand::new(2.0, 6.0);
        let packed = bandpass_channel(&frames, 0, 30.0, band);
        for p in 0..w * h {
            let series: Vec<f64> = frames
                .iter()
                .map(|f| f.luma().as_slice()[p] as f64)
                .collect();
            let want = ideal_bandpass(&series, 30.0, band);
            for t in 0..n {
                assert!((packed[p * n + t] as f64 - want[t]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_short_clip_and_bad_band() {
        let frames: Vec<Frame> = (0..5)
            .map(|t| Frame::from_luma(t, &Plane::filled(16, 16, 0.5)))
            .collect();
        let seq = VideoSequence::new(frames, 30.0).unwrap();
        let cfg = MagnificationConfig::new(Mode::Temporal).with_band(1.0, 3.0);
        assert!(magnify_temporal(&seq, &cfg).is_err());
        let frames: Vec<Frame> = (0..10)
            .map(|t| Frame::from_luma(t, &Plane::filled(16, 16, 0.5)))
            .collect();
        let seq = VideoSequence::new(frames, 30.0).unwrap();
        assert!(magnify_temporal(&seq, &cfg.clone().with_band(5.0, 16.0)).is_err());
        let out = magnify_temporal(&seq, &cfg).unwrap();
        assert_eq!(out, seq);
    }
}
