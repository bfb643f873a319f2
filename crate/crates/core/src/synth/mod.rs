//! Synthetic clips with known sub-pixel motion, and the measurements used to
//! check magnified output against them.
//!
//! Frame `t` samples a fixed texture at `x + d(t)`, so image content moves by
//! `-d(t)`; [`measure_displacement`] reports `d` under the same convention.

mod artefact;
mod groundtruth;
mod phasecorr;
pub mod texture;
mod warp;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::f64::consts::PI;

pub use self::artefact::{artefact_energy, StillMask, STILL_TOLERANCE};
pub use self::groundtruth::{GroundTruth, TruthSample, MAGIC as GROUND_TRUTH_MAGIC};
pub use self::phasecorr::{default_peak_sigma, measure_displacement, PhaseCorrelator, Spectrum};
pub use self::warp::{catmull_rom, gaussian_blur, translate_window, warp_window, CUBIC_SUPPORT};

use crate::error::{Error, Result};
use crate::grid::Plane;
use crate::video::{check_fps, Frame, VideoSequence};

/// Pre-blur applied to every texture before warping.
pub const PRE_BLUR_SIGMA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionKind {
    /// `d(t) = A sin(2 pi f t)` along `direction_deg`.
    TranslateSin,
    /// `d(t) = A t / duration` along `direction_deg`.
    TranslateRamp,
    /// Rotation by `angle_rate` degrees per frame about the frame centre.
    Rotate,
    /// Sum of gated sinusoidal components.
    Composite,
}

impl MotionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MotionKind::TranslateSin => "translate-sin",
            MotionKind::TranslateRamp => "translate-ramp",
            MotionKind::Rotate => "rotate",
            MotionKind::Composite => "composite",
        }
    }
}

impl std::str::FromStr for MotionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translate-sin" => Ok(MotionKind::TranslateSin),
            "translate-ramp" => Ok(MotionKind::TranslateRamp),
            "rotate" => Ok(MotionKind::Rotate),
            "composite" => Ok(MotionKind::Composite),
            other => Err(Error::Config(format!("unknown motion kind '{other}'"))),
        }
    }
}

/// Sinusoidal translation active on `[start_s, end_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionComponent {
    pub amplitude: f64,
    pub frequency: f64,
    pub direction_deg: f64,
    pub start_s: f64,
    pub end_s: f64,
    pub label: String,
}

impl MotionComponent {
    fn active(&self, t: f64) -> bool {
        t >= self.start_s && t < self.end_s
    }

    fn displacement(&self, t: f64) -> (f64, f64) {
        if !self.active(t) {
            return (0.0, 0.0);
        }
        let a = self.amplitude * (2.0 * PI * self.frequency * (t - self.start_s)).sin();
        let (s, c) = self.direction_deg.to_radians().sin_cos();
        (a * c, a * s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionSpec {
    pub kind: MotionKind,
    /// Peak displacement in px.
    pub amplitude: f64,
    /// Hz, translate-sin only.
    pub frequency: f64,
    /// Degrees per frame, rotate only.
    pub angle_rate: f64,
    /// Direction of translation in degrees from +x towards +y.
    pub direction_deg: f64,
    pub duration_s: f64,
    pub fps: f64,
    /// Standard deviation of additive Gaussian luma noise.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Composite only.
    pub components: Vec<MotionComponent>,
    /// Output size; `None` crops the largest centred window that stays inside
    /// the texture for the whole clip.
    pub frame_size: Option<(usize, usize)>,
}

impl MotionSpec {
    fn base(kind: MotionKind, duration_s: f64, fps: f64) -> Self {
        Self {
            kind,
            amplitude: 0.0,
            frequency: 0.0,
            angle_rate: 0.0,
            direction_deg: 0.0,
            duration_s,
            fps,
            noise_sigma: 0.0,
            seed: 0,
            components: Vec::new(),
            frame_size: None,
        }
    }

    pub fn translate_sin(amplitude: f64, frequency: f64, duration_s: f64, fps: f64) -> Self {
        Self {
            amplitude,
            frequency,
            ..Self::base(MotionKind::TranslateSin, duration_s, fps)
        }
    }

    pub fn translate_ramp(amplitude: f64, duration_s: f64, fps: f64) -> Self {
        Self {
            amplitude,
            ..Self::base(MotionKind::TranslateRamp, duration_s, fps)
        }
    }

    pub fn rotate(angle_rate: f64, duration_s: f64, fps: f64) -> Self {
        Self {
            angle_rate,
            ..Self::base(MotionKind::Rotate, duration_s, fps)
        }
    }

    pub fn composite(components: Vec<MotionComponent>, duration_s: f64, fps: f64) -> Self {
        Self {
            components,
            ..Self::base(MotionKind::Composite, duration_s, fps)
        }
    }

    pub fn with_direction(mut self, deg: f64) -> Self {
        self.direction_deg = deg;
        self
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise_sigma = sigma;
        self.seed = seed;
        self
    }

    pub fn with_frame_size(mut self, w: usize, h: usize) -> Self {
        self.frame_size = Some((w, h));
        self
    }

    pub fn frame_count(&self) -> usize {
        (self.duration_s * self.fps).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        check_fps(self.fps)?;
        let nyquist = self.fps / 2.0;
        if self.frame_count() < 2 {
            return Err(Error::Config("clip must span at least two frames".into()));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config("amplitude must be >= 0".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config("noise sigma must be >= 0".into()));
        }
        if self.kind == MotionKind::TranslateSin
            && !(self.frequency >= 0.0 && self.frequency < nyquist)
        {
            return Err(Error::Config(format!(
                "frequency must be in [0, {nyquist})"
            )));
        }
        if self.kind == MotionKind::Composite {
            for c in &self.components {
                if !(c.amplitude >= 0.0 && c.frequency >= 0.0 && c.frequency < nyquist) {
                    return Err(Error::Config(format!("invalid component '{}'", c.label)));
                }
                if c.label.is_empty() || c.label.contains(char::is_whitespace) {
                    return Err(Error::Config(
                        "component labels must be non-empty words".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Commanded displacement and label of frame `i`.
    pub fn motion_at(&self, i: usize) -> (f64, f64, String) {
        let t = i as f64 / self.fps;
        let (s, c) = self.direction_deg.to_radians().sin_cos();
        match self.kind {
            MotionKind::TranslateSin => {
                let a = self.amplitude * (2.0 * PI * self.frequency * t).sin();
                (a * c, a * s, "sin".into())
            }
            MotionKind::TranslateRamp => {
                let a = self.amplitude * t / self.duration_s;
                (a * c, a * s, "ramp".into())
            }
            MotionKind::Rotate => (
                0.0,
                0.0,
                format!("rotate:{:.4}", self.angle_rate * i as f64),
            ),
            MotionKind::Composite => {
                let (mut dx, mut dy) = (0.0, 0.0);
                let mut labels: Vec<&str> = Vec::new();
                for comp in &self.components {
                    if comp.active(t) {
                        let (a, b) = comp.displacement(t);
                        dx += a;
                        dy += b;
                        labels.push(&comp.label);
                    }
                }
                let label = if labels.is_empty() {
                    "still".to_string()
                } else {
                    labels.join("+")
                };
                (dx, dy, label)
            }
        }
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            fps: self.fps,
            samples: (0..self.frame_count())
                .map(|i| {
                    let (dx, dy, label) = self.motion_at(i);
                    TruthSample {
                        t: i as f64 / self.fps,
                        dx,
                        dy,
                        label,
                    }
                })
                .collect(),
        }
    }
}

fn default_frame_size(
    spec: &MotionSpec,
    gt: &GroundTruth,
    tw: usize,
    th: usize,
) -> Result<(usize, usize)> {
    let margin = if spec.kind == MotionKind::Rotate {
        0.0
    } else {
        gt.samples
            .iter()
            .map(|s| s.dx.abs().max(s.dy.abs()))
            .fold(0.0, f64::max)
            .ceil()
    };
    let pad = 2 * (margin as usize + CUBIC_SUPPORT + 1);
    let (w, h) = if spec.kind == MotionKind::Rotate {
        // Largest square whose every rotation stays inside the texture.
        let side = ((tw.min(th) as f64 - pad as f64) / std::f64::consts::SQRT_2).floor();
        (side as usize, side as usize)
    } else {
        (tw.saturating_sub(pad), th.saturating_sub(pad))
    };
    if w < 2 || h < 2 {
        return Err(Error::InvalidInput(format!(
            "{tw}x{th} texture too small for the motion"
        )));
    }
    Ok((w, h))
}

/// Renders `spec` over `texture` (pre-blurred by [`PRE_BLUR_SIGMA`]). Frames
/// are a centred window of the texture; chroma planes are warped with luma.
pub fn render_clip(texture: &Frame, spec: &MotionSpec) -> Result<(VideoSequence, GroundTruth)> {
    spec.validate()?;
    let (tw, th) = texture.dims();
    let gt = spec.ground_truth();
    let (w, h) = match spec.frame_size {
        Some(s) => s,
        None => default_frame_size(spec, &gt, tw, th)?,
    };
    if w > tw || h > th || w == 0 || h == 0 {
        return Err(Error::InvalidInput(format!(
            "{w}x{h} window does not fit the {tw}x{th} texture"
        )));
    }
    let ox = (tw - w) as f64 / 2.0;
    let oy = (th - h) as f64 / 2.0;
    let planes: Vec<Option<Plane>> = (0..3)
        .map(|c| {
            let p = texture.plane_f64(c);
            (c == 0 || p.as_slice().iter().any(|v| *v != 0.0))
                .then(|| gaussian_blur(&p, PRE_BLUR_SIGMA))
        })
        .collect();
    let noise = (spec.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, spec.noise_sigma))
        .transpose()
        .map_err(|e| Error::Config(e.to_string()))?;

    let frames = (0..spec.frame_count())
        .into_par_iter()
        .map(|i| {
            let s = &gt.samples[i];
            let warp = |p: &Plane| -> Result<Plane> {
                match spec.kind {
                    MotionKind::Rotate => {
                        let th = (spec.angle_rate * i as f64).to_radians();
                        let (sn, cs) = th.sin_cos();
                        let (cx, cy) = ((w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0);
                        warp_window(p, w, h, |x, y| {
                            let (u, v) = (x - cx, y - cy);
                            (ox + cx + cs * u - sn * v, oy + cy + sn * u + cs * v)
                        })
                    }
                    _ => translate_window(p, ox + s.dx, oy + s.dy, w, h),
                }
            };
            let mut out: Vec<Plane> = Vec::with_capacity(3);
            for p in &planes {
                out.push(match p {
                    Some(p) => warp(p)?,
                    None => Plane::zeros(w, h),
                });
            }
            if let Some(n) = &noise {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(i as u64);
                out[0]
                    .as_mut_slice()
                    .iter_mut()
                    .for_each(|v| *v += n.sample(&mut rng));
            }
            Ok(Frame::from_unclamped(i, &out[0], &out[1], &out[2]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((VideoSequence::new(frames, spec.fps)?, gt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tex() -> Frame {
        Frame::from_luma(0, &texture::filtered_noise(96, 96, 4.0, 0.0, 0.1, 3))
    }

    #[test]
    fn zero_amplitude_gives_identical_frames() {
        let (seq, gt) =
            render_clip(&tex(), &MotionSpec::translate_sin(0.0, 2.0, 1.0, 30.0)).unwrap();
        assert_eq!(seq.len(), 30);
        assert_eq!(gt.len(), 30);
        assert!(seq
            .frames()
            .iter()
            .all(|f| f.planes() == seq.frames()[0].planes()));
    }

    #[test]
    fn render_is_deterministic_given_seed() {
        let spec = MotionSpec::translate_sin(0.3, 2.0, 0.5, 30.0).with_noise(0.01, 5);
        let a = render_clip(&tex(), &spec).unwrap();
        let b = render_clip(&tex(), &spec).unwrap();
        assert_eq!(a, b);
        let c = render_clip(&tex(), &spec.clone().with_noise(0.01, 6)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn oversized_window_is_rejected() {
        let spec = MotionSpec::translate_sin(3.0, 2.0, 0.5, 30.0).with_frame_size(92, 92);
        assert!(render_clip(&tex(), &spec).is_err());
        let spec = MotionSpec::rotate(0.5, 0.5, 30.0).with_frame_size(90, 90);
        assert!(render_clip(&tex(), &spec).is_err());
        assert!(render_clip(&tex(), &MotionSpec::rotate(0.5, 0.5, 30.0)).is_ok());
    }

    #[test]
    fn composite_labels_follow_gates() {
        let comp = |label: &str, start, end| MotionComponent {
            amplitude: 0.2,
            frequency: 6.0,
            direction_deg: 0.0,
            start_s: start,
            end_s: end,
            label: label.into(),
        };
        let spec = MotionSpec::composite(
            vec![comp("tremor", 0.0, 1.0), comp("breath", 0.5, 2.0)],
            3.0,
            10.0,
        );
        let gt = spec.ground_truth();
        assert_eq!(gt.samples[0].label, "tremor");
        assert_eq!(gt.samples[7].label, "tremor+breath");
        assert_eq!(gt.samples[15].label, "breath");
        assert_eq!(gt.samples[25].label, "still");
        assert_eq!(gt.samples[25].dx, 0.0);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(MotionSpec::translate_sin(0.2, 16.0, 1.0, 30.0)
            .validate()
            .is_err());
        assert!(MotionSpec::translate_sin(-0.2, 2.0, 1.0, 30.0)
            .validate()
            .is_err());
        assert!(MotionSpec::translate_sin(0.2, 2.0, 0.01, 30.0)
            .validate()
            .is_err());
    }
}
