//! Tremor detection by band-energy ratios of region motion signals.
//!
//! A region's motion signal is the mean absolute luma frame difference. Its
//! windowed spectra are split into tremor, breathing and movement energy, and
//! windows whose tremor share exceeds the threshold are merged into episodes.

mod score;
mod spectrum;
mod stream;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use self::score::{
    band_energies, classify, merge_episodes, score_each_window, score_windows, BandEnergies,
    BinClass, TremorEpisode, WindowScore,
};
pub use self::spectrum::{
    average_spectra, median_power, power_spectrum, window_geometry, WindowSpectrum,
    MIN_WINDOW_SAMPLES,
};
pub use self::stream::StreamScorer;

use crate::error::{Error, Result};
use crate::video::VideoSequence;

pub const FULL_FRAME_REGION: &str = "frame";

/// Pixel rectangle with an identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub id: String,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Region {
    pub fn new(id: impl Into<String>, x: usize, y: usize, w: usize, h: usize) -> Self {
        Self {
            id: id.into(),
            x,
            y,
            w,
            h,
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Self::new(FULL_FRAME_REGION, 0, 0, width, height)
    }

    pub fn check(&self, width: usize, height: usize) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::Config(format!("region {:?} is empty", self.id)));
        }
        let inside = self.x.checked_add(self.w).is_some_and(|r| r <= width)
            && self.y.checked_add(self.h).is_some_and(|b| b <= height);
        if !inside {
            return Err(Error::Config(format!(
                "region {:?} ({}x{} at {},{}) exceeds the {width}x{height} frame",
                self.id, self.w, self.h, self.x, self.y
            )));
        }
        Ok(())
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    /// `[id=]x,y,w,h`
    fn from_str(s: &str) -> Result<Self> {
        let (id, rect) = match s.split_once('=') {
            Some((id, rect)) => (id.trim().to_string(), rect),
            None => (String::new(), s),
        };
        let v: Vec<usize> = rect
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("region {s:?} is not [id=]x,y,w,h")))?;
        let [x, y, w, h] = v[..] else {
            return Err(Error::Config(format!("region {s:?} is not [id=]x,y,w,h")));
        };
        let id = if id.is_empty() {
            format!("{x},{y},{w},{h}")
        } else {
            id
        };
        Ok(Self::new(id, x, y, w, h))
    }
}

/// Per-frame motion energy of one region; `samples[t - 1]` compares frames
/// `t` and `t - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSignal {
    pub region: String,
    pub samples: Vec<f64>,
    pub fps: f64,
}

impl MotionSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            region: self.region.clone(),
            samples: self.samples.iter().map(|v| v * c).collect(),
            fps: self.fps,
        }
    }

    /// Mean-square value.
    pub fn energy(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }
}

/// One signal per region; an empty list means the whole frame.
pub fn extract_motion_signal(seq: &VideoSequence, regions: &[Region]) -> Result<Vec<MotionSignal>> {
    let (w, h) = seq
        .dims()
        .ok_or_else(|| Error::InvalidInput("empty sequence".into()))?;
    if seq.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "motion signal needs at least 2 frames, got {}",
            seq.len()
        )));
    }
    let full = [Region::full(w, h)];
    let regions = if regions.is_empty() {
        &full[..]
    } else {
        regions
    };
    for r in regions {
        r.check(w, h)?;
    }
    let frames = seq.frames();
    // [pair][region]
    let per_pair: Vec<Vec<f64>> = frames
        .par_windows(2)
        .map(|pair| {
            let (a, b) = (pair[0].luma(), pair[1].luma());
            regions
                .iter()
                .map(|r| {
                    let mut sum = 0.0;
                    for y in r.y..r.y + r.h {
                        let (ra, rb) = (&a.row(y)[r.x..r.x + r.w], &b.row(y)[r.x..r.x + r.w]);
                        sum += ra
                            .iter()
                            .zip(rb)
                            .map(|(p, q)| (f64::from(*q) - f64::from(*p)).abs())
                            .sum::<f64>();
                    }
                    sum / (r.w * r.h) as f64
                })
                .collect()
        })
        .collect();
    Ok(regions
        .iter()
        .enumerate()
        .map(|(i, r)| MotionSignal {
            region: r.id.clone(),
            samples: per_pair.iter().map(|p| p[i]).collect(),
            fps: seq.fps(),
        })
        .collect())
}

/// Closed frequency interval in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, f: f64) -> bool {
        self.lo <= f && f <= self.hi
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.lo * k, self.hi * k)
    }
}

/// Band edges. Bands may overlap; overlapping bins go to the first of
/// tremor, breathing, movement that claims them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub tremor: Band,
    pub breathing: Band,
    pub movement: Band,
}

impl Default for BandSpec {
    fn default() -> Self {
        Self {
            tremor: Band::new(4.0, 10.0),
            breathing: Band::new(0.3, 1.5),
            movement: Band::new(0.0, 3.0),
        }
    }
}

impl BandSpec {
    /// `0 <= lo < hi < fps / 2` for every band.
    pub fn validate(&self, fps: f64) -> Result<()> {
        for (name, b) in [
            ("tremor", self.tremor),
            ("breathing", self.breathing),
            ("movement", self.movement),
        ] {
            if !(b.lo >= 0.0 && b.lo < b.hi && b.hi < fps / 2.0) {
                return Err(Error::Config(format!(
                    "{name} band [{}, {}] Hz must satisfy 0 <= lo < hi < fps/2 = {}",
                    b.lo,
                    b.hi,
                    fps / 2.0
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub bands: BandSpec,
    pub window_s: f64,
    /// Fraction of a window shared with the next, in [0, 1).
    pub overlap: f64,
    pub threshold: f64,
    pub min_duration_s: f64,
    /// Windows with total band energy at or below this score zero.
    pub energy_floor: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            bands: BandSpec::default(),
            window_s: 4.0,
            overlap: 0.5,
            threshold: 0.5,
            min_duration_s: 2.0,
            energy_floor: 0.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self, fps: f64) -> Result<()> {
        self.bands.validate(fps)?;
        window_geometry(fps, self.window_s, self.overlap)?;
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!(
                "threshold must be in [0, 1], got {}",
                self.threshold
            )));
        }
        if !(self.min_duration_s >= 0.0 && self.min_duration_s.is_finite()) {
            return Err(Error::Config(format!(
                "min_duration must be >= 0, got {}",
                self.min_duration_s
            )));
        }
        if !(self.energy_floor >= 0.0 && self.energy_floor.is_finite()) {
            return Err(Error::Config(format!(
                "energy_floor must be >= 0, got {}",
                self.energy_floor
            )));
        }
        Ok(())
    }
}

/// Detector output for one region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionDetection {
    pub region: String,
    pub windows: Vec<WindowScore>,
    pub episodes: Vec<TremorEpisode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub regions: Vec<RegionDetection>,
}

impl Detection {
    /// All episodes ordered by start time, then region.
    pub fn episodes(&self) -> Vec<TremorEpisode> {
        let mut all: Vec<TremorEpisode> = self
            .regions
            .iter()
            .flat_map(|r| r.episodes.iter().cloned())
            .collect();
        all.sort_by(|a, b| {
            a.start_s
                .total_cmp(&b.start_s)
                .then_with(|| a.region.cmp(&b.region))
        });
        all
    }

    pub fn max_score(&self) -> f64 {
        self.regions
            .iter()
            .flat_map(|r| r.windows.iter().map(|w| w.score))
            .fold(0.0, f64::max)
    }
}

pub fn detect_signals(signals: &[MotionSignal], cfg: &DetectorConfig) -> Result<Detection> {
    let regions = signals
        .par_iter()
        .map(|s| {
            cfg.validate(s.fps)?;
            let spectra = power_spectrum(s, cfg.window_s, cfg.overlap)?;
            let windows = score_each_window(&spectra, cfg, s.fps);
            let episodes = merge_episodes(&s.region, &windows, cfg.min_duration_s);
            Ok(RegionDetection {
                region: s.region.clone(),
                windows,
                episodes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Detection { regions })
}

pub fn detect(seq: &VideoSequence, regions: &[Region], cfg: &DetectorConfig) -> Result<Detection> {
    cfg.validate(seq.fps())?;
    let signals = extract_motion_signal(seq, regions)?;
    detect_signals(&signals, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Plane;
    use crate::video::Frame;
    use std::f64::consts::PI;

    fn seq_from(
        f: impl Fn(usize, usize, usize) -> f64,
        n: usize,
        w: usize,
        h: usize,
        fps: f64,
    ) -> VideoSequence {
        let frames = (0..n)
            .map(|t| Frame::from_luma(t, &Plane::from_fn(w, h, |x, y| f(t, x, y))))
            .collect();
        VideoSequence::new(frames, fps).unwrap()
    }

    #[test]
    fn static_clip_gives_zero_signal() {
        let seq = seq_from(|_, x, y| 0.2 + 0.001 * (x * y) as f64, 5, 8, 6, 30.0);
        let s = extract_motion_signal(&seq, &[]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].region, FULL_FRAME_REGION);
        assert_eq!(s[0].samples, vec![0.0; 4]);
    }

    #[test]
    fn region_signal_is_mean_abs_difference() {
        let seq = seq_from(
            |t, x, _| if x < 4 { 0.1 * t as f64 } else { 0.5 },
            3,
            8,
            4,
            30.0,
        );
        let s = extract_motion_signal(
            &seq,
            &[Region::new("a", 0, 0, 4, 4), Region::new("b", 2, 0, 4, 2)],
        )
        .unwrap();
        for v in &s[0].samples {
            assert!((v - 0.1).abs() < 1e-6);
        }
        for v in &s[1].samples {
            assert!((v - 0.05).abs() < 1e-6);
        }
    }

    #[test]
    fn region_errors() {
        let seq = seq_from(|_, _, _| 0.5, 3, 8, 4, 30.0);
        let kind = |r: Region| extract_motion_signal(&seq, &[r]).unwrap_err().kind();
        assert_eq!(kind(Region::new("x", 5, 0, 4, 4)), crate::ErrorKind::Config);
        assert_eq!(kind(Region::new("x", 0, 0, 0, 4)), crate::ErrorKind::Config);
        let one = seq_from(|_, _, _| 0.5, 1, 8, 4, 30.0);
        assert!(extract_motion_signal(&one, &[]).is_err());
    }

    #[test]
    fn region_parsing() {
        let r: Region = "hand=1,2,30,40".parse().unwrap();
        assert_eq!(r, Region::new("hand", 1, 2, 30, 40));
        let r: Region = "1,2,3,4".parse().unwrap();
        assert_eq!(r.id, "1,2,3,4");
        assert!("1,2,3".parse::<Region>().is_err());
        assert!("a=1,2,x,4".parse::<Region>().is_err());
    }

    #[test]
    fn band_validation() {
        assert!(BandSpec::default().validate(30.0).is_ok());
        assert!(BandSpec::default().validate(15.0).is_err());
        assert!(DetectorConfig::default().validate(30.0).is_ok());
        let cfg = DetectorConfig {
            threshold: 1.5,
            ..DetectorConfig::default()
        };
        assert!(cfg.validate(30.0).is_err());
    }

    fn signal(f: impl Fn(f64) -> f64, secs: f64, fps: f64) -> MotionSignal {
        MotionSignal {
            region: "r".into(),
            samples: (0..(secs * fps) as usize)
                .map(|i| f(i as f64 / fps))
                .collect(),
            fps,
        }
    }

    #[test]
    fn tremor_then_still_gives_one_episode() {
        let s = signal(
            |t| {
                if t < 10.0 {
                    (2.0 * PI * 6.0 * t).sin().abs()
                } else {
                    0.0
                }
            },
            20.0,
            30.0,
        );
        let d = detect_signals(&[s], &DetectorConfig::default()).unwrap();
        let eps = d.episodes();
        assert_eq!(eps.len(), 1);
        assert!(
            eps[0].start_s.abs() <= 4.0 && (eps[0].end_s - 10.0).abs() <= 4.0,
            "{eps:?}"
        );
        assert!(eps[0].score > 0.5 && eps[0].score <= 1.0);
    }

    #[test]
    fn breathing_only_gives_no_episode() {
        let s = signal(|t| (2.0 * PI * 0.7 * t).sin().abs(), 20.0, 30.0);
        let d = detect_signals(&[s], &DetectorConfig::default()).unwrap();
        assert!(d.episodes().is_empty());
        assert!(d.max_score() < 0.5);
    }

    #[test]
    fn zero_signal_gives_no_episode() {
        let s = signal(|_| 0.0, 20.0, 30.0);
        let d = detect_signals(&[s], &DetectorConfig::default()).unwrap();
        assert!(d.episodes().is_empty());
        assert_eq!(d.max_score(), 0.0);
    }
}
