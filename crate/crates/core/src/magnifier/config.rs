use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pyramid;

/// Default amplification for the two frame-pair modes.
pub const DEFAULT_ALPHA_PAIR: f64 = 10.0;
/// Default amplification for temporal-filter mode.
pub const DEFAULT_ALPHA_TEMPORAL: f64 = 20.0;
/// Shortest clip the offline temporal filter accepts.
pub const MIN_TEMPORAL_FRAMES: usize = 8;

/// How the reference for the amplified difference is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Difference against the first frame.
    Static,
    /// Difference against the previous input frame.
    Dynamic,
    /// Per-coefficient temporal band-pass.
    Temporal,
}

impl Mode {
    pub fn default_alpha(self) -> f64 {
        match self {
            Mode::Static | Mode::Dynamic => DEFAULT_ALPHA_PAIR,
            Mode::Temporal => DEFAULT_ALPHA_TEMPORAL,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Static => "static",
            Mode::Dynamic => "dynamic",
            Mode::Temporal => "temporal",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(Mode::Static),
            "dynamic" => Ok(Mode::Dynamic),
            "temporal" => Ok(Mode::Temporal),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Temporal pass band in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBand {
    pub lo: f64,
    pub hi: f64,
}

impl FrequencyBand {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// `0 < lo < hi < fps / 2`.
    pub fn validate(&self, fps: f64) -> Result<()> {
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi < fps / 2.0) {
            return Err(Error::Config(format!(
                "band [{}, {}] Hz must satisfy 0 < lo < hi < fps/2 = {}",
                self.lo,
                self.hi,
                fps / 2.0
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnificationConfig {
    pub mode: Mode,
    pub alpha: f64,
    /// Required in temporal mode, ignored otherwise.
    pub band: Option<FrequencyBand>,
    /// Band-pass level count; `None` picks [`pyramid::default_depth`].
    pub depth: Option<usize>,
    /// Fraction of `alpha` applied to the chroma planes. Zero leaves chroma
    /// untouched.
    pub chroma_gain: f64,
    /// Per-level multipliers on `alpha`, finest level first. `None` uses
    /// half gain on level 0 and full gain elsewhere. A shorter list is
    /// padded with 1.0.
    pub level_alpha_taper: Option<Vec<f64>>,
}

impl MagnificationConfig {
    /// Mode defaults: alpha 10 for static/dynamic, 20 for temporal.
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            alpha: mode.default_alpha(),
            band: None,
            depth: None,
            chroma_gain: 0.0,
            level_alpha_taper: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_band(mut self, lo: f64, hi: f64) -> Self {
        self.band = Some(FrequencyBand::new(lo, hi));
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = Some(depth);
        self
    }

    pub fn with_chroma_gain(mut self, g: f64) -> Self {
        self.chroma_gain = g;
        self
    }

    pub fn with_taper(mut self, taper: Vec<f64>) -> Self {
        self.level_alpha_taper = Some(taper);
        self
    }

    /// Checks everything that does not depend on the input clip.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.chroma_gain) {
            return Err(Error::Config(format!(
                "chroma_gain must be in [0, 1], got {}",
                self.chroma_gain
            )));
        }
        if self.depth == Some(0) {
            return Err(Error::Config("depth must be >= 1".into()));
        }
        if let Some(t) = &self.level_alpha_taper {
            if t.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Config(
                    "taper entries must be finite and >= 0".into(),
                ));
            }
        }
        if self.mode == Mode::Temporal && self.band.is_none() {
            return Err(Error::Config(
                "temporal mode requires a frequency band".into(),
            ));
        }
        Ok(())
    }

    /// Full validation against a clip's frame rate and dimensions.
    pub fn validate_for(&self, fps: f64, width: usize, height: usize) -> Result<()> {
        self.validate()?;
        if self.mode == Mode::Temporal {
            if let Some(b) = &self.band {
                b.validate(fps)?;
            }
        }
        self.resolve_depth(width, height)?;
        Ok(())
    }

    pub fn resolve_depth(&self, width: usize, height: usize) -> Result<usize> {
        let d = self
            .depth
            .unwrap_or_else(|| pyramid::default_depth(width, height));
        if d == 0 || d > pyramid::max_depth(width, height) {
            return Err(Error::DepthTooLarge {
                depth: d,
                width,
                height,
            });
        }
        Ok(d)
    }

    /// Per-level taper for a pyramid of `depth` levels.
    pub fn taper(&self, depth: usize) -> Result<Vec<f64>> {
        match &self.level_alpha_taper {
            None => Ok(default_taper(depth)),
            Some(t) if t.len() > depth => Err(Error::Config(format!(
                "taper has {} entries for a {depth}-level pyramid",
                t.len()
            ))),
            Some(t) => {
                let mut t = t.clone();
                t.resize(depth, 1.0);
                Ok(t)
            }
        }
    }

    /// `alpha * taper[k]` per level.
    pub fn level_gains(&self, depth: usize, alpha: f64) -> Result<Vec<f64>> {
        Ok(self.taper(depth)?.into_iter().map(|t| t * alpha).collect())
    }
}

/// Half gain on the finest band, full gain elsewhere.
pub fn default_taper(depth: usize) -> Vec<f64> {
    (0..depth).map(|k| if k == 0 { 0.5 } else { 1.0 }).collect()
}
