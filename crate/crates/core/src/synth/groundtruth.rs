//! Plain-text ground-truth sidecar.
//!
//! ```text
//! # tremorscope-groundtruth v1
//! # fps=30
//! # columns: t dx dy label
//! 0.000000 0.000000000 0.000000000 tremor
//! ```
//!
//! One line per frame: time in seconds, the commanded displacement in pixels
//! (`frame(x) = texture(x + d)`), and a whitespace-free label. Lines starting
//! with `#` after the magic line are comments.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const MAGIC: &str = "# tremorscope-groundtruth v1";

#[derive(Debug, Clone, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub dx: f64,
    pub dy: f64,
    pub label: String,
}

/// Commanded motion for every frame of a synthetic clip.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub fps: f64,
    pub samples: Vec<TruthSample>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Maximal runs of frames whose label satisfies `pred`, as `[start, end)`
    /// in seconds.
    pub fn intervals(&self, pred: impl Fn(&str) -> bool) -> Vec<(f64, f64)> {
        let dt = 1.0 / self.fps;
        let mut out = Vec::new();
        let mut open: Option<f64> = None;
        for s in &self.samples {
            match (pred(&s.label), open) {
                (true, None) => open = Some(s.t),
                (false, Some(a)) => {
                    out.push((a, s.t));
                    open = None;
                }
                _ => {}
            }
        }
        if let (Some(a), Some(last)) = (open, self.samples.last()) {
            out.push((a, last.t + dt));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{MAGIC}\n# fps={}\n# columns: t dx dy label\n", self.fps);
        for r in &self.samples {
            let _ = writeln!(s, "{:.6} {:.9} {:.9} {}", r.t, r.dx, r.dy, r.label);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| {
            Error::InvalidInput(format!("ground truth line {line}: {msg}"))
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(bad(1, "missing header")),
        }
        let mut fps = None;
        let mut samples = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if let Some(v) = c.trim().strip_prefix("fps=") {
                    fps = Some(v.parse::<f64>().map_err(|_| bad(i + 1, "bad fps"))?);
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad(i + 1, "expected 4 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "bad number"));
            samples.push(TruthSample {
                t: num(f[0])?,
                dx: num(f[1])?,
                dy: num(f[2])?,
                label: f[3].to_string(),
            });
        }
        let fps = fps.ok_or_else(|| bad(2, "missing fps"))?;
        Ok(Self { fps, samples })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, label: &str) -> TruthSample {
        TruthSample {
            t,
            dx: 0.125 * t,
            dy: -0.5,
            label: label.into(),
        }
    }

    #[test]
    fn text_round_trip() {
        let gt = GroundTruth {
            fps: 4.0,
            samples: vec![
                sample(0.0, "still"),
                sample(0.25, "tremor"),
                sample(0.5, "tremor"),
            ],
        };
        assert_eq!(GroundTruth::parse(&gt.to_text()).unwrap(), gt);
        assert!(GroundTruth::parse("0 0 0 x\n").is_err());
        assert!(GroundTruth::parse(&format!("{MAGIC}\n# fps=4\n0 0 x\n")).is_err());
    }

    #[test]
    fn intervals_cover_labelled_runs() {
        let gt = GroundTruth {
            fps: 4.0,
            samples: ["a", "t", "t", "a", "t"]
                .iter()
                .enumerate()
                .map(|(i, l)| sample(i as f64 / 4.0, l))
                .collect(),
        };
        assert_eq!(gt.intervals(|l| l == "t"), vec![(0.25, 0.75), (1.0, 1.25)]);
    }
}
