use std::collections::VecDeque;

use super::score::{merge_episodes, score_each_window, TremorEpisode, WindowScore};
use super::spectrum::{power_spectrum, window_geometry};
use super::{DetectorConfig, MotionSignal};
use crate::error::Result;

/// Online scorer for one region: a ring buffer of one window of samples,
/// scored every hop. Produces the same windows as the offline detector.
#[derive(Debug, Clone)]
pub struct StreamScorer {
    region: String,
    fps: f64,
    cfg: DetectorConfig,
    n: usize,
    hop: usize,
    ring: VecDeque<f64>,
    seen: usize,
    /// Flagged windows not yet closed into an episode.
    run: Vec<WindowScore>,
    done: Vec<TremorEpisode>,
}

impl StreamScorer {
    pub fn new(region: impl Into<String>, fps: f64, cfg: &DetectorConfig) -> Result<Self> {
        cfg.validate(fps)?;
        let (n, hop) = window_geometry(fps, cfg.window_s, cfg.overlap)?;
        Ok(Self {
            region: region.into(),
            fps,
            cfg: cfg.clone(),
            n,
            hop,
            ring: VecDeque::with_capacity(n),
            seen: 0,
            run: Vec::new(),
            done: Vec::new(),
        })
    }

    /// Adds one motion sample; returns the window score when a window
    /// completes.
    pub fn push(&mut self, sample: f64) -> Result<Option<WindowScore>> {
        if self.ring.len() == self.n {
            self.ring.pop_front();
        }
        self.ring.push_back(sample);
        self.seen += 1;
        if self.seen < self.n || !(self.seen - self.n).is_multiple_of(self.hop) {
            return Ok(None);
        }
        let start = self.seen - self.n;
        let signal = MotionSignal {
            region: self.region.clone(),
            samples: self.ring.iter().copied().collect(),
            fps: self.fps,
        };
        let mut spectrum = power_spectrum(&signal, self.cfg.window_s, self.cfg.overlap)?.remove(0);
        spectrum.start_s = start as f64 / self.fps;
        spectrum.end_s = self.seen as f64 / self.fps;
        let w = score_each_window(std::slice::from_ref(&spectrum), &self.cfg, self.fps).remove(0);
        if w.flag {
            self.run.push(w.clone());
        } else {
            self.close_run();
        }
        Ok(Some(w))
    }

    fn close_run(&mut self) {
        if !self.run.is_empty() {
            let eps = merge_episodes(&self.region, &self.run, self.cfg.min_duration_s);
            self.done.extend(eps);
            self.run.clear();
        }
    }

    /// Episodes closed so far.
    pub fn drain_episodes(&mut self) -> Vec<TremorEpisode> {
        std::mem::take(&mut self.done)
    }

    /// Closes any open run and returns the remaining episodes.
    pub fn finish(mut self) -> Vec<TremorEpisode> {
        self.close_run();
        self.done
    }
}
