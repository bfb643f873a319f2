//! Causal, frame-at-a-time magnification.
//!
//! The temporal mode runs a Butterworth band-pass (high-pass at `lo`, then
//! low-pass at `hi`) on every band-pass pyramid coefficient. Filter memory
//! starts at zero and the filter sees each coefficient relative to its value
//! in the first frame, so the first output equals the input and the start-up
//! step is not mistaken for motion.

use rayon::prelude::*;

use super::biquad::BandPass;
use super::config::{MagnificationConfig, Mode};
use super::{assemble, Amplifier, ChannelAmplifiers};
use crate::error::{Error, Result};
use crate::grid::Plane;
use crate::pyramid::{build_laplacian, collapse, level_dims};
use crate::video::Frame;

// Coefficients per parallel task.
const COEFF_BLOCK: usize = 4096;

#[derive(Debug, Clone)]
struct ChannelState {
    channel: usize,
    /// First-frame pyramid levels; `None` until the first frame arrives.
    origin: Option<Vec<Plane>>,
    /// `[hp0, hp1, lp0, lp1]` per coefficient, level by level.
    memory: Vec<Vec<[f64; 4]>>,
}

/// Per-coefficient recursive filter memory for the streaming temporal mode.
#[derive(Debug, Clone)]
pub struct FilterState {
    width: usize,
    height: usize,
    fps: f64,
    bandpass: BandPass,
    amps: ChannelAmplifiers,
    channels: Vec<ChannelState>,
    frames_seen: usize,
}

impl FilterState {
    /// Zeroed state for a `width` x `height` stream at `fps`.
    pub fn new(cfg: &MagnificationConfig, width: usize, height: usize, fps: f64) -> Result<Self> {
        if cfg.mode != Mode::Temporal {
            return Err(Error::Config(format!(
                "expected temporal mode, got {}",
                cfg.mode
            )));
        }
        cfg.validate_for(fps, width, height)?;
        let band = cfg.band.expect("validated temporal config has a band");
        let amps = ChannelAmplifiers::new(cfg, width, height)?;
        let depth = cfg.resolve_depth(width, height)?;
        let memory: Vec<Vec<[f64; 4]>> = (0..depth)
            .map(|k| {
                let (w, h) = level_dims(width, height, k);
                vec![[0.0; 4]; w * h]
            })
            .collect();
        let channels = amps
            .channels()
            .map(|(c, _)| ChannelState {
                channel: c,
                origin: None,
                memory: memory.clone(),
            })
            .collect();
        Ok(Self {
            width,
            height,
            fps,
            bandpass: BandPass::new(band.lo, band.hi, fps),
            amps,
            channels,
            frames_seen: 0,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    /// Clears the memory as if no frame had been seen.
    pub fn reset(&mut self) {
        for ch in &mut self.channels {
            ch.origin = None;
            ch.memory.iter_mut().for_each(|m| m.fill([0.0; 4]));
        }
        self.frames_seen = 0;
    }
}

fn filter_channel(
    bp: &BandPass,
    amp: &Amplifier,
    ch: &mut ChannelState,
    plane: &Plane,
) -> Result<Plane> {
    let mut pyr = build_laplacian(plane, ch.memory.len())?;
    let origin = ch.origin.get_or_insert_with(|| pyr.levels().to_vec());
    for ((lvl, base), mem) in pyr
        .levels_mut()
        .iter_mut()
        .zip(origin.iter())
        .zip(&mut ch.memory)
    {
        lvl.as_mut_slice()
            .par_chunks_mut(COEFF_BLOCK)
            .zip(base.as_slice().par_chunks(COEFF_BLOCK))
            .zip(mem.par_chunks_mut(COEFF_BLOCK))
            .for_each(|((c, b), s)| {
                for ((c, b), s) in c.iter_mut().zip(b).zip(s) {
                    *c = bp.step(*c - b, s);
                }
            });
    }
    amp.apply_gains(&mut pyr);
    let mut out = collapse(&pyr)?;
    out.as_mut_slice()
        .iter_mut()
        .zip(plane.as_slice())
        .for_each(|(o, x)| *o += x);
    Ok(out)
}

/// Pushes one frame through the streaming temporal filter, updating `state`.
pub fn step_stream(
    frame: &Frame,
    cfg: &MagnificationConfig,
    state: &mut FilterState,
) -> Result<Frame> {
    if frame.dims() != state.dims() {
        return Err(Error::ShapeMismatch(format!(
            "frame is {}x{}, filter state is {}x{}",
            frame.width(),
            frame.height(),
            state.width,
            state.height
        )));
    }
    if cfg.mode != Mode::Temporal
        || cfg.resolve_depth(state.width, state.height)? != state.channels[0].memory.len()
    {
        return Err(Error::ShapeMismatch(
            "configuration does not match filter state".into(),
        ));
    }
    let mut planes: [Option<Plane>; 3] = [None, None, None];
    let bp = state.bandpass;
    let amps = &state.amps;
    for ch in &mut state.channels {
        let amp = if ch.channel == 0 {
            &amps.luma
        } else {
            amps.chroma
                .as_ref()
                .expect("chroma state implies chroma gain")
        };
        planes[ch.channel] = Some(filter_channel(&bp, amp, ch, &frame.plane_f64(ch.channel))?);
    }
    state.frames_seen += 1;
    Ok(assemble(frame, planes))
}

enum Inner {
    Static { reference: Option<Frame> },
    Dynamic { previous: Option<Frame> },
    Temporal { state: FilterState },
}

/// Causal magnifier for any mode; output `t` depends only on inputs `<= t`.
pub struct StreamMagnifier {
    cfg: MagnificationConfig,
    amps: ChannelAmplifiers,
    dims: (usize, usize),
    inner: Inner,
}

impl StreamMagnifier {
    pub fn new(cfg: &MagnificationConfig, width: usize, height: usize, fps: f64) -> Result<Self> {
        cfg.validate_for(fps, width, height)?;
        let inner = match cfg.mode {
            Mode::Static => Inner::Static { reference: None },
            Mode::Dynamic => Inner::Dynamic { previous: None },
            Mode::Temporal => Inner::Temporal {
                state: FilterState::new(cfg, width, height, fps)?,
            },
        };
        Ok(Self {
            cfg: cfg.clone(),
            amps: ChannelAmplifiers::new(cfg, width, height)?,
            dims: (width, height),
            inner,
        })
    }

    pub fn config(&self) -> &MagnificationConfig {
        &self.cfg
    }

    pub fn push(&mut self, frame: &Frame) -> Result<Frame> {
        if frame.dims() != self.dims {
            return Err(Error::ShapeMismatch(format!(
                "frame is {}x{}, stream is {}x{}",
                frame.width(),
                frame.height(),
                self.dims.0,
                self.dims.1
            )));
        }
        match &mut self.inner {
            Inner::Static { reference } => match reference {
                None => {
                    *reference = Some(frame.clone());
                    Ok(frame.clone())
                }
                Some(r) => self.amps.magnify_pair(r, frame),
            },
            Inner::Dynamic { previous } => {
                let out = match previous.as_ref() {
                    None => frame.clone(),
                    Some(p) => self.amps.magnify_pair(p, frame)?,
                };
                *previous = Some(frame.clone());
                Ok(out)
            }
            Inner::Temporal { state } => step_stream(frame, &self.cfg, state),
        }
    }
}
