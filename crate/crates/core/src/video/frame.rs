use crate::error::{Error, Result};
use crate::grid::{Grid, Plane};
use crate::video::color;

/// Sample plane as stored in a frame.
pub type SamplePlane = Grid<f32>;

pub const LUMA_RANGE: (f32, f32) = (0.0, 1.0);
pub const CHROMA_RANGE: (f32, f32) = (-0.5, 0.5);

/// One 4:4:4 Y'CbCr picture with its ordinal in the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    index: usize,
    planes: [SamplePlane; 3],
}

impl Frame {
    /// Builds a frame, rejecting mismatched planes and out-of-range or
    /// non-finite samples.
    pub fn new(index: usize, y: SamplePlane, cb: SamplePlane, cr: SamplePlane) -> Result<Self> {
        if !(y.same_dims(&cb) && y.same_dims(&cr)) {
            return Err(Error::ShapeMismatch(format!(
                "planes {:?} {:?} {:?}",
                y.dims(),
                cb.dims(),
                cr.dims()
            )));
        }
        if y.is_empty() {
            return Err(Error::InvalidInput("frame has no pixels".into()));
        }
        check_range(&y, LUMA_RANGE, "luma")?;
        check_range(&cb, CHROMA_RANGE, "cb")?;
        check_range(&cr, CHROMA_RANGE, "cr")?;
        Ok(Self {
            index,
            planes: [y, cb, cr],
        })
    }

    /// Builds a frame from unbounded planes by clamping every sample into its
    /// valid range. NaN samples become zero.
    pub fn from_unclamped(index: usize, y: &Plane, cb: &Plane, cr: &Plane) -> Self {
        let clamp = |p: &Plane, (lo, hi): (f32, f32)| {
            p.map(|v| {
                if v.is_nan() {
                    0.0
                } else {
                    (v as f32).clamp(lo, hi)
                }
            })
        };
        Self {
            index,
            planes: [
                clamp(y, LUMA_RANGE),
                clamp(cb, CHROMA_RANGE),
                clamp(cr, CHROMA_RANGE),
            ],
        }
    }

    /// Gray frame from a luma plane; chroma is zero.
    pub fn from_luma(index: usize, y: &Plane) -> Self {
        let zero = Plane::zeros(y.width(), y.height());
        Self::from_unclamped(index, y, &zero, &zero)
    }

    /// Converts interleaved R'G'B' samples in [0,1].
    pub fn from_rgb(index: usize, width: usize, height: usize, rgb: &[f64]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::ShapeMismatch(format!(
                "rgb buffer of {} for {width}x{height}",
                rgb.len()
            )));
        }
        let mut planes = [(); 3].map(|_| Vec::with_capacity(width * height));
        for px in rgb.chunks_exact(3) {
            let ycc = color::rgb_to_luma_chroma([px[0], px[1], px[2]]);
            for (plane, v) in planes.iter_mut().zip(ycc) {
                plane.push(v as f32);
            }
        }
        let [y, cb, cr] = planes.map(|p| Grid::from_vec(width, height, p));
        Self::new(index, y, cb, cr)
    }

    /// Interleaved R'G'B', clamped to [0,1].
    pub fn to_rgb(&self) -> Vec<f64> {
        let [y, cb, cr] = &self.planes;
        let mut out = Vec::with_capacity(y.len() * 3);
        for ((&y, &cb), &cr) in y.as_slice().iter().zip(cb.as_slice()).zip(cr.as_slice()) {
            let rgb = color::luma_chroma_to_rgb([y as f64, cb as f64, cr as f64]);
            out.extend(rgb.map(|c| c.clamp(0.0, 1.0)));
        }
        out
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.planes[0].dims()
    }

    pub fn luma(&self) -> &SamplePlane {
        &self.planes[0]
    }

    pub fn cb(&self) -> &SamplePlane {
        &self.planes[1]
    }

    pub fn cr(&self) -> &SamplePlane {
        &self.planes[2]
    }

    pub fn planes(&self) -> &[SamplePlane; 3] {
        &self.planes
    }

    /// Plane `c` (0 = Y, 1 = Cb, 2 = Cr) widened to f64.
    pub fn plane_f64(&self, c: usize) -> Plane {
        self.planes[c].map(f64::from)
    }
}

fn check_range(p: &SamplePlane, (lo, hi): (f32, f32), name: &str) -> Result<()> {
    match p
        .as_slice()
        .iter()
        .position(|v| !v.is_finite() || *v < lo || *v > hi)
    {
        Some(i) => Err(Error::InvalidInput(format!(
            "{name} sample {} at offset {i} outside [{lo}, {hi}]",
            p.as_slice()[i]
        ))),
        None => Ok(()),
    }
}

/// Frames plus timing.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoSequence {
    frames: Vec<Frame>,
    fps: f64,
}

pub const FPS_RANGE: (f64, f64) = (1.0, 240.0);

impl VideoSequence {
    /// Validates shared dimensions, indices strictly increasing from 0, and
    /// fps within [1, 240]. An empty frame list is allowed.
    pub fn new(frames: Vec<Frame>, fps: f64) -> Result<Self> {
        check_fps(fps)?;
        if let Some(first) = frames.first() {
            if first.index() != 0 {
                return Err(Error::InvalidInput(format!(
                    "first frame index is {}, expected 0",
                    first.index()
                )));
            }
            let (w, h) = first.dims();
            for (i, f) in frames.iter().enumerate() {
                if f.dims() != (w, h) {
                    return Err(Error::MixedDimensions {
                        index: i,
                        want_w: w,
                        want_h: h,
                        got_w: f.width(),
                        got_h: f.height(),
                    });
                }
                if i > 0 && f.index() <= frames[i - 1].index() {
                    return Err(Error::InvalidInput(format!(
                        "frame indices not increasing at position {i}"
                    )));
                }
            }
        }
        Ok(Self { frames, fps })
    }

    /// Renumbers frames 0..n before validating.
    pub fn from_frames(frames: Vec<Frame>, fps: f64) -> Result<Self> {
        let frames = frames
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.with_index(i))
            .collect();
        Self::new(frames, fps)
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.frames.first().map(Frame::dims)
    }

    pub fn duration_s(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }
}

pub(crate) fn check_fps(fps: f64) -> Result<()> {
    if !(FPS_RANGE.0..=FPS_RANGE.1).contains(&fps) {
        return Err(Error::Config(format!(
            "fps {fps} outside [{}, {}]",
            FPS_RANGE.0, FPS_RANGE.1
        )));
    }
    Ok(())
}
