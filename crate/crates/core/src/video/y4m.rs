//! YUV4MPEG2 container support.
//!
//! Reading accepts 8-bit `mono`, `420*`, `422` and `444` streams and upsamples
//! chroma to 4:4:4 bilinearly. Writing always produces `C444` with the
//! `XCOLORRANGE=FULL` extension. Samples are treated as full range unless the
//! header carries `XCOLORRANGE=LIMITED`.

use std::cell::Cell;
use std::io::{Read, Write};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::video::frame::{Frame, SamplePlane, VideoSequence, CHROMA_RANGE, LUMA_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Range {
    Full,
    Limited,
}

impl Range {
    fn luma(self, v: u8) -> f32 {
        match self {
            Range::Full => v as f32 / 255.0,
            Range::Limited => ((v as f32 - 16.0) / 219.0).clamp(LUMA_RANGE.0, LUMA_RANGE.1),
        }
    }

    fn chroma(self, v: u8) -> f32 {
        let c = match self {
            Range::Full => (v as f32 - 128.0) / 255.0,
            Range::Limited => (v as f32 - 128.0) / 224.0,
        };
        c.clamp(CHROMA_RANGE.0, CHROMA_RANGE.1)
    }
}

/// Chroma layout of the incoming stream. Offsets are the position of chroma
/// sample 0 in luma coordinates, per axis.
#[derive(Debug, Clone, Copy)]
enum Layout {
    Mono,
    Sub {
        sx: usize,
        sy: usize,
        off_x: f32,
        off_y: f32,
    },
}

fn layout_of(cs: y4m::Colorspace) -> Result<Layout> {
    use y4m::Colorspace as C;
    Ok(match cs {
        C::Cmono => Layout::Mono,
        C::C444 => Layout::Sub {
            sx: 1,
            sy: 1,
            off_x: 0.0,
            off_y: 0.0,
        },
        C::C422 => Layout::Sub {
            sx: 2,
            sy: 1,
            off_x: 0.0,
            off_y: 0.0,
        },
        C::C420jpeg => Layout::Sub {
            sx: 2,
            sy: 2,
            off_x: 0.5,
            off_y: 0.5,
        },
        // mpeg2 siting: horizontally co-sited, vertically centred.
        C::C420 | C::C420mpeg2 | C::C420paldv => Layout::Sub {
            sx: 2,
            sy: 2,
            off_x: 0.0,
            off_y: 0.5,
        },
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "y4m colorspace {other:?} (only 8-bit is supported)"
            )))
        }
    })
}

fn y4m_err(e: y4m::Error) -> Error {
    match e {
        y4m::Error::IoError(io) => Error::io("<y4m stream>", io),
        y4m::Error::UnknownColorspace => Error::UnsupportedFormat("unknown y4m colorspace".into()),
        other => Error::Y4m(other.to_string()),
    }
}

// Counts bytes pulled through the decoder so a short final frame can be told
// apart from a clean end of stream.
struct Counting<R> {
    inner: R,
    consumed: Rc<Cell<u64>>,
}

impl<R: Read> Read for Counting<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.consumed.set(self.consumed.get() + n as u64);
        Ok(n)
    }
}

/// Frame-at-a-time y4m decoder.
pub struct Y4mReader<R: Read> {
    decoder: y4m::Decoder<Counting<R>>,
    consumed: Rc<Cell<u64>>,
    layout: Layout,
    range: Range,
    fps: f64,
    next_index: usize,
}

impl<R: Read> Y4mReader<R> {
    pub fn new(reader: R) -> Result<Self> {
        let consumed = Rc::new(Cell::new(0));
        let counting = Counting {
            inner: reader,
            consumed: Rc::clone(&consumed),
        };
        let decoder = y4m::Decoder::new(counting).map_err(y4m_err)?;
        let layout = layout_of(decoder.get_colorspace())?;
        let rate = decoder.get_framerate();
        if rate.den == 0 || rate.num == 0 {
            return Err(Error::Y4m(format!("invalid frame rate {rate}")));
        }
        let fps = rate.num as f64 / rate.den as f64;
        let params = String::from_utf8_lossy(decoder.get_raw_params()).into_owned();
        let range = if params
            .split_ascii_whitespace()
            .any(|p| p.eq_ignore_ascii_case("XCOLORRANGE=LIMITED"))
        {
            Range::Limited
        } else {
            Range::Full
        };
        Ok(Self {
            decoder,
            consumed,
            layout,
            range,
            fps,
            next_index: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.decoder.get_width()
    }

    pub fn height(&self) -> usize {
        self.decoder.get_height()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Next frame, or `None` at a clean end of stream.
    pub fn read_frame(&mut self) -> Result<Option<Frame>> {
        let (w, h) = (self.width(), self.height());
        let (layout, range) = (self.layout, self.range);
        let before = self.consumed.get();
        let raw = match self.decoder.read_frame() {
            Ok(f) => f,
            Err(y4m::Error::EOF) if self.consumed.get() == before => return Ok(None),
            Err(y4m::Error::EOF) => {
                return Err(Error::Y4m(format!("truncated frame {}", self.next_index)))
            }
            Err(e) => return Err(y4m_err(e)),
        };
        let y = Grid::from_vec(
            w,
            h,
            raw.get_y_plane().iter().map(|&v| range.luma(v)).collect(),
        );
        let (cb, cr) = match layout {
            Layout::Mono => (Grid::zeros(w, h), Grid::zeros(w, h)),
            Layout::Sub {
                sx,
                sy,
                off_x,
                off_y,
            } => {
                let (cw, ch) = (w.div_ceil(sx), h.div_ceil(sy));
                let conv = |plane: &[u8]| {
                    let small =
                        Grid::from_vec(cw, ch, plane.iter().map(|&v| range.chroma(v)).collect());
                    upsample_bilinear(&small, w, h, sx, sy, off_x, off_y)
                };
                (conv(raw.get_u_plane()), conv(raw.get_v_plane()))
            }
        };
        let frame = Frame::new(self.next_index, y, cb, cr)?;
        self.next_index += 1;
        Ok(Some(frame))
    }

    pub fn read_all(mut self) -> Result<VideoSequence> {
        let mut frames = Vec::new();
        while let Some(f) = self.read_frame()? {
            frames.push(f);
        }
        VideoSequence::new(frames, self.fps)
    }
}

/// Bilinear chroma upsampling. Chroma sample `j` sits at luma coordinate
/// `j * s + off` on each axis; positions outside the sample grid clamp to the
/// edge.
fn upsample_bilinear(
    small: &SamplePlane,
    w: usize,
    h: usize,
    sx: usize,
    sy: usize,
    off_x: f32,
    off_y: f32,
) -> SamplePlane {
    if sx == 1 && sy == 1 {
        return small.clone();
    }
    let (cw, ch) = small.dims();
    let taps = |n_out: usize, n_in: usize, s: usize, off: f32| -> Vec<(usize, usize, f32)> {
        (0..n_out)
            .map(|x| {
                let u = ((x as f32 - off) / s as f32).clamp(0.0, (n_in - 1) as f32);
                let i0 = u.floor() as usize;
                let i1 = (i0 + 1).min(n_in - 1);
                (i0, i1, u - i0 as f32)
            })
            .collect()
    };
    let tx = taps(w, cw, sx, off_x);
    let ty = taps(h, ch, sy, off_y);
    Grid::from_fn(w, h, |x, y| {
        let (x0, x1, fx) = tx[x];
        let (y0, y1, fy) = ty[y];
        let top = small.get(x0, y0) * (1.0 - fx) + small.get(x1, y0) * fx;
        let bot = small.get(x0, y1) * (1.0 - fx) + small.get(x1, y1) * fx;
        top * (1.0 - fy) + bot * fy
    })
}

/// Frame-at-a-time 4:4:4 y4m encoder.
pub struct Y4mWriter<W: Write> {
    encoder: y4m::Encoder<W>,
    width: usize,
    height: usize,
    buf: Vec<u8>,
}

impl<W: Write> Y4mWriter<W> {
    pub fn new(writer: W, width: usize, height: usize, fps: f64) -> Result<Self> {
        let (num, den) = fps_ratio(fps);
        let ext = y4m::VendorExtensionString::new(b"COLORRANGE=FULL".to_vec()).map_err(y4m_err)?;
        let encoder = y4m::encode(width, height, y4m::Ratio::new(num, den))
            .with_colorspace(y4m::Colorspace::C444)
            .append_vendor_extension(ext)
            .write_header(writer)
            .map_err(y4m_err)?;
        Ok(Self {
            encoder,
            width,
            height,
            buf: Vec::with_capacity(width * height * 3),
        })
    }

    pub fn write_frame(&mut self, frame: &Frame) -> Result<()> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::ShapeMismatch(format!(
                "frame {:?} into {}x{} stream",
                frame.dims(),
                self.width,
                self.height
            )));
        }
        let n = self.width * self.height;
        self.buf.clear();
        self.buf
            .extend(frame.luma().as_slice().iter().map(|&v| quantize(v * 255.0)));
        for p in [frame.cb(), frame.cr()] {
            self.buf
                .extend(p.as_slice().iter().map(|&v| quantize(v * 255.0 + 128.0)));
        }
        let raw = y4m::Frame::new(
            [&self.buf[..n], &self.buf[n..2 * n], &self.buf[2 * n..]],
            None,
        );
        self.encoder.write_frame(&raw).map_err(y4m_err)
    }
}

#[inline]
pub(crate) fn quantize(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Rational approximation of a frame rate for the `F` header field.
pub(crate) fn fps_ratio(fps: f64) -> (usize, usize) {
    for den in [1usize, 1001, 1000, 100_000] {
        let num = fps * den as f64;
        if (num - num.round()).abs() < 1e-6 * den as f64 {
            return (num.round() as usize, den);
        }
    }
    ((fps * 100_000.0).round() as usize, 100_000)
}

pub fn write_y4m<W: Write>(seq: &VideoSequence, writer: W) -> Result<()> {
    let (w, h) = seq
        .dims()
        .ok_or_else(|| Error::InvalidInput("cannot save an empty sequence".into()))?;
    let mut out = Y4mWriter::new(writer, w, h, seq.fps())?;
    for f in seq.frames() {
        out.write_frame(f)?;
    }
    Ok(())
}

pub fn read_y4m<R: Read>(reader: R) -> Result<VideoSequence> {
    Y4mReader::new(reader)?.read_all()
}
