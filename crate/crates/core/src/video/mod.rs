//! Loading, saving and colour conversion of frame sequences.
//!
//! Internally every frame is planar 4:4:4 Y'CbCr (full-range BT.601) with
//! luma in [0,1] and chroma in [-0.5,0.5]. Two on-disk forms are supported:
//! a directory of 8-bit PNG/PPM images (timing supplied by the caller) and an
//! uncompressed y4m container.

mod color;
mod frame;
mod framedir;
mod y4m;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

pub use self::color::{luma_chroma_to_rgb, rgb_to_luma_chroma};
pub(crate) use self::frame::check_fps;
pub use self::frame::{Frame, SamplePlane, VideoSequence, CHROMA_RANGE, FPS_RANGE, LUMA_RANGE};
pub use self::framedir::{list_frames, load_frame_dir, save_frame_dir, ImageKind};
pub use self::y4m::{read_y4m, write_y4m, Y4mReader, Y4mWriter};

use crate::error::{Error, Result};

/// On-disk sequence layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFormat {
    FrameDir(ImageKind),
    Y4m,
}

impl SequenceFormat {
    /// `.y4m` files are containers; anything else is treated as a frame
    /// directory of PNGs.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("y4m") => SequenceFormat::Y4m,
            _ => SequenceFormat::FrameDir(ImageKind::Png),
        }
    }
}

/// Loads a sequence. `fps` is required for frame directories and, when given
/// for a y4m file, overrides the container rate.
pub fn load_sequence(
    path: &Path,
    format: SequenceFormat,
    fps: Option<f64>,
) -> Result<VideoSequence> {
    match format {
        SequenceFormat::Y4m => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            let seq = read_y4m(BufReader::new(file))?;
            if seq.is_empty() {
                return Err(Error::EmptyInput(path.to_owned()));
            }
            match fps {
                Some(f) => VideoSequence::new(seq.into_frames(), f),
                None => Ok(seq),
            }
        }
        SequenceFormat::FrameDir(_) => {
            let fps = fps.ok_or_else(|| {
                Error::Config("frame directories need an explicit frame rate".into())
            })?;
            frame::check_fps(fps)?;
            load_frame_dir(path, fps)
        }
    }
}

pub fn save_sequence(seq: &VideoSequence, path: &Path, format: SequenceFormat) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::InvalidInput("cannot save an empty sequence".into()));
    }
    match format {
        SequenceFormat::Y4m => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            write_y4m(seq, &mut w)?;
            w.flush().map_err(|e| Error::io(path, e))
        }
        SequenceFormat::FrameDir(kind) => save_frame_dir(seq, path, kind),
    }
}
