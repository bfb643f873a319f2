//! Directories of still images, one file per frame, ordered by file name.

use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, ImageFormat, RgbImage};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::video::frame::{Frame, VideoSequence};

/// Image container used when writing a frame directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageKind {
    #[default]
    Png,
    Ppm,
}

impl ImageKind {
    fn extension(self) -> &'static str {
        match self {
            ImageKind::Png => "png",
            ImageKind::Ppm => "ppm",
        }
    }

    fn format(self) -> ImageFormat {
        match self {
            ImageKind::Png => ImageFormat::Png,
            ImageKind::Ppm => ImageFormat::Pnm,
        }
    }
}

fn is_frame_file(p: &Path) -> bool {
    p.is_file()
        && p.extension()
            .and_then(|e| e.to_str())
            .map(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("ppm"))
            .unwrap_or(false)
}

/// Frame files in `dir`, sorted by file name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if is_frame_file(&path) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

fn decode(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_owned(),
            message: other.to_string(),
        },
    })?;
    match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::Rgb8 | ColorType::Rgba8 => Ok(img.to_rgb8()),
        other => Err(Error::UnsupportedFormat(format!(
            "{}: {other:?} (8-bit images only)",
            path.display()
        ))),
    }
}

fn rgb_frame(index: usize, img: &RgbImage) -> Result<Frame> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let rgb: Vec<f64> = img.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
    Frame::from_rgb(index, w, h, &rgb)
}

/// Loads every PNG/PPM in `dir`. Files decode in parallel; frames come back
/// in file-name order.
pub fn load_frame_dir(dir: &Path, fps: f64) -> Result<VideoSequence> {
    let files = list_frames(dir)?;
    if files.is_empty() {
        return Err(Error::EmptyInput(dir.to_owned()));
    }
    let images = files
        .par_iter()
        .map(|p| decode(p))
        .collect::<Result<Vec<_>>>()?;
    let (w, h) = images[0].dimensions();
    if let Some((i, img)) = images
        .iter()
        .enumerate()
        .find(|(_, img)| img.dimensions() != (w, h))
    {
        return Err(Error::MixedDimensions {
            index: i,
            want_w: w as usize,
            want_h: h as usize,
            got_w: img.width() as usize,
            got_h: img.height() as usize,
        });
    }
    let frames = images
        .par_iter()
        .enumerate()
        .map(|(i, img)| rgb_frame(i, img))
        .collect::<Result<Vec<_>>>()?;
    VideoSequence::new(frames, fps)
}

pub(crate) fn frame_to_image(frame: &Frame) -> RgbImage {
    let bytes = frame
        .to_rgb()
        .into_iter()
        .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    RgbImage::from_raw(frame.width() as u32, frame.height() as u32, bytes)
        .expect("rgb buffer sized from frame")
}

/// Writes `frame_000000.<ext>`, `frame_000001.<ext>`, ... into `dir`,
/// creating it if needed.
pub fn save_frame_dir(seq: &VideoSequence, dir: &Path, kind: ImageKind) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::InvalidInput("cannot save an empty sequence".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    seq.frames().par_iter().enumerate().try_for_each(|(i, f)| {
        let path = dir.join(format!("frame_{i:06}.{}", kind.extension()));
        DynamicImage::ImageRgb8(frame_to_image(f))
            .save_with_format(&path, kind.format())
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(&path, io),
                other => Error::Decode {
                    path: path.clone(),
                    message: other.to_string(),
                },
            })
    })
}
