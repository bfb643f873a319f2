//! Artefact energy: mean squared luma change on pixels that never move.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::video::VideoSequence;

/// Largest luma excursion over time that still counts as static.
pub const STILL_TOLERANCE: f64 = 2.0 / 255.0;

/// Pixels known to be still in the original clip.
pub type StillMask = Grid<bool>;

/// Mean of `(magnified - original)^2` over every frame and every masked
/// pixel. Errors if the mask is empty or covers a pixel whose original luma
/// varies by more than [`STILL_TOLERANCE`].
pub fn artefact_energy(
    original: &VideoSequence,
    magnified: &VideoSequence,
    mask: &StillMask,
) -> Result<f64> {
    let dims = original
        .dims()
        .ok_or_else(|| Error::InvalidInput("empty sequence".into()))?;
    if magnified.dims() != Some(dims) || magnified.len() != original.len() {
        return Err(Error::ShapeMismatch(
            "original and magnified clips differ".into(),
        ));
    }
    if mask.dims() != dims {
        return Err(Error::ShapeMismatch(format!(
            "mask is {:?}, frames are {dims:?}",
            mask.dims()
        )));
    }
    let idx: Vec<usize> = mask
        .as_slice()
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect();
    if idx.is_empty() {
        return Err(Error::InvalidInput("still mask is empty".into()));
    }
    let first = original.frames()[0].luma().as_slice();
    for f in original.frames() {
        let y = f.luma().as_slice();
        if let Some(&i) = idx
            .iter()
            .find(|&&i| (y[i] as f64 - first[i] as f64).abs() > STILL_TOLERANCE)
        {
            return Err(Error::InvalidInput(format!(
                "mask pixel ({}, {}) moves in frame {}",
                i % dims.0,
                i / dims.0,
                f.index()
            )));
        }
    }
    let mut sum = 0.0;
    for (a, b) in original.frames().iter().zip(magnified.frames()) {
        let (a, b) = (a.luma().as_slice(), b.luma().as_slice());
        sum += idx
            .iter()
            .map(|&i| (b[i] as f64 - a[i] as f64).powi(2))
            .sum::<f64>();
    }
    Ok(sum / (idx.len() * original.len()) as f64)
}
