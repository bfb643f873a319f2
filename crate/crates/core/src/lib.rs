//! Eulerian motion magnification and tremor-band detection for bedside video.

pub mod detector;
pub mod error;
pub mod grid;
pub mod magnifier;
pub mod pyramid;
pub mod report;
pub mod synth;
pub mod video;

pub use error::{Error, ErrorKind, Result};
pub use grid::{Grid, Plane};
