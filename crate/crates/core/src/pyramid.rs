//! Laplacian pyramids with a 5-tap binomial kernel and reflect-101 borders.
//!
//! `build_laplacian` splits a plane into `depth` band-pass levels plus a
//! low-pass residual; `collapse` inverts it. Level `k` has dimensions
//! `ceil(dims / 2^k)`. Both directions are linear, and reconstruction is exact
//! up to floating-point rounding because each band stores the difference
//! between a Gaussian level and the expansion of the next one.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Plane;

/// Binomial blur kernel `[1, 4, 6, 4, 1] / 16`.
pub const KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Smallest band-pass level (per axis) accepted by [`build_laplacian`].
pub const MIN_LEVEL_SIZE: usize = 4;
/// Coarsest band-pass level size targeted by [`default_depth`].
pub const DEFAULT_COARSEST: usize = 16;
pub const MAX_DEFAULT_DEPTH: usize = 5;

// Rows shorter than this are processed serially.
const PAR_MIN_SAMPLES: usize = 1 << 15;

#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    levels: Vec<Plane>,
    residual: Plane,
    width: usize,
    height: usize,
}

#[inline]
fn reflect101(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

/// Dimensions of level `k` for a `w x h` source.
pub fn level_dims(w: usize, h: usize, k: usize) -> (usize, usize) {
    let s = 1usize << k;
    (w.div_ceil(s), h.div_ceil(s))
}

/// Deepest pyramid whose coarsest band keeps at least [`MIN_LEVEL_SIZE`]
/// samples per axis.
pub fn max_depth(w: usize, h: usize) -> usize {
    let m = w.min(h);
    let mut k = 0;
    while m >= MIN_LEVEL_SIZE << k {
        k += 1;
    }
    k
}

/// Largest `k` with `min(w,h) / 2^(k-1) >= 16`, capped at 5 and never below 1.
pub fn default_depth(w: usize, h: usize) -> usize {
    let m = w.min(h);
    let mut k = 0;
    while k < MAX_DEFAULT_DEPTH && m >= DEFAULT_COARSEST << k {
        k += 1;
    }
    k.max(1).min(max_depth(w, h).max(1))
}

fn check_depth(w: usize, h: usize, depth: usize) -> Result<()> {
    if depth == 0 || depth > max_depth(w, h) {
        return Err(Error::DepthTooLarge {
            depth,
            width: w,
            height: h,
        });
    }
    Ok(())
}

impl Pyramid {
    /// Assembles a pyramid from parts without checking shapes; [`collapse`]
    /// validates them.
    pub fn from_parts(levels: Vec<Plane>, residual: Plane, width: usize, height: usize) -> Self {
        Self {
            levels,
            residual,
            width,
            height,
        }
    }

    /// An all-zero pyramid with the layout of a `w x h` source.
    pub fn zeros(w: usize, h: usize, depth: usize) -> Result<Self> {
        check_depth(w, h, depth)?;
        let levels = (0..depth)
            .map(|k| {
                let (lw, lh) = level_dims(w, h, k);
                Plane::zeros(lw, lh)
            })
            .collect();
        let (rw, rh) = level_dims(w, h, depth);
        Ok(Self {
            levels,
            residual: Plane::zeros(rw, rh),
            width: w,
            height: h,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn levels(&self) -> &[Plane] {
        &self.levels
    }

    pub fn levels_mut(&mut self) -> &mut [Plane] {
        &mut self.levels
    }

    pub fn level(&self, k: usize) -> &Plane {
        &self.levels[k]
    }

    pub fn residual(&self) -> &Plane {
        &self.residual
    }

    pub fn residual_mut(&mut self) -> &mut Plane {
        &mut self.residual
    }

    /// Same depth and per-level dimensions.
    pub fn congruent(&self, other: &Pyramid) -> bool {
        self.source_dims() == other.source_dims()
            && self.depth() == other.depth()
            && self
                .levels
                .iter()
                .zip(&other.levels)
                .all(|(a, b)| a.same_dims(b))
            && self.residual.same_dims(&other.residual)
    }

    /// Checks that every level has the layout implied by the source dims.
    pub fn validate(&self) -> Result<()> {
        for (k, l) in self.levels.iter().enumerate() {
            let want = level_dims(self.width, self.height, k);
            if l.dims() != want {
                return Err(Error::ShapeMismatch(format!(
                    "level {k} is {:?}, expected {want:?}",
                    l.dims()
                )));
            }
        }
        let want = level_dims(self.width, self.height, self.depth());
        if self.residual.dims() != want {
            return Err(Error::ShapeMismatch(format!(
                "residual is {:?}, expected {want:?}",
                self.residual.dims()
            )));
        }
        Ok(())
    }

    pub fn collapse(&self) -> Result<Plane> {
        collapse(self)
    }
}

/// Decomposes `plane` into `depth` band-pass levels and a residual.
///
/// Requires `depth >= 1` and `min(w, h) / 2^(depth-1) >= 4`.
pub fn build_laplacian(plane: &Plane, depth: usize) -> Result<Pyramid> {
    let (w, h) = plane.dims();
    check_depth(w, h, depth)?;
    let mut levels = Vec::with_capacity(depth);
    let mut current = plane.clone();
    for _ in 0..depth {
        let down = downsample(&current);
        let mut band = upsample(&down, current.width(), current.height());
        sub_from(&mut band, &current);
        levels.push(band);
        current = down;
    }
    Ok(Pyramid {
        levels,
        residual: current,
        width: w,
        height: h,
    })
}

/// Reconstructs the plane a pyramid was built from.
pub fn collapse(pyr: &Pyramid) -> Result<Plane> {
    pyr.validate()?;
    let mut acc = pyr.residual.clone();
    for band in pyr.levels.iter().rev() {
        let mut up = upsample(&acc, band.width(), band.height());
        add_into(&mut up, band);
        acc = up;
    }
    Ok(acc)
}

// band = current - band
fn sub_from(band: &mut Plane, current: &Plane) {
    band.as_mut_slice()
        .iter_mut()
        .zip(current.as_slice())
        .for_each(|(b, c)| *b = c - *b);
}

fn add_into(acc: &mut Plane, band: &Plane) {
    acc.as_mut_slice()
        .iter_mut()
        .zip(band.as_slice())
        .for_each(|(a, b)| *a += b);
}

fn for_each_row(out: &mut [f64], row_len: usize, f: impl Fn(usize, &mut [f64]) + Sync + Send) {
    if out.len() >= PAR_MIN_SAMPLES {
        out.par_chunks_mut(row_len)
            .enumerate()
            .with_min_len(8)
            .for_each(|(y, row)| f(y, row));
    } else {
        out.chunks_mut(row_len)
            .enumerate()
            .for_each(|(y, row)| f(y, row));
    }
}

/// Blur with [`KERNEL`] and keep even samples: `ceil(n / 2)` per axis.
pub fn downsample(src: &Plane) -> Plane {
    let (w, h) = src.dims();
    let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
    let [k0, k1, k2, _, _] = KERNEL;

    // Horizontal pass on every source row.
    let mut tmp = vec![0.0; ow * h];
    let data = src.as_slice();
    for_each_row(&mut tmp, ow, |y, out| {
        let row = &data[y * w..(y + 1) * w];
        let at = |i: isize| row[reflect101(i, w)];
        for (j, o) in out.iter_mut().enumerate() {
            let c = 2 * j as isize;
            *o = if c >= 2 && (c as usize) + 2 < w {
                let c = c as usize;
                k0 * (row[c - 2] + row[c + 2]) + k1 * (row[c - 1] + row[c + 1]) + k2 * row[c]
            } else {
                k0 * (at(c - 2) + at(c + 2)) + k1 * (at(c - 1) + at(c + 1)) + k2 * at(c)
            };
        }
    });

    // Vertical pass, row-wise.
    let mut out = vec![0.0; ow * oh];
    for_each_row(&mut out, ow, |j, orow| {
        let c = 2 * j as isize;
        let r = |d: isize| {
            let y = reflect101(c + d, h);
            &tmp[y * ow..(y + 1) * ow]
        };
        let (a, b, m, d, e) = (r(-2), r(-1), r(0), r(1), r(2));
        for x in 0..ow {
            orow[x] = k0 * (a[x] + e[x]) + k1 * (b[x] + d[x]) + k2 * m[x];
        }
    });
    Plane::from_vec(ow, oh, out)
}

/// Zero-insert to `w x h` then blur with twice [`KERNEL`] per axis.
///
/// Even outputs take `(c[j-1] + 6 c[j] + c[j+1]) / 8`, odd outputs
/// `(c[j] + c[j+1]) / 2`, with neighbours outside the coarse grid mapped
/// through reflect-101 of the zero-inserted signal.
pub fn upsample(src: &Plane, w: usize, h: usize) -> Plane {
    let (sw, sh) = src.dims();
    debug_assert_eq!((sw, sh), (w.div_ceil(2), h.div_ceil(2)));
    // Coarse index of zero-inserted position `i` after reflection on length n.
    let coarse = |i: isize, n: usize| reflect101(i, n) / 2;

    let mut tmp = vec![0.0; w * sh];
    let data = src.as_slice();
    for_each_row(&mut tmp, w, |y, out| {
        let row = &data[y * sw..(y + 1) * sw];
        for (x, o) in out.iter_mut().enumerate() {
            let xi = x as isize;
            *o = if x % 2 == 0 {
                let j = x / 2;
                let (l, r) = if j >= 1 && j + 1 < sw && x + 2 < w {
                    (row[j - 1], row[j + 1])
                } else {
                    (row[coarse(xi - 2, w)], row[coarse(xi + 2, w)])
                };
                0.125 * (l + r) + 0.75 * row[j]
            } else {
                0.5 * (row[coarse(xi - 1, w)] + row[coarse(xi + 1, w)])
            };
        }
    });

    let mut out = vec![0.0; w * h];
    for_each_row(&mut out, w, |y, orow| {
        let yi = y as isize;
        let r = |i: usize| &tmp[i * w..(i + 1) * w];
        if y % 2 == 0 {
            let (a, m, b) = (r(coarse(yi - 2, h)), r(y / 2), r(coarse(yi + 2, h)));
            for x in 0..w {
                orow[x] = 0.125 * (a[x] + b[x]) + 0.75 * m[x];
            }
        } else {
            let (a, b) = (r(coarse(yi - 1, h)), r(coarse(yi + 1, h)));
            for x in 0..w {
                orow[x] = 0.5 * (a[x] + b[x]);
            }
        }
    });
    Plane::from_vec(w, h, out)
}
