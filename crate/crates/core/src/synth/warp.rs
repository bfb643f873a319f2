//! Gaussian pre-blur and Catmull-Rom resampling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Plane;

/// Taps either side of the sample point used by the cubic kernel.
pub const CUBIC_SUPPORT: usize = 2;

#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - m }) as usize
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur with reflect-101 borders. `sigma <= 0` copies.
pub fn gaussian_blur(src: &Plane, sigma: f64) -> Plane {
    if sigma <= 0.0 {
        return src.clone();
    }
    let k = gaussian_taps(sigma);
    let r = (k.len() / 2) as isize;
    let (w, h) = src.dims();
    let mut tmp = vec![0.0; w * h];
    tmp.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let s = src.row(y);
        for (x, o) in row.iter_mut().enumerate() {
            *o = k
                .iter()
                .enumerate()
                .map(|(j, kv)| kv * s[reflect(x as isize + j as isize - r, w)])
                .sum();
        }
    });
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (j, kv) in k.iter().enumerate() {
            let sy = reflect(y as isize + j as isize - r, h);
            for (o, s) in row.iter_mut().zip(&tmp[sy * w..(sy + 1) * w]) {
                *o += kv * s;
            }
        }
    });
    Plane::from_vec(w, h, out)
}

/// Catmull-Rom weights for taps at offsets -1, 0, 1, 2 around `floor(x)`,
/// with `t = x - floor(x)`.
#[inline]
pub fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Whether every tap for sample positions in `[lo, hi]` stays inside `[0, n)`.
pub(crate) fn taps_inside(lo: f64, hi: f64, n: usize) -> bool {
    lo.floor() - 1.0 >= 0.0 && hi.floor() + 2.0 <= n as f64 - 1.0
}

/// `out(x, y) = src(x + ox, y + oy)` for a `w` x `h` window, bicubic.
pub fn translate_window(src: &Plane, ox: f64, oy: f64, w: usize, h: usize) -> Result<Plane> {
    let (sw, sh) = src.dims();
    if !taps_inside(ox, ox + (w - 1) as f64, sw) || !taps_inside(oy, oy + (h - 1) as f64, sh) {
        return Err(Error::InvalidInput(format!(
            "window {w}x{h} at ({ox:.3}, {oy:.3}) leaves the {sw}x{sh} texture"
        )));
    }
    let (ix, iy) = (ox.floor() as usize, oy.floor() as usize);
    let wx = catmull_rom(ox - ox.floor());
    let wy = catmull_rom(oy - oy.floor());
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (j, wyj) in wy.iter().enumerate() {
            let s = src.row(iy + y + j - 1);
            for (x, o) in row.iter_mut().enumerate() {
                let base = ix + x - 1;
                let v = wx[0] * s[base]
                    + wx[1] * s[base + 1]
                    + wx[2] * s[base + 2]
                    + wx[3] * s[base + 3];
                *o += wyj * v;
            }
        }
    });
    Ok(Plane::from_vec(w, h, out))
}

/// Bicubic sample of `src` at a real position; taps must be inside.
#[inline]
fn sample(src: &Plane, x: f64, y: f64) -> f64 {
    let (fx, fy) = (x.floor(), y.floor());
    let wx = catmull_rom(x - fx);
    let wy = catmull_rom(y - fy);
    let (bx, by) = (fx as usize - 1, fy as usize - 1);
    let mut acc = 0.0;
    for (j, wyj) in wy.iter().enumerate() {
        let s = &src.row(by + j)[bx..bx + 4];
        acc += wyj * (wx[0] * s[0] + wx[1] * s[1] + wx[2] * s[2] + wx[3] * s[3]);
    }
    acc
}

/// General warp: `out(x, y) = src(map(x, y))`, bicubic. Every mapped
/// position must keep its taps inside the source.
pub fn warp_window(
    src: &Plane,
    w: usize,
    h: usize,
    map: impl Fn(f64, f64) -> (f64, f64) + Sync,
) -> Result<Plane> {
    let (sw, sh) = src.dims();
    let corners = [
        (0.0, 0.0),
        ((w - 1) as f64, 0.0),
        (0.0, (h - 1) as f64),
        ((w - 1) as f64, (h - 1) as f64),
    ];
    // Affine maps reach their extremes at the corners.
    let pts: Vec<(f64, f64)> = corners.iter().map(|&(x, y)| map(x, y)).collect();
    let (xlo, xhi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    let (ylo, yhi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.1), b.max(p.1))
        });
    if !taps_inside(xlo, xhi, sw) || !taps_inside(ylo, yhi, sh) {
        return Err(Error::InvalidInput(format!(
            "warped {w}x{h} window leaves the {sw}x{sh} texture"
        )));
    }
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            let (sx, sy) = map(x as f64, y as f64);
            *o = sample(src, sx, sy);
        }
    });
    Ok(Plane::from_vec(w, h, out))
}
