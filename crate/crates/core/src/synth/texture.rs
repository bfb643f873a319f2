//! Procedural luma textures for synthetic clips.
//!
//! Every texture is smooth at the pixel scale; [`super::render_clip`] adds
//! the standard pre-blur on top.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::warp::gaussian_blur;
use crate::grid::Plane;

/// Luma of flat background regions.
pub const BACKGROUND: f64 = 0.3;

/// Band-limited noise: white noise blurred at `fine` minus the same noise
/// blurred at `coarse` (`coarse <= 0` keeps the low-pass part), rescaled to
/// mean 0.5 and standard deviation `contrast`.
pub fn filtered_noise(
    w: usize,
    h: usize,
    fine: f64,
    coarse: f64,
    contrast: f64,
    seed: u64,
) -> Plane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let white = Plane::from_fn(w, h, |_, _| StandardNormal.sample(&mut rng));
    let lo = gaussian_blur(&white, fine);
    let band = if coarse > 0.0 {
        let c = gaussian_blur(&white, coarse);
        lo.zip_map(&c, |a, b| a - b)
    } else {
        lo
    };
    let n = band.len() as f64;
    let mean = band.as_slice().iter().sum::<f64>() / n;
    let sd = (band
        .as_slice()
        .iter()
        .map(|v| (v - mean).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    band.map(|v| (0.5 + contrast * (v - mean) / sd.max(1e-300)).clamp(0.0, 1.0))
}

/// Isotropic Gaussian blob of standard deviation `sigma` on a flat background.
pub fn gaussian_blob(w: usize, h: usize, cx: f64, cy: f64, sigma: f64, contrast: f64) -> Plane {
    Plane::from_fn(w, h, |x, y| {
        let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        BACKGROUND + contrast * (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

#[inline]
fn soft_step(d: f64, softness: f64) -> f64 {
    0.5 * (1.0 + (d / softness).tanh())
}

/// Rounded bar (a stylised limb) centred at `(cx, cy)`, rotated by `angle_deg`,
/// with edges smoothed over `softness` px.
#[allow(clippy::too_many_arguments)]
pub fn limb_bar(
    w: usize,
    h: usize,
    cx: f64,
    cy: f64,
    length: f64,
    thickness: f64,
    angle_deg: f64,
    softness: f64,
) -> Plane {
    let (s, c) = angle_deg.to_radians().sin_cos();
    Plane::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        // Distance outside a capsule: segment of half-length L/2, radius T/2.
        let along = (u.abs() - length / 2.0).max(0.0);
        let dist = (along * along + v * v).sqrt() - thickness / 2.0;
        BACKGROUND + 0.4 * soft_step(-dist, softness)
    })
}

/// Disc of radius `radius` carrying `spokes` angular cycles plus a radial
/// ripple, on a flat background. Rotating it about `(cx, cy)` leaves the
/// background still.
pub fn textured_disc(w: usize, h: usize, cx: f64, cy: f64, radius: f64, spokes: u32) -> Plane {
    Plane::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let r = (dx * dx + dy * dy).sqrt();
        let theta = dy.atan2(dx);
        let pattern = 0.55 + 0.2 * (spokes as f64 * theta + r / 6.0).cos();
        let inside = soft_step(radius - r, 1.5);
        BACKGROUND + inside * (pattern - BACKGROUND)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textures_are_in_range_and_deterministic() {
        let a = filtered_noise(64, 48, 3.0, 0.0, 0.1, 9);
        assert_eq!(a, filtered_noise(64, 48, 3.0, 0.0, 0.1, 9));
        assert_ne!(a, filtered_noise(64, 48, 3.0, 0.0, 0.1, 10));
        for p in [
            a,
            filtered_noise(64, 48, 3.0, 12.0, 0.1, 1),
            gaussian_blob(64, 48, 32.0, 24.0, 8.0, 0.5),
            limb_bar(64, 48, 32.0, 24.0, 40.0, 10.0, 30.0, 2.0),
            textured_disc(64, 48, 32.0, 24.0, 18.0, 6),
        ] {
            assert!(p.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn disc_background_is_flat() {
        let d = textured_disc(64, 64, 32.0, 32.0, 16.0, 6);
        assert!((d.get(2, 2) - BACKGROUND).abs() < 1e-9);
        let b = limb_bar(64, 64, 32.0, 32.0, 30.0, 8.0, 0.0, 1.0);
        assert!(b.get(32, 32) > 0.69 && (b.get(32, 2) - BACKGROUND).abs() < 1e-6);
    }
}
