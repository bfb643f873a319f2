//! Full-range BT.601 R'G'B' <-> Y'CbCr.

pub const KR: f64 = 0.299;
pub const KB: f64 = 0.114;
pub const KG: f64 = 1.0 - KR - KB;

const CB_SCALE: f64 = 2.0 * (1.0 - KB); // 1.772
const CR_SCALE: f64 = 2.0 * (1.0 - KR); // 1.402

/// Converts one R'G'B' triplet in [0,1] to (Y, Cb, Cr).
///
/// Inputs are clamped to [0,1]. Luma lands in [0,1] and chroma in [-0.5,0.5].
#[inline]
pub fn rgb_to_luma_chroma(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(|c| c.clamp(0.0, 1.0));
    let y = KR * r + KG * g + KB * b;
    let c = |v: f64| v.clamp(-0.5, 0.5);
    [y, c((b - y) / CB_SCALE), c((r - y) / CR_SCALE)]
}

/// Inverse of [`rgb_to_luma_chroma`]. Out-of-gamut results are not clamped.
#[inline]
pub fn luma_chroma_to_rgb(ycc: [f64; 3]) -> [f64; 3] {
    let [y, cb, cr] = ycc;
    let r = y + CR_SCALE * cr;
    let b = y + CB_SCALE * cb;
    let g = (y - KR * r - KB * b) / KG;
    [r, g, b]
}
