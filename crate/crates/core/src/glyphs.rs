//! Stroke outlines of the letters A and B, rasterized at pixel centers.
//! Strokes become points; the background is black.

use crate::error::Result;
use crate::image::BinaryImage;
use crate::pipeline::Label;

type Point = (f64, f64);

/// Stroke width of the shipped fixtures, as a fraction of the image side.
pub const DEFAULT_STROKE: f64 = 0.07;

/// Filter cutoff (cycles per image side) tuned for the default letters.
pub const RECOMMENDED_K_MAX: f64 = 7.0;

// Coordinates are fractions of the image side, y growing downwards.
const A_SEGMENTS: [(Point, Point); 3] = [
    ((0.14, 0.90), (0.50, 0.10)),
    ((0.50, 0.10), (0.86, 0.90)),
    ((0.30, 0.62), (0.70, 0.62)),
];

const B_STEM_X: f64 = 0.22;
const B_TOP: f64 = 0.10;
const B_MID: f64 = 0.49;
const B_BOTTOM: f64 = 0.90;
const B_UPPER_XC: f64 = 0.52;
const B_LOWER_XC: f64 = 0.56;

fn segment_distance((px, py): Point, ((ax, ay), (bx, by)): (Point, Point)) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let t = (((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((px - ax - t * dx).powi(2) + (py - ay - t * dy).powi(2)).sqrt()
}

/// Horizontal bars at `y0` and `y1` from the stem to `xc`, closed by a
/// half ring on the right.
fn bowl_contains((x, y): Point, y0: f64, y1: f64, xc: f64, half: f64) -> bool {
    let cy = 0.5 * (y0 + y1);
    let r = 0.5 * (y1 - y0);
    if x <= xc {
        x >= B_STEM_X && ((y - y0).abs() <= half || (y - y1).abs() <= half)
    } else {
        let d = ((x - xc).powi(2) + (y - cy).powi(2)).sqrt();
        (d - r).abs() <= half
    }
}

fn letter_contains(label: Label, p: Point, stroke: f64) -> bool {
    let half = 0.5 * stroke;
    match label {
        Label::A => A_SEGMENTS.iter().any(|&s| segment_distance(p, s) <= half),
        Label::B => {
            let (x, y) = p;
            let stem = (x - B_STEM_X).abs() <= half && (B_TOP - half..=B_BOTTOM + half).contains(&y);
            stem || bowl_contains(p, B_TOP, B_MID, B_UPPER_XC, half)
                || bowl_contains(p, B_MID, B_BOTTOM, B_LOWER_XC, half)
        }
    }
}

/// The letter on a `size × size` grid; `size` must be a power of two.
pub fn render_glyph_with_stroke(label: Label, size: usize, stroke: f64) -> Result<BinaryImage> {
    let s = size as f64;
    BinaryImage::from_fn(size, size, |x, y| {
        letter_contains(label, ((x as f64 + 0.5) / s, (y as f64 + 0.5) / s), stroke)
    })
}

/// The letter with the default stroke.
pub fn render_glyph(label: Label, size: usize) -> Result<BinaryImage> {
    render_glyph_with_stroke(label, size, DEFAULT_STROKE)
}

/// Upper-left quadrant lit on a `size × size` grid: exactly a quarter of
/// the pixels are points.
pub fn quadrant(size: usize) -> Result<BinaryImage> {
    let half = size / 2;
    BinaryImage::from_fn(size, size, |x, y| x < half && y < half)
}
