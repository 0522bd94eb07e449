//! Binary images, netpbm codecs, pixel-inversion noise and amplitude maps.
//!
//! A pixel is either a point (white, reflective, `true`) or absorptive
//! (black, `false`). PBM stores black as `1`, so a PBM bit of `0` becomes a
//! point on load.
//!
//! Coordinates are `(x, y)` with `x` the column and `y` the row. Pixels are
//! stored row-major. The quantum encoding puts the x-register in the most
//! significant qubits: `basis index = x * height + y`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::state::{BasisIndex, StateVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    /// All-black image. Both dimensions must be powers of two >= 2.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_dimension(width)?;
        check_dimension(height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![false; width * height],
        })
    }

    pub fn from_fn<F>(width: usize, height: usize, mut is_point: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> bool,
    {
        let mut img = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                img.pixels[y * width + x] = is_point(x, y);
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Qubits in the x-register, `log2(width)`.
    pub fn n_x(&self) -> usize {
        self.width.trailing_zeros() as usize
    }

    /// Qubits in the y-register, `log2(height)`.
    pub fn n_y(&self) -> usize {
        self.height.trailing_zeros() as usize
    }

    pub fn num_qubits(&self) -> usize {
        self.n_x() + self.n_y()
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, point: bool) {
        self.pixels[y * self.width + x] = point;
    }

    /// Number of points `M`.
    pub fn point_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    /// All points in row-major order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.point_count());
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn basis_index(&self, x: usize, y: usize) -> BasisIndex {
        x * self.height + y
    }

    pub fn coordinates(&self, index: BasisIndex) -> (usize, usize) {
        (index / self.height, index % self.height)
    }

    /// Basis indices of all points, in row-major point order.
    pub fn point_indices(&self) -> Vec<BasisIndex> {
        self.points()
            .into_iter()
            .map(|(x, y)| self.basis_index(x, y))
            .collect()
    }

    /// Characteristic function evaluated on a basis index.
    pub fn is_point_at(&self, index: BasisIndex) -> bool {
        let (x, y) = self.coordinates(index);
        self.get(x, y)
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|p| !p).collect(),
        }
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::Domain(format!(
                "image shapes differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Plain (ASCII) or raw (binary) netpbm encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PnmEncoding {
    /// P1 for bitmaps, P2 for graymaps.
    Plain,
    /// P4 for bitmaps, P5 for graymaps.
    Raw,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn error<T>(&self, offset: usize, reason: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset,
            reason: reason.into(),
        })
    }

    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read_dimension(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.bytes.get(start) {
                None => self.error(start, format!("truncated header: missing {what}")),
                Some(_) => self.error(start, format!("expected decimal {what}")),
            };
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        let value: usize = match text.parse() {
            Ok(v) => v,
            Err(_) => return self.error(start, format!("{what} {text} does not fit")),
        };
        if value < 2 || !value.is_power_of_two() {
            return self.error(start, format!("{what} {value} is not a power of two >= 2"));
        }
        Ok(value)
    }
}

/// Decodes a P1 or P4 bitmap.
pub fn parse_pbm(bytes: &[u8]) -> Result<BinaryImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let raw = match bytes.get(..2) {
        Some(b"P1") => false,
        Some(b"P4") => true,
        _ => return cur.error(0, "missing P1/P4 magic number"),
    };
    cur.pos = 2;
    match bytes.get(2) {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        None => return cur.error(2, "truncated header"),
        Some(_) => return cur.error(2, "expected whitespace after magic number"),
    }
    let width = cur.read_dimension("width")?;
    let height = cur.read_dimension("height")?;
    let mut img = BinaryImage::new(width, height)?;

    if raw {
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            None => return cur.error(cur.pos, "truncated header"),
            Some(_) => return cur.error(cur.pos, "expected single whitespace before raster"),
        }
        let row_bytes = width.div_ceil(8);
        let needed = row_bytes * height;
        let raster = &bytes[cur.pos..];
        if raster.len() < needed {
            return cur.error(
                bytes.len(),
                format!("truncated raster: {} of {needed} bytes", raster.len()),
            );
        }
        for y in 0..height {
            let row = &raster[y * row_bytes..(y + 1) * row_bytes];
            for x in 0..width {
                let black = row[x / 8] & (0x80 >> (x % 8)) != 0;
                img.set(x, y, !black);
            }
        }
    } else {
        for i in 0..width * height {
            cur.skip_whitespace_and_comments();
            let black = match bytes.get(cur.pos) {
                Some(b'0') => false,
                Some(b'1') => true,
                Some(_) => return cur.error(cur.pos, "expected pixel value 0 or 1"),
                None => {
                    return cur.error(
                        cur.pos,
                        format!("truncated raster: {i} of {} pixels", width * height),
                    )
                }
            };
            cur.pos += 1;
            img.set(i % width, i / width, !black);
        }
    }
    Ok(img)
}

/// Encodes a bitmap; `parse_pbm` inverts this exactly.
pub fn write_pbm(image: &BinaryImage, encoding: PnmEncoding) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    match encoding {
        PnmEncoding::Plain => {
            let mut out = format!("P1\n{w} {h}\n");
            for y in 0..h {
                // At most 32 pixels per line keeps lines under 70 characters.
                for chunk_start in (0..w).step_by(32) {
                    let line: Vec<&str> = (chunk_start..(chunk_start + 32).min(w))
                        .map(|x| if image.get(x, y) { "0" } else { "1" })
                        .collect();
                    out.push_str(&line.join(" "));
                    out.push('\n');
                }
            }
            out.into_bytes()
        }
        PnmEncoding::Raw => {
            let mut out = format!("P4\n{w} {h}\n").into_bytes();
            let row_bytes = w.div_ceil(8);
            for y in 0..h {
                let mut row = vec![0u8; row_bytes];
                for x in 0..w {
                    if !image.get(x, y) {
                        row[x / 8] |= 0x80 >> (x % 8);
                    }
                }
                out.extend_from_slice(&row);
            }
            out
        }
    }
}

/// Flips every pixel independently with probability `p`.
///
/// The noise stream is ChaCha8 (`rand_chacha` 0.3) seeded through
/// `seed_from_u64(rng_seed)`. One `f64` is drawn per pixel in row-major
/// order and the pixel flips iff the draw is `< p`.
pub fn invert_pixels(image: &BinaryImage, p: f64, rng_seed: u64) -> Result<BinaryImage> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = image.clone();
    for px in out.pixels.iter_mut() {
        if rng.gen::<f64>() < p {
            *px = !*px;
        }
    }
    Ok(out)
}

/// File name for a noisy realization: `<name>_<noise_pct>_<seed>.pbm`.
pub fn noisy_file_name(name: &str, p: f64, seed: u64) -> String {
    format!("{name}_{}_{seed}.pbm", format_percent(p))
}

fn format_percent(p: f64) -> String {
    let pct = p * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        let mut s = format!("{pct:.6}");
        while s.ends_with('0') {
            s.pop();
        }
        s
    }
}

/// Squared amplitudes laid out on the pixel grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl AmplitudeMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Values in row-major order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Lays `|amplitude(x, y)|²` out on an `2^n_x × 2^n_y` grid.
pub fn render_amplitude_map(state: &StateVector, n_x: usize, n_y: usize) -> Result<AmplitudeMap> {
    if state.num_qubits() != n_x + n_y {
        return Err(Error::DimensionMismatch {
            expected: n_x + n_y,
            found: state.num_qubits(),
        });
    }
    let (width, height) = (1usize << n_x, 1usize << n_y);
    let mut values = vec![0.0; width * height];
    for x in 0..width {
        for y in 0..height {
            values[y * width + x] = state.probability(x * height + y);
        }
    }
    Ok(AmplitudeMap {
        width,
        height,
        values,
    })
}

/// Renders an amplitude map as an 8-bit graymap scaled to its maximum.
///
/// With `half_max_highlight` the linear ramp is compressed to `0..=160`,
/// pixels at or above half the maximum are drawn at 255 and the boundary of
/// the quarter-maximum region is traced at 220.
pub fn write_pgm(map: &AmplitudeMap, half_max_highlight: bool, encoding: PnmEncoding) -> Vec<u8> {
    let (w, h) = (map.width, map.height);
    let max = map.max();
    let scale = |v: f64, top: f64| -> u8 {
        if max > 0.0 {
            (v / max * top).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    };
    let above = |x: usize, y: usize, level: f64| map.get(x, y) >= level * max && max > 0.0;
    let mut gray = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let v = map.get(x, y);
            gray[y * w + x] = if !half_max_highlight {
                scale(v, 255.0)
            } else if above(x, y, 0.5) {
                255
            } else if above(x, y, 0.25) && on_boundary(map, x, y, 0.25 * max) {
                220
            } else {
                scale(v, 160.0)
            };
        }
    }
    match encoding {
        PnmEncoding::Plain => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in gray.chunks(w) {
                for chunk in row.chunks(16) {
                    let line: Vec<String> = chunk.iter().map(u8::to_string).collect();
                    let _ = writeln!(out, "{}", line.join(" "));
                }
            }
            out.into_bytes()
        }
        PnmEncoding::Raw => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&gray);
            out
        }
    }
}

fn on_boundary(map: &AmplitudeMap, x: usize, y: usize, level: f64) -> bool {
    let (w, h) = (map.width as isize, map.height as isize);
    [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].iter().any(|&(dx, dy)| {
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        nx < 0 || ny < 0 || nx >= w || ny >= h || map.get(nx as usize, ny as usize) < level
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn diagonal_2x2() -> BinaryImage {
        BinaryImage::from_fn(2, 2, |x, y| x == y).unwrap()
    }

    #[test]
    fn parse_plain_example() {
        let img = parse_pbm(b"P1\n2 2\n0 1\n1 0\n").unwrap();
        assert_eq!(img, diagonal_2x2());
        assert_eq!(img.points(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn parse_plain_with_comments_and_packed_digits() {
        let img = parse_pbm(b"P1 # magic\n# size follows\n2 # w\n2\n01\n# mid\n10").unwrap();
        assert_eq!(img, diagonal_2x2());
    }

    #[test]
    fn raw_encoding_matches_hand_built_bytes() {
        // Independent encoder: row 0 = [white, black] -> bits 01, row 1 -> 10.
        let bytes = [b"P4\n2 2\n".as_slice(), &[0b0100_0000, 0b1000_0000]].concat();
        assert_eq!(parse_pbm(&bytes).unwrap(), diagonal_2x2());
        assert_eq!(write_pbm(&diagonal_2x2(), PnmEncoding::Raw), bytes);
    }

    #[test]
    fn plain_output_has_magic() {
        let out = write_pbm(&diagonal_2x2(), PnmEncoding::Plain);
        assert!(out.starts_with(b"P1\n"));
        assert_eq!(parse_pbm(&out).unwrap(), diagonal_2x2());
    }

    #[test]
    fn parse_errors_name_offsets() {
        assert!(matches!(
            parse_pbm(b"P1\n3 2\n0 0 0\n0 0 0\n"),
            Err(Error::Parse { offset: 3, .. })
        ));
        assert!(matches!(parse_pbm(b"P7\n2 2\n"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(
            parse_pbm(b"P1\n2 2\n0 1\n1"),
            Err(Error::Parse { offset: 12, .. })
        ));
        assert!(matches!(
            parse_pbm(b"P1\n2 2\n0 2\n1 0\n"),
            Err(Error::Parse { offset: 9, .. })
        ));
        assert!(matches!(
            parse_pbm(b"P4\n8 2\n\x00"),
            Err(Error::Parse { offset: 8, .. })
        ));
        assert!(matches!(parse_pbm(b"P1\n2"), Err(Error::Parse { .. })));
    }

    #[test]
    fn rejects_bad_dimensions_in_constructor() {
        assert_eq!(BinaryImage::new(3, 4), Err(Error::NotPowerOfTwo(3)));
        assert_eq!(BinaryImage::new(4, 1), Err(Error::NotPowerOfTwo(1)));
    }

    #[test]
    fn point_counts() {
        let black = BinaryImage::new(4, 4).unwrap();
        assert!(black.points().is_empty());
        let white = black.complement();
        assert_eq!(white.points().len(), 16);
        let checker = BinaryImage::from_fn(4, 4, |x, y| (x + y) % 2 == 0).unwrap();
        assert_eq!(checker.point_count(), 8);
    }

    #[test]
    fn basis_index_is_x_major() {
        let img = BinaryImage::new(4, 8).unwrap();
        assert_eq!(img.basis_index(1, 2), 10);
        assert_eq!(img.coordinates(10), (1, 2));
        assert_eq!(img.n_x(), 2);
        assert_eq!(img.n_y(), 3);
    }

    #[test]
    fn inversion_extremes() {
        let img = BinaryImage::from_fn(8, 8, |x, y| x * y % 3 == 0).unwrap();
        assert_eq!(invert_pixels(&img, 0.0, 5).unwrap(), img);
        assert_eq!(invert_pixels(&img, 1.0, 5).unwrap(), img.complement());
        assert_eq!(invert_pixels(&img, 1.5, 5), Err(Error::InvalidProbability(1.5)));
        assert!(invert_pixels(&img, -0.1, 5).is_err());
    }

    #[test]
    fn inversion_is_pure_in_seed() {
        let img = BinaryImage::new(16, 16).unwrap();
        assert_eq!(
            invert_pixels(&img, 0.3, 11).unwrap(),
            invert_pixels(&img, 0.3, 11).unwrap()
        );
        assert_ne!(
            invert_pixels(&img, 0.3, 11).unwrap(),
            invert_pixels(&img, 0.3, 12).unwrap()
        );
    }

    #[test]
    fn inversion_rate_is_binomial() {
        let img = BinaryImage::new(512, 512).unwrap();
        let noisy = invert_pixels(&img, 0.1, 2024).unwrap();
        let flipped = noisy.point_count() as f64;
        let n = 512.0 * 512.0;
        let sigma = (n * 0.1 * 0.9f64).sqrt();
        assert!((flipped - 26_214.4).abs() < 4.0 * sigma, "flipped {flipped}");
    }

    #[test]
    fn noisy_names() {
        assert_eq!(noisy_file_name("A64", 0.05, 7), "A64_5_7.pbm");
        assert_eq!(noisy_file_name("A64", 0.0, 0), "A64_0_0.pbm");
        assert_eq!(noisy_file_name("B", 0.025, 3), "B_2.5_3.pbm");
    }

    #[test]
    fn amplitude_map_of_basis_state() {
        // |x=1, y=2⟩ on a 4x4 grid.
        let s = StateVector::new_basis_state(4, 4 + 2).unwrap();
        let map = render_amplitude_map(&s, 2, 2).unwrap();
        assert_eq!(map.get(1, 2), 1.0);
        assert_eq!(map.total(), 1.0);
    }

    #[test]
    fn amplitude_map_uniform_and_mismatch() {
        let s = StateVector::uniform(5).unwrap();
        let map = render_amplitude_map(&s, 3, 2).unwrap();
        assert_eq!((map.width(), map.height()), (8, 4));
        for v in map.values() {
            assert!((v - 1.0 / 32.0).abs() < 1e-15);
        }
        assert!((map.total() - 1.0).abs() < 1e-9);
        assert!(render_amplitude_map(&s, 2, 2).is_err());
    }

    #[test]
    fn amplitude_map_of_two_point_state() {
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        // points (0,0) and (1,1) of a 2x2 image -> indices 0 and 3
        let s = StateVector::from_amplitudes(vec![amp, zero, zero, amp]).unwrap();
        let map = render_amplitude_map(&s, 1, 1).unwrap();
        assert!((map.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((map.get(1, 1) - 0.5).abs() < 1e-15);
        assert_eq!(map.get(1, 0), 0.0);
    }

    #[test]
    fn pgm_output() {
        let s = StateVector::new_basis_state(4, 6).unwrap();
        let map = render_amplitude_map(&s, 2, 2).unwrap();
        let raw = write_pgm(&map, false, PnmEncoding::Raw);
        let header = b"P5\n4 4\n255\n";
        assert_eq!(&raw[..header.len()], header);
        let body = &raw[header.len()..];
        assert_eq!(body.len(), 16);
        // (x=1, y=2) -> row 2, column 1
        assert_eq!(body[2 * 4 + 1], 255);
        assert_eq!(body.iter().filter(|&&b| b == 0).count(), 15);

        let plain = String::from_utf8(write_pgm(&map, true, PnmEncoding::Plain)).unwrap();
        assert!(plain.starts_with("P2\n4 4\n255\n"));
        let values: Vec<u32> = plain.split_whitespace().skip(4).map(|t| t.parse().unwrap()).collect();
        assert_eq!(values.len(), 16);
        assert_eq!(values[9], 255);
    }

    #[test]
    fn pgm_highlight_marks_isoline() {
        // Peak of 1.0 with a 0.3 shoulder: shoulder sits between 1/4 and 1/2.
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[5] = Complex64::new(1.0, 0.0);
        amps[6] = Complex64::new(0.3f64.sqrt(), 0.0);
        let s = StateVector::from_amplitudes(amps).unwrap();
        let map = render_amplitude_map(&s, 2, 2).unwrap();
        let pgm = write_pgm(&map, true, PnmEncoding::Raw);
        let body = &pgm[b"P5\n4 4\n255\n".len()..];
        // index 5 -> (x=1,y=1); index 6 -> (x=1,y=2)
        assert_eq!(body[4 + 1], 255);
        assert_eq!(body[2 * 4 + 1], 220);
    }

    proptest! {
        #[test]
        fn pbm_round_trip(bits in proptest::collection::vec(any::<bool>(), 64 * 64), raw in any::<bool>()) {
            let img = BinaryImage::from_fn(64, 64, |x, y| bits[y * 64 + x]).unwrap();
            let enc = if raw { PnmEncoding::Raw } else { PnmEncoding::Plain };
            prop_assert_eq!(parse_pbm(&write_pbm(&img, enc)).unwrap(), img);
        }

        #[test]
        fn pbm_round_trip_rectangular(log_w in 1usize..6, log_h in 1usize..6, seed in any::<u64>()) {
            let base = BinaryImage::new(1 << log_w, 1 << log_h).unwrap();
            let img = invert_pixels(&base, 0.5, seed).unwrap();
            for enc in [PnmEncoding::Plain, PnmEncoding::Raw] {
                prop_assert_eq!(&parse_pbm(&write_pbm(&img, enc)).unwrap(), &img);
            }
        }
    }
}
