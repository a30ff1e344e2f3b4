//! Grayscale signature images: binary PGM decoding/encoding and the
//! canonicalization applied before any decomposition.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Side length of every image entering the decomposition pipeline.
pub const CANONICAL_SIDE: usize = 256;

/// Smallest accepted input side for [`preprocess`].
pub const MIN_SIDE: usize = 8;

/// Row-major grid of intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    data: Array2<f64>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidImage(format!("empty image {rows}x{cols}")));
        }
        if pixels.len() != rows * cols {
            return Err(Error::InvalidImage(format!(
                "{} pixels for a {rows}x{cols} image",
                pixels.len()
            )));
        }
        let data = Array2::from_shape_vec((rows, cols), pixels)
            .map_err(|e| Error::InvalidImage(e.to_string()))?;
        Self::from_array(data)
    }

    pub fn from_array(data: Array2<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidImage("empty image".into()));
        }
        if let Some(p) = data.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidImage(format!("pixel value {p} outside [0, 1]")));
        }
        // Keep the backing store in standard layout so `pixels()` is always available.
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        Ok(Self { data })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn pixels(&self) -> &[f64] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self, field: &'static str) -> Result<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format {
                field,
                detail: "missing value".into(),
            });
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, field: &'static str) -> Result<usize> {
        let tok = self.token(field)?;
        std::str::from_utf8(tok)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::Format {
                field,
                detail: format!("not a decimal integer: {:?}", String::from_utf8_lossy(tok)),
            })
    }
}

/// Decode a binary 8-bit PGM (`P5`, maxval 255). Pixels are scaled to `raw / 255`.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut rd = HeaderReader { bytes, pos: 0 };
    let magic = rd.token("magic")?;
    if magic != b"P5" {
        return Err(Error::Format {
            field: "magic",
            detail: format!(
                "expected P5, found {:?}",
                String::from_utf8_lossy(magic)
            ),
        });
    }
    let width = rd.number("width")?;
    let height = rd.number("height")?;
    let maxval = rd.number("maxval")?;
    if width == 0 {
        return Err(Error::Format {
            field: "width",
            detail: "must be positive".into(),
        });
    }
    if height == 0 {
        return Err(Error::Format {
            field: "height",
            detail: "must be positive".into(),
        });
    }
    if maxval != 255 {
        return Err(Error::Format {
            field: "maxval",
            detail: format!("only 255 is supported, found {maxval}"),
        });
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(rd.pos) {
        Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
        _ => {
            return Err(Error::Format {
                field: "maxval",
                detail: "not followed by a whitespace byte".into(),
            })
        }
    }
    let need = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format {
            field: "width",
            detail: "image dimensions overflow".into(),
        })?;
    let payload = &bytes[rd.pos..];
    if payload.len() < need {
        return Err(Error::Format {
            field: "payload",
            detail: format!("truncated: {} of {need} bytes present", payload.len()),
        });
    }
    let pixels = payload[..need].iter().map(|&b| f64::from(b) / 255.0).collect();
    GrayImage::new(height, width, pixels)
}

/// Encode as binary PGM, quantizing each pixel to the nearest of 256 levels.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    out.extend(
        img.pixels()
            .iter()
            .map(|&p| (p * 255.0).round().clamp(0.0, 255.0) as u8),
    );
    out
}

/// Bilinear resample with pixel-center alignment.
pub fn resize_bilinear(src: ArrayView2<f64>, rows: usize, cols: usize) -> Array2<f64> {
    let (sr, sc) = src.dim();
    let axis = |n_out: usize, n_in: usize| -> Vec<(usize, usize, f64)> {
        let scale = n_in as f64 / n_out as f64;
        (0..n_out)
            .map(|d| {
                let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (n_in - 1) as f64);
                let i0 = s.floor() as usize;
                let i1 = (i0 + 1).min(n_in - 1);
                (i0, i1, s - i0 as f64)
            })
            .collect()
    };
    let ry = axis(rows, sr);
    let rx = axis(cols, sc);
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        let (y0, y1, fy) = ry[r];
        let (x0, x1, fx) = rx[c];
        let top = src[[y0, x0]] * (1.0 - fx) + src[[y0, x1]] * fx;
        let bottom = src[[y1, x0]] * (1.0 - fx) + src[[y1, x1]] * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// Canonicalize a scanned signature: invert so ink is high, resample to
/// 256x256 when needed, clamp to `[0, 1]`.
pub fn preprocess(img: &GrayImage) -> Result<GrayImage> {
    let (rows, cols) = (img.rows(), img.cols());
    if rows < MIN_SIDE || cols < MIN_SIDE {
        return Err(Error::Size {
            rows,
            cols,
            min: MIN_SIDE,
        });
    }
    let inverted = img.view().mapv(|p| 1.0 - p);
    let mut out = if (rows, cols) == (CANONICAL_SIDE, CANONICAL_SIDE) {
        inverted
    } else {
        resize_bilinear(inverted.view(), CANONICAL_SIDE, CANONICAL_SIDE)
    };
    out.mapv_inplace(|p| p.clamp(0.0, 1.0));
    GrayImage::from_array(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(header: &str, payload: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(payload);
        v
    }

    #[test]
    fn decodes_p5_with_scaling() {
        let img = load_pgm(&pgm("P5\n2 2\n255\n", &[0, 255, 128, 64])).unwrap();
        assert_eq!((img.rows(), img.cols()), (2, 2));
        assert_eq!(img.pixels(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn comments_between_tokens() {
        let img = load_pgm(&pgm("P5 # scanner\n3 # w\n# h next\n1\n255\n", &[1, 2, 3])).unwrap();
        assert_eq!((img.rows(), img.cols()), (1, 3));
    }

    #[test]
    fn truncated_payload() {
        let err = load_pgm(&pgm("P5\n2 2\n255\n", &[1, 2, 3])).unwrap_err();
        assert!(matches!(err, Error::Format { field: "payload", .. }), "{err}");
    }

    #[test]
    fn ascii_variant_rejected() {
        let err = load_pgm(b"P2\n2 2\n255\n0 1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Format { field: "magic", .. }), "{err}");
    }

    #[test]
    fn header_field_errors() {
        let err = load_pgm(&pgm("P5\n2 2\n65535\n", &[0; 8])).unwrap_err();
        assert!(matches!(err, Error::Format { field: "maxval", .. }));
        let err = load_pgm(b"P5\nx 2\n255\n").unwrap_err();
        assert!(matches!(err, Error::Format { field: "width", .. }));
        let err = load_pgm(b"P5\n2\n").unwrap_err();
        assert!(matches!(err, Error::Format { field: "height", .. }));
        let err = load_pgm(b"P5\n0 2\n255\n").unwrap_err();
        assert!(matches!(err, Error::Format { field: "width", .. }));
    }

    #[test]
    fn encode_then_decode_quantizes() {
        let px: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
        let img = GrayImage::new(3, 4, px).unwrap();
        let back = load_pgm(&encode_pgm(&img)).unwrap();
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= 1.0 / 255.0);
        }
    }

    #[test]
    fn rejects_out_of_range_pixels() {
        assert!(GrayImage::new(1, 2, vec![0.5, 1.5]).is_err());
        assert!(GrayImage::new(1, 2, vec![0.5]).is_err());
    }

    #[test]
    fn blank_page_becomes_zero() {
        let white = GrayImage::filled(256, 256, 1.0).unwrap();
        let out = preprocess(&white).unwrap();
        assert!(out.pixels().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn resizes_to_canonical() {
        let img = GrayImage::filled(512, 512, 0.25).unwrap();
        let out = preprocess(&img).unwrap();
        assert_eq!((out.rows(), out.cols()), (256, 256));
        assert!(out.pixels().iter().all(|&p| (p - 0.75).abs() < 1e-12));

        let odd = GrayImage::filled(37, 91, 0.5).unwrap();
        let out = preprocess(&odd).unwrap();
        assert_eq!((out.rows(), out.cols()), (256, 256));
    }

    #[test]
    fn degenerate_input() {
        let tiny = GrayImage::filled(7, 300, 1.0).unwrap();
        assert!(matches!(preprocess(&tiny), Err(Error::Size { .. })));
    }

    /// Weight of source sample `s` in output sample `d` under center-aligned
    /// linear interpolation, computed from the continuous hat function.
    fn hat_weight(d: usize, s: usize, n_out: usize, n_in: usize) -> f64 {
        let pos = ((d as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5).clamp(0.0, (n_in - 1) as f64);
        (1.0 - (pos - s as f64).abs()).max(0.0)
    }

    #[test]
    fn single_ink_pixel_mass() {
        let mut px = vec![1.0; 256 * 256];
        px[100 * 256 + 37] = 0.0;
        let out = preprocess(&GrayImage::new(256, 256, px).unwrap()).unwrap();
        let mass: f64 = out.pixels().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);

        let (r, c) = (201, 58);
        let mut px = vec![1.0; 512 * 512];
        px[r * 512 + c] = 0.0;
        let out = preprocess(&GrayImage::new(512, 512, px).unwrap()).unwrap();
        let mass: f64 = out.pixels().iter().sum();
        let oracle: f64 = (0..256)
            .map(|d| hat_weight(d, r, 256, 512))
            .sum::<f64>()
            * (0..256).map(|d| hat_weight(d, c, 256, 512)).sum::<f64>();
        assert!(mass > 0.0);
        assert!((mass - oracle).abs() < 1e-12, "{mass} vs {oracle}");
    }

    #[test]
    fn canonical_input_is_an_involution() {
        let px: Vec<f64> = (0..256 * 256).map(|i| ((i * 7919) % 1000) as f64 / 999.0).collect();
        let img = GrayImage::new(256, 256, px).unwrap();
        let once = preprocess(&img).unwrap();
        let twice = preprocess(&once).unwrap();
        for ((a, b), c) in img.pixels().iter().zip(once.pixels()).zip(twice.pixels()) {
            assert!((b - (1.0 - a)).abs() < 1e-12);
            assert!((c - a).abs() < 1e-12);
        }
    }
}
