//! 8-bit RGB raster and the binary PPM (P6) encoder used for all outputs.

use std::io::{self, Write};
use std::path::Path;

use crate::math::Color;

/// Row-major 8-bit RGB image, top row first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

/// Quantize one linear channel to a byte: clamp(round(c * 255), 0, 255),
/// rounding half away from zero.
pub fn quantize_channel(c: f64) -> u8 {
    (c * 255.0).round().clamp(0.0, 255.0) as u8
}

impl Image {
    /// All-black image of the given dimensions.
    pub fn new(width: u32, height: u32) -> Image {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        Image {
            width,
            height,
            data: vec![0; width as usize * height as usize * 3],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn pixel(&self, x: u32, y: u32) -> (u8, u8, u8) {
        let o = self.offset(x, y);
        (self.data[o], self.data[o + 1], self.data[o + 2])
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: (u8, u8, u8)) {
        let o = self.offset(x, y);
        self.data[o] = rgb.0;
        self.data[o + 1] = rgb.1;
        self.data[o + 2] = rgb.2;
    }

    pub fn set_pixel_color(&mut self, x: u32, y: u32, c: Color) {
        self.set_pixel(x, y, (quantize_channel(c.r), quantize_channel(c.g), quantize_channel(c.b)));
    }

    /// Overwrite one scanline from quantized colors. `row.len()` must equal the width.
    pub fn write_row(&mut self, y: u32, row: &[Color]) {
        assert_eq!(row.len(), self.width as usize);
        let o = self.offset(0, y);
        for (i, c) in row.iter().enumerate() {
            self.data[o + i * 3] = quantize_channel(c.r);
            self.data[o + i * 3 + 1] = quantize_channel(c.g);
            self.data[o + i * 3 + 2] = quantize_channel(c.b);
        }
    }

    /// Binary PPM bytes: `P6\n<width> <height>\n255\n` followed by the raw
    /// RGB payload, row-major, top row first.
    pub fn encode_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.data.len());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.data);
        out
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&self.encode_ppm())
    }

    pub fn save_ppm<P: AsRef<Path>>(&self, path: P) -> io::Result<()> {
        std::fs::write(path, self.encode_ppm())
    }

    /// Parse a binary PPM produced by `encode_ppm` (used by tests and demos).
    pub fn decode_ppm(bytes: &[u8]) -> Result<Image, String> {
        let mut fields = Vec::new();
        let mut pos = 0;
        // Header is ASCII: magic, width, height, maxval, one whitespace byte, payload.
        while fields.len() < 4 && pos < bytes.len() {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            fields.push(&bytes[start..pos]);
        }
        if fields.len() < 4 || fields[0] != b"P6" {
            return Err("not a binary PPM".into());
        }
        let parse = |f: &[u8]| -> Result<u32, String> {
            std::str::from_utf8(f)
                .map_err(|e| e.to_string())?
                .parse::<u32>()
                .map_err(|e| e.to_string())
        };
        let width = parse(fields[1])?;
        let height = parse(fields[2])?;
        if parse(fields[3])? != 255 {
            return Err("unsupported maxval".into());
        }
        pos += 1; // single whitespace after maxval
        let expected = width as usize * height as usize * 3;
        let payload = bytes.get(pos..pos + expected).ok_or("truncated payload")?;
        Ok(Image {
            width,
            height,
            data: payload.to_vec(),
        })
    }
}
