//! Minimal 8-bit RGB image buffer with binary PPM (P6) IO and the resampling
//! primitives the augmentations and the inference preprocessing need.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Gray value used for padding and out-of-image samples.
pub const FILL_GRAY: u8 = 114;

/// Row-major interleaved RGB pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl ImageBuffer {
    pub const CHANNELS: usize = 3;

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width as usize * height as usize * Self::CHANNELS],
        }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        let want = width as usize * height as usize * Self::CHANNELS;
        if data.len() != want {
            return Err(Error::Shape(format!(
                "{} bytes for a {width}x{height} RGB image (want {want})",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * Self::CHANNELS
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    #[inline]
    pub fn put_pixel(&mut self, x: u32, y: u32, px: [u8; 3]) {
        let o = self.offset(x, y);
        self.data[o..o + 3].copy_from_slice(&px);
    }

    /// Bilinear sample at continuous pixel-index coordinates (pixel `i` sits at `i`);
    /// neighbors outside the image read as `fill`.
    pub fn sample_bilinear(&self, fx: f64, fy: f64, fill: u8) -> [f64; 3] {
        let x0 = fx.floor();
        let y0 = fy.floor();
        let (wx, wy) = (fx - x0, fy - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let read = |x: i64, y: i64| -> [f64; 3] {
            if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
                [fill as f64; 3]
            } else {
                self.pixel(x as u32, y as u32).map(|v| v as f64)
            }
        };
        let (p00, p10, p01, p11) = (read(x0, y0), read(x0 + 1, y0), read(x0, y0 + 1), read(x0 + 1, y0 + 1));
        let mut out = [0.0; 3];
        for c in 0..3 {
            let top = if wx == 0.0 { p00[c] } else { p00[c] * (1.0 - wx) + p10[c] * wx };
            let bot = if wx == 0.0 { p01[c] } else { p01[c] * (1.0 - wx) + p11[c] * wx };
            out[c] = if wy == 0.0 { top } else { top * (1.0 - wy) + bot * wy };
        }
        out
    }

    /// Bilinear resize with pixel-center alignment. Same-size resizes copy.
    pub fn resize(&self, width: u32, height: u32) -> ImageBuffer {
        if (width, height) == self.dims() {
            return self.clone();
        }
        let mut out = ImageBuffer::filled(width, height, 0);
        if self.width == 0 || self.height == 0 {
            return out;
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        for y in 0..height {
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
            for x in 0..width {
                let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
                let v = self.sample_bilinear(fx, fy, 0);
                out.put_pixel(x, y, v.map(to_u8));
            }
        }
        out
    }

    /// Copies the `width x height` window at `(x0, y0)`; must lie inside the image.
    pub fn crop(&self, x0: u32, y0: u32, width: u32, height: u32) -> Result<ImageBuffer> {
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::Precondition(format!(
                "crop {width}x{height}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in y0..y0 + height {
            let start = self.offset(x0, y);
            data.extend_from_slice(&self.data[start..start + width as usize * 3]);
        }
        Ok(ImageBuffer {
            width,
            height,
            data,
        })
    }

    pub fn flip_horizontal(&self) -> ImageBuffer {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.put_pixel(self.width - 1 - x, y, self.pixel(x, y));
            }
        }
        out
    }

    /// Copies `src` with its top-left corner at `(x0, y0)`, clipping at the borders.
    pub fn paste(&mut self, src: &ImageBuffer, x0: i64, y0: i64) {
        for y in 0..src.height {
            let ty = y0 + y as i64;
            if ty < 0 || ty >= self.height as i64 {
                continue;
            }
            for x in 0..src.width {
                let tx = x0 + x as i64;
                if tx < 0 || tx >= self.width as i64 {
                    continue;
                }
                self.put_pixel(tx as u32, ty as u32, src.pixel(x, y));
            }
        }
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<ppm>", e);
        write!(w, "P6\n{} {}\n255\n", self.width, self.height).map_err(io)?;
        w.write_all(&self.data).map_err(io)
    }

    pub fn read_ppm<R: BufRead>(mut r: R) -> Result<ImageBuffer> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| Error::io("<ppm>", e))?;
        let mut pos = 0usize;
        let mut token = || -> Result<String> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Shape("truncated PPM header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token()? != "P6" {
            return Err(Error::Shape("not a binary PPM (P6)".into()));
        }
        let num = |t: String| t.parse::<u32>().map_err(|_| Error::Shape(format!("bad PPM number {t:?}")));
        let width = num(token()?)?;
        let height = num(token()?)?;
        let maxval = num(token()?)?;
        if maxval != 255 {
            return Err(Error::Shape(format!("unsupported PPM maxval {maxval}")));
        }
        // exactly one whitespace byte separates the header from the raster
        let data = bytes.get(pos + 1..).unwrap_or_default().to_vec();
        ImageBuffer::from_raw(width, height, data)
    }

    pub fn load_ppm(path: impl AsRef<Path>) -> Result<ImageBuffer> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_ppm(std::io::BufReader::new(file))
    }

    pub fn save_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_ppm(std::io::BufWriter::new(file))
    }
}

#[inline]
pub(crate) fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
