use std::path::Path;

use crate::error::{Error, Result};

/// Smallest accepted frame side; the flow window has to fit.
pub const MIN_FRAME_SIDE: usize = 16;

/// A grayscale frame with intensities in `[0, 1]`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if width < MIN_FRAME_SIDE || height < MIN_FRAME_SIDE {
            return Err(Error::InvalidInput(format!(
                "frame {width}x{height} is smaller than {MIN_FRAME_SIDE}x{MIN_FRAME_SIDE}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "frame {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Validation(format!(
                "pixel intensity {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f32) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Reads an 8-bit grayscale PNG or PGM (other formats are converted to luma).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|source| match source {
                image::ImageError::IoError(e) => Error::io(path, e),
                source => Error::Image {
                    path: path.to_path_buf(),
                    source,
                },
            })?
            .into_luma8();
        let (w, h) = img.dimensions();
        let pixels = img
            .into_raw()
            .into_iter()
            .map(|v| v as f32 / 255.0)
            .collect();
        Self::new(w as usize, h as usize, pixels)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|v| (v * 255.0).round() as u8)
            .collect();
        image::save_buffer(
            path,
            &bytes,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.pixels[y * self.width + x]
    }

    /// Bilinear sample with clamped-edge padding.
    pub fn sample(&self, x: f64, y: f64) -> f32 {
        bilinear(&self.pixels, self.width, self.height, x, y)
    }
}

pub(crate) fn bilinear(data: &[f32], width: usize, height: usize, x: f64, y: f64) -> f32 {
    let x = x.clamp(0.0, (width - 1) as f64);
    let y = y.clamp(0.0, (height - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = (x - x0 as f64) as f32;
    let fy = (y - y0 as f64) as f32;
    let top = data[y0 * width + x0] * (1.0 - fx) + data[y0 * width + x1] * fx;
    let bottom = data[y1 * width + x0] * (1.0 - fx) + data[y1 * width + x1] * fx;
    top * (1.0 - fy) + bottom * fy
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_out_of_range() {
        assert!(Frame::new(15, 20, vec![0.0; 300]).is_err());
        assert!(Frame::new(16, 16, vec![0.0; 10]).is_err());
        let mut px = vec![0.5; 256];
        px[3] = 1.5;
        assert!(matches!(Frame::new(16, 16, px), Err(Error::Validation(_))));
    }

    #[test]
    fn png_round_trip_quantizes_to_8_bit() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::from_fn(16, 17, |x, y| ((x * 16 + y) % 256) as f32 / 255.0).unwrap();
        let p = dir.path().join("f.png");
        f.save_png(&p).unwrap();
        let g = Frame::load(&p).unwrap();
        assert_eq!(g.width(), 16);
        assert_eq!(g.height(), 17);
        for (a, b) in f.pixels().iter().zip(g.pixels()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn bilinear_clamps_at_edges() {
        let f = Frame::from_fn(16, 16, |x, _| x as f32 / 15.0).unwrap();
        assert_eq!(f.sample(-3.0, 4.0), 0.0);
        assert_eq!(f.sample(40.0, 4.0), 1.0);
        assert!((f.sample(7.5, 2.0) - 7.5 / 15.0).abs() < 1e-6);
    }
}
