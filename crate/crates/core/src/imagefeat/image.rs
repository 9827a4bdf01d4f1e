//! Decoded image containers and the colour-space conversions shared by every
//! extractor.

use std::path::Path;

use crate::error::{Error, Result};

/// Smallest accepted side length after ingestion.
pub const MIN_SIDE: usize = 32;

/// Row-major RGB image with channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMatrix {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl ImageMatrix {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::input("degenerate image: zero area"));
        }
        if width < MIN_SIDE || height < MIN_SIDE {
            return Err(Error::input(format!(
                "image is {width}x{height}; both sides must be at least {MIN_SIDE}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::input(format!(
                "pixel buffer has {} entries, expected {}",
                pixels.len(),
                width * height
            )));
        }
        if let Some(bad) = pixels
            .iter()
            .flatten()
            .find(|c| !c.is_finite() || **c < 0.0 || **c > 1.0)
        {
            return Err(Error::input(format!("channel value {bad} outside [0, 1]")));
        }
        Ok(ImageMatrix {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn constant(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    /// Converts a decoded image, upscaling anything smaller than
    /// [`MIN_SIDE`] on either axis.
    pub fn from_dynamic(img: &image::DynamicImage) -> Result<Self> {
        let rgb = img.to_rgb8();
        let (w, h) = (rgb.width() as usize, rgb.height() as usize);
        if w == 0 || h == 0 {
            return Err(Error::input("degenerate image: zero area"));
        }
        let pixels = rgb
            .pixels()
            .map(|p| {
                [
                    f64::from(p[0]) / 255.0,
                    f64::from(p[1]) / 255.0,
                    f64::from(p[2]) / 255.0,
                ]
            })
            .collect();
        let raw = ImageMatrix {
            width: w,
            height: h,
            pixels,
        };
        if w < MIN_SIDE || h < MIN_SIDE {
            Ok(raw.resize_bilinear(w.max(MIN_SIDE), h.max(MIN_SIDE)))
        } else {
            Ok(raw)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| match source {
            image::ImageError::IoError(e) => Error::io(path, e),
            source => Error::Image {
                path: path.to_path_buf(),
                source,
            },
        })?;
        Self::from_dynamic(&img)
    }

    /// Quantizes to 8-bit RGB for encoding.
    pub fn to_rgb8(&self) -> image::RgbImage {
        image::RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let p = self.pixel(x as usize, y as usize);
            image::Rgb(p.map(|c| (c * 255.0).round().clamp(0.0, 255.0) as u8))
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixels[y * self.width + x]
    }

    /// Luma plane (ITU-R BT.601 weights).
    pub fn gray(&self) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(|p| luma(*p)).collect(),
        }
    }

    pub fn hsv(&self) -> HsvImage {
        let mut h = Vec::with_capacity(self.pixels.len());
        let mut s = Vec::with_capacity(self.pixels.len());
        let mut v = Vec::with_capacity(self.pixels.len());
        for p in &self.pixels {
            let [ph, ps, pv] = rgb_to_hsv(*p);
            h.push(ph);
            s.push(ps);
            v.push(pv);
        }
        let plane = |data| Plane {
            width: self.width,
            height: self.height,
            data,
        };
        HsvImage {
            h: plane(h),
            s: plane(s),
            v: plane(v),
        }
    }

    /// Bilinear resampling with pixel-centre alignment. Resizing to the same
    /// dimensions returns an exact copy.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> ImageMatrix {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let mut out = Vec::with_capacity(width * height);
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        for y in 0..height {
            let (y0, y1, fy) = sample_coord(y, sy, self.height);
            for x in 0..width {
                let (x0, x1, fx) = sample_coord(x, sx, self.width);
                let a = self.pixel(x0, y0);
                let b = self.pixel(x1, y0);
                let c = self.pixel(x0, y1);
                let d = self.pixel(x1, y1);
                let mut p = [0.0; 3];
                for k in 0..3 {
                    let top = a[k] + fx * (b[k] - a[k]);
                    let bottom = c[k] + fx * (d[k] - c[k]);
                    p[k] = (top + fy * (bottom - top)).clamp(0.0, 1.0);
                }
                out.push(p);
            }
        }
        ImageMatrix {
            width,
            height,
            pixels: out,
        }
    }

    /// Left-right mirror.
    pub fn mirror_horizontal(&self) -> ImageMatrix {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                pixels.push(self.pixel(x, y));
            }
        }
        ImageMatrix { pixels, ..*self }
    }

    /// Top-bottom mirror.
    pub fn mirror_vertical(&self) -> ImageMatrix {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for y in (0..self.height).rev() {
            pixels.extend_from_slice(&self.pixels[y * self.width..(y + 1) * self.width]);
        }
        ImageMatrix { pixels, ..*self }
    }

    pub fn rotate180(&self) -> ImageMatrix {
        let mut pixels = self.pixels.clone();
        pixels.reverse();
        ImageMatrix { pixels, ..*self }
    }
}

fn sample_coord(i: usize, scale: f64, len: usize) -> (usize, usize, f64) {
    let src = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
    let i0 = src.floor() as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, src - i0 as f64)
}

#[inline]
pub fn luma(p: [f64; 3]) -> f64 {
    0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]
}

/// RGB to HSV with hue in `[0, 1)`. Achromatic pixels get hue 0.
pub fn rgb_to_hsv([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta <= 0.0 {
        return [0.0, s, v];
    }
    let sector = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = sector / 6.0;
    if h >= 1.0 {
        h -= 1.0;
    }
    [h, s, v]
}

/// HSV (hue in `[0, 1)`) to RGB.
pub fn rgb_from_hsv(h: f64, s: f64, v: f64) -> [f64; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    match sector as u8 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

/// Single-channel row-major plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "plane buffer size mismatch");
        Plane {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Reads with coordinates clamped to the border.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// HSV planes of an image; `h` is circular in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HsvImage {
    pub h: Plane,
    pub s: Plane,
    pub v: Plane,
}

impl HsvImage {
    pub fn width(&self) -> usize {
        self.h.width
    }

    pub fn height(&self) -> usize {
        self.h.height
    }

    pub fn channels(&self) -> [&Plane; 3] {
        [&self.h, &self.s, &self.v]
    }
}
