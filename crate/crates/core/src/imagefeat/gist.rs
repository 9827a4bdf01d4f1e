//! Frequency-domain Gabor filter bank used for the global and block GIST
//! descriptors.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::image::Plane;

/// Bandwidth of the log-Gabor radial profile (ratio of sigma to centre).
const RADIAL_SIGMA_RATIO: f64 = 0.55;
/// Angular sigma as a fraction of the orientation spacing.
const ANGULAR_SIGMA_FRACTION: f64 = 0.6;

pub const GLOBAL_SCALES: [f64; 3] = [0.25, 0.125, 0.0625];
pub const BLOCK_SCALES: [f64; 4] = [0.3, 0.15, 0.075, 0.0375];
pub const ORIENTATIONS: usize = 8;

/// Transfer function of one oriented log-Gabor filter at frequency
/// `(fx, fy)` in cycles per pixel.
pub fn log_gabor_response(fx: f64, fy: f64, centre: f64, theta: f64, orientations: usize) -> f64 {
    let f = (fx * fx + fy * fy).sqrt();
    if f == 0.0 {
        return 0.0;
    }
    let radial = (-(f / centre).ln().powi(2) / (2.0 * RADIAL_SIGMA_RATIO.ln().powi(2))).exp();
    let mut d = fy.atan2(fx) - theta;
    d = (d + PI).rem_euclid(2.0 * PI) - PI;
    let sigma = ANGULAR_SIGMA_FRACTION * PI / orientations as f64;
    radial * (-(d * d) / (2.0 * sigma * sigma)).exp()
}

/// Signed FFT frequency of bin `k` for a transform of length `n`.
#[inline]
pub fn fft_frequency(k: usize, n: usize) -> f64 {
    if 2 * k < n {
        k as f64 / n as f64
    } else {
        k as f64 / n as f64 - 1.0
    }
}

/// Filters are ordered scale-major: all orientations of the first scale,
/// then the next scale.
pub struct GaborBank {
    width: usize,
    height: usize,
    filters: Vec<Vec<f64>>,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GaborBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaborBank")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("filters", &self.filters.len())
            .finish()
    }
}

impl GaborBank {
    pub fn new(width: usize, height: usize, scales: &[f64], orientations: usize) -> Self {
        let mut filters = Vec::with_capacity(scales.len() * orientations);
        for &centre in scales {
            for o in 0..orientations {
                let theta = o as f64 * PI / orientations as f64;
                let mut g = Vec::with_capacity(width * height);
                for ky in 0..height {
                    let fy = fft_frequency(ky, height);
                    for kx in 0..width {
                        let fx = fft_frequency(kx, width);
                        g.push(log_gabor_response(fx, fy, centre, theta, orientations));
                    }
                }
                filters.push(g);
            }
        }
        let mut planner = FftPlanner::new();
        GaborBank {
            width,
            height,
            filters,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let (w, h) = (self.width, self.height);
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        row.process(data);
        let mut column = vec![Complex64::default(); h];
        for x in 0..w {
            for y in 0..h {
                column[y] = data[y * w + x];
            }
            col.process(&mut column);
            for y in 0..h {
                data[y * w + x] = column[y];
            }
        }
    }

    /// Magnitude of every filter response over the mean-removed plane.
    pub fn magnitudes(&self, plane: &Plane) -> Vec<Vec<f64>> {
        assert_eq!(
            (plane.width, plane.height),
            (self.width, self.height),
            "plane does not match filter bank size"
        );
        let mean = plane.mean();
        let mut spectrum: Vec<Complex64> = plane
            .data
            .iter()
            .map(|v| Complex64::new(v - mean, 0.0))
            .collect();
        self.fft2(&mut spectrum, false);
        let norm = (self.width * self.height) as f64;
        self.filters
            .iter()
            .map(|g| {
                let mut buf: Vec<Complex64> =
                    spectrum.iter().zip(g).map(|(s, gv)| s * gv).collect();
                self.fft2(&mut buf, true);
                buf.iter().map(|c| c.norm() / norm).collect()
            })
            .collect()
    }

    /// Mean response magnitude of each filter over the whole plane.
    pub fn global_energy(&self, plane: &Plane) -> Vec<f64> {
        self.magnitudes(plane)
            .iter()
            .map(|m| m.iter().sum::<f64>() / m.len() as f64)
            .collect()
    }

    /// Mean response magnitude per filter inside each cell of a
    /// `grid x grid` partition. Output is cell-major in row order.
    pub fn block_energy(&self, plane: &Plane, grid: usize) -> Vec<f64> {
        let mags = self.magnitudes(plane);
        let mut out = Vec::with_capacity(grid * grid * mags.len());
        for (x0, x1, y0, y1) in block_bounds(self.width, self.height, grid) {
            let area = ((x1 - x0) * (y1 - y0)) as f64;
            for m in &mags {
                let mut acc = 0.0;
                for y in y0..y1 {
                    acc += m[y * self.width + x0..y * self.width + x1].iter().sum::<f64>();
                }
                out.push(acc / area);
            }
        }
        out
    }
}

/// Pixel bounds `(x0, x1, y0, y1)` of each grid cell, row-major.
pub fn block_bounds(width: usize, height: usize, grid: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut cells = Vec::with_capacity(grid * grid);
    for by in 0..grid {
        for bx in 0..grid {
            cells.push((
                bx * width / grid,
                (bx + 1) * width / grid,
                by * height / grid,
                (by + 1) * height / grid,
            ));
        }
    }
    cells
}
