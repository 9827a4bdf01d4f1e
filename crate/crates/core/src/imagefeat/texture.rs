//! Whole-image texture descriptors: entropy, sharpness, Haar wavelet energy,
//! Tamura features, GLCM statistics and global GIST.

use std::f64::consts::PI;

use super::gist::{block_bounds, GaborBank, GLOBAL_SCALES, ORIENTATIONS};
use super::image::{HsvImage, Plane};

pub const TEXTURE_DIM: usize = 56;
pub const WAVELET_LEVELS: usize = 3;
pub const GLCM_LEVELS: usize = 64;
pub const TAMURA_OCTAVES: usize = 5;
/// Edge energies closer than this count as equal; the smaller window wins.
pub const COARSENESS_TIE: f64 = 1e-12;
pub const DIRECTION_BINS: usize = 16;
/// Prewitt gradient magnitude below which pixels do not vote for direction.
pub const DIRECTION_THRESHOLD: f64 = 12.0 / 255.0;
pub const SHARPNESS_GRID: usize = 4;

const CHANNELS: [&str; 3] = ["h", "s", "v"];

pub fn texture_feature_names() -> Vec<String> {
    let mut names = vec!["gray_entropy".to_string()];
    for s in ["mean", "variance", "min", "max"] {
        names.push(format!("sharpness_{s}"));
    }
    for c in CHANNELS {
        for l in 1..=WAVELET_LEVELS {
            names.push(format!("wavelet_{c}_level{l}"));
        }
    }
    for c in CHANNELS {
        names.push(format!("wavelet_{c}_sum"));
    }
    for s in ["coarseness", "contrast", "directionality"] {
        names.push(format!("tamura_{s}"));
    }
    for c in CHANNELS {
        for s in ["contrast", "correlation", "energy", "homogeneity"] {
            names.push(format!("glcm_{c}_{s}"));
        }
    }
    for s in 0..GLOBAL_SCALES.len() {
        for o in 0..ORIENTATIONS {
            names.push(format!("gist_s{s}_o{o}"));
        }
    }
    names
}

/// Texture vector of an image already resampled to the working size.
pub fn texture_features(gray: &Plane, hsv: &HsvImage, gist: &GaborBank) -> Vec<f64> {
    let mut out = Vec::with_capacity(TEXTURE_DIM);
    out.push(gray_entropy(gray));
    out.extend(sharpness_statistics(gray));

    let wavelets: Vec<[f64; WAVELET_LEVELS]> =
        hsv.channels().iter().map(|c| haar_detail_energy(c)).collect();
    for w in &wavelets {
        out.extend(w);
    }
    for w in &wavelets {
        out.push(w.iter().sum());
    }

    out.push(tamura_coarseness(gray));
    out.push(tamura_contrast(gray));
    out.push(tamura_directionality(gray));

    for c in hsv.channels() {
        out.extend(glcm_features(c));
    }
    out.extend(gist.global_energy(gray));
    debug_assert_eq!(out.len(), TEXTURE_DIM);
    out
}

#[inline]
fn quantize(v: f64, levels: usize) -> usize {
    ((v * levels as f64) as usize).min(levels - 1)
}

/// Shannon entropy (bits) of the 256-level gray histogram.
pub fn gray_entropy(gray: &Plane) -> f64 {
    let mut hist = [0usize; 256];
    for &g in &gray.data {
        hist[(g * 255.0).round().clamp(0.0, 255.0) as usize] += 1;
    }
    let n = gray.data.len() as f64;
    let h: f64 = hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Absolute 4-neighbour Laplacian with clamped borders.
pub fn laplacian_magnitude(gray: &Plane) -> Vec<f64> {
    let (w, h) = (gray.width as isize, gray.height as isize);
    let mut out = Vec::with_capacity(gray.data.len());
    for y in 0..h {
        for x in 0..w {
            let c = gray.get_clamped(x, y);
            let lap = (gray.get_clamped(x - 1, y) - c)
                + (gray.get_clamped(x + 1, y) - c)
                + (gray.get_clamped(x, y - 1) - c)
                + (gray.get_clamped(x, y + 1) - c);
            out.push(lap.abs());
        }
    }
    out
}

/// Mean, population variance, min and max of per-block mean sharpness.
pub fn sharpness_statistics(gray: &Plane) -> [f64; 4] {
    let lap = laplacian_magnitude(gray);
    let blocks: Vec<f64> = block_bounds(gray.width, gray.height, SHARPNESS_GRID)
        .into_iter()
        .map(|(x0, x1, y0, y1)| {
            let mut acc = 0.0;
            for y in y0..y1 {
                acc += lap[y * gray.width + x0..y * gray.width + x1].iter().sum::<f64>();
            }
            acc / ((x1 - x0) * (y1 - y0)) as f64
        })
        .collect();
    let n = blocks.len() as f64;
    let mean = blocks.iter().sum::<f64>() / n;
    let var = blocks.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / n;
    let min = blocks.iter().copied().fold(f64::INFINITY, f64::min);
    let max = blocks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    [mean, var, min, max]
}

/// Mean absolute detail coefficient (LH, HL, HH pooled) at each level of an
/// averaging Haar decomposition.
pub fn haar_detail_energy(plane: &Plane) -> [f64; WAVELET_LEVELS] {
    let mut energies = [0.0; WAVELET_LEVELS];
    let mut w = plane.width;
    let mut h = plane.height;
    let mut approx = plane.data.clone();
    let mut stride = plane.width;
    for energy in energies.iter_mut() {
        let (hw, hh) = (w / 2, h / 2);
        if hw == 0 || hh == 0 {
            break;
        }
        let mut next = Vec::with_capacity(hw * hh);
        let mut acc = 0.0;
        for y in 0..hh {
            for x in 0..hw {
                let a = approx[2 * y * stride + 2 * x];
                let b = approx[2 * y * stride + 2 * x + 1];
                let c = approx[(2 * y + 1) * stride + 2 * x];
                let d = approx[(2 * y + 1) * stride + 2 * x + 1];
                next.push((a + b + c + d) / 4.0);
                acc += ((a - b + c - d) / 4.0).abs()
                    + ((a + b - c - d) / 4.0).abs()
                    + ((a - b - c + d) / 4.0).abs();
            }
        }
        *energy = acc / (3 * hw * hh) as f64;
        approx = next;
        w = hw;
        h = hh;
        stride = hw;
    }
    energies
}

/// Summed-area table with a zero border row and column.
struct Integral {
    w: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn new(plane: &Plane) -> Self {
        let w = plane.width + 1;
        let mut sums = vec![0.0; w * (plane.height + 1)];
        for y in 0..plane.height {
            let mut row = 0.0;
            for x in 0..plane.width {
                row += plane.get(x, y);
                sums[(y + 1) * w + x + 1] = sums[y * w + x + 1] + row;
            }
        }
        Integral { w, sums }
    }

    /// Mean over the half-open rectangle `[x0, x1) x [y0, y1)`.
    fn mean(&self, x0: usize, x1: usize, y0: usize, y1: usize) -> f64 {
        let s = self.sums[y1 * self.w + x1] - self.sums[y0 * self.w + x1]
            - self.sums[y1 * self.w + x0]
            + self.sums[y0 * self.w + x0];
        s / ((x1 - x0) * (y1 - y0)) as f64
    }
}

/// Tamura coarseness with window sizes 2, 4, ..., 2^5.
pub fn tamura_coarseness(gray: &Plane) -> f64 {
    let (w, h) = (gray.width as isize, gray.height as isize);
    let integral = Integral::new(gray);
    // Averages over the 2^k window at every pixel, windows clipped to the image.
    let averages: Vec<Vec<f64>> = (1..=TAMURA_OCTAVES)
        .map(|k| {
            let half = 1isize << (k - 1);
            let mut a = Vec::with_capacity((w * h) as usize);
            for y in 0..h {
                let y0 = (y - half).max(0) as usize;
                let y1 = (y + half).min(h) as usize;
                for x in 0..w {
                    let x0 = (x - half).max(0) as usize;
                    let x1 = (x + half).min(w) as usize;
                    a.push(integral.mean(x0, x1, y0, y1));
                }
            }
            a
        })
        .collect();
    let at = |a: &Vec<f64>, x: isize, y: isize| {
        a[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize]
    };
    let mut total = 0.0;
    for y in 0..h {
        for x in 0..w {
            let mut best = (0usize, f64::NEG_INFINITY);
            for (k, a) in averages.iter().enumerate() {
                let half = 1isize << k;
                let eh = (at(a, x + half, y) - at(a, x - half, y)).abs();
                let ev = (at(a, x, y + half) - at(a, x, y - half)).abs();
                let e = eh.max(ev);
                if e > best.1 + COARSENESS_TIE {
                    best = (k, e);
                }
            }
            total += (1usize << (best.0 + 1)) as f64;
        }
    }
    total / (w * h) as f64
}

/// Tamura contrast: sigma / kurtosis^(1/4).
pub fn tamura_contrast(gray: &Plane) -> f64 {
    let n = gray.data.len() as f64;
    if gray.data.iter().all(|&g| g == gray.data[0]) {
        return 0.0;
    }
    let mean = gray.mean();
    let var = gray.data.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n;
    let m4 = gray.data.iter().map(|g| (g - mean).powi(4)).sum::<f64>() / n;
    let kurtosis = m4 / (var * var);
    var.sqrt() / kurtosis.powf(0.25)
}

/// Tamura directionality from a 16-bin edge-direction histogram: one minus
/// the normalized second moment around the dominant peak. Images without
/// edges score 0.
pub fn tamura_directionality(gray: &Plane) -> f64 {
    let (w, h) = (gray.width as isize, gray.height as isize);
    let mut hist = [0.0; DIRECTION_BINS];
    let mut votes = 0usize;
    for y in 0..h {
        for x in 0..w {
            let p = |dx: isize, dy: isize| gray.get_clamped(x + dx, y + dy);
            let dh = (p(1, -1) + p(1, 0) + p(1, 1)) - (p(-1, -1) + p(-1, 0) + p(-1, 1));
            let dv = (p(-1, 1) + p(0, 1) + p(1, 1)) - (p(-1, -1) + p(0, -1) + p(1, -1));
            if (dh.abs() + dv.abs()) / 2.0 < DIRECTION_THRESHOLD {
                continue;
            }
            let theta = dv.atan2(dh).rem_euclid(PI);
            let bin = ((theta / PI * DIRECTION_BINS as f64) as usize).min(DIRECTION_BINS - 1);
            hist[bin] += 1.0;
            votes += 1;
        }
    }
    if votes == 0 {
        return 0.0;
    }
    for v in hist.iter_mut() {
        *v /= votes as f64;
    }
    let peak = (0..DIRECTION_BINS)
        .max_by(|&a, &b| hist[a].total_cmp(&hist[b]).then(b.cmp(&a)))
        .unwrap();
    let bin_width = PI / DIRECTION_BINS as f64;
    let spread: f64 = (0..DIRECTION_BINS)
        .map(|b| {
            let raw = (b as isize - peak as isize).unsigned_abs() as f64 * bin_width;
            let d = raw.min(PI - raw);
            hist[b] * d * d
        })
        .sum();
    1.0 - spread / (PI / 2.0).powi(2)
}

/// Symmetric, normalized co-occurrence matrix averaged over the horizontal
/// and vertical unit offsets.
pub fn glcm(plane: &Plane, levels: usize) -> Vec<f64> {
    let q: Vec<usize> = plane.data.iter().map(|&v| quantize(v, levels)).collect();
    let (w, h) = (plane.width, plane.height);
    let mut horiz = vec![0.0; levels * levels];
    let mut vert = vec![0.0; levels * levels];
    for y in 0..h {
        for x in 0..w {
            let a = q[y * w + x];
            if x + 1 < w {
                let b = q[y * w + x + 1];
                horiz[a * levels + b] += 1.0;
                horiz[b * levels + a] += 1.0;
            }
            if y + 1 < h {
                let b = q[(y + 1) * w + x];
                vert[a * levels + b] += 1.0;
                vert[b * levels + a] += 1.0;
            }
        }
    }
    let nh: f64 = horiz.iter().sum();
    let nv: f64 = vert.iter().sum();
    horiz
        .iter()
        .zip(&vert)
        .map(|(a, b)| 0.5 * (a / nh + b / nv))
        .collect()
}

/// Contrast, correlation, energy and homogeneity of a symmetric GLCM.
/// Correlation is 0 when the quantized channel has no variance.
pub fn glcm_statistics(p: &[f64], levels: usize) -> [f64; 4] {
    let mut mean = 0.0;
    for i in 0..levels {
        for j in 0..levels {
            mean += i as f64 * p[i * levels + j];
        }
    }
    let (mut contrast, mut var, mut cov, mut energy, mut homog) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..levels {
        for j in 0..levels {
            let v = p[i * levels + j];
            if v == 0.0 {
                continue;
            }
            let d = i as f64 - j as f64;
            contrast += d * d * v;
            var += (i as f64 - mean).powi(2) * v;
            cov += (i as f64 - mean) * (j as f64 - mean) * v;
            energy += v * v;
            homog += v / (1.0 + d * d);
        }
    }
    let correlation = if var > 0.0 { cov / var } else { 0.0 };
    [contrast, correlation, energy, homog]
}

pub fn glcm_features(plane: &Plane) -> [f64; 4] {
    glcm_statistics(&glcm(plane, GLCM_LEVELS), GLCM_LEVELS)
}
