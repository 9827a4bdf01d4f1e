//! Block-level descriptors over a 4x4 partition of the working-size image:
//! HSV colour histograms, uniform LBP histograms, block GIST and averaged
//! dense SIFT.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use super::gist::{block_bounds, GaborBank, BLOCK_SCALES, ORIENTATIONS};
use super::image::{HsvImage, Plane};

pub const GRID: usize = 4;
pub const BLOCKS: usize = GRID * GRID;

pub const COLOUR_BINS: usize = 32;
const HUE_BINS: usize = 8;

pub const LBP_NEIGHBOURS: usize = 8;
pub const LBP_RADIUS: f64 = 2.0;
pub const LBP_BINS: usize = 59;

pub const GIST_PER_BLOCK: usize = ORIENTATIONS * BLOCK_SCALES.len();

pub const SIFT_DIM: usize = 128;
pub const SIFT_STEP: usize = 8;
pub const SIFT_BIN_SIZE: usize = 8;
const SIFT_CELLS: usize = 4;
const SIFT_ORIENTATIONS: usize = 8;
const SIFT_CLAMP: f64 = 0.2;

pub const LOCAL_COLOUR_DIM: usize = BLOCKS * COLOUR_BINS;
pub const LOCAL_LBP_DIM: usize = BLOCKS * LBP_BINS;
pub const LOCAL_GIST_DIM: usize = BLOCKS * GIST_PER_BLOCK;
pub const LOCAL_SIFT_DIM: usize = BLOCKS * SIFT_DIM;
pub const LOCAL_DIM: usize = LOCAL_COLOUR_DIM + LOCAL_LBP_DIM + LOCAL_GIST_DIM + LOCAL_SIFT_DIM;

pub fn local_colour_names() -> Vec<String> {
    per_block(COLOUR_BINS, |b, i| format!("local_colour_b{b}_bin{i}"))
}

pub fn local_lbp_names() -> Vec<String> {
    per_block(LBP_BINS, |b, i| format!("local_lbp_b{b}_bin{i}"))
}

pub fn local_gist_names() -> Vec<String> {
    per_block(GIST_PER_BLOCK, |b, i| {
        format!("local_gist_b{b}_s{}_o{}", i / ORIENTATIONS, i % ORIENTATIONS)
    })
}

pub fn local_sift_names() -> Vec<String> {
    per_block(SIFT_DIM, |b, i| format!("local_sift_b{b}_d{i}"))
}

fn per_block(len: usize, f: impl Fn(usize, usize) -> String) -> Vec<String> {
    (0..BLOCKS).flat_map(|b| (0..len).map(move |i| (b, i))).map(|(b, i)| f(b, i)).collect()
}

/// Block descriptors in group order: colour, LBP, GIST, SIFT.
pub fn local_features(gray: &Plane, hsv: &HsvImage, gist: &GaborBank) -> Vec<f64> {
    let mut out = Vec::with_capacity(LOCAL_DIM);
    out.extend(block_colour_histograms(hsv));
    out.extend(block_lbp_histograms(gray));
    out.extend(gist.block_energy(gray, GRID));
    out.extend(block_dense_sift(gray));
    debug_assert_eq!(out.len(), LOCAL_DIM);
    out
}

fn l1_normalize(hist: &mut [f64]) {
    let total: f64 = hist.iter().sum();
    if total > 0.0 {
        hist.iter_mut().for_each(|v| *v /= total);
    } else {
        // No mass at all: spread uniformly so the block still sums to one.
        let u = 1.0 / hist.len() as f64;
        hist.iter_mut().for_each(|v| *v = u);
    }
}

/// 8 hue x 2 saturation x 2 value bins.
#[inline]
pub fn colour_bin(h: f64, s: f64, v: f64) -> usize {
    let hb = ((h * HUE_BINS as f64) as usize).min(HUE_BINS - 1);
    hb * 4 + usize::from(s >= 0.5) * 2 + usize::from(v >= 0.5)
}

pub fn block_colour_histograms(hsv: &HsvImage) -> Vec<f64> {
    let w = hsv.width();
    let mut out = Vec::with_capacity(LOCAL_COLOUR_DIM);
    for (x0, x1, y0, y1) in block_bounds(w, hsv.height(), GRID) {
        let mut hist = [0.0; COLOUR_BINS];
        for y in y0..y1 {
            for x in x0..x1 {
                let i = y * w + x;
                hist[colour_bin(hsv.h.data[i], hsv.s.data[i], hsv.v.data[i])] += 1.0;
            }
        }
        l1_normalize(&mut hist);
        out.extend(hist);
    }
    out
}

fn transitions(code: u32) -> u32 {
    let rotated = (code >> 1) | ((code & 1) << (LBP_NEIGHBOURS - 1));
    (code ^ rotated).count_ones()
}

/// Maps each 8-bit code to its uniform-pattern bin: the 58 codes with at
/// most two circular transitions get bins 0..58 in ascending code order,
/// everything else shares bin 58.
pub fn uniform_lbp_table() -> &'static [u8; 256] {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [(LBP_BINS - 1) as u8; 256];
        let mut next = 0u8;
        for code in 0..256u32 {
            if transitions(code) <= 2 {
                table[code as usize] = next;
                next += 1;
            }
        }
        debug_assert_eq!(next as usize, LBP_BINS - 1);
        table
    })
}

/// Neighbour offsets on the radius-2 circle; near-integer offsets are
/// snapped so axis-aligned samples read pixels directly.
fn lbp_offsets() -> [(f64, f64); LBP_NEIGHBOURS] {
    let mut offs = [(0.0, 0.0); LBP_NEIGHBOURS];
    for (p, o) in offs.iter_mut().enumerate() {
        let a = TAU * p as f64 / LBP_NEIGHBOURS as f64;
        let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
        *o = (snap(LBP_RADIUS * a.cos()), snap(-LBP_RADIUS * a.sin()));
    }
    offs
}

#[inline]
fn bilinear(plane: &Plane, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as usize, y0 as usize);
    let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
    let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
    let a = plane.get(x0, y0);
    let b = plane.get(x1, y0);
    let c = plane.get(x0, y1);
    let d = plane.get(x1, y1);
    let top = a + fx * (b - a);
    let bottom = c + fx * (d - c);
    top + fy * (bottom - top)
}

/// LBP code at every pixel at least `radius` from the border; `None`
/// elsewhere.
pub fn lbp_codes(gray: &Plane) -> Vec<Option<u8>> {
    let offs = lbp_offsets();
    let r = LBP_RADIUS as usize;
    let (w, h) = (gray.width, gray.height);
    let mut codes = vec![None; w * h];
    for y in r..h.saturating_sub(r) {
        for x in r..w.saturating_sub(r) {
            let c = gray.get(x, y);
            let mut code = 0u8;
            for (p, (dx, dy)) in offs.iter().enumerate() {
                if bilinear(gray, x as f64 + dx, y as f64 + dy) >= c {
                    code |= 1 << p;
                }
            }
            codes[y * w + x] = Some(code);
        }
    }
    codes
}

pub fn block_lbp_histograms(gray: &Plane) -> Vec<f64> {
    let table = uniform_lbp_table();
    let codes = lbp_codes(gray);
    let w = gray.width;
    let mut out = Vec::with_capacity(LOCAL_LBP_DIM);
    for (x0, x1, y0, y1) in block_bounds(w, gray.height, GRID) {
        let mut hist = [0.0; LBP_BINS];
        for y in y0..y1 {
            for code in codes[y * w + x0..y * w + x1].iter().flatten() {
                hist[table[*code as usize] as usize] += 1.0;
            }
        }
        l1_normalize(&mut hist);
        out.extend(hist);
    }
    out
}

/// Orientation histograms of every `SIFT_BIN_SIZE` cell, with linear
/// interpolation between the two nearest orientation bins.
fn sift_cell_histograms(gray: &Plane) -> (usize, usize, Vec<[f64; SIFT_ORIENTATIONS]>) {
    let (w, h) = (gray.width as isize, gray.height as isize);
    let cw = gray.width / SIFT_BIN_SIZE;
    let ch = gray.height / SIFT_BIN_SIZE;
    let mut cells = vec![[0.0; SIFT_ORIENTATIONS]; cw * ch];
    for y in 0..(ch * SIFT_BIN_SIZE) as isize {
        for x in 0..(cw * SIFT_BIN_SIZE) as isize {
            let gx = gray.get_clamped((x + 1).min(w - 1), y) - gray.get_clamped((x - 1).max(0), y);
            let gy = gray.get_clamped(x, (y + 1).min(h - 1)) - gray.get_clamped(x, (y - 1).max(0));
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let o = gy.atan2(gx).rem_euclid(TAU) / TAU * SIFT_ORIENTATIONS as f64;
            let lo = (o.floor() as usize) % SIFT_ORIENTATIONS;
            let frac = o - o.floor();
            let hi = (lo + 1) % SIFT_ORIENTATIONS;
            let cell = &mut cells[(y as usize / SIFT_BIN_SIZE) * cw + x as usize / SIFT_BIN_SIZE];
            cell[lo] += mag * (1.0 - frac);
            cell[hi] += mag * frac;
        }
    }
    (cw, ch, cells)
}

/// Dense SIFT descriptors on a regular grid. Each entry is
/// `(centre_x, centre_y, descriptor)`.
pub fn dense_sift(gray: &Plane) -> Vec<(usize, usize, [f64; SIFT_DIM])> {
    let (cw, ch, cells) = sift_cell_histograms(gray);
    let half = SIFT_CELLS * SIFT_BIN_SIZE / 2;
    let mut out = Vec::new();
    let mut cy = half;
    while cy + half <= ch * SIFT_BIN_SIZE {
        let mut cx = half;
        while cx + half <= cw * SIFT_BIN_SIZE {
            let cell_x0 = (cx - half) / SIFT_BIN_SIZE;
            let cell_y0 = (cy - half) / SIFT_BIN_SIZE;
            let mut d = [0.0; SIFT_DIM];
            for j in 0..SIFT_CELLS {
                for i in 0..SIFT_CELLS {
                    let cell = &cells[(cell_y0 + j) * cw + cell_x0 + i];
                    let base = (j * SIFT_CELLS + i) * SIFT_ORIENTATIONS;
                    d[base..base + SIFT_ORIENTATIONS].copy_from_slice(cell);
                }
            }
            normalize_sift(&mut d);
            out.push((cx, cy, d));
            cx += SIFT_STEP;
        }
        cy += SIFT_STEP;
    }
    out
}

fn normalize_sift(d: &mut [f64; SIFT_DIM]) {
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    d.iter_mut().for_each(|v| *v = (*v / norm).min(SIFT_CLAMP));
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    d.iter_mut().for_each(|v| *v /= norm);
}

/// Mean descriptor of the grid points whose centres fall in each block,
/// L1-normalized.
pub fn block_dense_sift(gray: &Plane) -> Vec<f64> {
    let bw = gray.width / GRID;
    let bh = gray.height / GRID;
    let mut sums = vec![[0.0; SIFT_DIM]; BLOCKS];
    for (cx, cy, d) in dense_sift(gray) {
        let b = (cy / bh).min(GRID - 1) * GRID + (cx / bw).min(GRID - 1);
        for (s, v) in sums[b].iter_mut().zip(d) {
            *s += v;
        }
    }
    let mut out = Vec::with_capacity(LOCAL_SIFT_DIM);
    for mut s in sums {
        l1_normalize(&mut s);
        out.extend(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_table_has_59_bins() {
        let t = uniform_lbp_table();
        let mut bins: Vec<u8> = t.to_vec();
        bins.sort();
        bins.dedup();
        assert_eq!(bins.len(), LBP_BINS);
        assert_eq!(t[0], 0);
        assert_eq!(t[255], 57);
        assert_eq!(t[0b0101_0101], 58);
    }

    #[test]
    fn constant_lbp_is_all_ones_pattern() {
        let p = Plane::new(64, 64, vec![0.37; 64 * 64]);
        let h = block_lbp_histograms(&p);
        for block in h.chunks(LBP_BINS) {
            assert_eq!(block[57], 1.0);
            assert_eq!(block.iter().sum::<f64>(), 1.0);
        }
    }

    // Scalar LBP for a single pixel using explicit neighbour coordinates.
    #[test]
    fn lbp_code_matches_manual_neighbours() {
        let p = Plane::new(8, 8, (0..64).map(|i| ((i * 29) % 13) as f64 / 13.0).collect());
        let codes = lbp_codes(&p);
        let (x, y) = (4usize, 3usize);
        let c = p.get(x, y);
        let s = std::f64::consts::FRAC_1_SQRT_2 * 2.0;
        let interp = |fx: f64, fy: f64| {
            let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
            let (ax, ay) = (fx - x0 as f64, fy - y0 as f64);
            p.get(x0, y0) * (1.0 - ax) * (1.0 - ay)
                + p.get(x0 + 1, y0) * ax * (1.0 - ay)
                + p.get(x0, y0 + 1) * (1.0 - ax) * ay
                + p.get(x0 + 1, y0 + 1) * ax * ay
        };
        let (xf, yf) = (x as f64, y as f64);
        let neighbours = [
            p.get(x + 2, y),
            interp(xf + s, yf - s),
            p.get(x, y - 2),
            interp(xf - s, yf - s),
            p.get(x - 2, y),
            interp(xf - s, yf + s),
            p.get(x, y + 2),
            interp(xf + s, yf + s),
        ];
        let mut expected = 0u8;
        for (i, n) in neighbours.iter().enumerate() {
            if *n >= c {
                expected |= 1 << i;
            }
        }
        assert_eq!(codes[y * 8 + x], Some(expected));
        assert_eq!(codes[0], None);
    }

    #[test]
    fn sift_descriptors_are_unit_or_zero() {
        let p = Plane::new(64, 64, (0..4096).map(|i| ((i % 64) as f64 / 64.0).powi(2)).collect());
        let d = dense_sift(&p);
        // Centres 16..=48 step 8 on each axis.
        assert_eq!(d.len(), 25);
        for (_, _, desc) in &d {
            let n: f64 = desc.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        let flat = Plane::new(64, 64, vec![0.5; 4096]);
        assert!(dense_sift(&flat).iter().all(|(_, _, d)| d.iter().all(|&v| v == 0.0)));
    }
}
