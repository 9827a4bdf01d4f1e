//! Edge density, colour-region segmentation and mirror symmetry.

use super::colour::colour_name;
use super::image::{ImageMatrix, Plane};

pub const COMPOSITION_DIM: usize = 5;

/// Sobel magnitudes above this fraction of the maximum count as edges.
pub const EDGE_THRESHOLD: f64 = 0.1;
/// Components smaller than this fraction of the image are discarded.
pub const MIN_REGION_FRACTION: f64 = 0.005;

pub fn composition_feature_names() -> Vec<String> {
    [
        "edge_pixel_ratio",
        "region_count",
        "region_mean_size",
        "horizontal_symmetry",
        "vertical_symmetry",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

pub fn composition_features(img: &ImageMatrix) -> Vec<f64> {
    let (count, mean_size) = regions(img);
    vec![
        edge_ratio(&img.gray()),
        count as f64,
        mean_size,
        horizontal_symmetry(img),
        vertical_symmetry(img),
    ]
}

pub fn sobel_magnitude(gray: &Plane) -> Vec<f64> {
    let (w, h) = (gray.width as isize, gray.height as isize);
    let mut mag = Vec::with_capacity(gray.data.len());
    for y in 0..h {
        for x in 0..w {
            let p = |dx: isize, dy: isize| gray.get_clamped(x + dx, y + dy);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            mag.push((gx * gx + gy * gy).sqrt());
        }
    }
    mag
}

pub fn edge_ratio(gray: &Plane) -> f64 {
    let mag = sobel_magnitude(gray);
    let max = mag.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0.0;
    }
    let threshold = EDGE_THRESHOLD * max;
    mag.iter().filter(|&&m| m > threshold).count() as f64 / mag.len() as f64
}

/// Connected components of the colour-name map (4-connectivity).
///
/// Returns the number of components that survive the size filter and their
/// mean size in pixels. When every component is filtered out the whole image
/// counts as one region.
pub fn regions(img: &ImageMatrix) -> (usize, f64) {
    let (w, h) = (img.width(), img.height());
    let labels: Vec<u8> = img
        .pixels()
        .iter()
        .map(|p| {
            let [hh, s, v] = super::image::rgb_to_hsv(*p);
            colour_name(hh, s, v) as u8
        })
        .collect();
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let min_size = MIN_REGION_FRACTION * (w * h) as f64;
    let (mut kept, mut kept_area) = (0usize, 0usize);
    for start in 0..w * h {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0usize;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if !seen[j] && labels[j] == labels[i] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if size as f64 >= min_size {
            kept += 1;
            kept_area += size;
        }
    }
    if kept == 0 {
        (1, (w * h) as f64)
    } else {
        (kept, kept_area as f64 / kept as f64)
    }
}

fn mirror_similarity(img: &ImageMatrix, mirrored: &ImageMatrix) -> f64 {
    let diff: f64 = img
        .pixels()
        .iter()
        .zip(mirrored.pixels())
        .map(|(a, b)| (0..3).map(|k| (a[k] - b[k]).abs()).sum::<f64>())
        .sum();
    1.0 - diff / (3 * img.area()) as f64
}

/// One minus the mean absolute difference to the left-right mirror.
pub fn horizontal_symmetry(img: &ImageMatrix) -> f64 {
    mirror_similarity(img, &img.mirror_horizontal())
}

/// One minus the mean absolute difference to the top-bottom mirror.
pub fn vertical_symmetry(img: &ImageMatrix) -> f64 {
    mirror_similarity(img, &img.mirror_vertical())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(tile: usize, tiles: usize) -> ImageMatrix {
        let side = tile * tiles;
        ImageMatrix::from_fn(side, side, |x, y| {
            if (x / tile + y / tile) % 2 == 0 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 0.0, 1.0]
            }
        })
        .unwrap()
    }

    #[test]
    fn constant_image() {
        let img = ImageMatrix::constant(48, 40, [0.3, 0.6, 0.2]).unwrap();
        assert_eq!(composition_features(&img), vec![0.0, 1.0, 1920.0, 1.0, 1.0]);
    }

    #[test]
    fn checkerboard_regions() {
        let img = checkerboard(8, 8);
        let (count, size) = regions(&img);
        assert_eq!(count, 64);
        assert_eq!(size, 64.0);
    }

    // Direct loop over mirrored pixel pairs, independent of the mirror helpers.
    fn symmetry_oracle(img: &ImageMatrix, horizontal: bool) -> f64 {
        let (w, h) = (img.width(), img.height());
        let mut acc = 0.0;
        for y in 0..h {
            for x in 0..w {
                let (mx, my) = if horizontal { (w - 1 - x, y) } else { (x, h - 1 - y) };
                let a = img.pixel(x, y);
                let b = img.pixel(mx, my);
                for k in 0..3 {
                    acc += (a[k] - b[k]).abs();
                }
            }
        }
        1.0 - acc / (3 * w * h) as f64
    }

    #[test]
    fn checkerboard_symmetry_matches_oracle() {
        // 8 tiles of 8: mirroring flips tile parity, so both symmetries are 0.
        let img = checkerboard(8, 8);
        assert_eq!(horizontal_symmetry(&img), symmetry_oracle(&img, true));
        assert_eq!(vertical_symmetry(&img), symmetry_oracle(&img, false));
        assert_eq!(horizontal_symmetry(&img), 1.0 - 2.0 / 3.0);

        let odd = ImageMatrix::from_fn(45, 37, |x, y| {
            [((x * 7 + y) % 11) as f64 / 10.0, (y % 5) as f64 / 4.0, 0.5]
        })
        .unwrap();
        assert!((horizontal_symmetry(&odd) - symmetry_oracle(&odd, true)).abs() < 1e-12);
        assert!((vertical_symmetry(&odd) - symmetry_oracle(&odd, false)).abs() < 1e-12);
    }

    #[test]
    fn mirror_fixpoint() {
        let img = ImageMatrix::from_fn(40, 40, |x, y| {
            let d = (x as f64 - 19.5).abs() / 20.0;
            [d, (y as f64) / 40.0, 0.2]
        })
        .unwrap();
        assert_eq!(horizontal_symmetry(&img), 1.0);
        assert!(vertical_symmetry(&img) < 1.0);
    }

    #[test]
    fn step_edge_is_detected() {
        let img = ImageMatrix::from_fn(40, 40, |x, _| if x < 20 { [0.0; 3] } else { [1.0; 3] })
            .unwrap();
        let r = edge_ratio(&img.gray());
        // Columns 19 and 20 respond on every row.
        assert!((r - 2.0 / 40.0).abs() < 1e-12, "{r}");
    }
}
