//! Global colour statistics: HSV moments, emotion coordinates, colourfulness,
//! basic colour names, dark channel and colour sensitivity.

use std::f64::consts::TAU;

use super::image::{HsvImage, ImageMatrix};

pub const COLOUR_DIM: usize = 22;

/// Eleven basic colour terms, in feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColourName {
    Black,
    Blue,
    Brown,
    Green,
    Grey,
    Orange,
    Pink,
    Purple,
    Red,
    White,
    Yellow,
}

impl ColourName {
    pub const ALL: [ColourName; 11] = [
        ColourName::Black,
        ColourName::Blue,
        ColourName::Brown,
        ColourName::Green,
        ColourName::Grey,
        ColourName::Orange,
        ColourName::Pink,
        ColourName::Purple,
        ColourName::Red,
        ColourName::White,
        ColourName::Yellow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ColourName::Black => "black",
            ColourName::Blue => "blue",
            ColourName::Brown => "brown",
            ColourName::Green => "green",
            ColourName::Grey => "grey",
            ColourName::Orange => "orange",
            ColourName::Pink => "pink",
            ColourName::Purple => "purple",
            ColourName::Red => "red",
            ColourName::White => "white",
            ColourName::Yellow => "yellow",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

// HSV partition used for colour naming. Hue thresholds are in degrees.
pub const BLACK_MAX_V: f64 = 0.2;
pub const ACHROMATIC_MAX_S: f64 = 0.15;
pub const WHITE_MIN_V: f64 = 0.8;
pub const RED_END: f64 = 10.0;
pub const ORANGE_END: f64 = 45.0;
pub const YELLOW_END: f64 = 70.0;
pub const GREEN_END: f64 = 170.0;
pub const BLUE_END: f64 = 260.0;
pub const PURPLE_END: f64 = 300.0;
pub const PINK_END: f64 = 345.0;
/// Orange hues darker than this are brown.
pub const BROWN_MAX_V: f64 = 0.6;
/// Light, weakly saturated reds are pink.
pub const PINK_MAX_S: f64 = 0.5;
pub const PINK_MIN_V: f64 = 0.7;

/// Assigns one of the eleven colour names to an HSV triple.
pub fn colour_name(h: f64, s: f64, v: f64) -> ColourName {
    if v < BLACK_MAX_V {
        return ColourName::Black;
    }
    if s < ACHROMATIC_MAX_S {
        return if v >= WHITE_MIN_V {
            ColourName::White
        } else {
            ColourName::Grey
        };
    }
    let deg = h * 360.0;
    if !(RED_END..PINK_END).contains(&deg) {
        if s < PINK_MAX_S && v >= PINK_MIN_V {
            ColourName::Pink
        } else {
            ColourName::Red
        }
    } else if deg < ORANGE_END {
        if v < BROWN_MAX_V {
            ColourName::Brown
        } else {
            ColourName::Orange
        }
    } else if deg < YELLOW_END {
        ColourName::Yellow
    } else if deg < GREEN_END {
        ColourName::Green
    } else if deg < BLUE_END {
        ColourName::Blue
    } else if deg < PURPLE_END {
        ColourName::Purple
    } else {
        ColourName::Pink
    }
}

pub const DARK_CHANNEL_WINDOW: usize = 15;
pub const SENSITIVITY_BINS: usize = 16;

pub fn colour_feature_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "hue_circular_variance",
        "saturation_mean",
        "value_mean",
        "saturation_std",
        "value_std",
        "valence",
        "arousal",
        "dominance",
        "colourfulness",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    names.extend(ColourName::ALL.iter().map(|c| format!("colour_name_{}", c.as_str())));
    names.push("dark_channel".into());
    names.push("colour_sensitivity".into());
    names
}

pub fn colour_features(img: &ImageMatrix) -> Vec<f64> {
    let hsv = img.hsv();
    let mut out = Vec::with_capacity(COLOUR_DIM);

    let (hue_var, s_mean, v_mean, s_std, v_std) = hsv_statistics(&hsv);
    out.extend([hue_var, s_mean, v_mean, s_std, v_std]);

    let [valence, arousal, dominance] = emotion_coordinates(v_mean, s_mean);
    out.extend([valence, arousal, dominance]);

    out.push(colourfulness(img));
    out.extend(colour_name_fractions(&hsv));
    out.push(dark_channel(img));
    out.push(colour_sensitivity(&hsv));
    debug_assert_eq!(out.len(), COLOUR_DIM);
    out
}

fn mean_std(data: &[f64]) -> (f64, f64) {
    if data.iter().all(|&v| v == data[0]) {
        return (data[0], 0.0);
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Circular variance of hue, then mean/std of saturation and value.
fn hsv_statistics(hsv: &HsvImage) -> (f64, f64, f64, f64, f64) {
    let n = hsv.h.data.len() as f64;
    let (mut c, mut s) = (0.0, 0.0);
    for h in &hsv.h.data {
        let (sin, cos) = (TAU * h).sin_cos();
        c += cos;
        s += sin;
    }
    let resultant = ((c / n).powi(2) + (s / n).powi(2)).sqrt();
    let hue_var = (1.0 - resultant).clamp(0.0, 1.0);
    let (s_mean, s_std) = mean_std(&hsv.s.data);
    let (v_mean, v_std) = mean_std(&hsv.v.data);
    (hue_var, s_mean, v_mean, s_std, v_std)
}

/// Valence, arousal and dominance from mean brightness and saturation.
pub fn emotion_coordinates(v_mean: f64, s_mean: f64) -> [f64; 3] {
    [
        0.69 * v_mean + 0.22 * s_mean,
        -0.31 * v_mean + 0.60 * s_mean,
        -0.76 * v_mean + 0.32 * s_mean,
    ]
}

/// Opponent-channel colourfulness on `[0, 1]` RGB.
pub fn colourfulness(img: &ImageMatrix) -> f64 {
    let rg: Vec<f64> = img.pixels().iter().map(|p| p[0] - p[1]).collect();
    let yb: Vec<f64> = img
        .pixels()
        .iter()
        .map(|p| 0.5 * (p[0] + p[1]) - p[2])
        .collect();
    let (m_rg, s_rg) = mean_std(&rg);
    let (m_yb, s_yb) = mean_std(&yb);
    (s_rg * s_rg + s_yb * s_yb).sqrt() + 0.3 * (m_rg * m_rg + m_yb * m_yb).sqrt()
}

pub fn colour_name_fractions(hsv: &HsvImage) -> [f64; 11] {
    let mut counts = [0usize; 11];
    for i in 0..hsv.h.data.len() {
        counts[colour_name(hsv.h.data[i], hsv.s.data[i], hsv.v.data[i]).index()] += 1;
    }
    let n = hsv.h.data.len() as f64;
    counts.map(|c| c as f64 / n)
}

/// Mean of the per-pixel RGB minimum after a square minimum filter.
pub fn dark_channel(img: &ImageMatrix) -> f64 {
    let (w, h) = (img.width(), img.height());
    let r = DARK_CHANNEL_WINDOW / 2;
    let mins: Vec<f64> = img
        .pixels()
        .iter()
        .map(|p| p[0].min(p[1]).min(p[2]))
        .collect();
    // Separable: rows, then columns.
    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            rows[y * w + x] = mins[y * w + lo..=y * w + hi]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
        }
    }
    let mut total = 0.0;
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        for x in 0..w {
            total += (lo..=hi)
                .map(|yy| rows[yy * w + x])
                .fold(f64::INFINITY, f64::min);
        }
    }
    total / (w * h) as f64
}

/// Peak of a hue histogram weighted by saturation times value, normalized by
/// pixel count.
pub fn colour_sensitivity(hsv: &HsvImage) -> f64 {
    let mut bins = [0.0; SENSITIVITY_BINS];
    for i in 0..hsv.h.data.len() {
        let b = ((hsv.h.data[i] * SENSITIVITY_BINS as f64) as usize).min(SENSITIVITY_BINS - 1);
        bins[b] += hsv.s.data[i] * hsv.v.data[i];
    }
    let n = hsv.h.data.len() as f64;
    bins.iter().copied().fold(0.0, f64::max) / n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name_index(name: &str) -> usize {
        9 + ColourName::ALL
            .iter()
            .position(|c| c.as_str() == name)
            .unwrap()
    }

    #[test]
    fn uniform_gray() {
        let img = ImageMatrix::constant(40, 40, [0.5, 0.5, 0.5]).unwrap();
        let f = colour_features(&img);
        assert_eq!(f.len(), COLOUR_DIM);
        assert_eq!(f[0], 0.0, "hue circular variance");
        assert_eq!(f[1], 0.0, "mean S");
        assert_eq!(f[3], 0.0, "std S");
        assert_eq!(f[8], 0.0, "colourfulness");
        assert_eq!(f[name_index("grey")], 1.0);
        assert!((f[20] - 0.5).abs() < 1e-15, "dark channel");
        assert_eq!(f[21], 0.0);
    }

    #[test]
    fn uniform_red() {
        let img = ImageMatrix::constant(40, 40, [1.0, 0.0, 0.0]).unwrap();
        let f = colour_features(&img);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[name_index("red")], 1.0);
        assert_eq!(f[20], 0.0);
        assert_eq!(f[21], 1.0);
    }

    // Values derived by hand: red (h=0) and blue (h=2/3) in equal proportion.
    #[test]
    fn half_red_half_blue_hand_values() {
        let img = ImageMatrix::from_fn(64, 48, |x, _| {
            if x < 32 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 0.0, 1.0]
            }
        })
        .unwrap();
        let f = colour_features(&img);
        let expect_names = {
            let mut e = [0.0; 11];
            e[ColourName::Red.index()] = 0.5;
            e[ColourName::Blue.index()] = 0.5;
            e
        };
        let colourful = (0.25f64 + 0.5625).sqrt() + 0.3 * (0.25f64 + 0.0625).sqrt();
        let mut expected = vec![0.5, 1.0, 1.0, 0.0, 0.0, 0.91, 0.29, -0.44, colourful];
        expected.extend(expect_names);
        expected.push(0.0);
        expected.push(0.5);
        for (i, (a, b)) in f.iter().zip(&expected).enumerate() {
            assert!((a - b).abs() < 1e-9, "component {i}: {a} vs {b}");
        }
    }

    #[test]
    fn names_cover_hue_wheel() {
        use ColourName::*;
        let cases = [
            ([0.1, 0.1, 0.1], Black),
            ([0.95, 0.95, 0.95], White),
            ([0.5, 0.5, 0.5], Grey),
            ([1.0, 0.5, 0.0], Orange),
            ([0.5, 0.25, 0.0], Brown),
            ([1.0, 1.0, 0.0], Yellow),
            ([0.0, 1.0, 0.0], Green),
            ([0.0, 0.0, 1.0], Blue),
            ([0.6, 0.0, 1.0], Purple),
            ([1.0, 0.0, 0.6], Pink),
            ([1.0, 0.7, 0.7], Pink),
            ([0.8, 0.0, 0.0], Red),
        ];
        for (rgb, want) in cases {
            let [h, s, v] = super::super::image::rgb_to_hsv(rgb);
            assert_eq!(colour_name(h, s, v), want, "{rgb:?}");
        }
    }

    #[test]
    fn dark_channel_window_is_clipped() {
        // A single dark pixel darkens only its 15x15 neighbourhood.
        let img = ImageMatrix::from_fn(40, 40, |x, y| {
            if x == 0 && y == 0 {
                [0.0; 3]
            } else {
                [1.0; 3]
            }
        })
        .unwrap();
        let expected = 1.0 - (8.0 * 8.0) / 1600.0;
        assert!((dark_channel(&img) - expected).abs() < 1e-12);
    }
}
