//! Seeded synthetic corpora: images with annotations, planted targets and
//! simulated rater tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analysis::Gender;
use crate::error::{Error, Result};
use crate::imagefeat::image::{rgb_from_hsv, rgb_to_hsv};
use crate::imagefeat::{BBox, Body, Face, FaceBodyAnnotation, Glasses, ImageMatrix};
use crate::reliability::Rating;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_images: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    /// Standard deviation of the planted signal over that of the added
    /// noise.
    pub snr: f64,
    pub raters_per_image: usize,
    /// Per-image perturbation of the shared layout, as a fraction of the
    /// frame.
    pub layout_jitter: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_images: 20,
            width: 160,
            height: 160,
            seed: 0,
            snr: 4.0,
            raters_per_image: 24,
            layout_jitter: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthImage {
    pub id: String,
    pub image: ImageMatrix,
    pub annotation: FaceBodyAnnotation,
    pub gender: Gender,
    pub age: f64,
    /// Mean luma of the rendered image.
    pub brightness: f64,
    pub mi_score: f64,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub config: SynthConfig,
    pub images: Vec<SynthImage>,
    pub ratings: Vec<Rating>,
}

fn image_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64 + 1);
    rng
}

#[derive(Debug, Clone, Copy)]
struct Shape {
    round: bool,
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    hue: f64,
    sat: f64,
    /// Value relative to the scene's exposure level.
    gain: f64,
}

/// Corpus-wide layout that every scene perturbs.
#[derive(Debug, Clone)]
pub struct SceneTemplate {
    base_hue: f64,
    base_sat: f64,
    shapes: Vec<Shape>,
}

impl SceneTemplate {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let n = rng.random_range(4..7);
        SceneTemplate {
            base_hue: rng.random(),
            base_sat: rng.random_range(0.2..0.6),
            shapes: (0..n)
                .map(|_| Shape {
                    round: rng.random_bool(0.5),
                    cx: rng.random_range(0.15..0.85),
                    cy: rng.random_range(0.15..0.85),
                    rx: rng.random_range(0.08..0.25),
                    ry: rng.random_range(0.08..0.25),
                    hue: rng.random(),
                    sat: rng.random_range(0.2..0.8),
                    gain: rng.random_range(0.6..1.3),
                })
                .collect(),
        }
    }
}

/// One scene from `template`: shapes are jittered by `jitter` (fraction of
/// the frame) and the whole scene is scaled by an exposure level drawn per
/// image, so mean brightness varies across the corpus.
pub fn render_scene(
    rng: &mut ChaCha8Rng,
    template: &SceneTemplate,
    jitter: f64,
    width: usize,
    height: usize,
) -> Result<(ImageMatrix, FaceBodyAnnotation)> {
    let level: f64 = rng.random_range(0.15..0.85);
    let tilt: f64 = rng.random_range(-0.1..0.1);
    let mut j = |scale: f64| -> f64 { scale * jitter * rng.sample::<f64, _>(StandardNormal) };
    let mut shapes: Vec<Shape> = template
        .shapes
        .iter()
        .map(|s| Shape {
            cx: s.cx + j(1.0),
            cy: s.cy + j(1.0),
            rx: (s.rx * (1.0 + j(2.0))).max(0.02),
            ry: (s.ry * (1.0 + j(2.0))).max(0.02),
            hue: s.hue + j(0.5),
            sat: (s.sat + j(1.0)).clamp(0.0, 1.0),
            ..*s
        })
        .collect();
    let base = (template.base_hue + j(0.5), (template.base_sat + j(1.0)).clamp(0.0, 1.0));

    let mut ann = FaceBodyAnnotation::default();
    if rng.random_bool(0.6) {
        let w = rng.random_range(0.15..0.35);
        let h = w * 1.25;
        let x = rng.random_range(0.05..0.95 - w);
        let y = rng.random_range(0.05..0.95 - h);
        let skin = [
            rng.random_range(0.75..0.9),
            rng.random_range(0.5..0.62),
            rng.random_range(0.35..0.45),
        ];
        let [hue, sat, val] = rgb_to_hsv(skin);
        shapes.push(Shape {
            round: true,
            cx: x + w / 2.0,
            cy: y + h / 2.0,
            rx: w / 2.0,
            ry: h / 2.0,
            hue,
            sat,
            gain: val / 0.5,
        });
        let glasses = match rng.random_range(0..5) {
            0 => Glasses::Normal,
            1 => Glasses::Sun,
            _ => Glasses::None,
        };
        ann.faces.push(Face {
            bbox: BBox { x, y, width: w, height: h },
            pitch: rng.random_range(-20.0..20.0),
            roll: rng.random_range(-15.0..15.0),
            yaw: rng.random_range(-30.0..30.0),
            glasses,
            smile_degree: Some(rng.random()),
        });
        if rng.random_bool(0.7) {
            let bw = (w * 2.0).min(1.0 - x.min(0.5));
            let by = y + h * 0.5;
            ann.bodies.push(Body {
                bbox: BBox {
                    x: (x + w / 2.0 - bw / 2.0).clamp(0.0, 1.0 - bw),
                    y: by,
                    width: bw,
                    height: 1.0 - by,
                },
            });
        }
    }

    let noise = Normal::new(0.0, 0.02).expect("valid std");
    let mut pixels = Vec::with_capacity(width * height);
    for py in 0..height {
        for px in 0..width {
            let (u, v) = ((px as f64 + 0.5) / width as f64, (py as f64 + 0.5) / height as f64);
            let mut rgb = rgb_from_hsv(base.0, base.1, (level + tilt * (u - 0.5 + v - 0.5)).clamp(0.0, 1.0));
            for s in &shapes {
                let (dx, dy) = ((u - s.cx) / s.rx, (v - s.cy) / s.ry);
                let inside = if s.round { dx * dx + dy * dy <= 1.0 } else { dx.abs() <= 1.0 && dy.abs() <= 1.0 };
                if inside {
                    rgb = rgb_from_hsv(s.hue, s.sat, (level * s.gain).clamp(0.0, 1.0));
                }
            }
            let n: f64 = noise.sample(rng);
            pixels.push(rgb.map(|c| (c + n).clamp(0.0, 1.0)));
        }
    }
    Ok((ImageMatrix::new(width, height, pixels)?, ann))
}

/// Renders the corpus. The MI score is an affine function of standardized
/// mean brightness plus Gaussian noise at the configured amplitude ratio,
/// scaled to a total standard deviation of 15 around 100.
pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    if config.n_images == 0 {
        return Err(Error::input("synthetic corpus needs at least one image"));
    }
    if !(config.snr > 0.0 && config.snr.is_finite()) {
        return Err(Error::input("synthetic SNR must be positive"));
    }
    let template = SceneTemplate::random(&mut image_rng(config.seed, usize::MAX - 1));
    let mut images = Vec::with_capacity(config.n_images);
    for i in 0..config.n_images {
        let mut rng = image_rng(config.seed, i);
        let (image, annotation) = render_scene(&mut rng, &template, config.layout_jitter, config.width, config.height)?;
        let brightness = image.gray().mean();
        let gender = if rng.random_bool(0.5) { Gender::Male } else { Gender::Female };
        let age = rng.random_range(18.0..60.0_f64).round();
        images.push(SynthImage {
            id: format!("img{i:04}"),
            image,
            annotation,
            gender,
            age,
            brightness,
            mi_score: 0.0,
        });
    }
    let b: Vec<f64> = images.iter().map(|s| s.brightness).collect();
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    let sd = (b.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / b.len() as f64).sqrt();
    let total = (1.0 + config.snr * config.snr).sqrt();
    let (signal_sd, noise_sd) = (config.snr / total, 1.0 / total);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    for s in &mut images {
        let z = if sd > 0.0 { (s.brightness - mean) / sd } else { 0.0 };
        let e: f64 = rng.sample(StandardNormal);
        s.mi_score = 100.0 + 15.0 * (signal_sd * z + noise_sd * e);
    }
    let ratings = simulate_ratings(&images, config.raters_per_image, &mut rng);
    Ok(SynthCorpus {
        config: config.clone(),
        images,
        ratings,
    })
}

/// Each image gets `per_image` distinct raters drawn from a pool twice that
/// size. Scores follow the image's MI plus rater bias and noise, rounded to
/// the 1..=7 scale.
fn simulate_ratings(images: &[SynthImage], per_image: usize, rng: &mut ChaCha8Rng) -> Vec<Rating> {
    let pool = (2 * per_image).max(2);
    let bias: Vec<f64> = (0..pool).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut out = Vec::new();
    for img in images {
        let latent = 4.0 + (img.mi_score - 100.0) / 15.0;
        let mut raters: Vec<usize> = (0..pool).collect();
        for k in 0..per_image.min(pool) {
            let j = rng.random_range(k..pool);
            raters.swap(k, j);
            let r = raters[k];
            let s: f64 = latent + bias[r] + 0.8 * rng.sample::<f64, _>(StandardNormal);
            out.push(Rating {
                rater_id: format!("r{r:03}"),
                image_id: img.id.clone(),
                raw_score: s.round().clamp(1.0, 7.0) as u8,
            });
        }
    }
    out
}
