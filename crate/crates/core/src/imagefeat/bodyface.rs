//! Body and face features from detector annotations, plus a rule-based skin
//! pixel ratio.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::image::ImageMatrix;
use crate::error::{Error, Result};

pub const BODY_FACE_DIM: usize = 12;

/// Normalized rectangle; all coordinates lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BBox {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn centre(&self) -> (f64, f64) {
        (self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    fn validate(&self, what: &str) -> Result<()> {
        let vals = [self.x, self.y, self.width, self.height];
        if vals.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            return Err(Error::input(format!("{what} bbox has coordinates outside [0, 1]")));
        }
        const SLACK: f64 = 1e-9;
        if self.x + self.width > 1.0 + SLACK || self.y + self.height > 1.0 + SLACK {
            return Err(Error::input(format!("{what} bbox extends past the frame")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Glasses {
    #[default]
    None,
    Normal,
    Sun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub bbox: BBox,
    #[serde(default)]
    pub pitch: f64,
    #[serde(default)]
    pub roll: f64,
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub glasses: Glasses,
    /// Carried through for reporting; not part of the feature vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smile_degree: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub bbox: BBox,
}

/// Detector output for one image. An empty annotation means no faces and no
/// bodies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceBodyAnnotation {
    #[serde(default)]
    pub faces: Vec<Face>,
    #[serde(default)]
    pub bodies: Vec<Body>,
}

impl FaceBodyAnnotation {
    pub fn validate(&self) -> Result<()> {
        for (i, f) in self.faces.iter().enumerate() {
            f.bbox.validate(&format!("face {i}"))?;
            for (name, v) in [("pitch", f.pitch), ("roll", f.roll), ("yaw", f.yaw)] {
                if !v.is_finite() {
                    return Err(Error::input(format!("face {i} {name} is not finite")));
                }
            }
            if let Some(s) = f.smile_degree {
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::input(format!("face {i} smile_degree {s} outside [0, 1]")));
                }
            }
        }
        for (i, b) in self.bodies.iter().enumerate() {
            b.bbox.validate(&format!("body {i}"))?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ann: FaceBodyAnnotation = serde_json::from_str(text)
            .map_err(|e| Error::input(format!("malformed annotation: {e}")))?;
        ann.validate()?;
        Ok(ann)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Largest face by area; the first one wins ties.
    pub fn main_face(&self) -> Option<&Face> {
        largest(&self.faces, |f| f.bbox.area())
    }

    pub fn main_body(&self) -> Option<&Body> {
        largest(&self.bodies, |b| b.bbox.area())
    }
}

fn largest<T>(items: &[T], area: impl Fn(&T) -> f64) -> Option<&T> {
    let mut best: Option<&T> = None;
    for item in items {
        if best.is_none_or(|b| area(item) > area(b)) {
            best = Some(item);
        }
    }
    best
}

pub fn body_face_feature_names() -> Vec<String> {
    [
        "body_present",
        "main_body_proportion",
        "skin_ratio",
        "face_count",
        "main_face_proportion",
        "main_face_centre_x",
        "main_face_centre_y",
        "glasses_normal",
        "glasses_sun",
        "head_pitch",
        "head_roll",
        "head_yaw",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Combined RGB and YCbCr skin rule on 8-bit channel values.
pub fn is_skin([r, g, b]: [f64; 3]) -> bool {
    let (r, g, b) = (r * 255.0, g * 255.0, b * 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let rgb_rule = r > 95.0
        && g > 40.0
        && b > 20.0
        && max - min > 15.0
        && (r - g).abs() > 15.0
        && r > g
        && r > b;
    if !rgb_rule {
        return false;
    }
    let cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    let cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    (77.0..=127.0).contains(&cb) && (133.0..=173.0).contains(&cr)
}

pub fn skin_ratio(img: &ImageMatrix) -> f64 {
    img.pixels().iter().filter(|p| is_skin(**p)).count() as f64 / img.area() as f64
}

pub fn body_face_features(ann: &FaceBodyAnnotation, img: &ImageMatrix) -> Result<Vec<f64>> {
    ann.validate()?;
    let mut out = Vec::with_capacity(BODY_FACE_DIM);
    match ann.main_body() {
        Some(b) => out.extend([1.0, b.bbox.area()]),
        None => out.extend([0.0, 0.0]),
    }
    out.push(skin_ratio(img));
    out.push(ann.faces.len() as f64);
    match ann.main_face() {
        Some(f) => {
            let (cx, cy) = f.bbox.centre();
            out.extend([
                f.bbox.area(),
                cx,
                cy,
                f64::from(u8::from(f.glasses == Glasses::Normal)),
                f64::from(u8::from(f.glasses == Glasses::Sun)),
                f.pitch,
                f.roll,
                f.yaw,
            ]);
        }
        None => out.extend([0.0; 8]),
    }
    debug_assert_eq!(out.len(), BODY_FACE_DIM);
    Ok(out)
}
