//! Image feature extraction.
//!
//! [`extract_all`] produces a 4,111-dimensional [`FeatureVector`] made of
//! eight groups, always in this order:
//!
//! | group              | len  | computed on                 |
//! |--------------------|------|-----------------------------|
//! | colour             | 22   | original image              |
//! | composition        | 5    | original image              |
//! | texture            | 56   | working-size (256x256) copy |
//! | body & face        | 12   | annotation + original image |
//! | local colour hist. | 512  | working-size copy, 4x4 grid |
//! | local LBP          | 944  | working-size copy, 4x4 grid |
//! | local GIST         | 512  | working-size copy, 4x4 grid |
//! | local dense SIFT   | 2048 | working-size copy, 4x4 grid |

pub mod bodyface;
pub mod colour;
pub mod composition;
pub mod gist;
pub mod image;
pub mod local;
pub mod texture;

use std::ops::Range;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use self::bodyface::{BBox, Body, Face, FaceBodyAnnotation, Glasses};
pub use self::image::{HsvImage, ImageMatrix, Plane};

use crate::error::{Error, Result};
use gist::{GaborBank, BLOCK_SCALES, GLOBAL_SCALES, ORIENTATIONS};

pub const DEFAULT_WORKING_SIZE: usize = 256;
pub const FEATURE_DIM: usize = 4111;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Colour,
    Composition,
    Texture,
    BodyFace,
    LocalColour,
    LocalLbp,
    LocalGist,
    LocalSift,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 8] = [
        FeatureGroup::Colour,
        FeatureGroup::Composition,
        FeatureGroup::Texture,
        FeatureGroup::BodyFace,
        FeatureGroup::LocalColour,
        FeatureGroup::LocalLbp,
        FeatureGroup::LocalGist,
        FeatureGroup::LocalSift,
    ];

    pub fn len(self) -> usize {
        match self {
            FeatureGroup::Colour => colour::COLOUR_DIM,
            FeatureGroup::Composition => composition::COMPOSITION_DIM,
            FeatureGroup::Texture => texture::TEXTURE_DIM,
            FeatureGroup::BodyFace => bodyface::BODY_FACE_DIM,
            FeatureGroup::LocalColour => local::LOCAL_COLOUR_DIM,
            FeatureGroup::LocalLbp => local::LOCAL_LBP_DIM,
            FeatureGroup::LocalGist => local::LOCAL_GIST_DIM,
            FeatureGroup::LocalSift => local::LOCAL_SIFT_DIM,
        }
    }

    pub fn is_local(self) -> bool {
        matches!(
            self,
            FeatureGroup::LocalColour
                | FeatureGroup::LocalLbp
                | FeatureGroup::LocalGist
                | FeatureGroup::LocalSift
        )
    }

    /// Column range of this group inside a full feature vector.
    pub fn range(self) -> Range<usize> {
        let mut start = 0;
        for g in FeatureGroup::ALL {
            if g == self {
                return start..start + g.len();
            }
            start += g.len();
        }
        unreachable!()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::Colour => "colour",
            FeatureGroup::Composition => "composition",
            FeatureGroup::Texture => "texture",
            FeatureGroup::BodyFace => "body_face",
            FeatureGroup::LocalColour => "local_colour",
            FeatureGroup::LocalLbp => "local_lbp",
            FeatureGroup::LocalGist => "local_gist",
            FeatureGroup::LocalSift => "local_sift",
        }
    }
}

/// One `(group, name)` label per feature column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLabel {
    pub group: FeatureGroup,
    pub name: String,
}

/// Column labels of the full feature vector, in order.
pub fn feature_schema() -> &'static [FeatureLabel] {
    static SCHEMA: OnceLock<Vec<FeatureLabel>> = OnceLock::new();
    SCHEMA.get_or_init(|| {
        let groups = [
            (FeatureGroup::Colour, colour::colour_feature_names()),
            (FeatureGroup::Composition, composition::composition_feature_names()),
            (FeatureGroup::Texture, texture::texture_feature_names()),
            (FeatureGroup::BodyFace, bodyface::body_face_feature_names()),
            (FeatureGroup::LocalColour, local::local_colour_names()),
            (FeatureGroup::LocalLbp, local::local_lbp_names()),
            (FeatureGroup::LocalGist, local::local_gist_names()),
            (FeatureGroup::LocalSift, local::local_sift_names()),
        ];
        let schema: Vec<FeatureLabel> = groups
            .into_iter()
            .flat_map(|(group, names)| {
                debug_assert_eq!(names.len(), group.len());
                names.into_iter().map(move |name| FeatureLabel { group, name })
            })
            .collect();
        assert_eq!(schema.len(), FEATURE_DIM);
        schema
    })
}

/// Ordered descriptor of one image; see [`feature_schema`] for labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_DIM {
            return Err(Error::input(format!(
                "feature vector has {} values, expected {FEATURE_DIM}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::analysis(format!(
                "feature {} is not finite",
                feature_schema()[i].name
            )));
        }
        Ok(FeatureVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn group(&self, group: FeatureGroup) -> &[f64] {
        &self.values[group.range()]
    }

    pub fn schema(&self) -> &'static [FeatureLabel] {
        feature_schema()
    }
}

/// Reusable extractor holding the filter banks for one working size.
#[derive(Debug)]
pub struct Extractor {
    working_size: usize,
    global_gist: GaborBank,
    block_gist: GaborBank,
}

impl Extractor {
    pub fn new(working_size: usize) -> Result<Self> {
        if working_size < 64 || working_size % (4 * local::SIFT_BIN_SIZE) != 0 {
            return Err(Error::input(format!(
                "working size {working_size} must be at least 64 and a multiple of {}",
                4 * local::SIFT_BIN_SIZE
            )));
        }
        Ok(Extractor {
            working_size,
            global_gist: GaborBank::new(working_size, working_size, &GLOBAL_SCALES, ORIENTATIONS),
            block_gist: GaborBank::new(working_size, working_size, &BLOCK_SCALES, ORIENTATIONS),
        })
    }

    /// Shared extractor for [`DEFAULT_WORKING_SIZE`].
    pub fn shared() -> &'static Extractor {
        static SHARED: OnceLock<Extractor> = OnceLock::new();
        SHARED.get_or_init(|| Extractor::new(DEFAULT_WORKING_SIZE).expect("default size is valid"))
    }

    pub fn working_size(&self) -> usize {
        self.working_size
    }

    fn working(&self, img: &ImageMatrix) -> (Plane, HsvImage) {
        let resized = img.resize_bilinear(self.working_size, self.working_size);
        (resized.gray(), resized.hsv())
    }

    pub fn texture_features(&self, img: &ImageMatrix) -> Vec<f64> {
        let (gray, hsv) = self.working(img);
        texture::texture_features(&gray, &hsv, &self.global_gist)
    }

    pub fn local_features(&self, img: &ImageMatrix) -> Vec<f64> {
        let (gray, hsv) = self.working(img);
        local::local_features(&gray, &hsv, &self.block_gist)
    }

    pub fn extract(&self, img: &ImageMatrix, ann: &FaceBodyAnnotation) -> Result<FeatureVector> {
        let body_face = bodyface::body_face_features(ann, img)?;
        let (gray, hsv) = self.working(img);
        let mut values = Vec::with_capacity(FEATURE_DIM);
        values.extend(colour::colour_features(img));
        values.extend(composition::composition_features(img));
        values.extend(texture::texture_features(&gray, &hsv, &self.global_gist));
        values.extend(body_face);
        values.extend(local::local_features(&gray, &hsv, &self.block_gist));
        FeatureVector::from_values(values)
    }
}

pub fn colour_features(img: &ImageMatrix) -> Vec<f64> {
    colour::colour_features(img)
}

pub fn composition_features(img: &ImageMatrix) -> Vec<f64> {
    composition::composition_features(img)
}

pub fn texture_features(img: &ImageMatrix) -> Vec<f64> {
    Extractor::shared().texture_features(img)
}

pub fn local_features(img: &ImageMatrix) -> Vec<f64> {
    Extractor::shared().local_features(img)
}

pub fn body_face_features(ann: &FaceBodyAnnotation, img: &ImageMatrix) -> Result<Vec<f64>> {
    bodyface::body_face_features(ann, img)
}

/// Full descriptor at the default working size.
pub fn extract_all(img: &ImageMatrix, ann: &FaceBodyAnnotation) -> Result<FeatureVector> {
    Extractor::shared().extract(img, ann)
}
