//! Extract the 4111-value descriptor of one image and summarize each group.
//!
//! ```text
//! cargo run --release --example extract_features -- [image.png] [annotation.json]
//! ```
//!
//! Without arguments a synthetic portrait is rendered and used instead.

use std::path::Path;

use profileiq::imagefeat::{extract_all, feature_schema, FaceBodyAnnotation, FeatureGroup, ImageMatrix};
use profileiq::synth::{generate, SynthConfig};

fn main() -> profileiq::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (img, ann) = match args.first() {
        Some(path) => {
            let ann = match args.get(1) {
                Some(a) => FaceBodyAnnotation::load(Path::new(a))?,
                None => FaceBodyAnnotation::default(),
            };
            (ImageMatrix::load(Path::new(path))?, ann)
        }
        None => {
            let s = generate(&SynthConfig { n_images: 1, ..SynthConfig::default() })?.images.remove(0);
            (s.image, s.annotation)
        }
    };
    println!("image {}x{}, {} faces", img.width(), img.height(), ann.faces.len());

    let v = extract_all(&img, &ann)?;
    for g in FeatureGroup::ALL {
        let vals = v.group(g);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("{:<13} {:>5} values  mean {:>9.5}  max {:>9.5}", g.as_str(), vals.len(), mean, max);
    }

    println!("\nglobal features:");
    let global = FeatureGroup::Colour.range().start..FeatureGroup::BodyFace.range().end;
    for (label, x) in feature_schema()[global.clone()].iter().zip(&v.values()[global]).take(30) {
        println!("  {:<28} {x:.5}", label.name);
    }
    Ok(())
}
