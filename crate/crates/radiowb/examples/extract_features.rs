//! Extracts the default radiomic feature vector from a polygon ROI on a
//! synthetic CT-like volume and writes it as CSV.
//!
//! ```text
//! cargo run --release -p radiowb --example extract_features [out.csv]
//! ```

use radiowb_core::radiomics::to_csv;
use radiowb_core::{extract_feature_vector, ExtractionSettings, RoiPolygon, SlicePolygon, Volume};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vol = Volume::from_fn([48, 48, 12], [0.8, 0.8, 2.5], |x, y, z| {
        let r2 = (x as f64 - 24.0).powi(2) + (y as f64 - 23.0).powi(2) + ((z as f64 - 6.0) * 3.0).powi(2);
        let ripple = ((x * 7 + y * 3 + z * 5) % 11) as f64;
        -40.0 + 140.0 * (-r2 / 120.0).exp() + ripple
    })?;
    let slices = (3..9)
        .map(|z| SlicePolygon { z, vertices: vec![[14.0, 24.0], [24.0, 13.0], [35.0, 23.0], [25.0, 34.0]] })
        .collect();
    let roi = RoiPolygon::new("lesion-1", "ct", slices);

    for settings in [ExtractionSettings::default(), ExtractionSettings::with_log(&[1.0, 3.0])] {
        let fv = extract_feature_vector(&vol, &roi, &settings)?;
        println!("{} features (settings {})", fv.len(), &fv.settings_hash[..12]);
        for name in ["original_shape_MeshVolume", "original_firstorder_Mean", "original_glcm_JointEntropy"] {
            println!("  {name} = {:.4}", fv.get(name).unwrap_or(f64::NAN));
        }
        for w in &fv.warnings {
            println!("  warning: {w}");
        }
    }

    let fv = extract_feature_vector(&vol, &roi, &ExtractionSettings::default())?;
    let out = std::env::args().nth(1).unwrap_or_else(|| "features.csv".into());
    std::fs::write(&out, to_csv(&[fv])?)?;
    println!("wrote {out}");
    Ok(())
}
