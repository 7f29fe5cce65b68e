//! Radiomic feature extraction.
//!
//! Shape descriptors are computed once from the mask. For every derived image
//! the in-mask intensities are discretized and six feature classes are
//! emitted: 18 first-order, 24 GLCM, 14 GLDM, 16 GLRLM, 16 GLSZM and 5 NGTDM
//! features (93 per image). The default 13 images therefore give
//! `13 × 93 + 14 = 1223` columns; adding one LoG scale gives 1316.
//!
//! Column names follow `<image>_<class>_<Feature>`, e.g.
//! `wavelet-LLH_glcm_JointEntropy` or `original_shape_Sphericity`.

pub mod firstorder;
pub mod glcm;
pub mod gldm;
pub mod glrlm;
pub mod glszm;
mod mc_tables;
pub mod mesh;
pub mod ngtdm;
pub mod shape;
pub mod texture;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::filters::{DerivedImageSet, ImageType};
use crate::{discretize, rasterize, BinScheme, DiscretizedVolume, Error, Mask, Result, RoiPolygon, Volume};

/// Intensity features emitted per derived image.
pub const FEATURES_PER_IMAGE: usize = 18 + 24 + 14 + 16 + 16 + 5;
pub const SHAPE_FEATURES: usize = 14;

/// Named values of one feature class.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    pub class: &'static str,
    pub names: Vec<&'static str>,
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl FeatureBlock {
    pub fn new(class: &'static str, names: &[&'static str], values: Vec<f64>, warnings: Vec<String>) -> Self {
        debug_assert_eq!(names.len(), values.len());
        Self { class, names: names.to_vec(), values, warnings }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSettings {
    pub bin_scheme: BinScheme,
    pub image_types: Vec<ImageType>,
    pub gldm_alpha: u32,
    /// Compute derived images and their feature blocks on the rayon pool.
    #[serde(skip, default)]
    pub parallel: bool,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        Self { bin_scheme: BinScheme::default(), image_types: ImageType::default_set(), gldm_alpha: 0, parallel: false }
    }
}

impl ExtractionSettings {
    /// Default settings plus one LoG image per sigma (mm).
    pub fn with_log(sigmas: &[f64]) -> Self {
        let mut s = Self::default();
        s.image_types.extend(sigmas.iter().map(|&v| ImageType::LoG(v)));
        s
    }

    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    /// Stable digest of everything that affects feature values.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("settings serialize");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..12])
    }

    pub fn feature_count(&self) -> usize {
        SHAPE_FEATURES + FEATURES_PER_IMAGE * self.image_types.len()
    }
}

/// One ROI's named feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub roi_id: String,
    pub settings_hash: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// Header row plus one row per vector. All vectors must share column names.
pub fn to_csv(vectors: &[FeatureVector]) -> Result<String> {
    let Some(first) = vectors.first() else {
        return Ok(String::from("roi_id\n"));
    };
    let mut out = String::from("roi_id");
    for n in &first.names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for v in vectors {
        if v.names != first.names {
            return Err(Error::InvalidParameter(format!("roi {} has a different feature layout", v.roi_id)));
        }
        out.push_str(&v.roi_id);
        for x in &v.values {
            out.push(',');
            out.push_str(&format!("{x:?}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// All six intensity feature classes of one derived image, in column order.
pub fn intensity_blocks(image: &Volume, mask: &Mask, disc: &DiscretizedVolume, alpha: u32) -> Vec<FeatureBlock> {
    vec![
        firstorder::compute_first_order(image, mask, disc),
        glcm::compute_glcm(disc),
        gldm::compute_gldm(disc, alpha),
        glrlm::compute_glrlm(disc),
        glszm::compute_glszm(disc),
        ngtdm::compute_ngtdm(disc),
    ]
}

/// Rasterizes the ROI and extracts its feature vector.
pub fn extract_feature_vector(vol: &Volume, roi: &RoiPolygon, settings: &ExtractionSettings) -> Result<FeatureVector> {
    let mask = rasterize(roi, vol)?;
    let mut fv = extract_from_mask(vol, &mask, settings)?;
    fv.roi_id = roi.roi_id.clone();
    Ok(fv)
}

pub fn extract_from_mask(vol: &Volume, mask: &Mask, settings: &ExtractionSettings) -> Result<FeatureVector> {
    mask.check_against(vol)?;
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let images = DerivedImageSet::compute(vol, &settings.image_types, settings.parallel)?;
    let per_image = |(ty, img): &(ImageType, Volume)| -> Result<(ImageType, Vec<FeatureBlock>)> {
        let disc = discretize(img, mask, settings.bin_scheme)?;
        Ok((*ty, intensity_blocks(img, mask, &disc, settings.gldm_alpha)))
    };
    let blocks: Vec<(ImageType, Vec<FeatureBlock>)> = if settings.parallel {
        images.entries.par_iter().map(per_image).collect::<Result<_>>()?
    } else {
        images.entries.iter().map(per_image).collect::<Result<_>>()?
    };

    let mut names = Vec::with_capacity(settings.feature_count());
    let mut values = Vec::with_capacity(settings.feature_count());
    let mut warnings = Vec::new();
    let mut push = |prefix: &str, block: FeatureBlock| {
        for (n, v) in block.names.iter().zip(&block.values) {
            names.push(format!("{prefix}_{}_{n}", block.class));
            values.push(*v);
        }
        warnings.extend(block.warnings.into_iter().map(|w| format!("{prefix}: {w}")));
    };
    push("original", shape::compute_shape(mask, vol.spacing()));
    for (ty, bs) in blocks {
        let prefix = ty.name();
        for b in bs {
            push(&prefix, b);
        }
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("feature {} is not finite", names[i])));
    }
    Ok(FeatureVector { roi_id: String::new(), settings_hash: settings.hash(), names, values, warnings })
}
