//! Core imaging layer of the radiomics workbench.
//!
//! This crate owns the volumetric data model (volumes, masks, polygon ROIs),
//! derived-image generation, the radiomic feature mathematics and the
//! semi-automatic segmentation tools. Everything here is pure computation on
//! immutable values; persistence and scheduling live in the other crates.

pub mod annotation;
pub mod discretize;
pub mod dvol;
mod error;
pub mod filters;
pub mod radiomics;
pub mod roi;
pub mod segmentation;
pub mod volume;

pub use annotation::{Annotations, SeriesGeometry};
pub use discretize::{discretize, BinScheme, DiscretizedVolume};
pub use error::{Error, Result};
pub use filters::{DerivedImageSet, ImageType};
pub use radiomics::{extract_feature_vector, extract_from_mask, ExtractionSettings, FeatureVector};
pub use roi::{rasterize, RoiPolygon, SlicePolygon};
pub use volume::{Mask, Volume};
