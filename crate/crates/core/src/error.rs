use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("malformed volume header: {0}")]
    MalformedHeader(String),

    #[error("payload size mismatch: header declares {expected} voxels, payload holds {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("non-finite voxel value at index {0}")]
    NonFinite(usize),

    #[error("invalid polygon on slice {slice}: {reason}")]
    InvalidPolygon { slice: usize, reason: String },

    #[error("slice index {index} out of range (volume has {depth} slices)")]
    SliceOutOfRange { index: i64, depth: usize },

    #[error("mask is empty")]
    EmptyMask,

    #[error("mask dims {mask:?} do not match volume dims {volume:?}")]
    DimsMismatch { mask: [usize; 3], volume: [usize; 3] },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown roi `{0}`")]
    UnknownRoi(String),

    #[error("unknown series `{0}`")]
    UnknownSeries(String),

    #[error("rois belong to different studies: {0:?}")]
    CrossStudy(Vec<String>),

    #[error("no seed voxels inside the bounding curve")]
    EmptySeeds,

    #[error("operation cancelled")]
    Cancelled,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
