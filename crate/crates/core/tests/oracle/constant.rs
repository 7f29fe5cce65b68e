//! Expected feature table for a constant 4×4×4 cube (unit spacing).
//!
//! Gray-level statistics collapse to their degenerate values. Run-length and
//! dependence statistics still depend on the cube geometry; those were
//! derived by enumerating runs and neighbour counts by hand:
//! axis lines give 16 runs of length 4; each face diagonal gives run lengths
//! {1:8, 2:8, 3:8, 4:4}; each space diagonal gives {1:18, 2:12, 3:6, 4:1};
//! dependence sizes are 8 corners (8), 24 edges (12), 24 faces (18) and
//! 8 interior voxels (27).

use radiowb_core::ImageType;

pub const VALUE: f64 = 7.0;

/// Intensity of each derived image of the constant cube.
pub fn image_constant(ty: ImageType) -> f64 {
    match ty {
        ImageType::Wavelet(0) => VALUE * 2f64.powf(1.5),
        ImageType::Wavelet(_) | ImageType::LoG(_) => 0.0,
        _ => VALUE,
    }
}

pub fn shape() -> Vec<(&'static str, f64)> {
    let area = 54.0 + 18.0 * 2f64.sqrt() + 3f64.sqrt();
    let volume = 176.0 / 3.0;
    let axis = 4.0 * 1.25f64.sqrt();
    vec![
        ("Elongation", 1.0),
        ("Flatness", 1.0),
        ("LeastAxisLength", axis),
        ("MajorAxisLength", axis),
        ("Maximum2DDiameterColumn", 18f64.sqrt()),
        ("Maximum2DDiameterRow", 18f64.sqrt()),
        ("Maximum2DDiameterSlice", 18f64.sqrt()),
        ("Maximum3DDiameter", 27f64.sqrt()),
        ("MeshVolume", volume),
        ("MinorAxisLength", axis),
        ("Sphericity", (36.0 * std::f64::consts::PI * volume * volume).cbrt() / area),
        ("SurfaceArea", area),
        ("SurfaceVolumeRatio", area / volume),
        ("VoxelVolume", 64.0),
    ]
}

pub fn intensity(c: f64) -> Vec<(&'static str, Vec<(&'static str, f64)>)> {
    let energy = 64.0 * c * c;
    vec![
        (
            "firstorder",
            vec![
                ("10Percentile", c),
                ("90Percentile", c),
                ("Energy", energy),
                ("Entropy", 0.0),
                ("InterquartileRange", 0.0),
                ("Kurtosis", 0.0),
                ("Maximum", c),
                ("Mean", c),
                ("MeanAbsoluteDeviation", 0.0),
                ("Median", c),
                ("Minimum", c),
                ("Range", 0.0),
                ("RobustMeanAbsoluteDeviation", 0.0),
                ("RootMeanSquared", c.abs()),
                ("Skewness", 0.0),
                ("TotalEnergy", energy),
                ("Uniformity", 1.0),
                ("Variance", 0.0),
            ],
        ),
        (
            "glcm",
            vec![
                ("Autocorrelation", 1.0),
                ("ClusterProminence", 0.0),
                ("ClusterShade", 0.0),
                ("ClusterTendency", 0.0),
                ("Contrast", 0.0),
                ("Correlation", 0.0),
                ("DifferenceAverage", 0.0),
                ("DifferenceEntropy", 0.0),
                ("DifferenceVariance", 0.0),
                ("Id", 1.0),
                ("Idm", 1.0),
                ("Idmn", 1.0),
                ("Idn", 1.0),
                ("Imc1", 0.0),
                ("Imc2", 0.0),
                ("InverseVariance", 0.0),
                ("JointAverage", 1.0),
                ("JointEnergy", 1.0),
                ("JointEntropy", 0.0),
                ("MCC", 1.0),
                ("MaximumProbability", 1.0),
                ("SumAverage", 2.0),
                ("SumEntropy", 0.0),
                ("SumSquares", 0.0),
            ],
        ),
        (
            "gldm",
            vec![
                ("DependenceEntropy", 1.811278124459133),
                ("DependenceNonUniformity", 20.0),
                ("DependenceNonUniformityNormalized", 0.3125),
                ("DependenceVariance", 30.484375),
                ("GrayLevelNonUniformity", 64.0),
                ("GrayLevelVariance", 0.0),
                ("HighGrayLevelEmphasis", 1.0),
                ("LargeDependenceEmphasis", 274.625),
                ("LargeDependenceHighGrayLevelEmphasis", 274.625),
                ("LargeDependenceLowGrayLevelEmphasis", 274.625),
                ("LowGrayLevelEmphasis", 1.0),
                ("SmallDependenceEmphasis", 0.005886166838134431),
                ("SmallDependenceHighGrayLevelEmphasis", 0.005886166838134431),
                ("SmallDependenceLowGrayLevelEmphasis", 0.005886166838134431),
            ],
        ),
        (
            "glrlm",
            vec![
                ("GrayLevelNonUniformity", 28.0),
                ("GrayLevelNonUniformityNormalized", 1.0),
                ("GrayLevelVariance", 0.0),
                ("HighGrayLevelRunEmphasis", 1.0),
                ("LongRunEmphasis", 7.724383724383724),
                ("LongRunHighGrayLevelEmphasis", 7.724383724383724),
                ("LongRunLowGrayLevelEmphasis", 7.724383724383724),
                ("LowGrayLevelRunEmphasis", 1.0),
                ("RunEntropy", 1.3920878926577724),
                ("RunLengthNonUniformity", 11.32046332046332),
                ("RunLengthNonUniformityNormalized", 0.4667204860255055),
                ("RunPercentage", 0.4375),
                ("RunVariance", 0.7001684530642059),
                ("ShortRunEmphasis", 0.3787310662310662),
                ("ShortRunHighGrayLevelEmphasis", 0.3787310662310662),
                ("ShortRunLowGrayLevelEmphasis", 0.3787310662310662),
            ],
        ),
        (
            "glszm",
            vec![
                ("GrayLevelNonUniformity", 1.0),
                ("GrayLevelNonUniformityNormalized", 1.0),
                ("GrayLevelVariance", 0.0),
                ("HighGrayLevelZoneEmphasis", 1.0),
                ("LargeAreaEmphasis", 4096.0),
                ("LargeAreaHighGrayLevelEmphasis", 4096.0),
                ("LargeAreaLowGrayLevelEmphasis", 4096.0),
                ("LowGrayLevelZoneEmphasis", 1.0),
                ("SizeZoneNonUniformity", 1.0),
                ("SizeZoneNonUniformityNormalized", 1.0),
                ("SmallAreaEmphasis", 1.0 / 4096.0),
                ("SmallAreaHighGrayLevelEmphasis", 1.0 / 4096.0),
                ("SmallAreaLowGrayLevelEmphasis", 1.0 / 4096.0),
                ("ZoneEntropy", 0.0),
                ("ZonePercentage", 1.0 / 64.0),
                ("ZoneVariance", 0.0),
            ],
        ),
        (
            "ngtdm",
            vec![("Busyness", 0.0), ("Coarseness", 1e6), ("Complexity", 0.0), ("Contrast", 0.0), ("Strength", 0.0)],
        ),
    ]
}

/// Every expected `(column name, value)` for the given image list.
pub fn table(images: &[ImageType]) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = shape().into_iter().map(|(n, v)| (format!("original_shape_{n}"), v)).collect();
    for &ty in images {
        for (class, feats) in intensity(image_constant(ty)) {
            for (n, v) in feats {
                out.push((format!("{ty}_{class}_{n}"), v));
            }
        }
    }
    out
}
