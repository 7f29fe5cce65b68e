//! Neighbourhood definitions and helpers shared by the texture matrices.

/// The 13 unique unit offsets at Chebyshev distance 1 (one per ± pair).
pub const DIRECTIONS: [[i64; 3]; 13] = [
    [1, 0, 0],
    [-1, 1, 0],
    [0, 1, 0],
    [1, 1, 0],
    [-1, -1, 1],
    [0, -1, 1],
    [1, -1, 1],
    [-1, 0, 1],
    [0, 0, 1],
    [1, 0, 1],
    [-1, 1, 1],
    [0, 1, 1],
    [1, 1, 1],
];

/// All 26 offsets of the 3×3×3 neighbourhood.
pub fn neighbors26() -> impl Iterator<Item = [i64; 3]> {
    (-1..=1)
        .flat_map(|dz| (-1..=1).flat_map(move |dy| (-1..=1).map(move |dx| [dx, dy, dz])))
        .filter(|d| *d != [0, 0, 0])
}

/// `-Σ p log₂ p` with `0 log 0 = 0`.
pub fn entropy2<'a>(probs: impl IntoIterator<Item = &'a f64>) -> f64 {
    -probs.into_iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Features shared by the run-length and size-zone matrices.
///
/// `entries` are `(gray level, size, count)` with positive counts; `np` is
/// the number of voxels the matrix was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SizeMatrixStats {
    pub small_emphasis: f64,
    pub large_emphasis: f64,
    pub gray_nonuniformity: f64,
    pub gray_nonuniformity_norm: f64,
    pub size_nonuniformity: f64,
    pub size_nonuniformity_norm: f64,
    pub percentage: f64,
    pub gray_variance: f64,
    pub size_variance: f64,
    pub entropy: f64,
    pub low_gray_emphasis: f64,
    pub high_gray_emphasis: f64,
    pub small_low_gray: f64,
    pub small_high_gray: f64,
    pub large_low_gray: f64,
    pub large_high_gray: f64,
}

impl SizeMatrixStats {
    pub fn compute(entries: &[(usize, usize, u64)], ng: usize, max_size: usize, np: usize) -> Self {
        let total: f64 = entries.iter().map(|e| e.2 as f64).sum();
        let mut per_gray = vec![0.0; ng + 1];
        let mut per_size = vec![0.0; max_size + 1];
        let mut s = SizeMatrixStats {
            small_emphasis: 0.0,
            large_emphasis: 0.0,
            gray_nonuniformity: 0.0,
            gray_nonuniformity_norm: 0.0,
            size_nonuniformity: 0.0,
            size_nonuniformity_norm: 0.0,
            percentage: total / np as f64,
            gray_variance: 0.0,
            size_variance: 0.0,
            entropy: 0.0,
            low_gray_emphasis: 0.0,
            high_gray_emphasis: 0.0,
            small_low_gray: 0.0,
            small_high_gray: 0.0,
            large_low_gray: 0.0,
            large_high_gray: 0.0,
        };
        let (mut mu_i, mut mu_j) = (0.0, 0.0);
        for &(i, j, c) in entries {
            let p = c as f64 / total;
            let (fi, fj) = (i as f64, j as f64);
            let (i2, j2) = (fi * fi, fj * fj);
            per_gray[i] += c as f64;
            per_size[j] += c as f64;
            mu_i += p * fi;
            mu_j += p * fj;
            s.small_emphasis += p / j2;
            s.large_emphasis += p * j2;
            s.low_gray_emphasis += p / i2;
            s.high_gray_emphasis += p * i2;
            s.small_low_gray += p / (i2 * j2);
            s.small_high_gray += p * i2 / j2;
            s.large_low_gray += p * j2 / i2;
            s.large_high_gray += p * i2 * j2;
            s.entropy -= p * p.log2();
        }
        for &(i, j, c) in entries {
            let p = c as f64 / total;
            s.gray_variance += p * (i as f64 - mu_i).powi(2);
            s.size_variance += p * (j as f64 - mu_j).powi(2);
        }
        s.gray_nonuniformity = per_gray.iter().map(|v| v * v).sum::<f64>() / total;
        s.size_nonuniformity = per_size.iter().map(|v| v * v).sum::<f64>() / total;
        s.gray_nonuniformity_norm = s.gray_nonuniformity / total;
        s.size_nonuniformity_norm = s.size_nonuniformity / total;
        s
    }
}
