#![allow(dead_code)]

use radiowb_analytics::FeatureTable;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn table(values: Vec<Vec<f64>>, labels: Vec<u8>) -> FeatureTable {
    let d = values[0].len();
    FeatureTable::new(
        (0..values.len()).map(|i| format!("roi{i:03}")).collect(),
        (0..d).map(|j| format!("f{j}")).collect(),
        values,
    )
    .unwrap()
    .with_labels(labels.into_iter().map(Some).collect())
    .unwrap()
}

/// Two Gaussian blobs in 2-D, centers (−3,−3) and (3,3), σ = 0.5.
pub fn blobs(n_per: usize, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let mut v = Vec::new();
    let mut y = Vec::new();
    for c in 0..2u8 {
        let m = if c == 0 { -3.0 } else { 3.0 };
        for _ in 0..n_per {
            v.push(vec![m + noise.sample(&mut rng), m + noise.sample(&mut rng)]);
            y.push(c);
        }
    }
    table(v, y)
}

/// The four XOR corners, each repeated `rep` times.
pub fn xor(rep: usize) -> FeatureTable {
    let mut v = Vec::new();
    let mut y = Vec::new();
    for _ in 0..rep {
        for (a, b) in [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)] {
            v.push(vec![a, b]);
            y.push(((a + b) as u8) % 2);
        }
    }
    table(v, y)
}

/// Columns 0 and 1 shift by ±1 with the class (2σ apart); columns 2..10
/// are N(0, 1) noise.
pub fn informative(n: usize, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    let mut v = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let c = (i % 2) as u8;
        let shift = if c == 1 { 1.0 } else { -1.0 };
        let row: Vec<f64> = (0..10).map(|j| z.sample(&mut rng) + if j < 2 { shift } else { 0.0 }).collect();
        v.push(row);
        y.push(c);
    }
    table(v, y)
}
