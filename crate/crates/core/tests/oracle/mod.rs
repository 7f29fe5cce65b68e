//! Slow, direct implementations of the texture matrices and intensity
//! features, used to check the library on random inputs.
//!
//! Everything here works from a plain list of in-mask voxels and pairwise
//! enumeration, without the scan orders or neighbour tables the library
//! uses.

#![allow(dead_code)]

pub mod constant;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use radiowb_core::{Mask, Volume};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Sparse = BTreeMap<(usize, usize), u64>;

/// Discretized region: levels `1..=ng` inside the mask, 0 outside.
#[derive(Debug, Clone)]
pub struct Grid {
    pub dims: [usize; 3],
    pub levels: Vec<u32>,
    pub ng: usize,
}

impl Grid {
    fn voxels(&self) -> Vec<([i64; 3], u32)> {
        let [nx, ny, _] = self.dims;
        self.levels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0)
            .map(|(i, &l)| ([(i % nx) as i64, ((i / nx) % ny) as i64, (i / (nx * ny)) as i64], l))
            .collect()
    }
}

/// Fixed-bin-count quantization written out from its definition.
pub fn quantize(values: &[f64], mask: &[bool], dims: [usize; 3], bins: usize) -> Grid {
    let inside: Vec<f64> = values.iter().zip(mask).filter(|(_, &m)| m).map(|(&v, _)| v).collect();
    let lo = inside.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = inside.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ng = if hi > lo { bins } else { 1 };
    let levels = values
        .iter()
        .zip(mask)
        .map(|(&v, &m)| {
            if !m {
                0
            } else if hi == lo {
                1
            } else {
                let l = 1 + (bins as f64 * (v - lo) / (hi - lo)).floor() as usize;
                l.min(bins) as u32
            }
        })
        .collect();
    Grid { dims, levels, ng }
}

/// One representative of each ± pair of 3×3×3 offsets.
pub fn directions() -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for dz in -1..=1i64 {
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let first = if dz != 0 {
                    dz
                } else if dy != 0 {
                    dy
                } else {
                    dx
                };
                if first > 0 {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

fn sub(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn neg(a: [i64; 3]) -> [i64; 3] {
    [-a[0], -a[1], -a[2]]
}

fn chebyshev(a: [i64; 3], b: [i64; 3]) -> i64 {
    (0..3).map(|k| (a[k] - b[k]).abs()).max().unwrap()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = i;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn components(n: usize, linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for b in a + 1..n {
            if linked(a, b) {
                uf.union(a, b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in 0..n {
        groups.entry(uf.find(a)).or_default().push(a);
    }
    groups.into_values().collect()
}

// ---------------------------------------------------------------- GLCM

/// Symmetric pair counts for direction `d`: every ordered pair of in-mask
/// voxels whose displacement is `d` or `-d`.
pub fn glcm_counts(g: &Grid, d: [i64; 3]) -> Vec<Vec<u64>> {
    let vox = g.voxels();
    let mut m = vec![vec![0u64; g.ng]; g.ng];
    for (a, la) in &vox {
        for (b, lb) in &vox {
            let delta = sub(*b, *a);
            if delta == d || delta == neg(d) {
                m[*la as usize - 1][*lb as usize - 1] += 1;
            }
        }
    }
    m
}

fn h2(ps: impl IntoIterator<Item = f64>) -> f64 {
    ps.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

pub fn glcm_single(p: &[Vec<f64>]) -> BTreeMap<&'static str, f64> {
    let ng = p.len();
    let lv = |k: usize| (k + 1) as f64;
    let px: Vec<f64> = (0..ng).map(|i| p[i].iter().sum()).collect();
    let py: Vec<f64> = (0..ng).map(|j| (0..ng).map(|i| p[i][j]).sum()).collect();
    let mut cells = Vec::new();
    for i in 0..ng {
        for j in 0..ng {
            cells.push((lv(i), lv(j), p[i][j], px[i] * py[j]));
        }
    }
    let sum = |f: &dyn Fn(f64, f64, f64) -> f64| cells.iter().map(|&(i, j, v, _)| f(i, j, v)).sum::<f64>();
    let mux = sum(&|i, _, v| i * v);
    let muy = sum(&|_, j, v| j * v);
    let sx = sum(&|i, _, v| (i - mux).powi(2) * v).sqrt();
    let sy = sum(&|_, j, v| (j - muy).powi(2) * v).sqrt();
    let mut pd = vec![0.0; ng];
    let mut ps = vec![0.0; 2 * ng + 1];
    for &(i, j, v, _) in &cells {
        pd[(i - j).abs() as usize] += v;
        ps[(i + j) as usize] += v;
    }
    let da: f64 = pd.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let sa: f64 = ps.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let hxy = h2(cells.iter().map(|c| c.2));
    let hx = h2(px.iter().copied());
    let hy = h2(py.iter().copied());
    let hxy1: f64 = cells.iter().filter(|c| c.2 > 0.0 && c.3 > 0.0).map(|c| -c.2 * c.3.log2()).sum();
    let hxy2 = h2(cells.iter().map(|c| c.3));
    let ngf = ng as f64;
    let mut f = BTreeMap::new();
    f.insert("Autocorrelation", sum(&|i, j, v| i * j * v));
    f.insert("ClusterProminence", sum(&|i, j, v| (i + j - mux - muy).powi(4) * v));
    f.insert("ClusterShade", sum(&|i, j, v| (i + j - mux - muy).powi(3) * v));
    f.insert("ClusterTendency", sum(&|i, j, v| (i + j - mux - muy).powi(2) * v));
    f.insert("Contrast", sum(&|i, j, v| (i - j).powi(2) * v));
    let corr = if sx > 0.0 && sy > 0.0 { (sum(&|i, j, v| i * j * v) - mux * muy) / (sx * sy) } else { 0.0 };
    f.insert("Correlation", corr);
    f.insert("DifferenceAverage", da);
    f.insert("DifferenceEntropy", h2(pd.iter().copied()));
    f.insert("DifferenceVariance", pd.iter().enumerate().map(|(k, v)| (k as f64 - da).powi(2) * v).sum());
    f.insert("Id", sum(&|i, j, v| v / (1.0 + (i - j).abs())));
    f.insert("Idm", sum(&|i, j, v| v / (1.0 + (i - j).powi(2))));
    f.insert("Idmn", sum(&|i, j, v| v / (1.0 + (i - j).powi(2) / (ngf * ngf))));
    f.insert("Idn", sum(&|i, j, v| v / (1.0 + (i - j).abs() / ngf)));
    f.insert("Imc1", if hx.max(hy) > 0.0 { (hxy - hxy1) / hx.max(hy) } else { 0.0 });
    f.insert("Imc2", (1.0 - (-2.0 * (hxy2 - hxy)).exp()).abs().sqrt());
    f.insert("InverseVariance", (1..ng).map(|k| pd[k] / (k * k) as f64).sum());
    f.insert("JointAverage", mux);
    f.insert("JointEnergy", sum(&|_, _, v| v * v));
    f.insert("JointEntropy", hxy);
    f.insert("MCC", mcc(p, &px, &py));
    f.insert("MaximumProbability", cells.iter().map(|c| c.2).fold(0.0, f64::max));
    f.insert("SumAverage", sa);
    f.insert("SumEntropy", h2(ps.iter().copied()));
    f.insert("SumSquares", sum(&|i, _, v| (i - mux).powi(2) * v));
    f
}

/// Second largest eigenvalue of the (non-symmetric) Markov-like matrix,
/// found with a general eigen solver.
fn mcc(p: &[Vec<f64>], px: &[f64], py: &[f64]) -> f64 {
    let ng = p.len();
    let rows: Vec<usize> = (0..ng).filter(|&i| px[i] > 0.0).collect();
    if rows.len() < 2 {
        return 1.0;
    }
    let q = DMatrix::from_fn(rows.len(), rows.len(), |a, b| {
        (0..ng).filter(|&k| py[k] > 0.0).map(|k| p[rows[a]][k] * p[rows[b]][k] / (px[rows[a]] * py[k])).sum::<f64>()
    });
    let mut ev: Vec<f64> = q.complex_eigenvalues().iter().map(|c| c.re).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev[1].clamp(0.0, 1.0).sqrt()
}

pub fn glcm_features(g: &Grid) -> BTreeMap<&'static str, f64> {
    let mut acc: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut used = 0.0;
    for d in directions() {
        let c = glcm_counts(g, d);
        let total: u64 = c.iter().flatten().sum();
        if total == 0 {
            continue;
        }
        let p: Vec<Vec<f64>> = c.iter().map(|r| r.iter().map(|&v| v as f64 / total as f64).collect()).collect();
        for (k, v) in glcm_single(&p) {
            *acc.entry(k).or_default() += v;
        }
        used += 1.0;
    }
    if used == 0.0 {
        return glcm_single(&[vec![1.0]]).into_keys().map(|k| (k, 0.0)).collect();
    }
    acc.into_iter().map(|(k, v)| (k, v / used)).collect()
}

// ------------------------------------------------- GLRLM / GLSZM shared

fn size_features(m: &Sparse, np: usize, names: [&'static str; 16]) -> BTreeMap<&'static str, f64> {
    let nr: f64 = m.values().map(|&c| c as f64).sum();
    let p: Vec<(f64, f64, f64)> = m.iter().map(|(&(i, j), &c)| (i as f64, j as f64, c as f64 / nr)).collect();
    let mut by_gray: BTreeMap<usize, f64> = BTreeMap::new();
    let mut by_size: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(i, j), &c) in m {
        *by_gray.entry(i).or_default() += c as f64;
        *by_size.entry(j).or_default() += c as f64;
    }
    let e = |f: &dyn Fn(f64, f64) -> f64| p.iter().map(|&(i, j, q)| q * f(i, j)).sum::<f64>();
    let mu_i = e(&|i, _| i);
    let mu_j = e(&|_, j| j);
    let gln = by_gray.values().map(|v| v * v).sum::<f64>() / nr;
    let sln = by_size.values().map(|v| v * v).sum::<f64>() / nr;
    // order: GLN, GLNN, GLV, HGE, LE, LHGE, LLGE, LGE, [entropy|SN], ...
    let vals = [
        ("gln", gln),
        ("glnn", gln / nr),
        ("glv", e(&|i, _| (i - mu_i).powi(2))),
        ("hge", e(&|i, _| i * i)),
        ("le", e(&|_, j| j * j)),
        ("lhge", e(&|i, j| i * i * j * j)),
        ("llge", e(&|i, j| j * j / (i * i))),
        ("lge", e(&|i, _| 1.0 / (i * i))),
        ("ent", h2(p.iter().map(|t| t.2))),
        ("sn", sln),
        ("snn", sln / nr),
        ("pct", nr / np as f64),
        ("sv", e(&|_, j| (j - mu_j).powi(2))),
        ("se", e(&|_, j| 1.0 / (j * j))),
        ("shge", e(&|i, j| i * i / (j * j))),
        ("slge", e(&|i, j| 1.0 / (i * i * j * j))),
    ];
    let lookup: BTreeMap<&str, f64> = vals.into_iter().collect();
    names
        .iter()
        .map(|&n| {
            let key = match n {
                "GrayLevelNonUniformity" => "gln",
                "GrayLevelNonUniformityNormalized" => "glnn",
                "GrayLevelVariance" => "glv",
                "HighGrayLevelRunEmphasis" | "HighGrayLevelZoneEmphasis" => "hge",
                "LongRunEmphasis" | "LargeAreaEmphasis" => "le",
                "LongRunHighGrayLevelEmphasis" | "LargeAreaHighGrayLevelEmphasis" => "lhge",
                "LongRunLowGrayLevelEmphasis" | "LargeAreaLowGrayLevelEmphasis" => "llge",
                "LowGrayLevelRunEmphasis" | "LowGrayLevelZoneEmphasis" => "lge",
                "RunEntropy" | "ZoneEntropy" => "ent",
                "RunLengthNonUniformity" | "SizeZoneNonUniformity" => "sn",
                "RunLengthNonUniformityNormalized" | "SizeZoneNonUniformityNormalized" => "snn",
                "RunPercentage" | "ZonePercentage" => "pct",
                "RunVariance" | "ZoneVariance" => "sv",
                "ShortRunEmphasis" | "SmallAreaEmphasis" => "se",
                "ShortRunHighGrayLevelEmphasis" | "SmallAreaHighGrayLevelEmphasis" => "shge",
                "ShortRunLowGrayLevelEmphasis" | "SmallAreaLowGrayLevelEmphasis" => "slge",
                other => panic!("unknown feature {other}"),
            };
            (n, lookup[key])
        })
        .collect()
}

pub const GLRLM_NAMES: [&str; 16] = [
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance",
    "HighGrayLevelRunEmphasis",
    "LongRunEmphasis",
    "LongRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LowGrayLevelRunEmphasis",
    "RunEntropy",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "RunVariance",
    "ShortRunEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "ShortRunLowGrayLevelEmphasis",
];

pub const GLSZM_NAMES: [&str; 16] = [
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance",
    "HighGrayLevelZoneEmphasis",
    "LargeAreaEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis",
    "LowGrayLevelZoneEmphasis",
    "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized",
    "SmallAreaEmphasis",
    "SmallAreaHighGrayLevelEmphasis",
    "SmallAreaLowGrayLevelEmphasis",
    "ZoneEntropy",
    "ZonePercentage",
    "ZoneVariance",
];

// ---------------------------------------------------------------- GLRLM

/// Runs are the connected pieces of the graph linking equal-level voxels
/// displaced by exactly `d`.
pub fn glrlm_matrix(g: &Grid, d: [i64; 3]) -> Sparse {
    let vox = g.voxels();
    let mut out = Sparse::new();
    for comp in components(vox.len(), |a, b| {
        let delta = sub(vox[b].0, vox[a].0);
        vox[a].1 == vox[b].1 && (delta == d || delta == neg(d))
    }) {
        *out.entry((vox[comp[0]].1 as usize, comp.len())).or_default() += 1;
    }
    out
}

pub fn glrlm_features(g: &Grid) -> BTreeMap<&'static str, f64> {
    let np = g.voxels().len();
    let mut acc: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut used = 0.0;
    for d in directions() {
        let m = glrlm_matrix(g, d);
        if m.is_empty() {
            continue;
        }
        for (k, v) in size_features(&m, np, GLRLM_NAMES) {
            *acc.entry(k).or_default() += v;
        }
        used += 1.0;
    }
    acc.into_iter().map(|(k, v)| (k, v / used)).collect()
}

// ---------------------------------------------------------------- GLSZM

pub fn glszm_matrix(g: &Grid) -> Sparse {
    let vox = g.voxels();
    let mut out = Sparse::new();
    for comp in components(vox.len(), |a, b| vox[a].1 == vox[b].1 && chebyshev(vox[a].0, vox[b].0) == 1) {
        *out.entry((vox[comp[0]].1 as usize, comp.len())).or_default() += 1;
    }
    out
}

pub fn glszm_features(g: &Grid) -> BTreeMap<&'static str, f64> {
    size_features(&glszm_matrix(g), g.voxels().len(), GLSZM_NAMES)
}

// ----------------------------------------------------------------- GLDM

/// `(level, k)` with `k` the number of dependent neighbours (column `k+1`).
pub fn gldm_matrix(g: &Grid, alpha: u32) -> Sparse {
    let vox = g.voxels();
    let mut out = Sparse::new();
    for (a, la) in &vox {
        let k = vox.iter().filter(|(b, lb)| chebyshev(*a, *b) == 1 && la.abs_diff(*lb) <= alpha).count();
        *out.entry((*la as usize, k)).or_default() += 1;
    }
    out
}

pub fn gldm_features(g: &Grid, alpha: u32) -> BTreeMap<&'static str, f64> {
    let m = gldm_matrix(g, alpha);
    let nz: f64 = m.values().map(|&c| c as f64).sum();
    let p: Vec<(f64, f64, f64)> = m.iter().map(|(&(i, k), &c)| (i as f64, (k + 1) as f64, c as f64 / nz)).collect();
    let e = |f: &dyn Fn(f64, f64) -> f64| p.iter().map(|&(i, j, q)| q * f(i, j)).sum::<f64>();
    let mut by_gray: BTreeMap<usize, f64> = BTreeMap::new();
    let mut by_dep: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(i, k), &c) in &m {
        *by_gray.entry(i).or_default() += c as f64;
        *by_dep.entry(k).or_default() += c as f64;
    }
    let mu_i = e(&|i, _| i);
    let mu_j = e(&|_, j| j);
    let dn = by_dep.values().map(|v| v * v).sum::<f64>() / nz;
    BTreeMap::from([
        ("DependenceEntropy", h2(p.iter().map(|t| t.2))),
        ("DependenceNonUniformity", dn),
        ("DependenceNonUniformityNormalized", dn / nz),
        ("DependenceVariance", e(&|_, j| (j - mu_j).powi(2))),
        ("GrayLevelNonUniformity", by_gray.values().map(|v| v * v).sum::<f64>() / nz),
        ("GrayLevelVariance", e(&|i, _| (i - mu_i).powi(2))),
        ("HighGrayLevelEmphasis", e(&|i, _| i * i)),
        ("LargeDependenceEmphasis", e(&|_, j| j * j)),
        ("LargeDependenceHighGrayLevelEmphasis", e(&|i, j| i * i * j * j)),
        ("LargeDependenceLowGrayLevelEmphasis", e(&|i, j| j * j / (i * i))),
        ("LowGrayLevelEmphasis", e(&|i, _| 1.0 / (i * i))),
        ("SmallDependenceEmphasis", e(&|_, j| 1.0 / (j * j))),
        ("SmallDependenceHighGrayLevelEmphasis", e(&|i, j| i * i / (j * j))),
        ("SmallDependenceLowGrayLevelEmphasis", e(&|i, j| 1.0 / (i * i * j * j))),
    ])
}

// ---------------------------------------------------------------- NGTDM

/// `(n_i, s_i)` per level, over voxels with at least one in-mask neighbour.
pub fn ngtdm(g: &Grid) -> (Vec<u64>, Vec<f64>) {
    let vox = g.voxels();
    let mut n = vec![0u64; g.ng];
    let mut s = vec![0.0; g.ng];
    for (a, la) in &vox {
        let nb: Vec<f64> = vox.iter().filter(|(b, _)| chebyshev(*a, *b) == 1).map(|(_, l)| *l as f64).collect();
        if nb.is_empty() {
            continue;
        }
        let avg = nb.iter().sum::<f64>() / nb.len() as f64;
        n[*la as usize - 1] += 1;
        s[*la as usize - 1] += (*la as f64 - avg).abs();
    }
    (n, s)
}

pub fn ngtdm_features(g: &Grid) -> BTreeMap<&'static str, f64> {
    let (n, s) = ngtdm(g);
    let nvp: f64 = n.iter().map(|&c| c as f64).sum();
    if nvp == 0.0 {
        return BTreeMap::from([
            ("Busyness", 0.0),
            ("Coarseness", 1e6),
            ("Complexity", 0.0),
            ("Contrast", 0.0),
            ("Strength", 0.0),
        ]);
    }
    let lv: Vec<(f64, f64, f64)> =
        (0..g.ng).filter(|&i| n[i] > 0).map(|i| ((i + 1) as f64, n[i] as f64 / nvp, s[i])).collect();
    let ngp = lv.len() as f64;
    let ps: f64 = lv.iter().map(|&(_, p, si)| p * si).sum();
    let st: f64 = s.iter().sum();
    let (mut c, mut b, mut x, mut t) = (0.0, 0.0, 0.0, 0.0);
    for &(i, pi, si) in &lv {
        for &(j, pj, sj) in &lv {
            c += pi * pj * (i - j).powi(2);
            b += (i * pi - j * pj).abs();
            x += (i - j).abs() * (pi * si + pj * sj) / (pi + pj);
            t += (pi + pj) * (i - j).powi(2);
        }
    }
    BTreeMap::from([
        ("Busyness", if b > 0.0 { ps / b } else { 0.0 }),
        ("Coarseness", if ps > 0.0 { 1.0 / ps } else { 1e6 }),
        ("Complexity", x / nvp),
        ("Contrast", if ngp > 1.0 { c / (ngp * (ngp - 1.0)) * st / nvp } else { 0.0 }),
        ("Strength", if st > 0.0 { t / st } else { 0.0 }),
    ])
}

// ---------------------------------------------------------- first order

fn pct(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let k = h.floor() as usize;
    if k + 1 >= sorted.len() {
        return sorted[k];
    }
    sorted[k] * (1.0 - (h - k as f64)) + sorted[k + 1] * (h - k as f64)
}

pub fn first_order(vol: &Volume, mask: &Mask, g: &Grid) -> BTreeMap<&'static str, f64> {
    let mut x: Vec<f64> = (0..vol.len()).filter(|&i| mask.bits()[i]).map(|i| vol.voxels()[i]).collect();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let moment = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
    let var = moment(2);
    let p10 = pct(&x, 0.10);
    let p90 = pct(&x, 0.90);
    let mid: Vec<f64> = x.iter().copied().filter(|&v| p10 <= v && v <= p90).collect();
    let mid_mean = mid.iter().sum::<f64>() / mid.len() as f64;
    let mut hist: BTreeMap<u32, f64> = BTreeMap::new();
    for &l in g.levels.iter().filter(|&&l| l > 0) {
        *hist.entry(l).or_default() += 1.0 / n;
    }
    let energy: f64 = x.iter().map(|v| v * v).sum();
    BTreeMap::from([
        ("10Percentile", p10),
        ("90Percentile", p90),
        ("Energy", energy),
        ("Entropy", h2(hist.values().copied())),
        ("InterquartileRange", pct(&x, 0.75) - pct(&x, 0.25)),
        ("Kurtosis", if var > 0.0 { moment(4) / (var * var) } else { 0.0 }),
        ("Maximum", x[x.len() - 1]),
        ("Mean", mean),
        ("MeanAbsoluteDeviation", x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n),
        ("Median", pct(&x, 0.5)),
        ("Minimum", x[0]),
        ("Range", x[x.len() - 1] - x[0]),
        ("RobustMeanAbsoluteDeviation", mid.iter().map(|v| (v - mid_mean).abs()).sum::<f64>() / mid.len() as f64),
        ("RootMeanSquared", (energy / n).sqrt()),
        ("Skewness", if var > 0.0 { moment(3) / var.powf(1.5) } else { 0.0 }),
        ("TotalEnergy", energy * vol.spacing().iter().product::<f64>()),
        ("Uniformity", hist.values().map(|p| p * p).sum()),
        ("Variance", var),
    ])
}

// ------------------------------------------------------------ inputs

/// Random volume with a random non-empty mask and a random bin count in
/// `1..=max_ng`.
pub fn random_case(seed: u64, dims: [usize; 3], max_ng: usize) -> (Volume, Mask, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density = rng.gen_range(0.3..0.95);
    let ng = rng.gen_range(1..=max_ng);
    let n = dims.iter().product();
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..400.0)).collect();
    let mut bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(density)).collect();
    bits[rng.gen_range(0..n)] = true;
    let spacing = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..3.0)];
    let vol = Volume::new(dims, spacing, [0.0; 3], values, "CT").unwrap();
    (vol, Mask::from_bits(dims, bits).unwrap(), ng)
}

/// Relative agreement with a tiny absolute floor for values that cancel to
/// (almost) zero.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) || (a - b).abs() <= 1e-9
}
