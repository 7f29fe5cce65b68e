//! The ROI × feature matrix that flows through radiomics pipelines.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
    Unassigned,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
            Split::Unassigned => "unassigned",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "train" => Split::Train,
            "validation" => Split::Validation,
            "test" => Split::Test,
            "" | "unassigned" => Split::Unassigned,
            other => return Err(Error::InvalidTable(format!("unknown split `{other}`"))),
        })
    }
}

/// Rows are ROIs, columns are named features. Labels are binary (1 is the
/// positive class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub row_ids: Vec<String>,
    pub columns: Vec<String>,
    /// Row-major, `row_ids.len()` rows of `columns.len()` values.
    pub values: Vec<Vec<f64>>,
    pub labels: Vec<Option<u8>>,
    pub split: Vec<Split>,
}

impl FeatureTable {
    pub fn new(row_ids: Vec<String>, columns: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = row_ids.len();
        let t = Self { row_ids, columns, values, labels: vec![None; n], split: vec![Split::Unassigned; n] };
        t.validate()?;
        Ok(t)
    }

    pub fn with_labels(mut self, labels: Vec<Option<u8>>) -> Result<Self> {
        if labels.len() != self.n_rows() {
            return Err(Error::InvalidTable("label count differs from row count".into()));
        }
        if labels.iter().flatten().any(|&l| l > 1) {
            return Err(Error::InvalidTable("labels must be 0 or 1".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.row_ids.len();
        if self.values.len() != n || self.labels.len() != n || self.split.len() != n {
            return Err(Error::InvalidTable("row-wise vectors disagree in length".into()));
        }
        if let Some(r) = self.values.iter().position(|r| r.len() != self.columns.len()) {
            return Err(Error::InvalidTable(format!("row `{}` has the wrong width", self.row_ids[r])));
        }
        let mut seen = HashSet::new();
        if let Some(d) = self.row_ids.iter().find(|r| !seen.insert(r.as_str())) {
            return Err(Error::InvalidTable(format!("duplicate row id `{d}`")));
        }
        let mut seen = HashSet::new();
        if let Some(d) = self.columns.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(Error::InvalidTable(format!("duplicate column `{d}`")));
        }
        Ok(())
    }

    /// Errors on the first NaN or infinite value.
    pub fn check_finite(&self) -> Result<()> {
        for (r, row) in self.values.iter().enumerate() {
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: self.row_ids[r].clone(), column: self.columns[c].clone() });
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    pub fn rows_in(&self, split: Split) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.split[i] == split).collect()
    }

    /// Train rows, or every row when nothing is marked as train.
    pub fn fit_rows(&self) -> Vec<usize> {
        let train = self.rows_in(Split::Train);
        if train.is_empty() {
            (0..self.n_rows()).collect()
        } else {
            train
        }
    }

    /// Features and labels of the given rows; every row must be labelled.
    pub fn xy(&self, rows: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<u8>)> {
        let mut x = Vec::with_capacity(rows.len());
        let mut y = Vec::with_capacity(rows.len());
        for &r in rows {
            y.push(self.labels[r].ok_or_else(|| Error::MissingLabel(self.row_ids[r].clone()))?);
            x.push(self.values[r].clone());
        }
        Ok((x, y))
    }

    pub fn select_columns(&self, keep: &[usize]) -> FeatureTable {
        FeatureTable {
            row_ids: self.row_ids.clone(),
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            values: self.values.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
            split: self.split.clone(),
        }
    }

    pub fn select_named(&self, names: &[String]) -> Result<FeatureTable> {
        let idx = names.iter().map(|n| self.column_index(n)).collect::<Result<Vec<_>>>()?;
        Ok(self.select_columns(&idx))
    }

    pub fn subset_rows(&self, rows: &[usize]) -> FeatureTable {
        FeatureTable {
            row_ids: rows.iter().map(|&i| self.row_ids[i].clone()).collect(),
            columns: self.columns.clone(),
            values: rows.iter().map(|&i| self.values[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            split: rows.iter().map(|&i| self.split[i]).collect(),
        }
    }

    /// Assigns `Unassigned` rows to train or validation. Rows that already
    /// carry a split (manual assignments) are left alone.
    ///
    /// `floor(fraction · n)` of the free rows go to train. With
    /// `stratified`, each class receives its proportional share, rounded by
    /// largest remainder.
    pub fn split_random(&self, fraction: f64, seed: u64, stratified: bool) -> Result<FeatureTable> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidParameter(format!("train fraction {fraction} outside [0, 1]")));
        }
        let free = self.rows_in(Split::Unassigned);
        let n_train = (fraction * free.len() as f64 + 1e-9).floor() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        let assign = |rows: &[usize], k: usize, out: &mut FeatureTable| {
            for (i, &r) in rows.iter().enumerate() {
                out.split[r] = if i < k { Split::Train } else { Split::Validation };
            }
        };
        if !stratified {
            let mut rows = free.clone();
            rows.shuffle(&mut rng);
            assign(&rows, n_train, &mut out);
            return Ok(out);
        }
        let mut groups: BTreeMap<Option<u8>, Vec<usize>> = BTreeMap::new();
        for &r in &free {
            groups.entry(self.labels[r]).or_default().push(r);
        }
        if fraction > 0.0 && fraction < 1.0 {
            if let Some((label, _)) = groups.iter().find(|(_, g)| g.len() < 2) {
                return Err(Error::InvalidParameter(format!("class {label:?} has fewer than 2 rows; cannot stratify")));
            }
        }
        let ideal: Vec<f64> =
            groups.values().map(|g| g.len() as f64 * n_train as f64 / free.len().max(1) as f64).collect();
        let mut quota: Vec<usize> = ideal.iter().map(|v| v.floor() as usize).collect();
        let mut order: Vec<usize> = (0..quota.len()).collect();
        order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())).then(a.cmp(&b)));
        let mut missing = n_train - quota.iter().sum::<usize>();
        for &g in &order {
            if missing == 0 {
                break;
            }
            quota[g] += 1;
            missing -= 1;
        }
        for (g, rows) in groups.values().enumerate() {
            let mut rows = rows.clone();
            rows.shuffle(&mut rng);
            assign(&rows, quota[g], &mut out);
        }
        Ok(out)
    }

    /// `roi_id[,label][,split],<features…>`; label and split columns are
    /// optional on input and always written.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("roi_id,label,split");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for i in 0..self.n_rows() {
            out.push_str(&self.row_ids[i]);
            out.push(',');
            if let Some(l) = self.labels[i] {
                out.push_str(&l.to_string());
            }
            out.push(',');
            out.push_str(self.split[i].as_str());
            for v in &self.values[i] {
                out.push(',');
                out.push_str(&format!("{v:?}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<FeatureTable> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("roi_id") {
            return Err(Error::InvalidTable("first column must be roi_id".into()));
        }
        let label_col = header.iter().position(|h| h == "label");
        let split_col = header.iter().position(|h| h == "split");
        let feature_cols: Vec<usize> =
            (1..header.len()).filter(|&j| Some(j) != label_col && Some(j) != split_col).collect();
        let mut t = FeatureTable {
            row_ids: Vec::new(),
            columns: feature_cols.iter().map(|&j| header[j].clone()).collect(),
            values: Vec::new(),
            labels: Vec::new(),
            split: Vec::new(),
        };
        for rec in rdr.records() {
            let rec = rec?;
            let id = rec.get(0).unwrap_or_default().to_string();
            let label = match label_col.and_then(|j| rec.get(j)).unwrap_or("") {
                "" => None,
                "0" => Some(0),
                "1" => Some(1),
                other => return Err(Error::InvalidTable(format!("row `{id}`: label `{other}` is not 0/1"))),
            };
            let split = Split::parse(split_col.and_then(|j| rec.get(j)).unwrap_or(""))?;
            let row = feature_cols
                .iter()
                .map(|&j| {
                    let cell = rec.get(j).unwrap_or("");
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidTable(format!("row `{id}`, column `{}`: `{cell}`", header[j])))
                })
                .collect::<Result<Vec<f64>>>()?;
            t.row_ids.push(id);
            t.values.push(row);
            t.labels.push(label);
            t.split.push(split);
        }
        t.validate()?;
        Ok(t)
    }
}
