use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// `log10(x)`; non-positive values count as missing.
    Log10,
    /// `log10(x + 1)` for counts; negative values count as missing.
    Log10Plus1,
}

impl Transform {
    fn apply(self, x: f64) -> Option<f64> {
        match self {
            Transform::Identity => Some(x),
            Transform::Log10 => (x > 0.0).then(|| x.log10()),
            Transform::Log10Plus1 => (x >= 0.0).then(|| (x + 1.0).log10()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Feature {
    pub name: String,
    pub values: Vec<Option<f64>>,
    pub transform: Transform,
    pub standardize: bool,
}

impl Feature {
    pub fn new(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Feature {
            name: name.into(),
            values,
            transform: Transform::Identity,
            standardize: true,
        }
    }

    pub fn transform(mut self, t: Transform) -> Self {
        self.transform = t;
        self
    }

    pub fn raw(mut self) -> Self {
        self.standardize = false;
        self
    }
}

/// Complete-case feature matrix (no intercept column).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub log_transformed: BTreeSet<String>,
    pub standardized: Vec<bool>,
    /// Mean and sample sd used for standardized columns (0 and 1 otherwise).
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
    /// Input row index of every retained observation.
    pub rows: Vec<usize>,
}

impl DesignMatrix {
    pub fn n_obs(&self) -> usize {
        self.x.nrows()
    }

    /// Design with no features, for intercept-only fits.
    pub fn empty(n: usize) -> Self {
        let mut d = Self::from_columns(&[], &[]);
        d.x = DMatrix::zeros(n, 0);
        d.rows = (0..n).collect();
        d
    }

    /// Plain design from complete columns, nothing transformed or scaled.
    pub fn from_columns(names: &[&str], columns: &[Vec<f64>]) -> Self {
        let n = columns.first().map_or(0, Vec::len);
        let k = columns.len();
        DesignMatrix {
            names: names.iter().map(|s| s.to_string()).collect(),
            x: DMatrix::from_fn(n, k, |i, j| columns[j][i]),
            log_transformed: BTreeSet::new(),
            standardized: vec![false; k],
            centers: vec![0.0; k],
            scales: vec![1.0; k],
            rows: (0..n).collect(),
        }
    }
}

fn is_binary(col: &[f64]) -> bool {
    col.iter().all(|&v| v == 0.0 || v == 1.0)
}

/// Applies transforms, drops incomplete rows (listwise), then standardizes
/// requested non-binary columns with the sample sd. Returns the design and the
/// response on retained rows.
pub fn build_design(features: &[Feature], response: &[Option<f64>]) -> Result<(DesignMatrix, Vec<f64>)> {
    let n = response.len();
    if let Some(f) = features.iter().find(|f| f.values.len() != n) {
        return Err(Error::Data(format!(
            "feature {} has {} values, response has {n}",
            f.name,
            f.values.len()
        )));
    }
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); features.len()];
    'row: for i in 0..n {
        let Some(yi) = response[i].filter(|v| v.is_finite()) else { continue };
        let mut vals = Vec::with_capacity(features.len());
        for f in features {
            match f.values[i].and_then(|v| f.transform.apply(v)).filter(|v| v.is_finite()) {
                Some(v) => vals.push(v),
                None => continue 'row,
            }
        }
        rows.push(i);
        y.push(yi);
        for (c, v) in cols.iter_mut().zip(vals) {
            c.push(v);
        }
    }
    let m = rows.len();
    let k = features.len();
    let mut centers = vec![0.0; k];
    let mut scales = vec![1.0; k];
    let mut standardized = vec![false; k];
    for (j, f) in features.iter().enumerate() {
        if !f.standardize || m < 2 || is_binary(&cols[j]) {
            continue;
        }
        let mean = cols[j].iter().sum::<f64>() / m as f64;
        let var = cols[j].iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        let sd = var.sqrt();
        if sd > 0.0 {
            cols[j].iter_mut().for_each(|v| *v = (*v - mean) / sd);
            centers[j] = mean;
            scales[j] = sd;
            standardized[j] = true;
        }
    }
    let dropped = n - m;
    if dropped > 0 {
        log::info!("listwise deletion removed {dropped} of {n} rows");
    }
    Ok((
        DesignMatrix {
            names: features.iter().map(|f| f.name.clone()).collect(),
            x: DMatrix::from_fn(m, k, |i, j| cols[j][i]),
            log_transformed: features
                .iter()
                .filter(|f| f.transform != Transform::Identity)
                .map(|f| f.name.clone())
                .collect(),
            standardized,
            centers,
            scales,
            rows,
        },
        y,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listwise_and_standardization() {
        let a = Feature::new("a", vec![Some(1.0), Some(2.0), None, Some(4.0), Some(8.0)]);
        let b = Feature::new("b", vec![Some(0.0), Some(1.0), Some(1.0), Some(0.0), Some(1.0)]);
        let c = Feature::new("c", vec![Some(10.0), Some(0.0), Some(100.0), Some(1000.0), Some(10.0)]).transform(Transform::Log10);
        let y = vec![Some(0.1), Some(0.2), Some(0.3), Some(0.4), None];
        let (d, yy) = build_design(&[a, b, c], &y).unwrap();
        assert_eq!(d.rows, vec![0, 3]);
        assert_eq!(yy, vec![0.1, 0.4]);
        assert!(!d.standardized[1]);
        for j in [0, 2] {
            let col = d.x.column(j);
            let mean = col.sum() / 2.0;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt();
            assert!(mean.abs() < 1e-12 && (sd - 1.0).abs() < 1e-12);
        }
        assert!(d.log_transformed.contains("c"));
    }

    #[test]
    fn counts_use_log_plus_one() {
        let f = Feature::new("n", vec![Some(0.0), Some(9.0), Some(99.0)]).transform(Transform::Log10Plus1).raw();
        let (d, _) = build_design(&[f], &[Some(0.0), Some(1.0), Some(0.5)]).unwrap();
        assert_eq!(d.x.column(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
    }
}
