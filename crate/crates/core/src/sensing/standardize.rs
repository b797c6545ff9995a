use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column z-scoring fitted on training rows. Columns with no spread are
/// dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub n_inputs: usize,
    pub kept: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub dropped: Vec<usize>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Training(format!("need at least 2 rows to standardize, got {}", rows.len())));
        }
        let n_inputs = rows[0].len();
        if rows.iter().any(|r| r.len() != n_inputs) {
            return Err(Error::DimensionMismatch("ragged feature rows".into()));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Training("non-finite feature value".into()));
        }
        let n = rows.len() as f64;
        let (mut kept, mut mean, mut std, mut dropped) = (vec![], vec![], vec![], vec![]);
        for j in 0..n_inputs {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let v = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n;
            let s = v.sqrt();
            if s <= 1e-12 * m.abs().max(f64::MIN_POSITIVE) {
                log::warn!("dropping feature column {j}: zero variance on the training split");
                dropped.push(j);
                continue;
            }
            kept.push(j);
            mean.push(m);
            std.push(s);
        }
        Ok(Standardizer { n_inputs, kept, mean, std, dropped })
    }

    /// Identity transform over `n` columns.
    pub fn passthrough(n: usize) -> Self {
        Standardizer { n_inputs: n, kept: (0..n).collect(), mean: vec![0.0; n], std: vec![1.0; n], dropped: vec![] }
    }

    pub fn n_outputs(&self) -> usize {
        self.kept.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_inputs {
            return Err(Error::DimensionMismatch(format!("expected {} features, got {}", self.n_inputs, x.len())));
        }
        Ok(self.kept.iter().enumerate().map(|(k, &j)| (x[j] - self.mean[k]) / self.std[k]).collect())
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_unit_std() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, (i * i) as f64 * 0.1 - 3.0, 7.0]).collect();
        let s = Standardizer::fit(&rows).unwrap();
        assert_eq!(s.kept, vec![0, 1]);
        assert_eq!(s.dropped, vec![2]);
        let t = s.transform_all(&rows).unwrap();
        for j in 0..2 {
            let m = t.iter().map(|r| r[j]).sum::<f64>() / 50.0;
            let v = t.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / 50.0;
            assert!(m.abs() < 1e-10 && (v.sqrt() - 1.0).abs() < 1e-10);
        }
        let mean_row: Vec<f64> = (0..3).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / 50.0).collect();
        assert!(s.transform(&mean_row).unwrap().iter().all(|x| x.abs() < 1e-12));
        assert!(s.transform(&[1.0]).is_err());
    }
}
