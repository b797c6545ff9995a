use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::CsiEstimate;

pub const FEATURE_NAMES: [&str; 5] = ["mean", "var", "max", "min", "skew"];

/// Statistics of the CSI magnitude set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mean: f64,
    pub variance: f64,
    pub max: f64,
    pub min: f64,
    pub skewness: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; 5] {
        [self.mean, self.variance, self.max, self.min, self.skewness]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        FeatureVector { mean: a[0], variance: a[1], max: a[2], min: a[3], skewness: a[4] }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// Population moments of `mags`; skewness of a constant set is 0.
pub fn magnitude_features(mags: &[f64]) -> Result<FeatureVector> {
    if mags.is_empty() {
        return Err(Error::InvalidArgument("no CSI entries to summarise".into()));
    }
    let n = mags.len() as f64;
    let mean = mags.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for &x in mags {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        max = max.max(x);
        min = min.min(x);
    }
    m2 /= n;
    m3 /= n;
    let scale = mean.abs().max(max.abs());
    let skewness = if m2 <= (1e-12 * scale).powi(2) { 0.0 } else { m3 / m2.powf(1.5) };
    let fv = FeatureVector { mean, variance: m2, max, min, skewness };
    if !fv.is_finite() {
        return Err(Error::InvalidArgument("non-finite CSI magnitude".into()));
    }
    Ok(fv)
}

pub fn extract_features<'a, I>(entries: I) -> Result<FeatureVector>
where
    I: IntoIterator<Item = &'a Complex64>,
{
    let mags: Vec<f64> = entries.into_iter().map(|z| (z.re * z.re + z.im * z.im).sqrt()).collect();
    magnitude_features(&mags)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Statistics over all sub-band estimates stacked together.
    #[default]
    Pooled,
    /// Per-sub-band statistics averaged feature-wise.
    SubbandAverage,
}

pub fn features_from_csi(csi: &[CsiEstimate], mode: FeatureMode) -> Result<FeatureVector> {
    if csi.is_empty() {
        return Err(Error::InvalidArgument("no CSI estimates".into()));
    }
    match mode {
        FeatureMode::Pooled => extract_features(csi.iter().flat_map(|c| c.matrix.iter())),
        FeatureMode::SubbandAverage => {
            let mut acc = [0.0; 5];
            for c in csi {
                let f = extract_features(c.matrix.iter())?.to_array();
                for (a, v) in acc.iter_mut().zip(f) {
                    *a += v;
                }
            }
            Ok(FeatureVector::from_array(acc.map(|a| a / csi.len() as f64)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_entries() {
        let z = vec![Complex64::new(3.0, 4.0); 6];
        let f = extract_features(&z).unwrap();
        assert_eq!(f, FeatureVector { mean: 5.0, variance: 0.0, max: 5.0, min: 5.0, skewness: 0.0 });
    }

    #[test]
    fn symmetric_and_skewed_sets() {
        let f = magnitude_features(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((f.mean, f.variance, f.max, f.min), (2.5, 1.25, 4.0, 1.0));
        assert!(f.skewness.abs() < 1e-15);
        let f = magnitude_features(&[1.0, 1.0, 4.0]).unwrap();
        assert_eq!(f.mean, 2.0);
        assert!((f.variance - 2.0).abs() < 1e-15);
        assert!((f.skewness - 2.0 / 2f64.powf(1.5)).abs() < 1e-12);
        assert!((f.skewness - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
    }

    #[test]
    fn empty_is_error() {
        assert!(magnitude_features(&[]).is_err());
    }
}
