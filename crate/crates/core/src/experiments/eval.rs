use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::sample::SampleRecord;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scene::DebrisClass;
use crate::sensing::{
    train_svm, Classifier, DecisionModel, Detector, FeatureVector, Label, PipelineModel, Standardizer, SvmModel,
    SvmParams,
};

/// Marks `round(frac·n)` of `n` rows for training (at least one row on each
/// side), chosen by a seeded shuffle.
pub fn split_mask(n: usize, frac: f64, seed: u64, what: &str) -> Result<Vec<bool>> {
    if n < 2 {
        return Err(Error::DegenerateSplit(format!("{what}: {n} usable samples, need at least 2")));
    }
    let n_train = ((frac * n as f64).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    let mut mask = vec![false; n];
    for &i in &idx[..n_train] {
        mask[i] = true;
    }
    Ok(mask)
}

fn majority<L: Label>(labels: &[L]) -> Option<L> {
    let mut counts: Vec<(L, usize)> = Vec::new();
    for l in labels {
        match counts.iter_mut().find(|(k, _)| k == l) {
            Some(c) => c.1 += 1,
            None => counts.push((*l, 1)),
        }
    }
    counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.rank().cmp(&a.0.rank()))).map(|c| c.0)
}

/// Trains an SVM, or falls back to predicting the majority label when the
/// training rows hold a single class or carry no usable feature.
pub fn fit_or_constant<L: Label>(rows: &[Vec<f64>], labels: &[L], params: &SvmParams) -> Result<SvmModel<L>> {
    let n_inputs = rows.first().map_or(5, |r| r.len());
    let constant = |why: &str| -> Result<SvmModel<L>> {
        let l = majority(labels).ok_or_else(|| Error::Training("no training rows".into()))?;
        log::warn!("falling back to a constant {l:?} predictor: {why}");
        Ok(SvmModel { scaler: Standardizer::passthrough(n_inputs), model: DecisionModel::Constant(l) })
    };
    let distinct = labels.iter().enumerate().any(|(i, l)| labels[..i].iter().any(|k| k != l));
    if !distinct {
        return constant("single class in training data");
    }
    match train_svm(rows, labels, params) {
        Ok(m) => Ok(m),
        Err(Error::Training(why)) => constant(&why),
        Err(e) => Err(e),
    }
}

/// Detection on all rows (no debris vs any debris), classification on the
/// debris rows only.
pub fn train_models(train: &[&SampleRecord], params: &SvmParams) -> Result<PipelineModel> {
    let usable: Vec<(&SampleRecord, FeatureVector)> =
        train.iter().filter_map(|r| r.features.map(|f| (*r, f))).collect();
    let rows: Vec<Vec<f64>> = usable.iter().map(|(_, f)| f.to_array().to_vec()).collect();
    let det_labels: Vec<bool> = usable.iter().map(|(r, _)| r.label.is_debris()).collect();
    let detection = fit_or_constant(&rows, &det_labels, params)?;

    let (cls_rows, cls_labels): (Vec<Vec<f64>>, Vec<DebrisClass>) = usable
        .iter()
        .filter(|(r, _)| r.label.is_debris())
        .map(|(r, f)| (f.to_array().to_vec(), r.label))
        .unzip();
    let classification = if cls_rows.is_empty() {
        SvmModel { scaler: Standardizer::passthrough(5), model: DecisionModel::Constant(DebrisClass::SmoothGlass) }
    } else {
        fit_or_constant(&cls_rows, &cls_labels, params)?
    };
    Ok(PipelineModel::new(detection, classification))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub detected: bool,
    pub det_value: f64,
    /// Classifier output regardless of the detection outcome.
    pub class: DebrisClass,
    pub class_values: Vec<f64>,
}

impl Prediction {
    /// Label reported by the detect-then-classify pipeline.
    pub fn pipeline_label(&self) -> DebrisClass {
        if self.detected {
            self.class
        } else {
            DebrisClass::None
        }
    }
}

pub fn predict(model: &PipelineModel, fv: &FeatureVector) -> Result<Prediction> {
    let (detected, det_value) = model.detection.detect(fv)?;
    let (class, class_values) = model.classification.classify(fv)?;
    Ok(Prediction { detected, det_value, class, class_values })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub n: usize,
    pub det_correct: usize,
    pub cls_n: usize,
    pub cls_correct: usize,
    /// (true label, pipeline label) → count.
    pub confusion: BTreeMap<(DebrisClass, DebrisClass), usize>,
}

impl EvalSummary {
    pub fn det_acc(&self) -> f64 {
        self.det_correct as f64 / self.n as f64
    }

    pub fn cls_acc(&self) -> f64 {
        self.cls_correct as f64 / self.cls_n as f64
    }

    pub fn record(&mut self, label: DebrisClass, p: &Prediction) {
        self.n += 1;
        if p.detected == label.is_debris() {
            self.det_correct += 1;
        }
        if label.is_debris() {
            self.cls_n += 1;
            if p.class == label {
                self.cls_correct += 1;
            }
        }
        *self.confusion.entry((label, p.pipeline_label())).or_insert(0) += 1;
    }
}

pub fn evaluate_rows(model: &PipelineModel, rows: &[&SampleRecord]) -> Result<EvalSummary> {
    let mut s = EvalSummary::default();
    for r in rows {
        if let Some(f) = &r.features {
            s.record(r.label, &predict(model, f)?);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(label: DebrisClass, x: f64) -> SampleRecord {
        SampleRecord {
            condition_id: "c".into(),
            sample_idx: 0,
            label,
            ber: 0.0,
            features: Some(FeatureVector { mean: x, variance: x * x, max: x + 1.0, min: x - 1.0, skewness: 0.0 }),
            det_value: None,
            pred_label: None,
            flags: vec![],
        }
    }

    #[test]
    fn split_sizes() {
        let m = split_mask(67, 0.7, 3, "x").unwrap();
        assert_eq!(m.iter().filter(|b| **b).count(), 47);
        let m = split_mask(2, 0.7, 3, "x").unwrap();
        assert_eq!(m.iter().filter(|b| **b).count(), 1);
        assert!(matches!(split_mask(1, 0.7, 3, "RoughMetal"), Err(Error::DegenerateSplit(m)) if m.contains("RoughMetal")));
        assert_eq!(split_mask(30, 0.7, 9, "x").unwrap(), split_mask(30, 0.7, 9, "x").unwrap());
    }

    #[test]
    fn identical_rows_give_trivial_majority() {
        let rows: Vec<SampleRecord> = (0..10).map(|_| rec(DebrisClass::None, 1.0)).collect();
        let refs: Vec<&SampleRecord> = rows.iter().collect();
        let model = train_models(&refs, &SvmParams::default()).unwrap();
        assert!(model.detection.is_constant());
        let s = evaluate_rows(&model, &refs).unwrap();
        assert_eq!(s.det_acc(), 1.0);
    }

    #[test]
    fn confusion_trace_matches_accuracy() {
        let mut rows = Vec::new();
        for i in 0..30 {
            let class = DebrisClass::ALL[i % 3];
            rows.push(rec(class, class.index() as f64 * 10.0 + (i as f64) * 0.01));
        }
        let refs: Vec<&SampleRecord> = rows.iter().collect();
        let model = train_models(&refs, &SvmParams::default()).unwrap();
        let s = evaluate_rows(&model, &refs).unwrap();
        assert_eq!(s.det_acc(), 1.0);
        assert_eq!(s.cls_acc(), 1.0);
        let trace: usize = s.confusion.iter().filter(|((a, b), _)| a == b).map(|(_, c)| c).sum();
        assert_eq!(trace, 30);
        let total: usize = s.confusion.values().sum();
        assert_eq!(total, s.n);
    }
}
