use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

use super::features::{features_from_csi, FeatureMode, FeatureVector};
use super::svm::SvmModel;
use crate::error::{Error, Result};
use crate::link::CsiEstimate;
use crate::scene::DebrisClass;

pub trait Detector {
    /// Returns (debris present, decision value).
    fn detect(&self, features: &FeatureVector) -> Result<(bool, f64)>;
}

pub trait Classifier {
    fn classify(&self, features: &FeatureVector) -> Result<(DebrisClass, Vec<f64>)>;
}

impl Detector for SvmModel<bool> {
    fn detect(&self, features: &FeatureVector) -> Result<(bool, f64)> {
        let (present, values) = self.predict(&features.to_array())?;
        let value = values.first().copied().unwrap_or(if present { 1.0 } else { -1.0 });
        Ok((present, value))
    }
}

impl Classifier for SvmModel<DebrisClass> {
    fn classify(&self, features: &FeatureVector) -> Result<(DebrisClass, Vec<f64>)> {
        self.predict(&features.to_array())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlertRecord {
    pub timestamp_s: f64,
    pub detection_value: f64,
    pub class: DebrisClass,
    pub class_decision_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_idx: Option<usize>,
}

/// Extract → detect → classify; `None` when nothing is detected.
pub fn onboard_pipeline<D: Detector + ?Sized, C: Classifier + ?Sized>(
    csi: &[CsiEstimate],
    mode: FeatureMode,
    detector: &D,
    classifier: &C,
    timestamp_s: f64,
) -> Result<Option<AlertRecord>> {
    let features = features_from_csi(csi, mode)?;
    let (present, detection_value) = detector.detect(&features)?;
    if !present {
        return Ok(None);
    }
    let (class, class_decision_values) = classifier.classify(&features)?;
    Ok(Some(AlertRecord { timestamp_s, detection_value, class, class_decision_values, condition_id: None, sample_idx: None }))
}

/// One JSON object per line.
pub fn write_alerts<W: Write>(mut w: W, alerts: &[AlertRecord]) -> Result<()> {
    for a in alerts {
        serde_json::to_writer(&mut w, a).map_err(|e| Error::Parse(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_alerts<R: BufRead>(r: R) -> Result<Vec<AlertRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse(e.to_string()))?);
    }
    Ok(out)
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Detection and classification models stored together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub format_version: u32,
    pub detection: SvmModel<bool>,
    pub classification: SvmModel<DebrisClass>,
}

impl PipelineModel {
    pub fn new(detection: SvmModel<bool>, classification: SvmModel<DebrisClass>) -> Self {
        PipelineModel { format_version: MODEL_FORMAT_VERSION, detection, classification }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: PipelineModel = serde_json::from_str(s).map_err(|e| Error::Parse(format!("model file: {e}")))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
