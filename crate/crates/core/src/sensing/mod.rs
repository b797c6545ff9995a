//! Onboard debris sensing: CSI statistics, standardization, SVMs trained by
//! SMO, and the detect-then-classify alert pipeline.

mod features;
mod pipeline;
mod standardize;
mod svm;

pub use features::{extract_features, features_from_csi, magnitude_features, FeatureMode, FeatureVector, FEATURE_NAMES};
pub use pipeline::{
    onboard_pipeline, read_alerts, write_alerts, AlertRecord, Classifier, Detector, PipelineModel,
    MODEL_FORMAT_VERSION,
};
pub use standardize::Standardizer;
pub use svm::{
    smo_solve, train_svm, BinaryModel, DecisionModel, Kernel, KernelChoice, Label, MulticlassSvm, PairMachine,
    SmoSolution, SvmModel, SvmParams,
};
