//! Simulation campaigns: condition grids, per-sample simulation, held-out
//! evaluation and result files.

mod campaign;
mod config;
mod eval;
mod interactions;
mod output;
mod sample;

pub use campaign::{
    class_counts, evaluate_records, find_group, group_accuracies, plan_campaign, run_campaign, CampaignPlan,
    CampaignResult, CellResult, Group, GroupResult, RunOptions,
};
pub use config::{
    CampaignSection, ChannelSection, ExperimentConfig, InteractionTable, InteractionsSection, LinkSection,
    MaterialsSection, SceneSection, SvmSection,
};
pub use eval::{evaluate_rows, fit_or_constant, predict, split_mask, train_models, EvalSummary, Prediction};
pub use interactions::{draw_interactions, ActiveInteraction};
pub use output::{read_samples, read_samples_dir, reproduce_table, simulate_campaign, write_outputs, METRICS_HEADER, SAMPLE_HEADER};
pub use sample::{
    simulate_sample, Cell, SampleOutcome, SampleRecord, FLAG_BK_NONCONVERGED, FLAG_PATH_SKIPPED, FLAG_RANK_DEFICIENT,
    FLAG_SAMPLE_ERROR, FLAG_TEST, FLAG_TRAIN,
};
