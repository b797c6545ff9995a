use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::PathBuf;

use super::config::ExperimentConfig;
use super::eval::{evaluate_rows, predict, split_mask, train_models, EvalSummary};
use super::sample::{simulate_sample, Cell, SampleRecord, FLAG_SAMPLE_ERROR, FLAG_TEST, FLAG_TRAIN};
use crate::error::{Error, Result};
use crate::mimo::export_channels;
use crate::rng::{derive_seed, stream};
use crate::scene::DebrisClass;
use crate::sensing::{AlertRecord, DecisionModel, PipelineModel};

/// Cells evaluated together: the no-debris cell plus the debris cells at one
/// density, sharing frequency, SNR and array size.
#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    pub frequency_hz: f64,
    pub snr_db: f64,
    pub mimo: usize,
    pub density_per_km3: Option<f64>,
    pub cells: Vec<usize>,
}

impl Group {
    pub fn id(&self) -> String {
        let mut s = format!("f{:e}_snr{}_m{}", self.frequency_hz, self.snr_db, self.mimo);
        if let Some(d) = self.density_per_km3 {
            s.push_str(&format!("_d{d:e}"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignPlan {
    pub cells: Vec<Cell>,
    pub samples_per_cell: Vec<usize>,
    pub groups: Vec<Group>,
}

/// Floor/ceil partition of `n` over `k` classes, earlier classes first.
pub fn class_counts(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

pub fn plan_campaign(cfg: &ExperimentConfig) -> CampaignPlan {
    let c = &cfg.campaign;
    let counts = class_counts(c.samples_per_condition, c.classes.len());
    let has_debris = c.classes.iter().any(|k| k.is_debris());
    let densities: Vec<Option<f64>> =
        if has_debris { c.densities_per_km3.iter().map(|d| Some(*d)).collect() } else { vec![None] };
    let mut cells = Vec::new();
    let mut samples_per_cell = Vec::new();
    let mut groups = Vec::new();
    for &f in &c.frequencies_hz {
        for &snr in &c.snr_db {
            for &mimo in &c.mimo_sizes {
                let base = Cell { frequency_hz: f, snr_db: snr, mimo, class: DebrisClass::None, density_per_km3: None };
                let mut none_idx = None;
                let mut debris_idx: Vec<(usize, Option<f64>)> = Vec::new();
                for (k, &class) in c.classes.iter().enumerate() {
                    if class.is_debris() {
                        for &d in &densities {
                            debris_idx.push((cells.len(), d));
                            cells.push(Cell { class, density_per_km3: d, ..base });
                            samples_per_cell.push(counts[k]);
                        }
                    } else {
                        none_idx = Some(cells.len());
                        cells.push(base);
                        samples_per_cell.push(counts[k]);
                    }
                }
                for &d in &densities {
                    let mut members: Vec<usize> = none_idx.into_iter().collect();
                    members.extend(debris_idx.iter().filter(|(_, dd)| *dd == d).map(|(i, _)| *i));
                    groups.push(Group { frequency_hz: f, snr_db: snr, mimo, density_per_km3: d, cells: members });
                }
            }
        }
    }
    CampaignPlan { cells, samples_per_cell, groups }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Writes the channel snapshots of sample 0 of every cell here.
    pub export_channels: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: Cell,
    pub records: Vec<SampleRecord>,
    pub mean_ber: f64,
    pub ber_ci95: f64,
    pub det_acc: f64,
    pub cls_acc: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct GroupResult {
    pub group: Group,
    pub n_train: usize,
    pub n_test: usize,
    pub summary: EvalSummary,
    pub model: PipelineModel,
}

impl GroupResult {
    /// Largest KKT residual and |Σ α y| over the binary machines of both
    /// models; `None` when both models are constant.
    pub fn kkt_diagnostics(&self) -> Option<(f64, f64)> {
        let mut machines = Vec::new();
        if let DecisionModel::Trained(m) = &self.model.detection.model {
            machines.extend(m.machines.iter().map(|p| &p.model));
        }
        if let DecisionModel::Trained(m) = &self.model.classification.model {
            machines.extend(m.machines.iter().map(|p| &p.model));
        }
        if machines.is_empty() {
            return None;
        }
        let kkt = machines.iter().map(|m| m.kkt_residual).fold(0.0, f64::max);
        let sum = machines.iter().map(|m| m.dual_sum.abs()).fold(0.0, f64::max);
        Some((kkt, sum))
    }
}

#[derive(Clone, Debug)]
pub struct CampaignResult {
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub cells: Vec<CellResult>,
    pub groups: Vec<GroupResult>,
    pub alerts: Vec<AlertRecord>,
}

/// (cell index, record index, prediction).
type CellPrediction = (usize, usize, super::eval::Prediction);

fn ber_stats(records: &[SampleRecord]) -> (f64, f64) {
    let v: Vec<f64> = records.iter().filter(|r| r.ber.is_finite()).map(|r| r.ber).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * var.sqrt() / n.sqrt())
}

pub fn run_campaign(cfg: &ExperimentConfig, master_seed: u64, opts: &RunOptions) -> Result<CampaignResult> {
    cfg.validate()?;
    let plan = plan_campaign(cfg);
    if let Some(dir) = &opts.export_channels {
        std::fs::create_dir_all(dir)?;
    }

    let tasks: Vec<(usize, usize)> = plan
        .samples_per_cell
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| (0..n).map(move |s| (c, s)))
        .collect();
    let simulated: Vec<SampleRecord> = tasks
        .par_iter()
        .map(|&(c, s)| {
            let cell = &plan.cells[c];
            match simulate_sample(cfg, cell, s, master_seed) {
                Ok(out) => {
                    if let (Some(dir), 0) = (&opts.export_channels, s) {
                        export_channels(&dir.join(format!("{}_s0.bin", cell.id())), &out.channels)?;
                    }
                    Ok(out.record)
                }
                Err(e) if e.is_config_error() => Err(e),
                Err(e) => {
                    log::warn!("{} sample {s} failed: {e}", cell.id());
                    Ok(SampleRecord {
                        condition_id: cell.id(),
                        sample_idx: s,
                        label: cell.label(),
                        ber: f64::NAN,
                        features: None,
                        det_value: None,
                        pred_label: None,
                        flags: vec![FLAG_SAMPLE_ERROR.to_string()],
                    })
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut per_cell: Vec<Vec<SampleRecord>> = plan.samples_per_cell.iter().map(|n| Vec::with_capacity(*n)).collect();
    for (rec, &(c, _)) in simulated.into_iter().zip(&tasks) {
        per_cell[c].push(rec);
    }

    // split each cell once so a cell shared by several groups keeps one split
    for (c, recs) in per_cell.iter_mut().enumerate() {
        let cell = &plan.cells[c];
        let usable: Vec<usize> = (0..recs.len()).filter(|&i| recs[i].features.is_some()).collect();
        let seed = derive_seed(master_seed, &[stream::SPLIT, cell.class.index()]);
        let mask = split_mask(usable.len(), cfg.svm.train_fraction, seed, &cell.id())?;
        for (&i, &train) in usable.iter().zip(&mask) {
            recs[i].add_flag(if train { FLAG_TRAIN } else { FLAG_TEST });
        }
    }

    let group_results: Vec<(GroupResult, Vec<CellPrediction>)> = plan
        .groups
        .par_iter()
        .map(|g| {
            let members: Vec<&SampleRecord> = g.cells.iter().flat_map(|&c| per_cell[c].iter()).collect();
            let train: Vec<&SampleRecord> = members.iter().copied().filter(|r| r.has_flag(FLAG_TRAIN)).collect();
            let params = cfg.svm.params(derive_seed(master_seed, &[stream::SMO]));
            let model = train_models(&train, &params)?;
            let mut preds = Vec::new();
            let mut summary = EvalSummary::default();
            for &c in &g.cells {
                for (i, r) in per_cell[c].iter().enumerate() {
                    if let (true, Some(f)) = (r.has_flag(FLAG_TEST), &r.features) {
                        let p = predict(&model, f)?;
                        summary.record(r.label, &p);
                        preds.push((c, i, p));
                    }
                }
            }
            let n_test = summary.n;
            Ok((GroupResult { group: g.clone(), n_train: train.len(), n_test, summary, model }, preds))
        })
        .collect::<Result<_>>()?;

    // per-cell accuracies pool every group the cell takes part in; the
    // sample files report the first group's predictions
    let mut det_counts = vec![(0usize, 0usize); plan.cells.len()];
    let mut cls_counts = vec![(0usize, 0usize); plan.cells.len()];
    let mut filled = vec![false; plan.cells.len()];
    let mut alerts = Vec::new();
    let mut groups = Vec::with_capacity(group_results.len());
    for (gr, preds) in group_results {
        let mut touched = Vec::new();
        for (c, i, p) in preds {
            let label = per_cell[c][i].label;
            det_counts[c].1 += 1;
            det_counts[c].0 += usize::from(p.detected == label.is_debris());
            if label.is_debris() {
                cls_counts[c].1 += 1;
                cls_counts[c].0 += usize::from(p.class == label);
            }
            if !filled[c] {
                let r = &mut per_cell[c][i];
                r.det_value = Some(p.det_value);
                r.pred_label = Some(p.pipeline_label());
                if p.detected {
                    alerts.push(AlertRecord {
                        timestamp_s: r.sample_idx as f64,
                        detection_value: p.det_value,
                        class: p.class,
                        class_decision_values: p.class_values.clone(),
                        condition_id: Some(r.condition_id.clone()),
                        sample_idx: Some(r.sample_idx),
                    });
                }
                touched.push(c);
            }
        }
        for c in touched {
            filled[c] = true;
        }
        groups.push(gr);
    }

    let cells = plan
        .cells
        .iter()
        .zip(per_cell)
        .enumerate()
        .map(|(c, (cell, records))| {
            let (mean_ber, ber_ci95) = ber_stats(&records);
            let (dc, dn) = det_counts[c];
            let (cc, cn) = cls_counts[c];
            CellResult {
                cell: *cell,
                records,
                mean_ber,
                ber_ci95,
                det_acc: if dn > 0 { dc as f64 / dn as f64 } else { f64::NAN },
                cls_acc: if cn > 0 { Some(cc as f64 / cn as f64) } else { None },
            }
        })
        .collect();

    Ok(CampaignResult { config: cfg.clone(), master_seed, cells, groups, alerts })
}

/// Re-evaluates stored records with a trained model.
pub fn evaluate_records(model: &PipelineModel, records: &[SampleRecord]) -> Result<EvalSummary> {
    let refs: Vec<&SampleRecord> = records.iter().collect();
    evaluate_rows(model, &refs)
}

/// Accuracy summary keyed by group id, for reports and tests.
pub fn group_accuracies(result: &CampaignResult) -> BTreeMap<String, (f64, f64)> {
    result.groups.iter().map(|g| (g.group.id(), (g.summary.det_acc(), g.summary.cls_acc()))).collect()
}

pub fn find_group(
    result: &CampaignResult,
    frequency_hz: f64,
    snr_db: f64,
    mimo: usize,
    density: Option<f64>,
) -> Result<&GroupResult> {
    result
        .groups
        .iter()
        .find(|g| {
            g.group.frequency_hz == frequency_hz
                && g.group.snr_db == snr_db
                && g.group.mimo == mimo
                && g.group.density_per_km3 == density
        })
        .ok_or_else(|| Error::InvalidArgument(format!("no group at f={frequency_hz:e}, snr={snr_db}, mimo={mimo}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_grids() {
        let p = plan_campaign(&ExperimentConfig::table(1).unwrap());
        assert_eq!(p.cells.len(), 28);
        assert_eq!(p.groups.len(), 12);
        assert!(p.groups.iter().all(|g| g.cells.len() == 3));
        let p2 = plan_campaign(&ExperimentConfig::table(2).unwrap());
        assert_eq!(p2.cells.len(), 36);
        let p3 = plan_campaign(&ExperimentConfig::table(3).unwrap());
        assert_eq!(p3.cells.len(), 36);
        assert_eq!(class_counts(200, 3), vec![67, 67, 66]);
        for g in &p.groups {
            let total: usize = g.cells.iter().map(|&c| p.samples_per_cell[c]).sum();
            assert_eq!(total, 200);
        }
    }
}
