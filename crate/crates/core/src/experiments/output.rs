use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::campaign::{run_campaign, CampaignResult, RunOptions};
use super::config::ExperimentConfig;
use super::sample::SampleRecord;
use crate::error::{Error, Result};
use crate::scene::DebrisClass;
use crate::sensing::{write_alerts, FeatureVector};

pub const SAMPLE_HEADER: [&str; 12] = [
    "condition_id", "sample_idx", "label", "ber", "f_mean", "f_var", "f_max", "f_min", "f_skew", "det_value",
    "pred_label", "flags",
];

pub const METRICS_HEADER: [&str; 9] =
    ["condition_id", "frequency_hz", "mimo", "snr_db", "density", "mean_ber", "ber_ci95", "det_acc", "cls_acc"];

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_samples(path: &Path, records: &[SampleRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SAMPLE_HEADER)?;
    for r in records {
        let f = r.features.map(|f| f.to_array().map(num));
        let f = f.unwrap_or_else(|| std::array::from_fn(|_| String::new()));
        w.write_record([
            r.condition_id.clone(),
            r.sample_idx.to_string(),
            r.label.to_string(),
            num(r.ber),
            f[0].clone(),
            f[1].clone(),
            f[2].clone(),
            f[3].clone(),
            f[4].clone(),
            opt_num(r.det_value),
            r.pred_label.map(|l| l.to_string()).unwrap_or_default(),
            r.flags.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample CSV written by [`write_outputs`].
pub fn read_samples(path: &Path) -> Result<Vec<SampleRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != SAMPLE_HEADER {
        return Err(Error::Parse(format!("{}: unexpected sample header {header:?}", path.display())));
    }
    let parse_f = |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`"))) };
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let get = |i: usize| row.get(i).unwrap_or("");
        let features = if get(4).is_empty() {
            None
        } else {
            Some(FeatureVector::from_array([parse_f(get(4))?, parse_f(get(5))?, parse_f(get(6))?, parse_f(get(7))?, parse_f(get(8))?]))
        };
        out.push(SampleRecord {
            condition_id: get(0).to_string(),
            sample_idx: get(1).parse().map_err(|_| Error::Parse(format!("bad sample index `{}`", get(1))))?,
            label: get(2).parse()?,
            ber: parse_f(get(3))?,
            features,
            det_value: if get(9).is_empty() { None } else { Some(parse_f(get(9))?) },
            pred_label: if get(10).is_empty() { None } else { Some(get(10).parse()?) },
            flags: get(11).split(';').filter(|s| !s.is_empty()).map(str::to_string).collect(),
        });
    }
    Ok(out)
}

/// Reads every `*.csv` in `dir` (sorted by name), or a single file.
pub fn read_samples_dir(path: &Path) -> Result<Vec<SampleRecord>> {
    if path.is_file() {
        return read_samples(path);
    }
    let mut files: Vec<_> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        out.extend(read_samples(&f)?);
    }
    Ok(out)
}

struct Axis {
    name: &'static str,
}

const AXES: [Axis; 4] = [Axis { name: "frequency_hz" }, Axis { name: "snr_db" }, Axis { name: "mimo" }, Axis { name: "density" }];

fn axis_value(name: &str, f: f64, snr: f64, mimo: usize, density: Option<f64>) -> String {
    match name {
        "frequency_hz" => num(f),
        "snr_db" => num(snr),
        "mimo" => mimo.to_string(),
        _ => density.map(num).unwrap_or_else(|| "none".into()),
    }
}

fn varying_axes(result: &CampaignResult) -> Vec<&'static str> {
    let c = &result.config.campaign;
    let mut v = Vec::new();
    if c.frequencies_hz.len() > 1 {
        v.push("frequency_hz");
    }
    if c.snr_db.len() > 1 {
        v.push("snr_db");
    }
    if c.mimo_sizes.len() > 1 {
        v.push("mimo");
    }
    if c.densities_per_km3.len() > 1 {
        v.push("density");
    }
    if v.is_empty() {
        v.push("frequency_hz");
    }
    v
}

fn write_plots(dir: &Path, result: &CampaignResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let axes = varying_axes(result);
    for &x_axis in &axes {
        let others: Vec<&str> = AXES.iter().map(|a| a.name).filter(|a| *a != x_axis && axes.contains(a)).collect();
        let series = |prefix: String, f, snr, mimo, d| {
            let mut parts = vec![prefix];
            parts.extend(others.iter().map(|o| format!("{o}={}", axis_value(o, f, snr, mimo, d))));
            parts.retain(|p| !p.is_empty());
            parts.join(";")
        };

        let mut w = csv::Writer::from_path(dir.join(format!("ber_vs_{x_axis}.csv")))?;
        w.write_record(["x", "series", "value"])?;
        for c in &result.cells {
            let k = &c.cell;
            w.write_record([
                axis_value(x_axis, k.frequency_hz, k.snr_db, k.mimo, k.density_per_km3),
                series(format!("class={}", k.class), k.frequency_hz, k.snr_db, k.mimo, k.density_per_km3),
                num(c.mean_ber),
            ])?;
        }
        w.flush()?;

        for (metric, pick) in [("det_acc", 0usize), ("cls_acc", 1)] {
            let mut w = csv::Writer::from_path(dir.join(format!("{metric}_vs_{x_axis}.csv")))?;
            w.write_record(["x", "series", "value"])?;
            for g in &result.groups {
                let gg = &g.group;
                let value = if pick == 0 { g.summary.det_acc() } else { g.summary.cls_acc() };
                w.write_record([
                    axis_value(x_axis, gg.frequency_hz, gg.snr_db, gg.mimo, gg.density_per_km3),
                    series(String::new(), gg.frequency_hz, gg.snr_db, gg.mimo, gg.density_per_km3),
                    num(value),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Writes `samples/<cell>.csv`, `metrics.csv`, `groups.csv`,
/// `confusion.csv`, `plots/*.csv`, `alerts.jsonl` and the effective
/// `config.toml`.
pub fn write_outputs(result: &CampaignResult, out_dir: &Path) -> Result<()> {
    let samples = out_dir.join("samples");
    fs::create_dir_all(&samples)?;
    for c in &result.cells {
        write_samples(&samples.join(format!("{}.csv", c.cell.id())), &c.records)?;
    }

    let mut w = csv::Writer::from_path(out_dir.join("metrics.csv"))?;
    w.write_record(METRICS_HEADER)?;
    for c in &result.cells {
        let k = &c.cell;
        w.write_record([
            k.id(),
            num(k.frequency_hz),
            k.mimo.to_string(),
            num(k.snr_db),
            opt_num(k.density_per_km3),
            num(c.mean_ber),
            num(c.ber_ci95),
            num(c.det_acc),
            opt_num(c.cls_acc),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out_dir.join("groups.csv"))?;
    w.write_record([
        "group_id", "frequency_hz", "mimo", "snr_db", "density", "n_train", "n_test", "det_acc", "cls_acc",
        "det_model", "cls_model", "max_kkt_residual",
    ])?;
    for g in &result.groups {
        let gg = &g.group;
        let kind = |constant: bool| if constant { "constant" } else { "svm" }.to_string();
        w.write_record([
            gg.id(),
            num(gg.frequency_hz),
            gg.mimo.to_string(),
            num(gg.snr_db),
            opt_num(gg.density_per_km3),
            g.n_train.to_string(),
            g.n_test.to_string(),
            num(g.summary.det_acc()),
            num(g.summary.cls_acc()),
            kind(g.model.detection.is_constant()),
            kind(g.model.classification.is_constant()),
            opt_num(g.kkt_diagnostics().map(|d| d.0)),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out_dir.join("confusion.csv"))?;
    w.write_record(["group_id", "true_label", "pred_label", "count"])?;
    for g in &result.groups {
        for t in DebrisClass::ALL {
            for p in DebrisClass::ALL {
                let n = g.summary.confusion.get(&(t, p)).copied().unwrap_or(0);
                w.write_record([g.group.id(), t.to_string(), p.to_string(), n.to_string()])?;
            }
        }
    }
    w.flush()?;

    write_plots(&out_dir.join("plots"), result)?;
    write_alerts(BufWriter::new(File::create(out_dir.join("alerts.jsonl"))?), &result.alerts)?;
    let mut f = File::create(out_dir.join("config.toml"))?;
    writeln!(f, "# effective configuration, master seed {}", result.master_seed)?;
    f.write_all(result.config.to_toml_string()?.as_bytes())?;
    Ok(())
}

pub fn simulate_campaign(cfg: &ExperimentConfig, seed: u64, out_dir: &Path, opts: &RunOptions) -> Result<CampaignResult> {
    let result = run_campaign(cfg, seed, opts)?;
    write_outputs(&result, out_dir)?;
    Ok(result)
}

/// Runs one of the preset campaign grids and writes its outputs.
pub fn reproduce_table(which: u32, seed: u64, out_dir: &Path) -> Result<CampaignResult> {
    simulate_campaign(&ExperimentConfig::table(which)?, seed, out_dir, &RunOptions::default())
}
