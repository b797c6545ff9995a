use debrisense::experiments::{
    read_samples, read_samples_dir, run_campaign, write_outputs, ExperimentConfig, RunOptions, METRICS_HEADER,
    SAMPLE_HEADER,
};
use debrisense::sensing::{read_alerts, PipelineModel};

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::table(1).unwrap();
    cfg.campaign.frequencies_hz = vec![30e9, 5e12];
    cfg.campaign.densities_per_km3 = vec![1e-6];
    cfg.campaign.samples_per_condition = 18;
    cfg
}

#[test]
fn written_samples_read_back_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let result = run_campaign(&small(), 3, &RunOptions::default()).unwrap();
    write_outputs(&result, tmp.path()).unwrap();

    for cell in &result.cells {
        let path = tmp.path().join("samples").join(format!("{}.csv", cell.cell.id()));
        let back = read_samples(&path).unwrap();
        assert_eq!(back.len(), cell.records.len());
        for (a, b) in back.iter().zip(&cell.records) {
            assert_eq!(a.condition_id, b.condition_id);
            assert_eq!(a.label, b.label);
            assert_eq!(a.flags, b.flags);
            assert_eq!(a.features, b.features);
            assert_eq!(a.det_value, b.det_value);
            assert_eq!(a.pred_label, b.pred_label);
            assert!(a.ber == b.ber || (a.ber.is_nan() && b.ber.is_nan()));
        }
    }
    let all = read_samples_dir(&tmp.path().join("samples")).unwrap();
    assert_eq!(all.len(), result.cells.iter().map(|c| c.records.len()).sum::<usize>());
}

#[test]
fn tables_have_expected_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let result = run_campaign(&small(), 5, &RunOptions::default()).unwrap();
    write_outputs(&result, tmp.path()).unwrap();

    let metrics = std::fs::read_to_string(tmp.path().join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(lines.next().unwrap(), METRICS_HEADER.join(","));
    assert_eq!(lines.count(), result.cells.len());

    let first = std::fs::read_dir(tmp.path().join("samples")).unwrap().next().unwrap().unwrap().path();
    let header = std::fs::read_to_string(first).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, SAMPLE_HEADER.join(","));

    for plot in ["ber_vs_frequency_hz.csv", "det_acc_vs_frequency_hz.csv", "cls_acc_vs_frequency_hz.csv"] {
        let text = std::fs::read_to_string(tmp.path().join("plots").join(plot)).unwrap();
        assert!(text.starts_with("x,series,value\n"), "{plot}");
    }

    let alerts = read_alerts(std::io::BufReader::new(std::fs::File::open(tmp.path().join("alerts.jsonl")).unwrap())).unwrap();
    assert_eq!(alerts.len(), result.alerts.len());

    let model = &result.groups[0].model;
    let back = PipelineModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(&back, model);
}

#[test]
fn exported_channels_match_sample_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.campaign.frequencies_hz = vec![3e12];
    let opts = RunOptions { export_channels: Some(tmp.path().to_path_buf()) };
    let result = run_campaign(&cfg, 2, &opts).unwrap();
    let n = cfg.campaign.mimo_sizes[0];
    for cell in &result.cells {
        let path = tmp.path().join(format!("{}_s0.bin", cell.cell.id()));
        let mats = debrisense::mimo::read_exported_channels(&path, n, n).unwrap();
        assert_eq!(mats.len(), cfg.channel.n_subbands);
    }
}
