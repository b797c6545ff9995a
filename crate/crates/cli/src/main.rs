use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use debrisense::experiments::{
    evaluate_rows, read_samples_dir, reproduce_table, simulate_campaign, train_models, ExperimentConfig, RunOptions,
    SampleRecord, FLAG_TEST, FLAG_TRAIN,
};
use debrisense::sensing::{KernelChoice, PipelineModel, SvmParams};

/// Debris sensing over simulated MIMO satellite links.
#[derive(Parser)]
#[command(name = "debrisense", version, about)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the preset campaigns (1: density sweep, 2: SNR sweep, 3: array sweep).
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=3))]
        table: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a campaign described by a TOML file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write the channel matrices of sample 0 of every cell here.
        #[arg(long)]
        export_channels: Option<PathBuf>,
    },
    /// Train a detection + classification model from sample CSVs.
    Train {
        /// A sample CSV or a directory of them.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
        kernel: KernelArg,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score a saved model on sample CSVs.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the configuration of a preset campaign as TOML.
    Defaults {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=3))]
        table: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

/// Rows flagged with `flag`, or every row when no row carries it.
fn subset<'a>(records: &'a [SampleRecord], flag: &str) -> Vec<&'a SampleRecord> {
    let flagged: Vec<_> = records.iter().filter(|r| r.has_flag(flag)).collect();
    if flagged.is_empty() {
        records.iter().collect()
    } else {
        flagged
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    match cli.command {
        Command::Reproduce { table, seed, out } => {
            let r = reproduce_table(table, seed, &out)?;
            println!("{} cells, {} groups written to {}", r.cells.len(), r.groups.len(), out.display());
            for g in &r.groups {
                println!("{}\tdet_acc={:.4}\tcls_acc={:.4}", g.group.id(), g.summary.det_acc(), g.summary.cls_acc());
            }
        }
        Command::Simulate { config, seed, out, export_channels } => {
            let cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            let r = simulate_campaign(&cfg, seed, &out, &RunOptions { export_channels })?;
            println!("{} cells, {} groups written to {}", r.cells.len(), r.groups.len(), out.display());
        }
        Command::Train { data, model, kernel, c, seed } => {
            let records = read_samples_dir(&data).with_context(|| format!("reading {}", data.display()))?;
            let params = SvmParams {
                kernel: match kernel {
                    KernelArg::Linear => KernelChoice::Linear,
                    KernelArg::Rbf => KernelChoice::Rbf { gamma: None },
                },
                c,
                seed,
                ..SvmParams::default()
            };
            params.validate()?;
            let rows = subset(&records, FLAG_TRAIN);
            let m = train_models(&rows, &params)?;
            m.save(&model)?;
            println!("trained on {} samples, model written to {}", rows.len(), model.display());
        }
        Command::Evaluate { data, model } => {
            let m = PipelineModel::load(&model).with_context(|| format!("loading {}", model.display()))?;
            let records = read_samples_dir(&data).with_context(|| format!("reading {}", data.display()))?;
            let rows = subset(&records, FLAG_TEST);
            let s = evaluate_rows(&m, &rows)?;
            println!("samples\t{}", s.n);
            println!("det_acc\t{}", s.det_acc());
            println!("cls_acc\t{}", s.cls_acc());
            for ((t, p), n) in &s.confusion {
                println!("confusion\t{t}\t{p}\t{n}");
            }
        }
        Command::Defaults { table } => print!("{}", ExperimentConfig::table(table)?.to_toml_string()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.downcast_ref::<debrisense::Error>().is_some_and(|e| e.is_config_error());
            ExitCode::from(if config { 2 } else { 3 })
        }
    }
}
