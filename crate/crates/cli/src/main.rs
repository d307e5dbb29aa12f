//! Command-line surface: `gen` writes synthetic session datasets, `detect`
//! runs the engine over a dataset file and writes a classification report,
//! `experiment` reproduces one of the three experimental series.
//!
//! Reports embed the full effective configuration (flags plus defaults) as
//! `#` comment lines, and every written output is re-read before the process
//! exits 0.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _};
use clap::{Parser, Subcommand, ValueEnum};

use dca_core::{
    classify, compute_mcav_with, derive_weights, generate_session, io, run, ExperimentPlan,
    MappingCode, Params, SeriesId, SessionConfig,
};

#[derive(Parser)]
#[command(name = "dca", version, about = "Dendritic cell algorithm port-scan detector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Attack,
    Normal,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "UPPER")]
enum MappingArg {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
}

impl From<MappingArg> for MappingCode {
    fn from(m: MappingArg) -> MappingCode {
        match m {
            MappingArg::M1 => MappingCode::M1,
            MappingArg::M2 => MappingCode::M2,
            MappingArg::M3 => MappingCode::M3,
            MappingArg::M4 => MappingCode::M4,
            MappingArg::M5 => MappingCode::M5,
            MappingArg::M6 => MappingCode::M6,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic session dataset file.
    Gen {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Session length in seconds.
        #[arg(long, default_value_t = 70.0)]
        duration: f64,
        /// Addresses probed by the scan (attack sessions).
        #[arg(long, default_value_t = 1020)]
        targets: u32,
    },
    /// Run detection over a dataset file and write a per-process report.
    Detect {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "M1")]
        mapping: MappingArg,
        #[arg(long, default_value_t = 2.0)]
        w1: f64,
        #[arg(long, default_value_t = 2.0)]
        w2: f64,
        /// MCAV above this is labeled anomalous.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Population size (M).
        #[arg(long, default_value_t = 100)]
        cells: usize,
        /// Antigen capacity per cell (N).
        #[arg(long, default_value_t = 50)]
        dc_capacity: usize,
        /// Antigen sampled per cell per cycle (R).
        #[arg(long, default_value_t = 1)]
        receptors: usize,
        /// Tissue antigen store capacity (K).
        #[arg(long, default_value_t = 500)]
        tissue_capacity: usize,
        /// Drop flush-tagged records from the MCAV denominators.
        #[arg(long)]
        exclude_flushed: bool,
        /// Also dump the raw presentation log.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a corpus and run one experimental series, writing summary CSVs.
    Experiment {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        series: u8,
        #[arg(long)]
        base_seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

fn main() {
    if let Err(err) = dispatch(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen { scenario, seed, out, duration, targets } => {
            gen(scenario, seed, &out, duration, targets)
        }
        Command::Detect {
            dataset,
            seed,
            mapping,
            w1,
            w2,
            threshold,
            cells,
            dc_capacity,
            receptors,
            tissue_capacity,
            exclude_flushed,
            log,
            out,
        } => detect(DetectArgs {
            dataset,
            seed,
            mapping: mapping.into(),
            w1,
            w2,
            threshold,
            cells,
            dc_capacity,
            receptors,
            tissue_capacity,
            exclude_flushed,
            log,
            out,
        }),
        Command::Experiment { series, base_seed, out_dir, repeats } => {
            experiment(series, base_seed, &out_dir, repeats)
        }
    }
}

fn gen(
    scenario: ScenarioArg,
    seed: u64,
    out: &Path,
    duration: f64,
    targets: u32,
) -> anyhow::Result<()> {
    let config = match scenario {
        ScenarioArg::Attack => SessionConfig::attack_with(seed, duration, targets),
        ScenarioArg::Normal => SessionConfig::normal_with(seed, duration),
    };
    let dataset = generate_session(&config).context("generating session")?;
    io::save_dataset(out, &dataset).with_context(|| format!("writing {}", out.display()))?;
    // Written file must load back cleanly before we report success.
    io::load_dataset(out).context("validating written dataset")?;
    println!(
        "wrote {} ({} signal samples, {} antigen events)",
        out.display(),
        dataset.signal_records.len(),
        dataset.antigen_events.len()
    );
    Ok(())
}

struct DetectArgs {
    dataset: PathBuf,
    seed: u64,
    mapping: MappingCode,
    w1: f64,
    w2: f64,
    threshold: f64,
    cells: usize,
    dc_capacity: usize,
    receptors: usize,
    tissue_capacity: usize,
    exclude_flushed: bool,
    log: Option<PathBuf>,
    out: PathBuf,
}

fn detect(args: DetectArgs) -> anyhow::Result<()> {
    let dataset = io::load_dataset(&args.dataset)
        .with_context(|| format!("loading {}", args.dataset.display()))?;
    let params = Params {
        population_size: args.cells,
        dc_antigen_capacity: args.dc_capacity,
        antigen_receptors: args.receptors,
        tissue_antigen_capacity: args.tissue_capacity,
        rng_seed: args.seed,
        ..Params::default()
    };
    let weights = derive_weights(args.w1, args.w2).context("deriving weights")?;
    let log = run(&dataset, &params, &weights, args.mapping).context("running detection")?;
    let report = compute_mcav_with(&log, !args.exclude_flushed).context("aggregating")?;
    let result = classify(&report, args.threshold).context("classifying")?;

    let config = vec![
        ("dataset".to_string(), args.dataset.display().to_string()),
        ("scenario".to_string(), dataset.meta.scenario.label().to_string()),
        ("seed".to_string(), args.seed.to_string()),
        ("mapping".to_string(), args.mapping.label().to_string()),
        ("w1".to_string(), format!("{}", args.w1)),
        ("w2".to_string(), format!("{}", args.w2)),
        ("threshold".to_string(), format!("{}", args.threshold)),
        ("cells".to_string(), params.population_size.to_string()),
        ("dc_capacity".to_string(), params.dc_antigen_capacity.to_string()),
        ("receptors".to_string(), params.antigen_receptors.to_string()),
        ("tissue_capacity".to_string(), params.tissue_antigen_capacity.to_string()),
        ("max_cycles".to_string(), params.max_cycles.to_string()),
        (
            "migration_threshold".to_string(),
            format!(
                "{}±{}%",
                params.migration_threshold_center,
                params.migration_threshold_spread_fraction * 100.0
            ),
        ),
        ("exclude_flushed".to_string(), args.exclude_flushed.to_string()),
        ("cycles_executed".to_string(), log.meta.cycles_executed.to_string()),
        ("antigen_ingested".to_string(), log.meta.antigen_ingested.to_string()),
        ("antigen_dropped".to_string(), log.meta.antigen_dropped.to_string()),
        ("antigen_flushed".to_string(), log.meta.antigen_flushed.to_string()),
    ];
    let text = io::write_single_run_report(&config, &result)?;
    fs::write(&args.out, &text).with_context(|| format!("writing {}", args.out.display()))?;
    let written = fs::read_to_string(&args.out)?;
    if io::split_report(&written).1.lines().count() != result.len() + 1 {
        bail!("written report failed validation");
    }
    if let Some(log_path) = &args.log {
        fs::write(log_path, io::write_presentation_log(&log)?)
            .with_context(|| format!("writing {}", log_path.display()))?;
    }
    println!("wrote {} ({} antigen types)", args.out.display(), result.len());
    Ok(())
}

fn experiment(series: u8, base_seed: u64, out_dir: &Path, repeats: usize) -> anyhow::Result<()> {
    let series_id = match series {
        1 => SeriesId::S1,
        2 => SeriesId::S2,
        3 => SeriesId::S3,
        _ => bail!("series must be 1, 2 or 3"),
    };
    let mut plan = ExperimentPlan::new(series_id, base_seed);
    plan.repeats_per_dataset = repeats;
    let table = plan.execute().context("running series")?;

    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let config = vec![
        ("series".to_string(), series.to_string()),
        ("base_seed".to_string(), base_seed.to_string()),
        ("repeats".to_string(), repeats.to_string()),
        ("n_attack".to_string(), plan.n_attack.to_string()),
        ("n_normal".to_string(), plan.n_normal.to_string()),
    ];
    let path = out_dir.join(format!("series{series}.csv"));
    fs::write(&path, io::write_summary_report(&config, &table)?)
        .with_context(|| format!("writing {}", path.display()))?;
    let parsed = io::parse_summary_report(&fs::read_to_string(&path)?)?;
    if parsed.rows().len() != table.rows().len() {
        bail!("written summary failed validation");
    }
    println!(
        "wrote {} ({} conditions, {} rows)",
        path.display(),
        table.conditions().len(),
        table.rows().len()
    );
    Ok(())
}
