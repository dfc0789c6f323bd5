use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use intersim::batch::{run_batch, run_table, BatchOptions, BatchSpec};
use intersim::config::load_config;
use intersim::output::{plot_svg, table_report, write_stats, write_summary, write_trace_csv, write_trace_jsonl};
use intersim::replay::{load_trace, replay};
use intersim_core::{Case, SimConfig};

#[derive(Parser)]
#[command(name = "intersim", version, about = "Game-theoretic vehicles at an unsignalized four-way intersection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo batch of one case.
    Run {
        /// 1, 2, 3, 4, or a primed variant such as 2'.
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 100)]
        runs: u64,
        #[arg(long, env = "INTERSIM_SEED", default_value_t = 42)]
        seed: u64,
        /// TOML file overriding configuration defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write one trace per run into this directory (CSV and JSONL).
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Write per-run summaries and statistics into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also draw each traced run as SVG.
        #[arg(long, requires = "traces")]
        plot: bool,
        /// Run on a single thread.
        #[arg(long)]
        serial: bool,
    },
    /// Check a recorded trace against the geometry and a fresh run.
    Replay {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run all eight cases and print the results table.
    Table {
        #[arg(long, env = "INTERSIM_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write stats.csv into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        serial: bool,
    },
}

fn config_from(path: Option<&Path>) -> Result<SimConfig> {
    match path {
        Some(p) => load_config(p),
        None => Ok(SimConfig::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn file_stem(case: Case, run: u64) -> String {
    let name = case.name().replace('\'', "p");
    format!("case{name}_run{run:05}")
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    case: &str,
    runs: u64,
    seed: u64,
    config: Option<&Path>,
    traces: Option<&Path>,
    out: Option<&Path>,
    plot: bool,
    serial: bool,
) -> Result<()> {
    let case = Case::parse(case)?;
    let config = config_from(config)?;
    let spec = BatchSpec {
        case,
        runs,
        master_seed: seed,
        config: config.clone(),
    };
    let batch = run_batch(
        &spec,
        BatchOptions {
            record_traces: traces.is_some(),
            parallel: !serial,
        },
    )?;
    if let Some(dir) = traces {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for r in &batch.results {
            let stem = file_stem(case, r.run_index);
            let mut w = create(&dir.join(format!("{stem}.csv")))?;
            write_trace_csv(&mut w, r, seed, &config)?;
            w.flush()?;
            let mut w = create(&dir.join(format!("{stem}.jsonl")))?;
            write_trace_jsonl(&mut w, r, seed)?;
            w.flush()?;
            if plot {
                fs::write(dir.join(format!("{stem}.svg")), plot_svg(r, &config))?;
            }
        }
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let mut w = create(&dir.join("summary.csv"))?;
        write_summary(&mut w, &batch.results)?;
        w.flush()?;
        let mut w = create(&dir.join("stats.csv"))?;
        write_stats(&mut w, std::slice::from_ref(&batch))?;
        w.flush()?;
    }
    print!("{}", table_report(std::slice::from_ref(&batch), config.cost.dt));
    Ok(())
}

fn cmd_table(seed: u64, runs: u64, config: Option<&Path>, out: Option<&Path>, serial: bool) -> Result<()> {
    let config = config_from(config)?;
    let batches = run_table(seed, runs, &config, !serial)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let mut w = create(&dir.join("stats.csv"))?;
        write_stats(&mut w, &batches)?;
        w.flush()?;
    }
    print!("{}", table_report(&batches, config.cost.dt));
    Ok(())
}

fn cmd_replay(path: &Path) -> Result<bool> {
    let trace = load_trace(path)?;
    let report = replay(&trace)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "case {} run {}: {} vehicles, {} steps, collisions {} recorded / {} recomputed, congestion pairs {} recorded / {} recomputed",
        trace.case,
        trace.run,
        report.vehicles,
        report.steps,
        report.recorded_collisions,
        report.recomputed_collisions,
        report.recorded_congestions,
        report.recomputed_congestions
    )?;
    for issue in &report.issues {
        writeln!(out, "  {issue}")?;
    }
    if report.is_consistent() {
        writeln!(out, "consistent")?;
    } else {
        writeln!(out, "inconsistent")?;
    }
    Ok(report.is_consistent())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run {
            case,
            runs,
            seed,
            config,
            traces,
            out,
            plot,
            serial,
        } => cmd_run(
            case,
            *runs,
            *seed,
            config.as_deref(),
            traces.as_deref(),
            out.as_deref(),
            *plot,
            *serial,
        )
        .map(|()| true),
        Command::Replay { trace } => cmd_replay(trace),
        Command::Table {
            seed,
            runs,
            config,
            out,
            serial,
        } => cmd_table(*seed, *runs, config.as_deref(), out.as_deref(), *serial).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
