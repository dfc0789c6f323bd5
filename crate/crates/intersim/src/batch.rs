//! Monte Carlo batches over the benchmark cases.

use anyhow::Result;
use intersim_core::scenario::generate_scenario;
use intersim_core::sim::{run_with, RunOptions};
use intersim_core::{AggregateStats, Case, SimConfig, SimResult};
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct BatchSpec {
    pub case: Case,
    pub runs: u64,
    pub master_seed: u64,
    pub config: SimConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BatchOptions {
    pub record_traces: bool,
    pub parallel: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            record_traces: false,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Batch {
    pub case: Case,
    pub master_seed: u64,
    /// Indexed by run.
    pub results: Vec<SimResult>,
    pub stats: AggregateStats,
}

/// One run of a batch; the seed depends only on the master seed and run index.
pub fn run_one(spec: &BatchSpec, run: u64, record_trace: bool) -> Result<SimResult> {
    let scenario = generate_scenario(spec.case, run, spec.master_seed, &spec.config)?;
    Ok(run_with(&scenario, scenario.seed, RunOptions { record_trace })?)
}

/// Every run of `spec`. Results are in run order whether or not the runs
/// execute in parallel.
pub fn run_batch(spec: &BatchSpec, options: BatchOptions) -> Result<Batch> {
    let results: Vec<SimResult> = if options.parallel {
        (0..spec.runs)
            .into_par_iter()
            .map(|r| run_one(spec, r, options.record_traces))
            .collect::<Result<_>>()?
    } else {
        (0..spec.runs)
            .map(|r| run_one(spec, r, options.record_traces))
            .collect::<Result<_>>()?
    };
    let stats = results.iter().collect();
    Ok(Batch {
        case: spec.case,
        master_seed: spec.master_seed,
        results,
        stats,
    })
}

/// The eight benchmark cases with the same seed and run count, without traces.
pub fn run_table(master_seed: u64, runs: u64, config: &SimConfig, parallel: bool) -> Result<Vec<Batch>> {
    Case::ALL
        .iter()
        .map(|&case| {
            let spec = BatchSpec {
                case,
                runs,
                master_seed,
                config: config.clone(),
            };
            run_batch(
                &spec,
                BatchOptions {
                    record_traces: false,
                    parallel,
                },
            )
        })
        .collect()
}
