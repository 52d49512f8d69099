//! Ablation harness: every instance under every solver configuration, run
//! on a pool of worker threads, one solver per job.
//!
//! Rows come back in (instance, config) order whatever the completion order,
//! so a CSV differs between runs only in its `seconds` column.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::cnf::Formula;
use crate::net::NetworkWeights;
use crate::refocus::{
    solve_with, RefocusConfig, RefocusError, RefocusStats, Schedule, ScoreSource,
};
use crate::rng::derive;
use crate::solver::{Budget, Solver, SolverOptions};

pub const BENCH_HEADER: &str =
    "instance,config,verdict,seconds,conflicts,decisions,propagations,queries";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchConfig {
    /// No refocusing.
    Baseline,
    /// Refocus from the network.
    Neuro,
    /// Refocus from fresh uniform logits.
    Random,
}

impl fmt::Display for BenchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchConfig::Baseline => "baseline",
            BenchConfig::Neuro => "neuro",
            BenchConfig::Random => "random",
        })
    }
}

impl FromStr for BenchConfig {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(BenchConfig::Baseline),
            "neuro" => Ok(BenchConfig::Neuro),
            "random" => Ok(BenchConfig::Random),
            other => Err(BenchError::UnknownConfig(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown config {0:?} (expected baseline, neuro or random)")]
    UnknownConfig(String),
    #[error("the neuro config needs network weights")]
    MissingWeights,
    #[error(transparent)]
    Refocus(#[from] RefocusError),
}

/// Settings shared by every job.
#[derive(Debug, Clone)]
pub struct BenchSettings {
    pub budget: Budget,
    pub schedule: Schedule,
    pub tau: f64,
    pub kappa: f64,
    pub cell_budget: usize,
    pub weights: Option<Arc<NetworkWeights>>,
    /// Root seed; instance `i` under `random` uses `derive(seed, i)`.
    pub seed: u64,
    pub workers: usize,
}

impl BenchSettings {
    pub fn new(schedule: Schedule) -> BenchSettings {
        let defaults = RefocusConfig::new(schedule, ScoreSource::Random { seed: 0 });
        BenchSettings {
            budget: Budget::seconds(60.0),
            schedule,
            tau: defaults.tau,
            kappa: defaults.kappa,
            cell_budget: defaults.cell_budget,
            weights: None,
            seed: 0,
            workers: 1,
        }
    }

    fn refocus(&self, config: BenchConfig, instance: usize) -> Result<RefocusConfig, BenchError> {
        let (schedule, source) = match config {
            BenchConfig::Baseline => (Schedule::Never, ScoreSource::Random { seed: 0 }),
            BenchConfig::Neuro => (
                self.schedule,
                ScoreSource::Network(self.weights.clone().ok_or(BenchError::MissingWeights)?),
            ),
            BenchConfig::Random => (
                self.schedule,
                ScoreSource::Random {
                    seed: derive(self.seed, instance as u64),
                },
            ),
        };
        Ok(RefocusConfig {
            tau: self.tau,
            kappa: self.kappa,
            cell_budget: self.cell_budget,
            schedule,
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub config: BenchConfig,
    pub verdict: &'static str,
    pub seconds: f64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub refocus: RefocusStats,
}

/// Runs `configs` on every instance. Configs are validated before any job
/// starts.
pub fn run_bench(
    instances: &[(String, Formula)],
    configs: &[BenchConfig],
    settings: &BenchSettings,
) -> Result<Vec<BenchRow>, BenchError> {
    let mut jobs = Vec::with_capacity(instances.len() * configs.len());
    for i in 0..instances.len() {
        for &c in configs {
            let rc = settings.refocus(c, i)?;
            rc.validate()?;
            jobs.push((i, c, rc));
        }
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..settings.workers.max(1).min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some((i, config, rc)) = jobs.get(j) else {
                    break;
                };
                let (name, formula) = &instances[*i];
                let mut solver = Solver::with_options(
                    formula,
                    SolverOptions {
                        proof: false,
                        ..SolverOptions::default()
                    },
                );
                let (result, refocus) =
                    solve_with(&mut solver, &settings.budget, rc.clone()).expect("validated above");
                log::info!(
                    "{name} {config}: {} in {:.3}s",
                    result.verdict.name(),
                    result.seconds
                );
                let row = BenchRow {
                    instance: name.clone(),
                    config: *config,
                    verdict: result.verdict.name(),
                    seconds: result.seconds,
                    conflicts: result.stats.conflicts,
                    decisions: result.stats.decisions,
                    propagations: result.stats.propagations,
                    refocus,
                };
                results.lock().expect("results lock")[j] = Some(row);
            });
        }
    });
    Ok(results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect())
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "{BENCH_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.6},{},{},{},{}",
            r.instance,
            r.config,
            r.verdict,
            r.seconds,
            r.conflicts,
            r.decisions,
            r.propagations,
            r.refocus.queries
        )?;
    }
    Ok(())
}
