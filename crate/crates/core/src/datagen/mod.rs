//! Training-data generation by decimation.
//!
//! A driver keeps a FIFO queue of subproblems. Each dequeued item is solved
//! under a budget: UNSAT items become datapoints labelled with the variables
//! of the DRAT-checked core; SAT items are discarded; items that exhaust
//! the budget are split on a lookahead variable into two children.

mod io;
mod lookahead;

pub use io::{
    read_datapoint, read_dataset, write_datapoint, DatapointError, DatasetWriter, MANIFEST,
};
pub use lookahead::{lookahead_branch, Lookahead, LookaheadError, DEFAULT_CANDIDATES};

use std::collections::VecDeque;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use thiserror::Error;

use crate::cnf::{Clause, Formula, Lit, Var, VarMask};
use crate::drat::check_proof_text;
use crate::solver::{Budget, Solver, SolverOptions, Stats, Verdict};

#[derive(Debug, Clone, PartialEq)]
pub struct WorkItem {
    pub formula: Formula,
    pub depth: usize,
    pub lineage: Vec<Lit>,
}

impl WorkItem {
    pub fn root(formula: Formula) -> WorkItem {
        let lineage = formula.origin().lineage.clone();
        WorkItem {
            formula,
            depth: 0,
            lineage,
        }
    }
}

/// A labelled UNSAT formula: what the network trains on.
#[derive(Debug, Clone, PartialEq)]
pub struct Datapoint {
    pub formula: Formula,
    pub core_vars: VarMask,
}

/// A datapoint plus how it was produced.
#[derive(Debug, Clone)]
pub struct Emitted {
    pub datapoint: Datapoint,
    /// Indices of the core clauses in `datapoint.formula`.
    pub core_clauses: Vec<usize>,
    pub depth: usize,
    pub lineage: Vec<Lit>,
    pub stats: Stats,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub budget: Budget,
    /// Budget for re-solving each core on its own.
    pub verify_budget: Budget,
    pub workers: usize,
    pub max_datapoints: usize,
    pub max_depth: usize,
    pub lookahead_candidates: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            budget: Budget::seconds(5.0),
            verify_budget: Budget::conflicts(1_000_000),
            workers: 1,
            max_datapoints: 100,
            max_depth: 20,
            lookahead_candidates: DEFAULT_CANDIDATES,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineStats {
    pub items: usize,
    pub sat: usize,
    pub unsat: usize,
    pub unknown: usize,
    pub splits: usize,
    pub depth_limited: usize,
    pub proof_rejected: usize,
    pub verify_failed: usize,
    pub lookahead_failed: usize,
    pub emitted: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimateError {
    #[error("variable {0} is not free")]
    NotFree(Var),
}

/// Whether `v` is assigned by a unit clause of `f`.
fn is_fixed_by_unit(f: &Formula, v: Var) -> bool {
    f.clauses()
        .iter()
        .any(|c| c.len() == 1 && c.lits()[0].var() == v)
}

/// The children `f & v` and `f & !v`.
pub fn decimate(item: &WorkItem, v: Var) -> Result<(WorkItem, WorkItem), DecimateError> {
    if v.index() >= item.formula.num_vars() || is_fixed_by_unit(&item.formula, v) {
        return Err(DecimateError::NotFree(v));
    }
    let child = |lit: Lit| {
        let mut formula = item.formula.with_clause(Clause::new(vec![lit]));
        let mut lineage = item.lineage.clone();
        lineage.push(lit);
        formula.origin_mut().lineage = lineage.clone();
        WorkItem {
            formula,
            depth: item.depth + 1,
            lineage,
        }
    };
    Ok((child(v.positive()), child(v.negative())))
}

enum Outcome {
    Sat,
    Unsat(Box<Emitted>),
    Split(Box<(WorkItem, WorkItem)>),
    Dropped(DropReason),
}

enum DropReason {
    DepthLimit,
    ProofRejected,
    VerifyFailed,
    Lookahead,
}

fn process(item: WorkItem, cfg: &PipelineConfig) -> (Outcome, bool) {
    let start = Instant::now();
    let mut solver = Solver::with_options(
        &item.formula,
        SolverOptions {
            proof: true,
            ..SolverOptions::default()
        },
    );
    let result = solver.solve(&cfg.budget, None);
    let seconds = start.elapsed().as_secs_f64();
    match result.verdict {
        Verdict::Sat(_) => (Outcome::Sat, false),
        Verdict::Unsat(proof) => {
            let label = match check_proof_text(&item.formula, &proof) {
                Ok(l) => l,
                Err(e) => {
                    log::warn!("proof rejected at depth {}: {e}", item.depth);
                    return (Outcome::Dropped(DropReason::ProofRejected), false);
                }
            };
            let core = item.formula.restrict(&label.core_clauses);
            if !Solver::new(&core)
                .solve(&cfg.verify_budget, None)
                .verdict
                .is_unsat()
            {
                log::warn!("core failed verification at depth {}", item.depth);
                return (Outcome::Dropped(DropReason::VerifyFailed), false);
            }
            let emitted = Emitted {
                datapoint: Datapoint {
                    formula: item.formula,
                    core_vars: label.core_vars,
                },
                core_clauses: label.core_clauses,
                depth: item.depth,
                lineage: item.lineage,
                stats: result.stats,
                solve_seconds: seconds,
            };
            (Outcome::Unsat(Box::new(emitted)), false)
        }
        Verdict::Unknown(_) => {
            if item.depth >= cfg.max_depth {
                return (Outcome::Dropped(DropReason::DepthLimit), true);
            }
            match lookahead_branch(&item.formula, cfg.lookahead_candidates) {
                Ok(la) => match decimate(&item, la.var) {
                    Ok(children) => (Outcome::Split(Box::new(children)), true),
                    Err(e) => {
                        log::warn!("decimation failed: {e}");
                        (Outcome::Dropped(DropReason::Lookahead), true)
                    }
                },
                Err(e) => {
                    log::debug!("lookahead failed at depth {}: {e}", item.depth);
                    (Outcome::Dropped(DropReason::Lookahead), true)
                }
            }
        }
    }
}

/// Runs the pipeline, handing each verified datapoint to `sink` in emission
/// order. With one worker the run is deterministic given a conflict budget.
pub fn run_pipeline_with(
    seeds: Vec<Formula>,
    cfg: &PipelineConfig,
    mut sink: impl FnMut(Emitted),
) -> PipelineStats {
    let mut queue: VecDeque<WorkItem> = seeds.into_iter().map(WorkItem::root).collect();
    let mut stats = PipelineStats::default();
    let workers = cfg.workers.max(1);

    let (job_tx, job_rx) = mpsc::channel::<WorkItem>();
    let job_rx = Arc::new(Mutex::new(job_rx));
    let (out_tx, out_rx) = mpsc::channel::<(Outcome, bool)>();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let rx = Arc::clone(&job_rx);
            let tx = out_tx.clone();
            scope.spawn(move || loop {
                let job = rx.lock().expect("job queue lock").recv();
                match job {
                    Ok(item) => {
                        if tx.send(process(item, cfg)).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            });
        }
        drop(out_tx);

        let mut in_flight = 0;
        loop {
            let done = stats.emitted >= cfg.max_datapoints;
            while !done && in_flight < workers {
                match queue.pop_front() {
                    Some(item) => {
                        job_tx.send(item).expect("workers alive");
                        in_flight += 1;
                    }
                    None => break,
                }
            }
            if in_flight == 0 {
                break;
            }
            let (outcome, unknown) = out_rx.recv().expect("workers alive");
            in_flight -= 1;
            stats.items += 1;
            if unknown {
                stats.unknown += 1;
            }
            match outcome {
                Outcome::Sat => stats.sat += 1,
                Outcome::Unsat(e) => {
                    stats.unsat += 1;
                    if stats.emitted < cfg.max_datapoints {
                        stats.emitted += 1;
                        sink(*e);
                    }
                }
                Outcome::Split(children) => {
                    stats.splits += 1;
                    let (a, b) = *children;
                    queue.push_back(a);
                    queue.push_back(b);
                }
                Outcome::Dropped(DropReason::DepthLimit) => stats.depth_limited += 1,
                Outcome::Dropped(DropReason::ProofRejected) => {
                    stats.unsat += 1;
                    stats.proof_rejected += 1;
                }
                Outcome::Dropped(DropReason::VerifyFailed) => {
                    stats.unsat += 1;
                    stats.verify_failed += 1;
                }
                Outcome::Dropped(DropReason::Lookahead) => stats.lookahead_failed += 1,
            }
        }
        drop(job_tx);
    });
    stats
}

/// Collects every emitted datapoint.
pub fn run_pipeline(seeds: Vec<Formula>, cfg: &PipelineConfig) -> (Vec<Emitted>, PipelineStats) {
    let mut out = Vec::new();
    let stats = run_pipeline_with(seeds, cfg, |e| out.push(e));
    (out, stats)
}
