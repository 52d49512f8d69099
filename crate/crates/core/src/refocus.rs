//! Periodic refocusing: snapshot the live solver into a clause-literal
//! graph, score its variables, and overwrite every EVSIDS activity with
//!
//! ```text
//! activity(x_i) = softmax(v / tau)_i * n * kappa
//! ```
//!
//! where `n` counts the snapshot's variables. Queries are scheduled by wall
//! time or by conflict count and run synchronously at the top of the
//! decision loop.

use std::str::FromStr;
use std::sync::Arc;

use rand::Rng as _;
use thiserror::Error;

use crate::cnf::{lit_to_column, Lit, Var, VarMask};
use crate::net::{forward, softmax, ClauseLiteralGraph, NetworkWeights};
use crate::rng::{seeded, Rng};
use crate::solver::{Budget, PollPoint, RefocusHandle, RefocusHook, SolveResult, Solver};

#[derive(Debug, Error, PartialEq)]
pub enum RefocusError {
    #[error("expected {expected} scores, got {got}")]
    Length { expected: usize, got: usize },
    #[error("invalid schedule {0:?}")]
    BadSchedule(String),
    #[error("invalid config: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    FixedSeconds {
        period: f64,
    },
    BackoffSeconds {
        initial: f64,
        gamma: f64,
    },
    /// The k-th wait is `k * base` conflicts.
    ConflictGeometric {
        base: u64,
    },
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trigger {
    Seconds(f64),
    Conflicts(u64),
}

impl Schedule {
    /// Cumulative trigger point of query `k` (0-based).
    pub fn trigger(&self, k: u64) -> Option<Trigger> {
        match *self {
            Schedule::FixedSeconds { period } => Some(Trigger::Seconds(period * (k + 1) as f64)),
            Schedule::BackoffSeconds { initial, gamma } => {
                let mut wait = initial;
                let mut at = 0.0;
                for _ in 0..=k {
                    at += wait;
                    wait *= gamma;
                }
                Some(Trigger::Seconds(at))
            }
            Schedule::ConflictGeometric { base } => {
                Some(Trigger::Conflicts(base * (k + 1) * (k + 2) / 2))
            }
            Schedule::Never => None,
        }
    }

    pub fn triggers(&self) -> impl Iterator<Item = Trigger> + '_ {
        (0..).map_while(|k| self.trigger(k))
    }

    fn validate(&self) -> Result<(), RefocusError> {
        let ok = match *self {
            Schedule::FixedSeconds { period } => period > 0.0 && period.is_finite(),
            Schedule::BackoffSeconds { initial, gamma } => {
                initial > 0.0 && initial.is_finite() && gamma >= 1.0 && gamma.is_finite()
            }
            Schedule::ConflictGeometric { base } => base > 0,
            Schedule::Never => true,
        };
        if ok {
            Ok(())
        } else {
            Err(RefocusError::BadSchedule(self.to_string()))
        }
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Schedule::FixedSeconds { period } => write!(f, "fixed:{period}"),
            Schedule::BackoffSeconds { initial, gamma } => write!(f, "backoff:{initial}:{gamma}"),
            Schedule::ConflictGeometric { base } => write!(f, "conflicts:{base}"),
            Schedule::Never => write!(f, "never"),
        }
    }
}

impl FromStr for Schedule {
    type Err = RefocusError;

    /// `fixed:<s>`, `backoff:<s>:<gamma>`, `conflicts:<n>` or `never`.
    fn from_str(s: &str) -> Result<Schedule, RefocusError> {
        let bad = || RefocusError::BadSchedule(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let f = |x: &str| x.parse::<f64>().map_err(|_| bad());
        let schedule = match parts.as_slice() {
            ["never"] => Schedule::Never,
            ["fixed", p] => Schedule::FixedSeconds { period: f(p)? },
            ["backoff", i, g] => Schedule::BackoffSeconds {
                initial: f(i)?,
                gamma: f(g)?,
            },
            ["conflicts", b] => Schedule::ConflictGeometric {
                base: b.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        schedule.validate().map_err(|_| bad())?;
        Ok(schedule)
    }
}

/// Tracks which trigger fires next.
#[derive(Debug, Clone)]
pub struct Scheduler {
    schedule: Schedule,
    next: u64,
}

impl Scheduler {
    pub fn new(schedule: Schedule) -> Scheduler {
        Scheduler { schedule, next: 0 }
    }

    pub fn next_trigger(&self) -> Option<Trigger> {
        self.schedule.trigger(self.next)
    }

    /// Whether a query is due at this point. Consumes every trigger already
    /// passed, so a slow query never causes a burst of catch-up queries.
    pub fn due(&mut self, seconds: f64, conflicts: u64) -> bool {
        let passed = |t: Trigger| match t {
            Trigger::Seconds(s) => seconds >= s,
            Trigger::Conflicts(c) => conflicts >= c,
        };
        let mut fired = false;
        while let Some(t) = self.next_trigger() {
            if !passed(t) {
                break;
            }
            fired = true;
            self.next += 1;
        }
        fired
    }
}

#[derive(Debug, Clone)]
pub enum ScoreSource {
    Network(Arc<NetworkWeights>),
    /// Fresh i.i.d. U[-1, 1] logits per query.
    Random {
        seed: u64,
    },
    /// Logit +1 for labeled variables, -1 for the rest.
    Oracle(VarMask),
}

#[derive(Debug, Clone)]
pub struct RefocusConfig {
    pub tau: f64,
    pub kappa: f64,
    pub cell_budget: usize,
    pub schedule: Schedule,
    pub source: ScoreSource,
}

pub const DESK_CELL_BUDGET: usize = 100_000;

impl RefocusConfig {
    pub fn new(schedule: Schedule, source: ScoreSource) -> RefocusConfig {
        RefocusConfig {
            tau: 0.25,
            kappa: 1e4,
            cell_budget: DESK_CELL_BUDGET,
            schedule,
            source,
        }
    }

    pub fn validate(&self) -> Result<(), RefocusError> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(RefocusError::BadConfig(format!("tau = {}", self.tau)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(RefocusError::BadConfig(format!("kappa = {}", self.kappa)));
        }
        if self.cell_budget == 0 {
            return Err(RefocusError::BadConfig("cell budget = 0".into()));
        }
        self.schedule.validate()
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    /// `None` when the original clauses alone exceed the budget.
    pub graph: Option<ClauseLiteralGraph>,
    pub learnts_included: usize,
    pub learnts_considered: usize,
}

impl Snapshot {
    pub fn skipped(&self) -> bool {
        self.graph.is_none()
    }

    /// Budget total: literal nodes (both polarities) + clauses + cells.
    pub fn total_size(&self) -> Option<usize> {
        self.graph
            .as_ref()
            .map(|g| 2 * g.num_vars() + g.num_clauses() + g.num_cells())
    }

    /// Whether a query can be made from this snapshot.
    pub fn queryable(&self) -> bool {
        self.graph
            .as_ref()
            .is_some_and(|g| g.num_vars() > 0 && g.num_clauses() > 0)
    }
}

/// The clause with level-0-false literals removed, or `None` if a literal
/// is true at level 0.
fn simplify(solver: &Solver, lits: &[Lit]) -> Option<Vec<Lit>> {
    let mut out = Vec::with_capacity(lits.len());
    for &l in lits {
        match solver.fixed_value(l.var()).map(|v| v == l.is_positive()) {
            Some(true) => return None,
            Some(false) => {}
            None => out.push(l),
        }
    }
    Some(out)
}

/// Builds the query graph from the solver's current state.
pub fn snapshot_graph(solver: &Solver, cell_budget: usize) -> Snapshot {
    let n = solver.num_vars();
    let mut index = vec![u32::MAX; n];
    let mut var_map = Vec::new();
    for v in (0..n).map(Var::from_index) {
        if solver.fixed_value(v).is_none() {
            index[v.index()] = var_map.len() as u32;
            var_map.push(v);
        }
    }
    let nv = var_map.len();
    let mut cells: Vec<(u32, u32)> = Vec::new();
    let mut rows = 0u32;
    let push = |lits: &[Lit], rows: &mut u32, cells: &mut Vec<(u32, u32)>| {
        for &l in lits {
            let local = Var::from_index(index[l.var().index()] as usize).lit(l.is_positive());
            let col = lit_to_column(local, nv).expect("mapped var in range");
            cells.push((*rows, col as u32));
        }
        *rows += 1;
    };
    for c in solver.original_clauses() {
        if let Some(lits) = simplify(solver, c) {
            if !lits.is_empty() {
                push(&lits, &mut rows, &mut cells);
            }
        }
    }
    let total = |rows: u32, cells: usize| 2 * nv + rows as usize + cells;
    if total(rows, cells.len()) > cell_budget {
        return Snapshot {
            graph: None,
            learnts_included: 0,
            learnts_considered: 0,
        };
    }
    let mut learnts: Vec<Vec<Lit>> = solver
        .learnt_clauses()
        .filter_map(|c| simplify(solver, c))
        .filter(|c| !c.is_empty())
        .collect();
    learnts.sort_by_key(Vec::len);
    let considered = learnts.len();
    let mut included = 0;
    for c in &learnts {
        if total(rows + 1, cells.len() + c.len()) > cell_budget {
            break;
        }
        push(c, &mut rows, &mut cells);
        included += 1;
    }
    let graph = ClauseLiteralGraph::new(rows as usize, nv, cells, var_map)
        .expect("snapshot cells are in range and distinct");
    Snapshot {
        graph: Some(graph),
        learnts_included: included,
        learnts_considered: considered,
    }
}

/// Activities for every solver variable from the snapshot's scores.
/// Variables outside the snapshot get 0.
pub fn scores_to_activities(
    scores: &[f64],
    graph: &ClauseLiteralGraph,
    num_solver_vars: usize,
    tau: f64,
    kappa: f64,
) -> Result<Vec<f64>, RefocusError> {
    let nv = graph.num_vars();
    if scores.len() != nv {
        return Err(RefocusError::Length {
            expected: nv,
            got: scores.len(),
        });
    }
    let scaled: Vec<f64> = scores.iter().map(|s| s / tau).collect();
    let p = softmax(&scaled);
    let mut act = vec![0.0; num_solver_vars];
    for (i, &v) in graph.var_map().iter().enumerate() {
        act[v.index()] = p[i] * nv as f64 * kappa;
    }
    Ok(act)
}

/// I.i.d. uniform logits on [-1, 1].
pub fn random_logits(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefocusStats {
    /// Activity replacements applied.
    pub queries: u64,
    /// Schedule firings where originals overflowed the budget.
    pub skipped: u64,
    /// Schedule firings with an empty graph.
    pub suppressed: u64,
    /// Queries whose logits differ from the previous query's.
    pub fresh: u64,
}

/// Solver hook that runs the configured refocus policy.
pub struct Refocuser {
    config: RefocusConfig,
    scheduler: Scheduler,
    rng: Rng,
    last_logits: Option<Vec<f64>>,
    stats: RefocusStats,
}

impl Refocuser {
    pub fn new(config: RefocusConfig) -> Result<Refocuser, RefocusError> {
        config.validate()?;
        let seed = match config.source {
            ScoreSource::Random { seed } => seed,
            _ => 0,
        };
        Ok(Refocuser {
            scheduler: Scheduler::new(config.schedule),
            config,
            rng: seeded(seed),
            last_logits: None,
            stats: RefocusStats::default(),
        })
    }

    pub fn stats(&self) -> &RefocusStats {
        &self.stats
    }

    fn logits(&mut self, graph: &ClauseLiteralGraph) -> Vec<f64> {
        match &self.config.source {
            ScoreSource::Network(w) => forward(w, graph).unwrap_or_else(|e| {
                log::warn!("network query failed: {e}");
                vec![0.0; graph.num_vars()]
            }),
            ScoreSource::Random { .. } => random_logits(graph.num_vars(), &mut self.rng),
            ScoreSource::Oracle(mask) => graph
                .var_map()
                .iter()
                .map(|&v| if mask.contains(v) { 1.0 } else { -1.0 })
                .collect(),
        }
    }

    /// Runs one query now, regardless of the schedule.
    pub fn query(&mut self, solver: &mut RefocusHandle<'_>) {
        let snap = snapshot_graph(solver, self.config.cell_budget);
        if snap.skipped() {
            self.stats.skipped += 1;
            return;
        }
        if !snap.queryable() {
            self.stats.suppressed += 1;
            return;
        }
        let graph = snap.graph.expect("queryable");
        let logits = self.logits(&graph);
        let act = scores_to_activities(
            &logits,
            &graph,
            solver.num_vars(),
            self.config.tau,
            self.config.kappa,
        )
        .expect("one logit per graph variable");
        if let Err(e) = solver.set_activities(&act) {
            log::warn!("refocus rejected: {e}");
            return;
        }
        self.stats.queries += 1;
        if self.last_logits.as_ref() != Some(&logits) {
            self.stats.fresh += 1;
        }
        self.last_logits = Some(logits);
        log::debug!(
            "refocus query {} at {} conflicts: {} vars, {} clauses, {}/{} learnts",
            self.stats.queries,
            solver.stats().conflicts,
            graph.num_vars(),
            graph.num_clauses(),
            snap.learnts_included,
            snap.learnts_considered
        );
    }
}

impl RefocusHook for Refocuser {
    fn poll(&mut self, solver: &mut RefocusHandle<'_>, point: PollPoint) {
        if point != PollPoint::Decision {
            return;
        }
        let secs = solver.elapsed().as_secs_f64();
        if self.scheduler.due(secs, solver.stats().conflicts) {
            self.query(solver);
        }
    }
}

/// Solves `solver` with the refocus policy attached. `Never` schedules run
/// the plain solver with no hook.
pub fn solve_with(
    solver: &mut Solver,
    budget: &Budget,
    config: RefocusConfig,
) -> Result<(SolveResult, RefocusStats), RefocusError> {
    if config.schedule == Schedule::Never {
        config.validate()?;
        return Ok((solver.solve(budget, None), RefocusStats::default()));
    }
    let mut hook = Refocuser::new(config)?;
    let result = solver.solve(budget, Some(&mut hook));
    Ok((result, hook.stats))
}
