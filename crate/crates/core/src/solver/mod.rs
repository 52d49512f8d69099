//! Conflict-driven clause-learning solver.
//!
//! Two watched literals, first-UIP learning, EVSIDS branching with phase
//! saving, Luby restarts, activity-based learnt clause reduction and a
//! textual DRAT proof log. A [`RefocusHook`] is polled after every restart
//! and at the top of every decision and may overwrite all variable
//! activities in one step through [`RefocusHandle::set_activities`].

mod heap;

use std::fmt::Write as _;
use std::ops::Deref;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cnf::{Assignment, Clause, Formula, Lit, Var};
use heap::VarOrder;

/// Activity decay factor ρ.
pub const DEFAULT_VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESCALE_LIMIT: f64 = 1e100;
const RESCALE_FACTOR: f64 = 1e-100;
const CLAUSE_RESCALE_LIMIT: f64 = 1e20;
const LUBY_UNIT: u64 = 100;
const REDUCE_BASE: usize = 4000;
const REDUCE_STEP: usize = 300;
const TIME_CHECK_INTERVAL: u64 = 256;

/// Resource limits for one `solve` call. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Budget {
    pub max_conflicts: Option<u64>,
    pub max_seconds: Option<f64>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget::default()
    }

    pub fn conflicts(n: u64) -> Budget {
        Budget {
            max_conflicts: Some(n),
            max_seconds: None,
        }
    }

    pub fn seconds(s: f64) -> Budget {
        Budget {
            max_conflicts: None,
            max_seconds: Some(s),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.max_conflicts.is_some() || self.max_seconds.is_some()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub reductions: u64,
    pub deleted_clauses: u64,
    pub learnt_literals: u64,
    pub refocus_queries: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    ConflictLimit,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Sat(Assignment),
    /// The DRAT proof text, ending with the empty clause `0`.
    Unsat(String),
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsat(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "SAT",
            Verdict::Unsat(_) => "UNSAT",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub stats: Stats,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub var_decay: f64,
    /// Record a DRAT proof.
    pub proof: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            var_decay: DEFAULT_VAR_DECAY,
            proof: true,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ActivityError {
    #[error("expected {expected} scores, got {got}")]
    Length { expected: usize, got: usize },
    #[error("score for variable {var} is {value}; scores must be finite and nonnegative")]
    BadScore { var: u32, value: f64 },
}

/// Where in the search loop a hook is being polled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PollPoint {
    Restart,
    Decision,
}

/// Callback polled synchronously by [`Solver::solve`].
pub trait RefocusHook {
    fn poll(&mut self, solver: &mut RefocusHandle<'_>, point: PollPoint);
}

/// Restricted view of a solver handed to a [`RefocusHook`]. It derefs to
/// the solver for read access; the only mutation it allows is replacing
/// the activity table.
pub struct RefocusHandle<'a> {
    solver: &'a mut Solver,
}

impl RefocusHandle<'_> {
    /// Replaces every activity and counts one refocus query.
    pub fn set_activities(&mut self, scores: &[f64]) -> Result<(), ActivityError> {
        self.solver.set_activities(scores)?;
        self.solver.stats.refocus_queries += 1;
        Ok(())
    }
}

impl Deref for RefocusHandle<'_> {
    type Target = Solver;
    fn deref(&self) -> &Solver {
        self.solver
    }
}

/// Index of a clause in the solver's clause arena. Original clause `i` of
/// the input formula has reference `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClauseRef(u32);

impl ClauseRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: ClauseRef,
    blocker: Lit,
}

pub struct Solver {
    num_vars: usize,
    options: SolverOptions,
    clauses: Vec<ClauseData>,
    num_original: usize,
    learnts: Vec<ClauseRef>,
    // watches[l] holds the clauses watching ¬l, visited when l becomes true.
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarOrder,
    polarity: Vec<bool>,
    cla_inc: f64,
    seen: Vec<bool>,
    proof: String,
    empty_logged: bool,
    stats: Stats,
    ok: bool,
    restart_index: u64,
    conflicts_since_restart: u64,
    started: Instant,
}

impl Solver {
    pub fn new(formula: &Formula) -> Solver {
        Solver::with_options(formula, SolverOptions::default())
    }

    pub fn with_options(formula: &Formula, options: SolverOptions) -> Solver {
        let n = formula.num_vars();
        let mut s = Solver {
            num_vars: n,
            options,
            clauses: Vec::with_capacity(formula.num_clauses()),
            num_original: formula.num_clauses(),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![None; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            order: VarOrder::new(n),
            polarity: vec![false; n],
            cla_inc: 1.0,
            seen: vec![false; n],
            proof: String::new(),
            empty_logged: false,
            stats: Stats::default(),
            ok: true,
            restart_index: 0,
            conflicts_since_restart: 0,
            started: Instant::now(),
        };
        s.order.rebuild((0..n).map(Var::from_index), &s.activity);
        for clause in formula.clauses() {
            s.add_original(clause);
        }
        if s.ok && s.propagate().is_some() {
            s.ok = false;
        }
        if !s.ok {
            s.log_empty();
        }
        s
    }

    fn add_original(&mut self, clause: &Clause) {
        let cref = ClauseRef(self.clauses.len() as u32);
        let Some(norm) = clause.normalized() else {
            // Tautologies are kept as dead slots so references line up with
            // the input clause indices.
            self.clauses.push(ClauseData {
                lits: clause.lits().to_vec(),
                learnt: false,
                deleted: true,
                activity: 0.0,
            });
            return;
        };
        let lits = norm.into_lits();
        self.clauses.push(ClauseData {
            lits: lits.clone(),
            learnt: false,
            deleted: false,
            activity: 0.0,
        });
        if !self.ok {
            return;
        }
        match lits.len() {
            0 => self.ok = false,
            1 => match self.lit_value(lits[0]) {
                Some(true) => {}
                Some(false) => self.ok = false,
                None => self.enqueue(lits[0], Some(cref)),
            },
            _ => self.attach(cref),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    /// Time since the current `solve` call started.
    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    pub fn proof(&self) -> &str {
        &self.proof
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        self.assigns[var.index()]
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.assigns[lit.var().index()].map(|v| v == lit.is_positive())
    }

    /// Value of `var` if it is fixed at decision level 0.
    pub fn fixed_value(&self, var: Var) -> Option<bool> {
        match self.assigns[var.index()] {
            Some(v) if self.level[var.index()] == 0 => Some(v),
            _ => None,
        }
    }

    pub fn level_of(&self, var: Var) -> Option<u32> {
        self.assigns[var.index()].map(|_| self.level[var.index()])
    }

    pub fn reason_of(&self, var: Var) -> Option<ClauseRef> {
        self.reason[var.index()]
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn activity(&self, var: Var) -> f64 {
        self.activity[var.index()]
    }

    pub fn activities(&self) -> &[f64] {
        &self.activity
    }

    pub fn var_inc(&self) -> f64 {
        self.var_inc
    }

    pub fn clause(&self, cref: ClauseRef) -> &[Lit] {
        &self.clauses[cref.index()].lits
    }

    /// Live original clauses in input order (tautologies excluded).
    pub fn original_clauses(&self) -> impl Iterator<Item = &[Lit]> + '_ {
        self.clauses[..self.num_original]
            .iter()
            .filter(|c| !c.deleted)
            .map(|c| c.lits.as_slice())
    }

    /// Live learnt clauses of length at least two, oldest first. Learnt
    /// units live on the trail at level 0 instead.
    pub fn learnt_clauses(&self) -> impl Iterator<Item = &[Lit]> + '_ {
        self.learnts
            .iter()
            .map(|&c| self.clauses[c.index()].lits.as_slice())
    }

    pub fn num_learnts(&self) -> usize {
        self.learnts.len()
    }

    /// Variables currently in the branching order.
    pub fn order_vars(&self) -> Vec<Var> {
        let mut v: Vec<Var> = self.order.iter().collect();
        v.sort();
        v
    }

    fn log_clause(&mut self, prefix: &str, lits: &[Lit]) {
        if !self.options.proof {
            return;
        }
        self.proof.push_str(prefix);
        for l in lits {
            let _ = write!(self.proof, "{} ", l.to_dimacs());
        }
        self.proof.push_str("0\n");
    }

    fn log_empty(&mut self) {
        if self.options.proof && !self.empty_logged {
            self.proof.push_str("0\n");
        }
        self.empty_logged = true;
    }

    fn attach(&mut self, cref: ClauseRef) {
        let c = &self.clauses[cref.index()].lits;
        debug_assert!(c.len() >= 2);
        let (a, b) = (c[0], c[1]);
        self.watches[(!a).code()].push(Watcher { cref, blocker: b });
        self.watches[(!b).code()].push(Watcher { cref, blocker: a });
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<ClauseRef>) {
        let v = lit.var().index();
        debug_assert!(self.assigns[v].is_none());
        self.assigns[v] = Some(lit.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
        self.order.remove(lit.var(), &self.activity);
        if reason.is_some() {
            self.stats.propagations += 1;
        }
    }

    /// Opens a new decision level and assigns `lit`.
    pub fn decide(&mut self, lit: Lit) {
        assert!(
            self.value(lit.var()).is_none(),
            "decision on assigned variable"
        );
        self.trail_lim.push(self.trail.len());
        self.stats.decisions += 1;
        self.enqueue(lit, None);
    }

    /// Unit propagation to fixpoint. Returns the first falsified clause.
    pub fn propagate(&mut self) -> Option<ClauseRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cidx = w.cref.index();
                if self.clauses[cidx].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cidx].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cidx].lits[0];
                let nw = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && self.lit_value(first) == Some(true) {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let len = self.clauses[cidx].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cidx].lits[k];
                    if self.lit_value(l) != Some(false) {
                        self.clauses[cidx].lits.swap(1, k);
                        self.watches[(!l).code()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.lit_value(first) == Some(false) {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    /// First-UIP conflict analysis. Returns the learnt clause, asserting
    /// literal first and the highest remaining level second, together with
    /// the backjump level. Bumps every variable met during resolution and
    /// appends the learnt clause to the proof.
    pub fn analyze_conflict(&mut self, conflict: ClauseRef) -> (Clause, u32) {
        let current = self.decision_level();
        assert!(current > 0, "conflict analysis at level 0");
        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut pending = 0usize;
        let mut implied: Option<Lit> = None;
        let mut index = self.trail.len();
        let mut confl = conflict;

        loop {
            if self.clauses[confl.index()].learnt {
                self.bump_clause(confl);
            }
            let skip = usize::from(implied.is_some());
            let len = self.clauses[confl.index()].lits.len();
            for k in skip..len {
                let q = self.clauses[confl.index()].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(q.var());
                    self.seen[v] = true;
                    if self.level[v] == current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let p = self.trail[index];
            self.seen[p.var().index()] = false;
            pending -= 1;
            implied = Some(p);
            if pending == 0 {
                break;
            }
            confl = self.reason[p.var().index()].expect("implied literal has a reason");
        }
        learnt[0] = !implied.expect("at least one literal at the conflict level");
        for l in &learnt[1..] {
            self.seen[l.var().index()] = false;
        }

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().index()] > self.level[learnt[best].var().index()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            self.level[learnt[1].var().index()]
        };
        self.log_clause("", &learnt);
        self.stats.learnt_literals += learnt.len() as u64;
        (Clause::new(learnt), backjump)
    }

    /// Adds `var_inc` to the activity of `var`, rescaling everything when
    /// the activity passes 1e100.
    pub fn bump_var(&mut self, var: Var) {
        let v = var.index();
        self.activity[v] += self.var_inc;
        if self.activity[v] > RESCALE_LIMIT {
            for a in &mut self.activity {
                *a *= RESCALE_FACTOR;
            }
            self.var_inc *= RESCALE_FACTOR;
        }
        self.order.increased(var, &self.activity);
    }

    /// One EVSIDS decay step: later bumps are worth `1/ρ` times more.
    pub fn decay_activities(&mut self) {
        self.var_inc /= self.options.var_decay;
    }

    fn bump_clause(&mut self, cref: ClauseRef) {
        let c = &mut self.clauses[cref.index()];
        c.activity += self.cla_inc;
        if c.activity > CLAUSE_RESCALE_LIMIT {
            for &l in &self.learnts {
                self.clauses[l.index()].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// Next decision literal: the unassigned variable of highest activity
    /// (lowest index on ties) with its saved phase. `None` when every
    /// variable is assigned.
    pub fn pick_branch(&self) -> Option<Lit> {
        let v = self.order.peek()?;
        debug_assert!(self.value(v).is_none());
        Some(v.lit(self.polarity[v.index()]))
    }

    /// Overwrites every activity, resets `var_inc` to 1 and rebuilds the
    /// branching order.
    pub fn set_activities(&mut self, scores: &[f64]) -> Result<(), ActivityError> {
        if scores.len() != self.num_vars {
            return Err(ActivityError::Length {
                expected: self.num_vars,
                got: scores.len(),
            });
        }
        if let Some((i, &value)) = scores
            .iter()
            .enumerate()
            .find(|(_, s)| !s.is_finite() || **s < 0.0)
        {
            return Err(ActivityError::BadScore {
                var: i as u32 + 1,
                value,
            });
        }
        self.activity.copy_from_slice(scores);
        self.var_inc = 1.0;
        let free: Vec<Var> = (0..self.num_vars)
            .map(Var::from_index)
            .filter(|&v| self.value(v).is_none())
            .collect();
        self.order.rebuild(free, &self.activity);
        Ok(())
    }

    /// Undoes every assignment above `level`, saving phases.
    pub fn backtrack_to(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level as usize];
        for k in (start..self.trail.len()).rev() {
            let lit = self.trail[k];
            let v = lit.var().index();
            self.polarity[v] = lit.is_positive();
            self.assigns[v] = None;
            self.reason[v] = None;
            self.order.insert(lit.var(), &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    /// Whether the Luby schedule (unit 100 conflicts) calls for a restart.
    pub fn restart_policy(&self) -> bool {
        self.conflicts_since_restart >= LUBY_UNIT * luby(self.restart_index)
    }

    fn restart(&mut self) {
        self.backtrack_to(0);
        self.stats.restarts += 1;
        self.restart_index += 1;
        self.conflicts_since_restart = 0;
    }

    fn locked(&self, cref: ClauseRef) -> bool {
        let first = self.clauses[cref.index()].lits[0];
        self.lit_value(first) == Some(true) && self.reason[first.var().index()] == Some(cref)
    }

    /// Learnt-clause count above which [`Solver::reduce_db`] runs.
    pub fn reduce_threshold(&self) -> usize {
        REDUCE_BASE + REDUCE_STEP * self.stats.reductions as usize
    }

    /// Walks the lower-activity half of the learnt clauses and deletes those
    /// that are neither binary nor the reason for a current assignment.
    pub fn reduce_db(&mut self) {
        let mut ranked: Vec<(usize, ClauseRef)> =
            self.learnts.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| {
            let (x, y) = (
                self.clauses[a.1.index()].activity,
                self.clauses[b.1.index()].activity,
            );
            x.partial_cmp(&y)
                .expect("finite activity")
                .then(a.0.cmp(&b.0))
        });
        let target = self.learnts.len() / 2;
        let mut doomed = vec![false; self.learnts.len()];
        for &(pos, cref) in &ranked[..target] {
            if self.clauses[cref.index()].lits.len() > 2 && !self.locked(cref) {
                doomed[pos] = true;
            }
        }
        let mut kept = Vec::with_capacity(self.learnts.len() - target);
        for (pos, cref) in std::mem::take(&mut self.learnts).into_iter().enumerate() {
            if doomed[pos] {
                let lits = std::mem::take(&mut self.clauses[cref.index()].lits);
                self.log_clause("d ", &lits);
                self.clauses[cref.index()].deleted = true;
                self.stats.deleted_clauses += 1;
            } else {
                kept.push(cref);
            }
        }
        self.learnts = kept;
        self.stats.reductions += 1;
        self.purge_watches();
    }

    fn purge_watches(&mut self) {
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref.index()].deleted);
        }
    }

    fn learn(&mut self, learnt: Clause) {
        let lits = learnt.into_lits();
        if lits.len() == 1 {
            self.enqueue(lits[0], None);
            return;
        }
        let cref = ClauseRef(self.clauses.len() as u32);
        let asserting = lits[0];
        self.clauses.push(ClauseData {
            lits,
            learnt: true,
            deleted: false,
            activity: 0.0,
        });
        self.learnts.push(cref);
        self.attach(cref);
        self.bump_clause(cref);
        self.enqueue(asserting, Some(cref));
    }

    fn model(&self) -> Assignment {
        Assignment::from_values(self.assigns.clone())
    }

    fn result(&self, verdict: Verdict) -> SolveResult {
        SolveResult {
            verdict,
            stats: self.stats,
            seconds: self.elapsed().as_secs_f64(),
        }
    }

    fn unsat(&mut self) -> SolveResult {
        self.ok = false;
        self.log_empty();
        let proof = self.proof.clone();
        self.result(Verdict::Unsat(proof))
    }

    /// Runs the search until a verdict or until `budget` is exhausted.
    pub fn solve(
        &mut self,
        budget: &Budget,
        mut hook: Option<&mut dyn RefocusHook>,
    ) -> SolveResult {
        self.started = Instant::now();
        if !self.ok {
            return self.unsat();
        }
        let conflict_limit = budget.max_conflicts.map(|n| self.stats.conflicts + n);
        let time_limit = budget.max_seconds.map(Duration::from_secs_f64);

        loop {
            if let Some(conflict) = self.propagate() {
                self.stats.conflicts += 1;
                self.conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    return self.unsat();
                }
                let (learnt, backjump) = self.analyze_conflict(conflict);
                self.backtrack_to(backjump);
                self.learn(learnt);
                self.decay_activities();
                self.cla_inc /= CLAUSE_DECAY;

                if conflict_limit.is_some_and(|limit| self.stats.conflicts >= limit) {
                    self.backtrack_to(0);
                    return self.result(Verdict::Unknown(UnknownReason::ConflictLimit));
                }
                if let Some(limit) = time_limit {
                    if self.stats.conflicts.is_multiple_of(TIME_CHECK_INTERVAL)
                        && self.elapsed() >= limit
                    {
                        self.backtrack_to(0);
                        return self.result(Verdict::Unknown(UnknownReason::TimeLimit));
                    }
                }
                if self.restart_policy() {
                    self.restart();
                    if let Some(h) = hook.as_deref_mut() {
                        h.poll(&mut RefocusHandle { solver: self }, PollPoint::Restart);
                    }
                }
                continue;
            }

            if self.learnts.len() > self.reduce_threshold() {
                self.reduce_db();
            }
            if let Some(h) = hook.as_deref_mut() {
                h.poll(&mut RefocusHandle { solver: self }, PollPoint::Decision);
            }
            match self.pick_branch() {
                None => return self.result(Verdict::Sat(self.model())),
                Some(lit) => self.decide(lit),
            }
        }
    }

    /// Polls `hook` once, outside the search loop.
    pub fn poll_now(&mut self, hook: &mut dyn RefocusHook) {
        hook.poll(&mut RefocusHandle { solver: self }, PollPoint::Decision);
    }

    /// Checks the propagation invariants: every live clause of length two or
    /// more is watched by its first two literals, and, when propagation has
    /// reached fixpoint without conflict, no clause is falsified or unit.
    pub fn audit_watches(&self) -> Result<(), String> {
        for (i, c) in self.clauses.iter().enumerate() {
            if c.deleted || c.lits.len() < 2 {
                continue;
            }
            let cref = ClauseRef(i as u32);
            for &w in &c.lits[..2] {
                if !self.watches[(!w).code()].iter().any(|x| x.cref == cref) {
                    return Err(format!("clause {} is not watched by {}", i, w));
                }
            }
            if self.qhead == self.trail.len() {
                let sat = c.lits.iter().any(|&l| self.lit_value(l) == Some(true));
                let open = c
                    .lits
                    .iter()
                    .filter(|&&l| self.lit_value(l).is_none())
                    .count();
                if !sat && open <= 1 {
                    return Err(format!(
                        "clause {} is {} but not propagated",
                        i,
                        if open == 0 { "falsified" } else { "unit" }
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The Luby sequence 1, 1, 2, 1, 1, 2, 4, ... indexed from 0.
pub fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

/// Solves `formula` from scratch with default options.
pub fn solve(
    formula: &Formula,
    budget: &Budget,
    hook: Option<&mut dyn RefocusHook>,
) -> SolveResult {
    Solver::new(formula).solve(budget, hook)
}
