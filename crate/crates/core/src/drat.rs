//! Backward DRAT proof checking restricted to RUP lemmas, with unsat-core
//! extraction.
//!
//! The checker replays the proof forward to find the first empty clause,
//! then walks backward. Only lemmas marked as needed are verified; each
//! successful reverse-unit-propagation check marks the clauses that took
//! part in the conflict. Original clauses marked this way form the core.

use std::collections::HashMap;

use thiserror::Error;

use crate::cnf::{Clause, Formula, Lit, Var, VarMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Addition,
    Deletion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub kind: LineKind,
    pub clause: Clause,
}

impl ProofLine {
    pub fn add(clause: Clause) -> ProofLine {
        ProofLine {
            kind: LineKind::Addition,
            clause,
        }
    }

    pub fn delete(clause: Clause) -> ProofLine {
        ProofLine {
            kind: LineKind::Deletion,
            clause,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DratError {
    #[error("proof line {line}: unexpected token `{token}`")]
    BadToken { line: usize, token: String },
    #[error("proof ends inside an unterminated clause")]
    Unterminated,
    #[error("proof does not contain the empty clause")]
    NoEmptyClause,
    #[error("proof step {step} ({clause}) is not a RUP consequence")]
    NotRup { step: usize, clause: String },
    #[error("proof step {step} ({clause}) needs a RAT check, which is not supported")]
    RatNotSupported { step: usize, clause: String },
}

/// Parses textual DRAT: one clause per line, `0`-terminated, deletions
/// prefixed with `d`. Lines starting with `c` are comments.
pub fn parse_proof(text: &str) -> Result<Vec<ProofLine>, DratError> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut deletion = false;
    let mut open = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('c') {
            continue;
        }
        for token in line.split_whitespace() {
            if token == "d" && !open {
                deletion = true;
                open = true;
                continue;
            }
            let value: i32 = token.parse().map_err(|_| DratError::BadToken {
                line: lineno + 1,
                token: token.to_string(),
            })?;
            match Lit::from_dimacs(value) {
                Some(lit) => {
                    current.push(lit);
                    open = true;
                }
                None => {
                    let clause = Clause::new(std::mem::take(&mut current));
                    out.push(if deletion {
                        ProofLine::delete(clause)
                    } else {
                        ProofLine::add(clause)
                    });
                    deletion = false;
                    open = false;
                }
            }
        }
    }
    if open {
        return Err(DratError::Unterminated);
    }
    Ok(out)
}

/// Clauses and variables used by a successful check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreLabel {
    /// Indices (0-based, ascending) of the original clauses in the core.
    pub core_clauses: Vec<usize>,
    pub core_vars: VarMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Add(usize),
    Delete(usize),
    Skip,
}

#[derive(Debug)]
struct Entry {
    lits: Vec<Lit>,
    tautology: bool,
    active: bool,
    attached: bool,
    needed: bool,
}

struct Checker {
    entries: Vec<Entry>,
    watches: Vec<Vec<usize>>,
    units: Vec<usize>,
    empties: Vec<usize>,
    assigns: Vec<Option<bool>>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    seen: Vec<bool>,
}

enum Propagation {
    Fixpoint,
    Conflict(Conflict),
}

enum Conflict {
    Clause(usize),
    /// `lit` was required by `reason` while already false.
    Clash {
        lit: Lit,
        reason: Option<usize>,
    },
}

impl Checker {
    fn new(num_vars: usize) -> Checker {
        Checker {
            entries: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            units: Vec::new(),
            empties: Vec::new(),
            assigns: vec![None; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            seen: vec![false; num_vars],
        }
    }

    fn push(&mut self, clause: &Clause) -> usize {
        let (lits, tautology) = match clause.normalized() {
            Some(c) => (c.into_lits(), false),
            None => (clause.lits().to_vec(), true),
        };
        self.entries.push(Entry {
            lits,
            tautology,
            active: false,
            attached: false,
            needed: false,
        });
        self.entries.len() - 1
    }

    fn activate(&mut self, id: usize) {
        let e = &mut self.entries[id];
        e.active = true;
        if e.tautology {
            return;
        }
        match e.lits.len() {
            0 => self.empties.push(id),
            1 => self.units.push(id),
            _ if !e.attached => {
                e.attached = true;
                let (a, b) = (e.lits[0], e.lits[1]);
                self.watches[a.code()].push(id);
                self.watches[b.code()].push(id);
            }
            _ => {}
        }
    }

    fn deactivate(&mut self, id: usize) {
        let e = &mut self.entries[id];
        e.active = false;
        match e.lits.len() {
            0 => self.empties.retain(|&x| x != id),
            1 => self.units.retain(|&x| x != id),
            _ => {}
        }
    }

    fn value(&self, lit: Lit) -> Option<bool> {
        self.assigns[lit.var().index()].map(|v| v == lit.is_positive())
    }

    fn reset(&mut self) {
        for lit in self.trail.drain(..) {
            self.assigns[lit.var().index()] = None;
            self.reason[lit.var().index()] = None;
        }
    }

    fn assign(&mut self, lit: Lit, reason: Option<usize>) -> Result<(), Conflict> {
        match self.value(lit) {
            Some(true) => Ok(()),
            Some(false) => Err(Conflict::Clash { lit, reason }),
            None => {
                self.assigns[lit.var().index()] = Some(lit.is_positive());
                self.reason[lit.var().index()] = reason;
                self.trail.push(lit);
                Ok(())
            }
        }
    }

    fn propagate(&mut self) -> Propagation {
        let mut head = 0;
        while head < self.trail.len() {
            let false_lit = !self.trail[head];
            head += 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let id = ws[i];
                if !self.entries[id].active {
                    i += 1;
                    continue;
                }
                let lits = &mut self.entries[id].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let other = lits[0];
                if self.value(other) == Some(true) {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.entries[id].lits.len() {
                    let l = self.entries[id].lits[k];
                    if self.value(l) != Some(false) {
                        self.entries[id].lits.swap(1, k);
                        self.watches[l.code()].push(id);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                i += 1;
                match self.value(other) {
                    Some(false) => {
                        conflict = Some(id);
                        break;
                    }
                    _ => {
                        self.assign(other, Some(id)).ok();
                    }
                }
            }
            self.watches[false_lit.code()] = ws;
            if let Some(id) = conflict {
                return Propagation::Conflict(Conflict::Clause(id));
            }
        }
        Propagation::Fixpoint
    }

    /// Reverse unit propagation. On success marks every clause in the
    /// conflict's implication graph as needed.
    fn rup(&mut self, lits: &[Lit]) -> bool {
        self.reset();
        let conflict = self.rup_conflict(lits);
        let ok = match conflict {
            Some(c) => {
                self.mark(c);
                true
            }
            None => false,
        };
        self.reset();
        ok
    }

    fn rup_conflict(&mut self, lits: &[Lit]) -> Option<Conflict> {
        if let Some(&id) = self.empties.first() {
            return Some(Conflict::Clause(id));
        }
        for k in 0..self.units.len() {
            let id = self.units[k];
            let lit = self.entries[id].lits[0];
            if let Err(c) = self.assign(lit, Some(id)) {
                return Some(c);
            }
        }
        for &lit in lits {
            if let Err(c) = self.assign(!lit, None) {
                return Some(c);
            }
        }
        match self.propagate() {
            Propagation::Conflict(c) => Some(c),
            Propagation::Fixpoint => None,
        }
    }

    fn mark(&mut self, conflict: Conflict) {
        let mut stack: Vec<Var> = Vec::new();
        let need = |id: usize, entries: &mut Vec<Entry>, stack: &mut Vec<Var>| {
            entries[id].needed = true;
            stack.extend(entries[id].lits.iter().map(|l| l.var()));
        };
        match conflict {
            Conflict::Clause(id) => need(id, &mut self.entries, &mut stack),
            Conflict::Clash { lit, reason } => {
                if let Some(id) = reason {
                    need(id, &mut self.entries, &mut stack);
                }
                stack.push(lit.var());
            }
        }
        let mut touched = Vec::new();
        while let Some(v) = stack.pop() {
            if self.seen[v.index()] {
                continue;
            }
            self.seen[v.index()] = true;
            touched.push(v);
            if let Some(id) = self.reason[v.index()] {
                need(id, &mut self.entries, &mut stack);
            }
        }
        for v in touched {
            self.seen[v.index()] = false;
        }
    }

    /// RAT on the first literal: every resolvent with an active clause
    /// containing its negation is RUP.
    fn rat(&mut self, lits: &[Lit]) -> bool {
        let Some(&pivot) = lits.first() else {
            return false;
        };
        let partners: Vec<usize> = (0..self.entries.len())
            .filter(|&id| {
                let e = &self.entries[id];
                e.active && !e.tautology && e.lits.contains(&!pivot)
            })
            .collect();
        partners.into_iter().all(|id| {
            let mut resolvent = lits.to_vec();
            resolvent.extend(
                self.entries[id]
                    .lits
                    .iter()
                    .copied()
                    .filter(|&l| l != !pivot),
            );
            self.rup(&resolvent)
        })
    }
}

fn key(clause: &Clause) -> Vec<Lit> {
    let mut k = clause.lits().to_vec();
    k.sort();
    k.dedup();
    k
}

/// Verifies `proof` against `formula` and returns the clauses it used.
pub fn check_proof(formula: &Formula, proof: &[ProofLine]) -> Result<CoreLabel, DratError> {
    let max_var = proof
        .iter()
        .flat_map(|l| l.clause.iter())
        .map(|l| l.var().index() + 1)
        .max()
        .unwrap_or(0)
        .max(formula.num_vars());
    let mut checker = Checker::new(max_var);
    let mut index: HashMap<Vec<Lit>, Vec<usize>> = HashMap::new();

    for clause in formula.clauses() {
        let id = checker.push(clause);
        checker.activate(id);
        index.entry(key(clause)).or_default().push(id);
    }

    let mut steps = Vec::with_capacity(proof.len());
    let mut goal = None;
    for line in proof {
        match line.kind {
            LineKind::Addition => {
                let id = checker.push(&line.clause);
                steps.push(Step::Add(id));
                if line.clause.is_empty() {
                    goal = Some(id);
                    break;
                }
                checker.activate(id);
                index.entry(key(&line.clause)).or_default().push(id);
            }
            LineKind::Deletion => {
                let found = index.get_mut(&key(&line.clause)).and_then(|ids| ids.pop());
                match found {
                    Some(id) => {
                        checker.deactivate(id);
                        steps.push(Step::Delete(id));
                    }
                    None => {
                        log::debug!("ignoring deletion of absent clause {}", line.clause);
                        steps.push(Step::Skip);
                    }
                }
            }
        }
    }
    let goal = goal.ok_or(DratError::NoEmptyClause)?;
    checker.entries[goal].needed = true;

    for (step, &s) in steps.iter().enumerate().rev() {
        match s {
            Step::Add(id) => {
                checker.deactivate(id);
                if !checker.entries[id].needed {
                    continue;
                }
                let lits = checker.entries[id].lits.clone();
                if checker.entries[id].tautology || checker.rup(&lits) {
                    continue;
                }
                let clause = Clause::new(lits.clone()).to_string();
                return Err(if checker.rat(&lits) {
                    DratError::RatNotSupported { step, clause }
                } else {
                    DratError::NotRup { step, clause }
                });
            }
            Step::Delete(id) => checker.activate(id),
            Step::Skip => {}
        }
    }

    let core_clauses: Vec<usize> = (0..formula.num_clauses())
        .filter(|&i| checker.entries[i].needed)
        .collect();
    let core_vars = core_variables(&core_clauses, formula);
    Ok(CoreLabel {
        core_clauses,
        core_vars,
    })
}

/// Parses and checks a textual proof.
pub fn check_proof_text(formula: &Formula, proof: &str) -> Result<CoreLabel, DratError> {
    check_proof(formula, &parse_proof(proof)?)
}

/// Variables occurring in any of the clauses at `core_clauses`.
pub fn core_variables(core_clauses: &[usize], formula: &Formula) -> VarMask {
    VarMask::from_vars(
        formula.num_vars(),
        core_clauses
            .iter()
            .flat_map(|&i| formula.clauses()[i].iter().map(|l| l.var())),
    )
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("core is empty")]
    EmptyCore,
    #[error("mask covers {mask} variables, expected {expected}")]
    Length { mask: usize, expected: usize },
}

/// Uniform distribution over the core variables.
pub fn make_label_distribution(
    core_vars: &VarMask,
    num_vars: usize,
) -> Result<Vec<f64>, LabelError> {
    if core_vars.universe() != num_vars {
        return Err(LabelError::Length {
            mask: core_vars.universe(),
            expected: num_vars,
        });
    }
    let k = core_vars.count();
    if k == 0 {
        return Err(LabelError::EmptyCore);
    }
    let p = 1.0 / k as f64;
    Ok(core_vars
        .as_bools()
        .iter()
        .map(|&b| if b { p } else { 0.0 })
        .collect())
}
