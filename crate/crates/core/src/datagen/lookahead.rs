//! March-style lookahead branching.
//!
//! Each candidate variable is tried both ways with unit propagation from the
//! formula's root state. With `p+` and `p-` the number of literals each side
//! implies, the score is `p+ * p- + p+ + p-`. A side that conflicts forces the
//! other polarity, which is asserted into the root state before scanning
//! continues; the scan repeats until a pass finds no new failed literal.

use thiserror::Error;

use crate::cnf::{Formula, Lit, Var};

pub const DEFAULT_CANDIDATES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookaheadError {
    #[error("no free variables")]
    NoFreeVariables,
    #[error("both polarities of {0} fail; the formula is unsatisfiable")]
    Contradiction(Var),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lookahead {
    pub var: Var,
    pub score: f64,
    /// Failed-literal consequences asserted while scanning, in order.
    pub forced: Vec<Lit>,
}

/// Counter-free unit propagation over occurrence lists: clauses containing
/// the falsified literal are rescanned in full. Adequate for lookahead on
/// formulas of a few thousand clauses.
struct Propagator<'a> {
    formula: &'a Formula,
    /// Clause indices per literal code.
    occurs: Vec<Vec<u32>>,
    value: Vec<Option<bool>>,
    trail: Vec<Lit>,
}

impl<'a> Propagator<'a> {
    fn new(formula: &'a Formula) -> Propagator<'a> {
        let n = formula.num_vars();
        let mut occurs = vec![Vec::new(); 2 * n];
        for (i, c) in formula.clauses().iter().enumerate() {
            for l in c.iter() {
                occurs[l.code()].push(i as u32);
            }
        }
        Propagator {
            formula,
            occurs,
            value: vec![None; n],
            trail: Vec::new(),
        }
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value[l.var().index()].map(|v| v == l.is_positive())
    }

    fn assign(&mut self, l: Lit) {
        self.value[l.var().index()] = Some(l.is_positive());
        self.trail.push(l);
    }

    fn undo_to(&mut self, len: usize) {
        for l in self.trail.drain(len..) {
            self.value[l.var().index()] = None;
        }
    }

    /// Propagates everything on the trail from `from`. Returns false on conflict.
    fn propagate_from(&mut self, mut head: usize) -> bool {
        while head < self.trail.len() {
            let falsified = !self.trail[head];
            head += 1;
            for k in 0..self.occurs[falsified.code()].len() {
                let ci = self.occurs[falsified.code()][k] as usize;
                let mut unassigned = None;
                let mut free = 0;
                let mut satisfied = false;
                for &l in self.formula.clauses()[ci].iter() {
                    match self.lit_value(l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        None => {
                            free += 1;
                            unassigned = Some(l);
                        }
                        Some(false) => {}
                    }
                }
                if satisfied {
                    continue;
                }
                match free {
                    0 => return false,
                    1 => self.assign(unassigned.expect("one free literal")),
                    _ => {}
                }
            }
        }
        true
    }

    /// Asserts unit clauses and propagates. Returns false on conflict.
    fn root(&mut self) -> bool {
        for c in self.formula.clauses() {
            match c.lits() {
                [] => return false,
                [l] => match self.lit_value(*l) {
                    Some(false) => return false,
                    Some(true) => {}
                    None => self.assign(*l),
                },
                _ => {}
            }
        }
        self.propagate_from(0)
    }

    /// Literals implied by assuming `l`, or `None` on conflict. State is
    /// restored afterwards.
    fn probe(&mut self, l: Lit) -> Option<usize> {
        let mark = self.trail.len();
        self.assign(l);
        let ok = self.propagate_from(mark);
        let implied = self.trail.len() - mark - 1;
        self.undo_to(mark);
        ok.then_some(implied)
    }
}

/// Picks a branch variable for `formula` among the `candidates` free
/// variables with the most occurrences.
pub fn lookahead_branch(formula: &Formula, candidates: usize) -> Result<Lookahead, LookaheadError> {
    let mut p = Propagator::new(formula);
    if !p.root() {
        let v = formula
            .clauses()
            .iter()
            .find_map(|c| c.lits().first().map(|l| l.var()))
            .unwrap_or(Var::from_index(0));
        return Err(LookaheadError::Contradiction(v));
    }
    let mut forced = Vec::new();
    loop {
        let mut free: Vec<Var> = (0..formula.num_vars())
            .map(Var::from_index)
            .filter(|v| p.value[v.index()].is_none())
            .collect();
        if free.is_empty() {
            return Err(LookaheadError::NoFreeVariables);
        }
        let count =
            |v: &Var| p.occurs[v.positive().code()].len() + p.occurs[v.negative().code()].len();
        free.sort_by(|a, b| count(b).cmp(&count(a)).then(a.cmp(b)));
        free.truncate(candidates.max(1));

        let mut best: Option<(f64, Var)> = None;
        let mut failed = false;
        for v in free {
            if p.value[v.index()].is_some() {
                continue;
            }
            let pos = p.probe(v.positive());
            let neg = p.probe(v.negative());
            let force = match (pos, neg) {
                (None, None) => return Err(LookaheadError::Contradiction(v)),
                (None, Some(_)) => Some(v.negative()),
                (Some(_), None) => Some(v.positive()),
                (Some(a), Some(b)) => {
                    let (a, b) = (a as f64, b as f64);
                    let score = a * b + a + b;
                    if best.is_none_or(|(s, bv)| score > s || (score == s && v < bv)) {
                        best = Some((score, v));
                    }
                    None
                }
            };
            if let Some(l) = force {
                let mark = p.trail.len();
                p.assign(l);
                if !p.propagate_from(mark) {
                    return Err(LookaheadError::Contradiction(v));
                }
                forced.push(l);
                failed = true;
            }
        }
        if !failed {
            let (score, var) = best.expect("at least one candidate scored");
            return Ok(Lookahead { var, score, forced });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefers_the_propagating_variable() {
        let f = Formula::from_dimacs_clauses(5, &[&[-1, 2], &[-1, 3], &[4, 5]]);
        let la = lookahead_branch(&f, DEFAULT_CANDIDATES).unwrap();
        assert_eq!(la.var, Var::from_index(0));
        assert_eq!(la.score, 2.0);
        assert!(la.forced.is_empty());
    }

    #[test]
    fn failed_literal_is_forced_not_returned() {
        // x1 = true conflicts through x2 and not x2.
        let f = Formula::from_dimacs_clauses(4, &[&[-1, 2], &[-1, -2], &[3, 4], &[-3, 4]]);
        let la = lookahead_branch(&f, DEFAULT_CANDIDATES).unwrap();
        assert_eq!(la.forced[0], Var::from_index(0).negative());
        assert_ne!(la.var, Var::from_index(0));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let f = Formula::from_dimacs_clauses(4, &[&[1, 2], &[3, 4], &[-1, -2], &[-3, -4]]);
        assert_eq!(
            lookahead_branch(&f, DEFAULT_CANDIDATES).unwrap().var,
            Var::from_index(0)
        );
    }

    #[test]
    fn ties_ignore_occurrence_order() {
        // x3 occurs most, but every score is 0, so x1 wins the tie.
        let f = Formula::from_dimacs_clauses(
            4,
            &[
                &[1, 2, 3],
                &[-2, 3, 4],
                &[2, -3, 4],
                &[-3, -4, 2],
                &[3, 4, -2],
            ],
        );
        assert_eq!(
            lookahead_branch(&f, DEFAULT_CANDIDATES).unwrap().var,
            Var::from_index(0)
        );
    }

    #[test]
    fn errors() {
        let f = Formula::from_dimacs_clauses(1, &[&[1]]);
        assert_eq!(
            lookahead_branch(&f, 8),
            Err(LookaheadError::NoFreeVariables)
        );
        let f = Formula::from_dimacs_clauses(2, &[&[1, 2], &[1, -2], &[-1, 2], &[-1, -2]]);
        assert!(matches!(
            lookahead_branch(&f, 8),
            Err(LookaheadError::Contradiction(_))
        ));
        let f = Formula::from_dimacs_clauses(1, &[&[1], &[-1]]);
        assert!(matches!(
            lookahead_branch(&f, 8),
            Err(LookaheadError::Contradiction(_))
        ));
    }

    #[test]
    fn candidate_cap_restricts_to_frequent_vars() {
        // x3 occurs most, so a cap of one only considers it.
        let f = Formula::from_dimacs_clauses(3, &[&[3, 1], &[3, 2], &[-3, 1], &[-3, 2], &[1, 2]]);
        assert_eq!(lookahead_branch(&f, 1).unwrap().var, Var::from_index(2));
    }
}
