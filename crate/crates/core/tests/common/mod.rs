//! Reference implementations shared by the integration tests. Nothing here
//! uses the library's solver.

#![allow(dead_code)]

use neurocore::cnf::{Formula, Lit};

/// Plain recursive DPLL with unit propagation. Returns a model if satisfiable.
pub fn dpll(f: &Formula) -> Option<Vec<bool>> {
    let clauses: Vec<Vec<i32>> = f
        .clauses()
        .iter()
        .map(|c| c.iter().map(|l: &Lit| l.to_dimacs()).collect())
        .collect();
    let mut assign = vec![0i8; f.num_vars() + 1];
    if search(&clauses, &mut assign) {
        Some(assign[1..].iter().map(|&v| v > 0).collect())
    } else {
        None
    }
}

fn value(assign: &[i8], lit: i32) -> i8 {
    let v = assign[lit.unsigned_abs() as usize];
    if lit > 0 {
        v
    } else {
        -v
    }
}

fn search(clauses: &[Vec<i32>], assign: &mut Vec<i8>) -> bool {
    let saved = assign.clone();
    loop {
        let mut unit = None;
        let mut all_sat = true;
        for c in clauses {
            let mut free = None;
            let mut n_free = 0;
            let mut sat = false;
            for &l in c {
                match value(assign, l) {
                    1 => {
                        sat = true;
                        break;
                    }
                    0 => {
                        n_free += 1;
                        free = Some(l);
                    }
                    _ => {}
                }
            }
            if sat {
                continue;
            }
            all_sat = false;
            match n_free {
                0 => {
                    *assign = saved;
                    return false;
                }
                1 => {
                    unit = free;
                    break;
                }
                _ => {}
            }
        }
        if all_sat {
            return true;
        }
        match unit {
            Some(l) => assign[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 },
            None => break,
        }
    }
    let var = (1..assign.len()).find(|&v| assign[v] == 0);
    let Some(var) = var else {
        *assign = saved;
        return false;
    };
    for val in [1, -1] {
        assign[var] = val;
        if search(clauses, assign) {
            return true;
        }
        assign[var] = 0;
    }
    *assign = saved;
    false
}

/// Whether `model` (one bool per variable) satisfies every clause.
pub fn satisfies(f: &Formula, model: &[bool]) -> bool {
    f.clauses()
        .iter()
        .all(|c| c.iter().any(|l| model[l.var().index()] == l.is_positive()))
}
