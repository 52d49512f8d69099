//! Instance generators: uniform random k-SAT, pigeonhole formulas and the
//! planted-core distribution used for training and refocusing experiments.
//!
//! A planted-core instance hides a small unsatisfiable formula over a few
//! variables inside satisfiable random 3-SAT padding over all variables.
//! Its core variables are known by construction.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::cnf::{Clause, Formula, Lit, Origin, Var};
use crate::rng::Rng;

/// Random clause of `k` distinct variables drawn from `vars`.
fn random_clause(vars: &[Var], k: usize, rng: &mut Rng) -> Clause {
    let picked: Vec<Var> = vars.choose_multiple(rng, k).copied().collect();
    Clause::new(picked.into_iter().map(|v| v.lit(rng.random())).collect())
}

/// Uniform random k-SAT with `num_clauses` clauses over `num_vars` variables.
pub fn random_ksat(num_vars: usize, num_clauses: usize, k: usize, rng: &mut Rng) -> Formula {
    assert!(k <= num_vars);
    let vars: Vec<Var> = (0..num_vars).map(Var::from_index).collect();
    let clauses = (0..num_clauses)
        .map(|_| random_clause(&vars, k, rng))
        .collect();
    Formula::new(num_vars, clauses)
        .expect("generated literals are in range")
        .with_origin(Origin {
            source: format!("random-{}sat-{}-{}", k, num_vars, num_clauses),
            ..Origin::default()
        })
}

/// Random 3-SAT at clause/variable ratio `ratio` (clause count rounded).
pub fn random_3sat(num_vars: usize, ratio: f64, rng: &mut Rng) -> Formula {
    random_ksat(num_vars, (ratio * num_vars as f64).round() as usize, 3, rng)
}

/// `holes + 1` pigeons into `holes` holes. Unsatisfiable, and hard for
/// resolution, which makes it a convenient source of long searches.
pub fn pigeonhole(holes: usize) -> Formula {
    let pigeons = holes + 1;
    let var = |p: usize, h: usize| Var::from_index(p * holes + h);
    let mut clauses = Vec::new();
    for p in 0..pigeons {
        clauses.push(Clause::new(
            (0..holes).map(|h| var(p, h).positive()).collect(),
        ));
    }
    for h in 0..holes {
        for p in 0..pigeons {
            for q in p + 1..pigeons {
                clauses.push(Clause::new(vec![
                    var(p, h).negative(),
                    var(q, h).negative(),
                ]));
            }
        }
    }
    Formula::new(pigeons * holes, clauses)
        .expect("in range")
        .with_origin(Origin {
            source: format!("php-{}", holes),
            ..Origin::default()
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedConfig {
    pub num_vars: usize,
    pub core_vars: usize,
    /// Literals per core clause.
    pub core_clause_len: usize,
    /// Padding clauses per variable.
    pub padding_ratio: f64,
    /// Require padding clauses to be satisfied by both the hidden assignment
    /// and its complement, which hides the assignment from literal counts and
    /// makes the padding much harder to search.
    pub balanced_padding: bool,
    /// Draw padding variables so that every variable's total occurrence
    /// count (core plus padding) is about equal, removing degree as a cue
    /// for core membership.
    pub balance_degrees: bool,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            num_vars: 50,
            core_vars: 5,
            core_clause_len: 3,
            padding_ratio: 4.0,
            balanced_padding: false,
            balance_degrees: true,
        }
    }
}

impl PlantedConfig {
    /// Instances whose padding takes a few hundred conflicts to search, so a
    /// solver spends real effort before it finds the core: 150 variables,
    /// a 5-variable core of 5-literal clauses and balanced padding.
    pub fn hard_padding() -> PlantedConfig {
        PlantedConfig {
            num_vars: 150,
            core_vars: 5,
            core_clause_len: 5,
            padding_ratio: 4.5,
            balanced_padding: true,
            balance_degrees: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub formula: Formula,
    /// Planted core variables, ascending.
    pub core_vars: Vec<Var>,
    /// Indices of the planted core clauses in `formula`.
    pub core_clauses: Vec<usize>,
    /// Indices of the padding clauses in `formula`.
    pub padding_clauses: Vec<usize>,
}

/// Whether `clauses` over the variables in `vars` are jointly unsatisfiable,
/// by enumeration of all `2^|vars|` assignments.
pub fn brute_force_unsat(vars: &[Var], clauses: &[Clause]) -> bool {
    assert!(vars.len() <= 20);
    let pos = |v: Var| {
        vars.iter()
            .position(|&w| w == v)
            .expect("clause var in set")
    };
    (0u32..1 << vars.len()).all(|bits| {
        clauses.iter().any(|c| {
            c.iter()
                .all(|l| ((bits >> pos(l.var())) & 1 == 1) != l.is_positive())
        })
    })
}

/// Draws one planted-core instance.
pub fn planted_core(cfg: &PlantedConfig, rng: &mut Rng) -> PlantedInstance {
    assert!(cfg.core_vars >= cfg.core_clause_len && cfg.core_vars <= cfg.num_vars);
    assert!(cfg.core_vars <= 20);
    let all: Vec<Var> = (0..cfg.num_vars).map(Var::from_index).collect();
    let mut core_vars: Vec<Var> = all.choose_multiple(rng, cfg.core_vars).copied().collect();
    core_vars.sort();

    // Track which assignments of the core variables survive the clauses so
    // far; stop once none do.
    let pos = |v: Var| core_vars.binary_search(&v).expect("core var");
    let mut alive = vec![true; 1 << cfg.core_vars];
    let mut remaining = alive.len();
    let mut core: Vec<Clause> = Vec::new();
    while remaining > 0 {
        let c = random_clause(&core_vars, cfg.core_clause_len, rng);
        if core.contains(&c) {
            continue;
        }
        for (bits, a) in alive.iter_mut().enumerate() {
            if *a
                && c.iter()
                    .all(|l| ((bits >> pos(l.var())) & 1 == 1) != l.is_positive())
            {
                *a = false;
                remaining -= 1;
            }
        }
        core.push(c);
    }

    // Padding is satisfied by a hidden assignment, so it is satisfiable on
    // its own; it may mention core variables.
    let hidden: Vec<bool> = (0..cfg.num_vars).map(|_| rng.random()).collect();
    let sat_by_hidden = |c: &Clause| {
        let agree = |l: &Lit| hidden[l.var().index()] == l.is_positive();
        c.iter().any(agree) && (!cfg.balanced_padding || !c.iter().all(agree))
    };
    let num_padding = (cfg.padding_ratio * cfg.num_vars as f64).round() as usize;
    let mut core_degree = vec![0usize; cfg.num_vars];
    for l in core.iter().flat_map(|c| c.iter()) {
        core_degree[l.var().index()] += 1;
    }
    let target = (core_degree.iter().sum::<usize>() + 3 * num_padding) as f64 / cfg.num_vars as f64;
    let weight = |v: &Var| {
        if cfg.balance_degrees {
            (target - core_degree[v.index()] as f64).max(0.05)
        } else {
            1.0
        }
    };
    let mut padding = Vec::with_capacity(num_padding);
    while padding.len() < num_padding {
        let picked: Vec<Var> = all
            .choose_multiple_weighted(rng, 3, weight)
            .expect("positive weights")
            .copied()
            .collect();
        let c = Clause::new(picked.into_iter().map(|v| v.lit(rng.random())).collect());
        if sat_by_hidden(&c) {
            padding.push(c);
        }
    }

    let mut tagged: Vec<(bool, Clause)> = core
        .into_iter()
        .map(|c| (true, c))
        .chain(padding.into_iter().map(|c| (false, c)))
        .collect();
    tagged.shuffle(rng);
    let core_clauses = tagged
        .iter()
        .enumerate()
        .filter(|(_, (is_core, _))| *is_core)
        .map(|(i, _)| i)
        .collect();
    let padding_clauses = tagged
        .iter()
        .enumerate()
        .filter(|(_, (is_core, _))| !*is_core)
        .map(|(i, _)| i)
        .collect();
    let formula = Formula::new(cfg.num_vars, tagged.into_iter().map(|(_, c)| c).collect())
        .expect("in range")
        .with_origin(Origin {
            source: "planted-core".to_string(),
            core: Some(core_vars.clone()),
            ..Origin::default()
        });
    PlantedInstance {
        formula,
        core_vars,
        core_clauses,
        padding_clauses,
    }
}
