//! Solve a DIMACS file, or a random 3-SAT instance near the threshold.
//!
//!     cargo run --release --example solve -- [file.cnf]

use neurocore::cnf::{eval, parse_dimacs, Truth};
use neurocore::planted::random_3sat;
use neurocore::rng::seeded;
use neurocore::solver::{Budget, Solver, Verdict};

fn main() -> anyhow::Result<()> {
    let formula = match std::env::args().nth(1) {
        Some(path) => parse_dimacs(&std::fs::read(&path)?)?,
        None => random_3sat(150, 4.26, &mut seeded(1)),
    };
    println!(
        "{} vars, {} clauses",
        formula.num_vars(),
        formula.num_clauses()
    );

    let result = Solver::new(&formula).solve(&Budget::seconds(60.0), None);
    let s = result.stats;
    println!(
        "{} in {:.3}s: {} conflicts, {} decisions, {} propagations, {} restarts",
        result.verdict.name(),
        result.seconds,
        s.conflicts,
        s.decisions,
        s.propagations,
        s.restarts
    );
    match &result.verdict {
        Verdict::Sat(model) => assert_eq!(eval(&formula, model), Truth::Satisfied),
        Verdict::Unsat(proof) => println!("proof: {} lines", proof.lines().count()),
        Verdict::Unknown(why) => println!("gave up: {why:?}"),
    }
    Ok(())
}
