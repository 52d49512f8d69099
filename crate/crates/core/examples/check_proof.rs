//! Emit a DRAT proof for an unsatisfiable formula, check it backward, and
//! read off the unsat core it used.

use neurocore::cnf::Clause;
use neurocore::drat::check_proof_text;
use neurocore::planted::{planted_core, PlantedConfig};
use neurocore::rng::seeded;
use neurocore::solver::{Budget, Solver, Verdict};

fn main() {
    let inst = planted_core(&PlantedConfig::default(), &mut seeded(3));
    let f = &inst.formula;
    let result = Solver::new(f).solve(&Budget::unlimited(), None);
    let Verdict::Unsat(proof) = result.verdict else {
        panic!("planted instances are unsatisfiable");
    };
    println!(
        "proof: {} lines, {} bytes",
        proof.lines().count(),
        proof.len()
    );

    let label = check_proof_text(f, &proof).expect("solver proofs verify");
    println!(
        "VERIFIED, core: {} clauses, {} vars",
        label.core_clauses.len(),
        label.core_vars.count()
    );
    let planted: Vec<u32> = inst.core_vars.iter().map(|v| v.dimacs()).collect();
    let found: Vec<u32> = label.core_vars.iter().map(|v| v.dimacs()).collect();
    println!("planted core vars {planted:?}");
    println!("checked core vars {found:?}");

    // A proof that skips straight to the empty clause is not RUP here.
    match check_proof_text(f, "0\n") {
        Ok(_) => println!("unexpected: bogus proof accepted"),
        Err(e) => println!("bogus proof rejected: {e}"),
    }
    let core: Vec<Clause> = label
        .core_clauses
        .iter()
        .map(|&i| f.clauses()[i].clone())
        .collect();
    println!("first core clause: {}", core[0]);
}
