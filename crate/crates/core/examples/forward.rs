//! Run the message-passing network on a small formula and print its
//! per-variable core probabilities.

use neurocore::cnf::Formula;
use neurocore::net::{build_graph, forward, init_weights, softmax};

fn main() -> anyhow::Result<()> {
    // (x1 | x2 | x3) & (x1 | !x2 | !x3)
    let f = Formula::from_dimacs_clauses(3, &[&[1, 2, 3], &[1, -2, -3]]);
    let g = build_graph(&f);
    println!(
        "graph: {} clauses x {} literal columns, {} cells",
        g.num_clauses(),
        2 * g.num_vars(),
        g.num_cells()
    );
    for &(row, col) in g.cells() {
        println!("  G[{row}, {col}] = 1");
    }

    let w = init_weights(8, 3, 42);
    println!(
        "d = {}, T = {}, {} parameters",
        w.d,
        w.iterations,
        w.num_params()
    );
    let v = forward(&w, &g)?;
    let p = softmax(&v);
    for (i, (vi, pi)) in v.iter().zip(&p).enumerate() {
        println!("  x{}: logit {vi:+.4}, p {pi:.4}", i + 1);
    }
    Ok(())
}
