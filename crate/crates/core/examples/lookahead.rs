//! Pick a decimation variable with the March-style lookahead and split the
//! formula on it.

use neurocore::datagen::{decimate, lookahead_branch, WorkItem, DEFAULT_CANDIDATES};
use neurocore::planted::random_3sat;
use neurocore::rng::seeded;

fn main() -> anyhow::Result<()> {
    let f = random_3sat(80, 4.26, &mut seeded(11));
    let la = lookahead_branch(&f, DEFAULT_CANDIDATES)?;
    println!(
        "branch on {} (score {}), {} failed literals forced",
        la.var,
        la.score,
        la.forced.len()
    );

    let (pos, neg) = decimate(&WorkItem::root(f), la.var)?;
    for child in [&pos, &neg] {
        let lineage: Vec<String> = child.lineage.iter().map(|l| l.to_string()).collect();
        println!(
            "child depth {} lineage [{}]: {} clauses",
            child.depth,
            lineage.join(" "),
            child.formula.num_clauses()
        );
    }
    Ok(())
}
