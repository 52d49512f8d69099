//! Refocusing with a perfect predictor: activities are reset toward the
//! planted core every time the conflict schedule fires.
//!
//!     cargo run --release --example refocus_oracle -- [instances]

use neurocore::cnf::VarMask;
use neurocore::planted::{planted_core, PlantedConfig};
use neurocore::refocus::{solve_with, RefocusConfig, Schedule, ScoreSource};
use neurocore::rng::seeded;
use neurocore::solver::{Budget, Solver};

fn main() -> anyhow::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(50);
    let cfg = PlantedConfig::hard_padding();
    let mut rng = seeded(2024);
    let (mut never, mut oracle, mut queries) = (0u64, 0u64, 0u64);
    for _ in 0..n {
        let inst = planted_core(&cfg, &mut rng);
        let f = &inst.formula;
        never += Solver::new(f)
            .solve(&Budget::unlimited(), None)
            .stats
            .conflicts;

        let mask = VarMask::from_vars(f.num_vars(), inst.core_vars.iter().copied());
        let rc = RefocusConfig::new(
            Schedule::ConflictGeometric { base: 100 },
            ScoreSource::Oracle(mask),
        );
        let (r, stats) = solve_with(&mut Solver::new(f), &Budget::unlimited(), rc)?;
        assert!(r.verdict.is_unsat());
        oracle += r.stats.conflicts;
        queries += stats.queries;
    }
    let (a, b) = (never as f64 / n as f64, oracle as f64 / n as f64);
    println!(
        "{n} instances: mean conflicts never {a:.1}, oracle {b:.1} ({:.1}% fewer)",
        100.0 * (1.0 - b / a)
    );
    println!("{queries} refocus queries in total");
    Ok(())
}
