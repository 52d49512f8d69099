//! The ablation harness on a small desk suite: no refocusing, refocusing
//! from an (untrained) network, and refocusing from random logits.

use std::sync::Arc;

use neurocore::bench::{run_bench, write_bench_csv, BenchConfig, BenchSettings};
use neurocore::net::init_weights;
use neurocore::planted::{planted_core, PlantedConfig};
use neurocore::refocus::Schedule;
use neurocore::rng::seeded;
use neurocore::solver::Budget;

fn main() -> anyhow::Result<()> {
    let mut rng = seeded(9);
    let suite: Vec<_> = (0..6)
        .map(|i| {
            (
                format!("planted-{i}"),
                planted_core(&PlantedConfig::hard_padding(), &mut rng).formula,
            )
        })
        .collect();
    let mut settings = BenchSettings::new(Schedule::ConflictGeometric { base: 100 });
    settings.budget = Budget::seconds(10.0);
    settings.weights = Some(Arc::new(init_weights(16, 4, 0)));
    settings.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let rows = run_bench(
        &suite,
        &[
            BenchConfig::Baseline,
            BenchConfig::Neuro,
            BenchConfig::Random,
        ],
        &settings,
    )?;
    write_bench_csv(&rows, &mut std::io::stdout().lock())?;
    Ok(())
}
