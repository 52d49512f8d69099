//! Decimation pipeline: planted seeds solved under a small conflict budget,
//! split by lookahead when the budget runs out, and emitted as checked
//! datapoints.
//!
//!     cargo run --release --example datagen -- [out_dir]

use neurocore::datagen::{run_pipeline_with, DatasetWriter, PipelineConfig};
use neurocore::planted::{planted_core, PlantedConfig};
use neurocore::rng::seeded;
use neurocore::solver::Budget;

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "dataset".into());
    let mut rng = seeded(5);
    let seeds = (0..10)
        .map(|_| planted_core(&PlantedConfig::hard_padding(), &mut rng).formula)
        .collect();
    let cfg = PipelineConfig {
        budget: Budget::conflicts(50),
        max_datapoints: 40,
        ..PipelineConfig::default()
    };
    let mut writer = DatasetWriter::create(out.as_ref(), true)?;
    let stats = run_pipeline_with(seeds, &cfg, |e| {
        println!(
            "depth {:2}: {} clauses, core {} clauses / {} vars",
            e.depth,
            e.datapoint.formula.num_clauses(),
            e.core_clauses.len(),
            e.datapoint.core_vars.count()
        );
        writer.write(&e).expect("dataset write");
    });
    let manifest = writer.finish()?;
    println!("{stats:?}");
    println!("manifest: {}", manifest.display());
    Ok(())
}
