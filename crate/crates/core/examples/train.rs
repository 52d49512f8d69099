//! Train the core predictor on planted-core instances and print the loss
//! curve.
//!
//!     cargo run --release --example train -- [instances] [epochs]

use neurocore::planted::{planted_core, PlantedConfig};
use neurocore::rng::seeded;
use neurocore::train::{planted_datapoints, train_loop, write_losses_csv, TrainConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(30);
    let mut rng = seeded(7);
    let instances: Vec<_> = (0..n)
        .map(|_| planted_core(&PlantedConfig::default(), &mut rng))
        .collect();
    let data = planted_datapoints(&instances);
    let cfg = TrainConfig {
        epochs,
        batch_size: 1,
        ..TrainConfig::default()
    };
    let outcome = train_loop(&data, &cfg, |row| {
        let mass = row.eval.as_ref().map_or(f64::NAN, |e| e.core_mass);
        println!(
            "epoch {:3}  train KL {:.4}  held-out core mass {mass:.3}",
            row.epoch, row.train_kl
        );
    })?;
    let mut csv = Vec::new();
    write_losses_csv(&outcome.curve, &mut csv)?;
    std::fs::write("losses.csv", csv)?;
    println!(
        "{} train / {} held out; curve in losses.csv",
        outcome.train_indices.len(),
        outcome.eval_indices.len()
    );
    Ok(())
}
