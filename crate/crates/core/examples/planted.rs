//! Write planted-core instances as `.cnf` files with `c core ... 0` labels,
//! ready for `neurocore datagen`, `train`, `bench` or `solve --score-source
//! oracle:<file>`.
//!
//!     cargo run --release --example planted -- <dir> [count] [hard]

use std::fs;
use std::path::PathBuf;

use neurocore::cnf::VarMask;
use neurocore::datagen::{write_datapoint, Datapoint};
use neurocore::planted::{planted_core, PlantedConfig};
use neurocore::rng::seeded;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "planted".into()));
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let cfg = match args.next().as_deref() {
        Some("hard") => PlantedConfig::hard_padding(),
        _ => PlantedConfig::default(),
    };
    fs::create_dir_all(&dir)?;
    let mut rng = seeded(7);
    for i in 0..count {
        let inst = planted_core(&cfg, &mut rng);
        let dp = Datapoint {
            core_vars: VarMask::from_vars(inst.formula.num_vars(), inst.core_vars.iter().copied()),
            formula: inst.formula,
        };
        let mut buf = Vec::new();
        write_datapoint(&dp, &mut buf)?;
        fs::write(dir.join(format!("planted-{i:03}.cnf")), buf)?;
    }
    println!("wrote {count} instances to {}", dir.display());
    Ok(())
}
