pub mod bench;
pub mod cli;
pub mod cnf;
pub mod datagen;
pub mod drat;
pub mod net;
pub mod planted;
pub mod refocus;
pub mod rng;
pub mod solver;
pub mod train;
