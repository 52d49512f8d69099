//! The `neurocore` command line.
//!
//! Everything a subcommand prints goes to the writer handed to [`run`], so
//! tests and the binary share one code path. Timing goes to the log only,
//! which keeps stdout identical across runs with the same seed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::bench::{run_bench, write_bench_csv, BenchConfig, BenchSettings};
use crate::cnf::{parse_dimacs, Formula, Var, VarMask};
use crate::datagen::{run_pipeline_with, DatasetWriter, PipelineConfig, DEFAULT_CANDIDATES};
use crate::drat::check_proof_text;
use crate::net::{read_weights_file, write_weights_file};
use crate::refocus::{solve_with, RefocusConfig, Schedule, ScoreSource, DESK_CELL_BUDGET};
use crate::solver::{Budget, Solver, SolverOptions, Verdict};
use crate::train::{train_loop, write_losses_csv, TrainConfig};

pub const THREADS_ENV: &str = "NEUROCORE_THREADS";

/// Schedule used when a score source is given without `--schedule`.
pub const DEFAULT_SCHEDULE: &str = "conflicts:50000";

#[derive(Debug, Parser)]
#[command(
    name = "neurocore",
    version,
    about = "CDCL solving with learned refocusing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one DIMACS file.
    Solve(SolveArgs),
    /// Turn seed formulas into a labelled dataset.
    Datagen(DatagenArgs),
    /// Train the core predictor on a dataset.
    Train(TrainArgs),
    /// Check a DRAT proof and print its core.
    Check(CheckArgs),
    /// Run solver configurations over a directory of instances.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct RefocusArgs {
    /// fixed:<s>, backoff:<s>:<gamma>, conflicts:<base> or never.
    #[arg(long)]
    pub schedule: Option<Schedule>,
    #[arg(long, default_value_t = 0.25)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e4)]
    pub kappa: f64,
    #[arg(long, default_value_t = DESK_CELL_BUDGET)]
    pub cell_budget: usize,
    /// Network weights file.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    #[arg(long)]
    pub budget_conflicts: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub refocus: RefocusArgs,
    /// net, random[:<seed>] or oracle:<file>.
    #[arg(long)]
    pub score_source: Option<String>,
    /// Write a DRAT proof here when the formula is unsatisfiable.
    #[arg(long)]
    pub proof: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatagenArgs {
    /// Directory of seed `.cnf` files.
    pub seeds: PathBuf,
    #[arg(long, default_value = "dataset")]
    pub out: PathBuf,
    /// Per-item budget; 5 s when neither budget flag is given.
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    #[arg(long)]
    pub budget_conflicts: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub verify_conflicts: u64,
    #[arg(long, default_value_t = 100)]
    pub max_datapoints: usize,
    #[arg(long, default_value_t = 20)]
    pub max_depth: usize,
    #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
    pub lookahead_candidates: usize,
    /// Defaults to $NEUROCORE_THREADS, else 1.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Record solve times as 0 so repeated runs write identical manifests.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub dataset: PathBuf,
    /// Receives `weights.bin` and `losses.csv`.
    #[arg(long, default_value = "model")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, default_value_t = 4)]
    pub iterations: usize,
    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eval_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub cnf: PathBuf,
    pub drat: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of `.cnf` instances.
    pub dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "baseline,neuro,random")]
    pub configs: Vec<String>,
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
    #[command(flatten)]
    pub refocus: RefocusArgs,
    /// Defaults to $NEUROCORE_THREADS, else 1.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Datagen(a) => cmd_datagen(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Check(a) => cmd_check(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    }
}

fn read_cnf(path: &Path) -> Result<Formula> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dimacs(&bytes).with_context(|| format!("parsing {}", path.display()))
}

/// `.cnf` files in `dir`, sorted by name.
pub fn cnf_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "cnf"));
    files.sort();
    Ok(files)
}

fn workers(flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return Ok(n.max(1));
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(|n| n.max(1))
            .with_context(|| format!("{THREADS_ENV}={s:?}")),
        Err(_) => Ok(1),
    }
}

fn budget(seconds: Option<f64>, conflicts: Option<u64>) -> Budget {
    Budget {
        max_conflicts: conflicts,
        max_seconds: seconds,
    }
}

/// Variable numbers from a `c core ... 0` line if there is one, otherwise
/// every integer in the file up to the first 0.
pub fn parse_var_list(text: &str, num_vars: usize) -> Result<VarMask> {
    let body = text
        .lines()
        .find_map(|l| l.trim_start().strip_prefix("c core"))
        .unwrap_or(text);
    let mut mask = VarMask::new(num_vars);
    for tok in body.split_whitespace() {
        let n: u32 = tok
            .parse()
            .with_context(|| format!("bad variable {tok:?}"))?;
        if n == 0 {
            break;
        }
        match Var::from_dimacs(n) {
            Some(v) if v.index() < num_vars => mask.insert(v),
            _ => bail!("variable {n} out of range 1..={num_vars}"),
        }
    }
    Ok(mask)
}

fn score_source(
    choice: Option<&str>,
    a: &RefocusArgs,
    num_vars: usize,
) -> Result<Option<ScoreSource>> {
    let net = || -> Result<ScoreSource> {
        let path = a
            .weights
            .as_ref()
            .context("score source net needs --weights")?;
        let w = read_weights_file(path).with_context(|| format!("loading {}", path.display()))?;
        Ok(ScoreSource::Network(Arc::new(w)))
    };
    let Some(choice) = choice else {
        return a.weights.as_ref().map(|_| net()).transpose();
    };
    let source = match choice.split_once(':') {
        None if choice == "net" => net()?,
        None if choice == "random" => ScoreSource::Random { seed: a.seed },
        Some(("random", s)) => ScoreSource::Random {
            seed: s.parse().with_context(|| format!("bad seed {s:?}"))?,
        },
        Some(("oracle", file)) => {
            let text = fs::read_to_string(file).with_context(|| format!("reading {file}"))?;
            ScoreSource::Oracle(parse_var_list(&text, num_vars)?)
        }
        _ => bail!("unknown score source {choice:?}"),
    };
    Ok(Some(source))
}

fn write_model(out: &mut dyn Write, model: &crate::cnf::Assignment) -> std::io::Result<()> {
    let lits: Vec<String> = model
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let n = i as i64 + 1;
            if *v == Some(false) { -n } else { n }.to_string()
        })
        .chain(std::iter::once("0".to_string()))
        .collect();
    for chunk in lits.chunks(20) {
        writeln!(out, "v {}", chunk.join(" "))?;
    }
    Ok(())
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let formula = read_cnf(&a.file)?;
    let r = &a.refocus;
    let source = score_source(a.score_source.as_deref(), r, formula.num_vars())?;
    let schedule = match (r.schedule, &source) {
        (Some(s), _) => s,
        (None, Some(_)) => DEFAULT_SCHEDULE.parse()?,
        (None, None) => Schedule::Never,
    };
    if schedule != Schedule::Never && source.is_none() {
        bail!("--schedule {schedule} needs --weights or --score-source");
    }
    let config = RefocusConfig {
        tau: r.tau,
        kappa: r.kappa,
        cell_budget: r.cell_budget,
        schedule,
        source: source.unwrap_or(ScoreSource::Random { seed: r.seed }),
    };
    let mut solver = Solver::with_options(
        &formula,
        SolverOptions {
            proof: a.proof.is_some(),
            ..SolverOptions::default()
        },
    );
    writeln!(out, "c seed {}", r.seed)?;
    writeln!(out, "c schedule {schedule}")?;
    let (result, stats) = solve_with(
        &mut solver,
        &budget(r.budget_seconds, r.budget_conflicts),
        config,
    )?;
    log::info!("solved in {:.3}s", result.seconds);
    let s = &result.stats;
    writeln!(
        out,
        "c conflicts {} decisions {} propagations {} restarts {} queries {}",
        s.conflicts, s.decisions, s.propagations, s.restarts, stats.queries
    )?;
    match &result.verdict {
        Verdict::Sat(model) => {
            writeln!(out, "s SATISFIABLE")?;
            write_model(out, model)?;
            Ok(10)
        }
        Verdict::Unsat(proof) => {
            if let Some(path) = &a.proof {
                fs::write(path, proof).with_context(|| format!("writing {}", path.display()))?;
            }
            writeln!(out, "s UNSATISFIABLE")?;
            Ok(20)
        }
        Verdict::Unknown(_) => {
            writeln!(out, "s UNKNOWN")?;
            Ok(0)
        }
    }
}

pub fn cmd_datagen(a: &DatagenArgs, out: &mut dyn Write) -> Result<i32> {
    let seeds = cnf_files(&a.seeds)?
        .iter()
        .map(|p| read_cnf(p))
        .collect::<Result<Vec<_>>>()?;
    let per_item = match (a.budget_seconds, a.budget_conflicts) {
        (None, None) => Budget::seconds(5.0),
        (s, c) => budget(s, c),
    };
    let cfg = PipelineConfig {
        budget: per_item,
        verify_budget: Budget::conflicts(a.verify_conflicts),
        workers: workers(a.workers)?,
        max_datapoints: a.max_datapoints,
        max_depth: a.max_depth,
        lookahead_candidates: a.lookahead_candidates,
    };
    let mut writer = DatasetWriter::create(&a.out, !a.no_timings)?;
    let mut failure = None;
    let stats = run_pipeline_with(seeds, &cfg, |e| {
        if failure.is_none() {
            if let Err(err) = writer.write(&e) {
                failure = Some(err);
            }
        }
    });
    if let Some(err) = failure {
        return Err(err).context("writing dataset");
    }
    let n = writer.len();
    writer.finish()?;
    writeln!(
        out,
        "items {} sat {} unsat {} unknown {} splits {} depth_limited {} rejected {} verify_failed {} emitted {}",
        stats.items,
        stats.sat,
        stats.unsat,
        stats.unknown,
        stats.splits,
        stats.depth_limited,
        stats.proof_rejected,
        stats.verify_failed,
        n
    )?;
    Ok(0)
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<i32> {
    let dataset = crate::datagen::read_dataset(&a.dataset)
        .with_context(|| format!("loading dataset {}", a.dataset.display()))?;
    let cfg = TrainConfig {
        d: a.d,
        iterations: a.iterations,
        batch_size: a.batch_size,
        epochs: a.epochs,
        lr: a.lr,
        seed: a.seed,
        eval_fraction: a.eval_fraction,
    };
    writeln!(out, "seed {} datapoints {}", a.seed, dataset.len())?;
    let mut lines = Vec::new();
    let outcome = train_loop(&dataset, &cfg, |r| {
        let eval = r
            .eval
            .as_ref()
            .map(|e| format!(" eval_kl {:.6} core_mass {:.6}", e.kl, e.core_mass))
            .unwrap_or_default();
        let line = format!("epoch {} train_kl {:.6}{eval}", r.epoch, r.train_kl);
        log::info!("{line}");
        lines.push(line);
    })?;
    for l in lines {
        writeln!(out, "{l}")?;
    }
    fs::create_dir_all(&a.out)?;
    write_weights_file(&outcome.weights, &a.out.join("weights.bin"))?;
    let mut csv = Vec::new();
    write_losses_csv(&outcome.curve, &mut csv)?;
    fs::write(a.out.join("losses.csv"), csv)?;
    Ok(0)
}

pub fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let formula = read_cnf(&a.cnf)?;
    let proof =
        fs::read_to_string(&a.drat).with_context(|| format!("reading {}", a.drat.display()))?;
    match check_proof_text(&formula, &proof) {
        Ok(label) => {
            writeln!(
                out,
                "VERIFIED, core: {} clauses, {} vars",
                label.core_clauses.len(),
                label.core_vars.count()
            )?;
            let clauses: Vec<String> = label
                .core_clauses
                .iter()
                .map(|i| (i + 1).to_string())
                .collect();
            writeln!(out, "c core clauses {}", clauses.join(" "))?;
            let vars: Vec<String> = label
                .core_vars
                .iter()
                .map(|v| v.dimacs().to_string())
                .collect();
            writeln!(out, "c core vars {}", vars.join(" "))?;
            Ok(0)
        }
        Err(e) => {
            writeln!(out, "REJECTED: {e}")?;
            Ok(1)
        }
    }
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let configs = a
        .configs
        .iter()
        .map(|c| c.parse::<BenchConfig>())
        .collect::<Result<Vec<_>, _>>()?;
    let instances = cnf_files(&a.dir)?
        .iter()
        .map(|p| {
            let name = p.file_name().expect("file").to_string_lossy().into_owned();
            read_cnf(p).map(|f| (name, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let r = &a.refocus;
    let mut settings = BenchSettings::new(match r.schedule {
        Some(s) => s,
        None => DEFAULT_SCHEDULE.parse()?,
    });
    settings.budget = match (r.budget_seconds, r.budget_conflicts) {
        (None, None) => settings.budget,
        (s, c) => budget(s, c),
    };
    settings.tau = r.tau;
    settings.kappa = r.kappa;
    settings.cell_budget = r.cell_budget;
    settings.seed = r.seed;
    settings.workers = workers(a.workers)?;
    if let Some(path) = &r.weights {
        let w = read_weights_file(path).with_context(|| format!("loading {}", path.display()))?;
        settings.weights = Some(Arc::new(w));
    }
    let rows = run_bench(&instances, &configs, &settings)?;
    let mut csv = Vec::new();
    write_bench_csv(&rows, &mut csv)?;
    fs::write(&a.out, csv).with_context(|| format!("writing {}", a.out.display()))?;
    writeln!(
        out,
        "seed {} instances {} configs {} rows {}",
        r.seed,
        instances.len(),
        configs.len(),
        rows.len()
    )?;
    Ok(0)
}
