//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Seeds and tolerances are pinned below.

mod common;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use neurocore::bench::{run_bench, BenchConfig, BenchSettings, BENCH_HEADER};
use neurocore::cli;
use neurocore::cnf::{eval, Clause, Formula, Truth, Var, VarMask};
use neurocore::datagen::{run_pipeline, write_datapoint, Datapoint, PipelineConfig};
use neurocore::drat::{check_proof_text, make_label_distribution};
use neurocore::net::{
    build_graph, forward, init_weights, loss_and_grad, write_weights_file, NetworkWeights,
};
use neurocore::planted::{planted_core, random_ksat, PlantedConfig, PlantedInstance};
use neurocore::refocus::{scores_to_activities, Schedule, Trigger};
use neurocore::rng::{seeded, Rng};
use neurocore::solver::{Budget, Solver, Verdict};
use neurocore::train::{planted_datapoints, train_loop, TrainConfig};

// 1, 2
const ORACLE_SEED: u64 = 20_240_101;
const ORACLE_INSTANCES: usize = 500;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(300);
const MUTATION_SEED: u64 = 77;
const MUTATIONS: usize = 100;
// 3
const CORE_SEEDS: usize = 20;
const CORE_DATAPOINTS: usize = 100;
const CORE_SEED: u64 = 3;
const CORE_BUDGET_CONFLICTS: u64 = 30;
// 4
const FD_STEP: f64 = 1e-5;
const FD_TOLERANCE: f64 = 1e-5;
/// Gradients smaller than this are compared in absolute terms: a central
/// difference carries roundoff near eps * loss / h.
const FD_FLOOR: f64 = 1e-5;
// 5
const EQUIVARIANCE_TOLERANCE: f64 = 1e-9;
// 6
const ACTIVITY_TOLERANCE: f64 = 1e-9;
// 7
const TRAIN_INSTANCE_SEED: u64 = 7;
const TRAIN_INSTANCES: usize = 50;
const TRAIN_KL_RATIO: f64 = 0.5;
const TRAIN_MIN_CORE_MASS: f64 = 0.3;
const TRAIN_TIME_LIMIT: Duration = Duration::from_secs(600);
// 8
const ORACLE_REFOCUS_SEED: u64 = 2024;
const ORACLE_REFOCUS_INSTANCES: usize = 200;
const ORACLE_REFOCUS_MIN_REDUCTION: f64 = 0.10;
// 9
const BENCH_INSTANCES: usize = 30;
const BENCH_SEED: u64 = 9;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cli_run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = cli::run(
        std::iter::once("neurocore").chain(args.iter().copied()),
        &mut out,
    )
    .unwrap_or_else(|e| panic!("neurocore {}: {e:#}", args.join(" ")));
    (code, String::from_utf8(out).expect("utf-8 output"))
}

fn write_labelled(path: &Path, formula: &Formula, core: &[Var]) {
    let dp = Datapoint {
        core_vars: VarMask::from_vars(formula.num_vars(), core.iter().copied()),
        formula: formula.clone(),
    };
    let mut buf = Vec::new();
    write_datapoint(&dp, &mut buf).expect("in-memory write");
    fs::write(path, buf).expect("write instance");
}

struct Refutation {
    formula: Formula,
    proof: String,
    core: Vec<usize>,
}

/// Criterion 1: Solver verdicts match a DPLL oracle on random 3-SAT at the threshold.
fn solver_oracle(refutations: &mut Vec<Refutation>) -> Outcome {
    let mut rng = seeded(ORACLE_SEED);
    let mut solver_time = Duration::ZERO;
    let (mut agree, mut sat) = (0, 0);
    let mut problems = Vec::new();
    for i in 0..ORACLE_INSTANCES {
        let n = rng.random_range(10..=60);
        let f = random_ksat(n, (4.26 * n as f64).round() as usize, 3, &mut rng);
        let t = Instant::now();
        let r = Solver::new(&f).solve(&Budget::unlimited(), None);
        solver_time += t.elapsed();
        let truth = common::dpll(&f);
        match (&r.verdict, truth) {
            (Verdict::Sat(m), Some(_)) if eval(&f, m) == Truth::Satisfied => {
                agree += 1;
                sat += 1;
            }
            (Verdict::Unsat(proof), None) => {
                agree += 1;
                refutations.push(Refutation {
                    formula: f,
                    proof: proof.clone(),
                    core: Vec::new(),
                });
            }
            (v, t) => problems.push(format!(
                "#{i}: solver {} oracle sat={}",
                v.name(),
                t.is_some()
            )),
        }
    }
    check(
        agree == ORACLE_INSTANCES && solver_time < ORACLE_TIME_LIMIT,
        format!(
            "{agree}/{ORACLE_INSTANCES} verdicts agree ({sat} SAT), solver time {:.2}s (limit {}s){}",
            solver_time.as_secs_f64(),
            ORACLE_TIME_LIMIT.as_secs(),
            problems.first().map(|p| format!("; first mismatch {p}")).unwrap_or_default()
        ),
    )
}

#[derive(Debug, Clone, Copy)]
enum Mutation {
    /// Delete an original clause whose removal makes the formula SAT,
    /// before any lemma. No refutation of a satisfiable set exists.
    DeleteCritical,
    /// Drop the final empty clause.
    DropEmpty,
    /// Turn the final empty clause into a unit.
    WeakenEmpty,
    /// Replace one token with a non-literal.
    Garble,
}

fn mutate(r: &Refutation, kind: Mutation, rng: &mut Rng) -> Option<String> {
    let lines: Vec<&str> = r.proof.lines().collect();
    let last = lines.iter().rposition(|l| l.trim() == "0")?;
    let mut out: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
    match kind {
        Mutation::DeleteCritical => {
            let mut core = r.core.clone();
            core.shuffle(rng);
            let critical = core.into_iter().find(|&i| {
                let rest: Vec<usize> = (0..r.formula.num_clauses()).filter(|&j| j != i).collect();
                common::dpll(&r.formula.restrict(&rest)).is_some()
            })?;
            out.insert(0, format!("d {}", r.formula.clauses()[critical]));
        }
        Mutation::DropEmpty => {
            out.remove(last);
        }
        Mutation::WeakenEmpty => {
            let v = rng.random_range(1..=r.formula.num_vars() as i32);
            out[last] = format!("{} 0", if rng.random() { v } else { -v });
        }
        Mutation::Garble => {
            let i = rng.random_range(0..out.len());
            let mut toks: Vec<String> = out[i].split_whitespace().map(str::to_string).collect();
            let j = rng.random_range(0..toks.len());
            toks[j] = "x".into();
            out[i] = toks.join(" ");
        }
    }
    Some(out.join("\n") + "\n")
}

/// Criterion 2: Every refutation from (1) checks; single-edit mutations are rejected.
fn proof_round_trip(refutations: &mut [Refutation]) -> Outcome {
    let mut accepted = 0;
    for r in refutations.iter_mut() {
        if let Ok(label) = check_proof_text(&r.formula, &r.proof) {
            accepted += 1;
            r.core = label.core_clauses;
        }
    }
    let kinds = [
        Mutation::DeleteCritical,
        Mutation::DropEmpty,
        Mutation::WeakenEmpty,
        Mutation::Garble,
    ];
    let mut rng = seeded(MUTATION_SEED);
    let (mut tried, mut rejected, mut attempts) = (0, 0, 0);
    while tried < MUTATIONS && attempts < 50 * MUTATIONS && !refutations.is_empty() {
        attempts += 1;
        let kind = kinds[tried % kinds.len()];
        let r = refutations.choose(&mut rng).expect("nonempty");
        let Some(m) = mutate(r, kind, &mut rng) else {
            continue;
        };
        tried += 1;
        if check_proof_text(&r.formula, &m).is_err() {
            rejected += 1;
        }
    }
    check(
        !refutations.is_empty()
            && accepted == refutations.len()
            && tried == MUTATIONS
            && rejected == MUTATIONS,
        format!(
            "{accepted}/{} proofs accepted, {rejected}/{tried} mutations rejected",
            refutations.len()
        ),
    )
}

/// Criterion 3: Labelled cores of pipeline datapoints are unsatisfiable on their own.
fn core_soundness() -> Outcome {
    let mut rng = seeded(CORE_SEED);
    let seeds: Vec<Formula> = (0..CORE_SEEDS)
        .map(|_| planted_core(&PlantedConfig::hard_padding(), &mut rng).formula)
        .collect();
    let cfg = PipelineConfig {
        budget: Budget::conflicts(CORE_BUDGET_CONFLICTS),
        max_datapoints: CORE_DATAPOINTS,
        ..PipelineConfig::default()
    };
    let (emitted, stats) = run_pipeline(seeds, &cfg);
    let unsat = emitted
        .iter()
        .filter(|e| {
            let core = e.datapoint.formula.restrict(&e.core_clauses);
            Solver::new(&core)
                .solve(&Budget::unlimited(), None)
                .verdict
                .is_unsat()
        })
        .count();
    let deepest = emitted.iter().map(|e| e.depth).max().unwrap_or(0);
    check(
        emitted.len() == CORE_DATAPOINTS && unsat == CORE_DATAPOINTS && deepest >= 1,
        format!(
            "{unsat}/{} cores UNSAT on re-solve, {} splits, max depth {deepest}",
            emitted.len(),
            stats.splits
        ),
    )
}

fn jitter_biases(w: &mut NetworkWeights, rng: &mut Rng) {
    for m in [&mut w.c_update, &mut w.l_update, &mut w.v_proj] {
        for l in &mut m.layers {
            l.bias.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        }
    }
}

/// Criterion 4: Analytic gradients match central finite differences.
fn gradient_fidelity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut params = 0;
    for seed in 0..5u64 {
        let mut rng = seeded(1000 + seed);
        let f = random_ksat(4, 5, 2, &mut rng);
        let g = build_graph(&f);
        let mut w = init_weights(4, 2, seed);
        // Random biases keep pre-activations off the ReLU kink, where the
        // finite difference is not a derivative.
        jitter_biases(&mut w, &mut rng);
        let core = VarMask::from_vars(4, [Var::from_index(0), Var::from_index(2)]);
        let p = make_label_distribution(&core, 4).expect("nonempty");
        let (_, grads) = loss_and_grad(&w, &g, &p).expect("shapes");
        let analytic = grads.flat_params();
        let mut probe = w.clone();
        let mut k = 0;
        for pi in 0..w.params().len() {
            for j in 0..w.params()[pi].len() {
                let orig = w.params()[pi][j];
                probe.params_mut()[pi][j] = orig + FD_STEP;
                let plus = loss_and_grad(&probe, &g, &p).expect("shapes").0;
                probe.params_mut()[pi][j] = orig - FD_STEP;
                let minus = loss_and_grad(&probe, &g, &p).expect("shapes").0;
                probe.params_mut()[pi][j] = orig;
                let fd = (plus - minus) / (2.0 * FD_STEP);
                let a = analytic[k];
                worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(FD_FLOOR));
                k += 1;
            }
        }
        params += k;
    }
    check(
        worst <= FD_TOLERANCE,
        format!("max relative error {worst:.2e} over {params} parameters (tol {FD_TOLERANCE:.0e})"),
    )
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300))
        .fold(0.0, f64::max)
}

/// Criterion 5: Forward is equivariant under variable renaming and invariant under
/// clause and literal order.
fn equivariance() -> Outcome {
    let mut rng = seeded(55);
    let w = init_weights(8, 3, 5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(4..30);
        let f = random_ksat(n, rng.random_range(n..4 * n), 3, &mut rng);
        let v = forward(&w, &build_graph(&f)).expect("forward");

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let renamed: Vec<Clause> = f
            .clauses()
            .iter()
            .map(|c| {
                Clause::new(
                    c.iter()
                        .map(|l| Var::from_index(perm[l.var().index()]).lit(l.is_positive()))
                        .collect(),
                )
            })
            .collect();
        let vp = forward(
            &w,
            &build_graph(&Formula::new(n, renamed).expect("in range")),
        )
        .expect("forward");
        let back: Vec<f64> = (0..n).map(|i| vp[perm[i]]).collect();
        worst = worst.max(max_rel(&v, &back));

        let mut shuffled: Vec<Clause> = f
            .clauses()
            .iter()
            .map(|c| {
                let mut lits = c.lits().to_vec();
                lits.shuffle(&mut rng);
                Clause::new(lits)
            })
            .collect();
        shuffled.shuffle(&mut rng);
        let vs = forward(
            &w,
            &build_graph(&Formula::new(n, shuffled).expect("in range")),
        )
        .expect("forward");
        worst = worst.max(max_rel(&v, &vs));
    }
    check(
        worst <= EQUIVARIANCE_TOLERANCE,
        format!(
            "max relative deviation {worst:.2e} on 20 graphs (tol {EQUIVARIANCE_TOLERANCE:.0e})"
        ),
    )
}

/// Criterion 6: Uniform scores give every graph variable exactly kappa, and the three
/// schedules fire at their stated points.
fn refocus_algebra() -> Outcome {
    let f = random_ksat(40, 120, 3, &mut seeded(6));
    let g = build_graph(&f);
    let kappa = 1e4;
    let act = scores_to_activities(&vec![0.37; g.num_vars()], &g, f.num_vars(), 0.25, kappa)
        .expect("sizes");
    let dev = act.iter().map(|a| (a - kappa).abs()).fold(0.0, f64::max);

    let secs = |s: &str, k: usize| -> Vec<f64> {
        s.parse::<Schedule>()
            .expect("schedule")
            .triggers()
            .take(k)
            .map(|t| match t {
                Trigger::Seconds(x) => x,
                Trigger::Conflicts(c) => c as f64,
            })
            .collect()
    };
    let fixed = secs("fixed:100", 3);
    let backoff = secs("backoff:5:1.2", 4);
    let waits: Vec<f64> = backoff
        .iter()
        .scan(0.0, |prev, &t| {
            let w = t - *prev;
            *prev = t;
            Some(w)
        })
        .collect();
    let conflicts = secs("conflicts:50000", 3);
    let close = |a: &[f64], b: &[f64]| {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= 1e-9 * y.abs())
    };
    let ok = dev <= ACTIVITY_TOLERANCE
        && close(&fixed, &[100.0, 200.0, 300.0])
        && close(&waits, &[5.0, 6.0, 7.2, 8.64])
        && close(&conflicts, &[50_000.0, 150_000.0, 300_000.0]);
    check(
        ok,
        format!("activity deviation {dev:.1e}; fixed {fixed:?} s; backoff waits {waits:.3?} s; conflicts {conflicts:?}"),
    )
}

fn verified_planted(cfg: &PlantedConfig, rng: &mut Rng) -> PlantedInstance {
    let inst = planted_core(cfg, rng);
    let f = &inst.formula;
    let core = Solver::new(&f.restrict(&inst.core_clauses)).solve(&Budget::unlimited(), None);
    let padding = Solver::new(&f.restrict(&inst.padding_clauses)).solve(&Budget::unlimited(), None);
    assert!(core.verdict.is_unsat(), "planted core must be UNSAT");
    assert!(padding.verdict.is_sat(), "planted padding must be SAT");
    inst
}

/// Criterion 7: Training on the planted-core distribution halves the KL and puts the
/// held-out probability mass on the core.
fn training_signal() -> Outcome {
    let mut rng = seeded(TRAIN_INSTANCE_SEED);
    let instances: Vec<_> = (0..TRAIN_INSTANCES)
        .map(|_| verified_planted(&PlantedConfig::default(), &mut rng))
        .collect();
    let data = planted_datapoints(&instances);
    let cfg = TrainConfig {
        batch_size: 1,
        ..TrainConfig::default()
    };
    let t = Instant::now();
    let out = train_loop(&data, &cfg, |_| {}).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let first = &out.curve[0];
    let last = out.curve.last().expect("curve");
    let mass0 = first.eval.as_ref().map_or(f64::NAN, |e| e.core_mass);
    let mass = last.eval.as_ref().map_or(f64::NAN, |e| e.core_mass);
    let ratio = last.train_kl / first.train_kl;
    check(
        ratio < TRAIN_KL_RATIO && mass >= TRAIN_MIN_CORE_MASS && mass >= mass0 && elapsed < TRAIN_TIME_LIMIT,
        format!(
            "train KL {:.4} -> {:.4} (ratio {ratio:.3}, need < {TRAIN_KL_RATIO}); held-out core mass {mass0:.3} -> {mass:.3} (need >= {TRAIN_MIN_CORE_MASS}, chance 0.1); {} train / {} held out; {:.1}s; seeds {TRAIN_INSTANCE_SEED}/{}",
            first.train_kl,
            last.train_kl,
            out.train_indices.len(),
            out.eval_indices.len(),
            elapsed.as_secs_f64(),
            cfg.seed
        ),
    )
}

fn conflicts_of(output: &str) -> u64 {
    output
        .lines()
        .find_map(|l| l.strip_prefix("c conflicts "))
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .expect("stats line")
}

/// Criterion 8: Refocusing onto the true core through the CLI cuts conflicts.
fn oracle_refocus() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = seeded(ORACLE_REFOCUS_SEED);
    let (mut never, mut oracle) = (0u64, 0u64);
    for i in 0..ORACLE_REFOCUS_INSTANCES {
        let inst = planted_core(&PlantedConfig::hard_padding(), &mut rng);
        let path = dir.path().join(format!("{i:03}.cnf"));
        write_labelled(&path, &inst.formula, &inst.core_vars);
        let p = path.to_string_lossy();
        let (code, out) = cli_run(&["solve", &p, "--schedule", "never"]);
        assert_eq!(code, 20);
        never += conflicts_of(&out);
        let source = format!("oracle:{p}");
        let (code, out) = cli_run(&[
            "solve",
            &p,
            "--score-source",
            &source,
            "--schedule",
            "conflicts:100",
        ]);
        assert_eq!(code, 20);
        oracle += conflicts_of(&out);
    }
    let n = ORACLE_REFOCUS_INSTANCES as f64;
    let (a, b) = (never as f64 / n, oracle as f64 / n);
    let reduction = 1.0 - b / a;
    check(
        reduction >= ORACLE_REFOCUS_MIN_REDUCTION,
        format!(
            "mean conflicts never {a:.1}, oracle {b:.1}: {:.1}% fewer (need >= {:.0}%) over {} instances, seed {ORACLE_REFOCUS_SEED}",
            100.0 * reduction,
            100.0 * ORACLE_REFOCUS_MIN_REDUCTION,
            ORACLE_REFOCUS_INSTANCES
        ),
    )
}

/// Criterion 9: The bench subcommand covers three configs with well-formed rows, and
/// random logits are fresh at every query.
fn ablation_harness() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let suite_dir = dir.path().join("suite");
    fs::create_dir_all(&suite_dir).map_err(|e| e.to_string())?;
    let mut rng = seeded(BENCH_SEED);
    let mut suite = Vec::new();
    for i in 0..BENCH_INSTANCES {
        let inst = planted_core(&PlantedConfig::hard_padding(), &mut rng);
        let name = format!("{i:02}.cnf");
        write_labelled(&suite_dir.join(&name), &inst.formula, &inst.core_vars);
        suite.push((name, inst.formula));
    }
    let weights = dir.path().join("w.bin");
    write_weights_file(&init_weights(16, 4, BENCH_SEED), &weights).map_err(|e| e.to_string())?;
    let csv_path = dir.path().join("bench.csv");
    let (code, _) = cli_run(&[
        "bench",
        &suite_dir.to_string_lossy(),
        "--configs",
        "baseline,neuro,random",
        "--weights",
        &weights.to_string_lossy(),
        "--schedule",
        "conflicts:100",
        "--budget-seconds",
        "30",
        "--out",
        &csv_path.to_string_lossy(),
    ]);
    let csv = fs::read_to_string(&csv_path).map_err(|e| e.to_string())?;
    let mut lines = csv.lines();
    let header_ok = lines.next() == Some(BENCH_HEADER);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let well_formed = rows.iter().all(|r| {
        r.len() == 8
            && ["baseline", "neuro", "random"].contains(&r[1])
            && ["SAT", "UNSAT", "UNKNOWN"].contains(&r[2])
            && r[3].parse::<f64>().is_ok()
            && r[4..].iter().all(|x| x.parse::<u64>().is_ok())
    });
    let baseline_quiet = rows
        .iter()
        .filter(|r| r[1] == "baseline")
        .all(|r| r[7] == "0");

    let mut settings = BenchSettings::new(Schedule::ConflictGeometric { base: 100 });
    settings.budget = Budget::seconds(30.0);
    let random = run_bench(&suite, &[BenchConfig::Random], &settings).map_err(|e| e.to_string())?;
    let queries: u64 = random.iter().map(|r| r.refocus.queries).sum();
    let fresh: u64 = random.iter().map(|r| r.refocus.fresh).sum();
    check(
        code == 0 && header_ok && well_formed && baseline_quiet && rows.len() == 3 * BENCH_INSTANCES && queries > 0 && fresh == queries,
        format!(
            "{} rows for {BENCH_INSTANCES} instances x 3 configs, well formed: {well_formed}; random-logit queries {queries}, fresh {fresh}",
            rows.len()
        ),
    )
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .expect("dir")
        .map(|e| {
            let p = e.expect("entry").path();
            (
                p.file_name().expect("name").to_string_lossy().into_owned(),
                fs::read(&p).expect("file"),
            )
        })
        .collect();
    files.sort();
    files
}

/// Criterion 10: Seeded runs of solve, datagen and train are byte-identical.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    fs::create_dir_all(dir.path().join("seeds")).map_err(|e| e.to_string())?;
    let mut rng = seeded(10);
    for i in 0..4 {
        let inst = planted_core(&PlantedConfig::hard_padding(), &mut rng);
        write_labelled(
            &dir.path().join(format!("seeds/{i}.cnf")),
            &inst.formula,
            &inst.core_vars,
        );
    }

    let solve = [
        "solve",
        &p("seeds/0.cnf"),
        "--score-source",
        "random:5",
        "--schedule",
        "conflicts:20",
    ];
    let solve_same = cli_run(&solve) == cli_run(&solve);

    let datagen = |out: &str| {
        cli_run(&[
            "datagen",
            &p("seeds"),
            "--out",
            &p(out),
            "--budget-conflicts",
            "30",
            "--max-datapoints",
            "20",
            "--workers",
            "1",
            "--no-timings",
        ])
    };
    let (da, db) = (datagen("data_a"), datagen("data_b"));
    let datagen_same =
        da == db && dir_bytes(&dir.path().join("data_a")) == dir_bytes(&dir.path().join("data_b"));

    let train = |out: &str| {
        cli_run(&[
            "train",
            &p("data_a"),
            "--out",
            &p(out),
            "--d",
            "8",
            "--iterations",
            "2",
            "--epochs",
            "3",
            "--seed",
            "4",
        ])
    };
    let (ta, tb) = (train("model_a"), train("model_b"));
    let train_same = ta == tb
        && dir_bytes(&dir.path().join("model_a")) == dir_bytes(&dir.path().join("model_b"));
    check(
        solve_same && datagen_same && train_same,
        format!("solve identical: {solve_same}; datagen (1 worker) identical: {datagen_same}; train identical: {train_same}"),
    )
}

fn main() {
    let started = Instant::now();
    let mut refutations = Vec::new();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "[{tag}] criterion {id:2} {name}: {detail} ({:.1}s)",
            t.elapsed().as_secs_f64()
        );
        results.push((id, name, outcome));
    };
    record(1, "solver oracle equivalence", &mut || {
        solver_oracle(&mut refutations)
    });
    record(2, "proof round-trip", &mut || {
        proof_round_trip(&mut refutations)
    });
    record(3, "core soundness", &mut core_soundness);
    record(4, "gradient fidelity", &mut gradient_fidelity);
    record(5, "equivariance", &mut equivariance);
    record(6, "refocus algebra", &mut refocus_algebra);
    record(7, "training signal", &mut training_signal);
    record(8, "oracle refocus effect", &mut oracle_refocus);
    record(9, "ablation harness", &mut ablation_harness);
    record(10, "determinism", &mut determinism);

    let failed: Vec<u32> = results
        .iter()
        .filter(|r| r.2.is_err())
        .map(|r| r.0)
        .collect();
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
