//! Supervised training of the core predictor.
//!
//! Batches are disjoint unions of problems. Message passing cannot cross
//! components, so one forward pass over the union equals a forward pass per
//! problem. Softmax and KL are taken per problem over its own variable
//! block, and the batch loss is the mean of the per-problem losses.

use std::io::{self, Write};
use std::ops::Range;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::datagen::Datapoint;
use crate::drat::{make_label_distribution, LabelError};
use crate::net::{
    adam_step, backward, build_graph, forward, forward_trace, init_weights, kl_loss, softmax,
    AdamConfig, ClauseLiteralGraph, NetError, NetworkWeights, OptimizerState,
};
use crate::rng::{derive, seeded};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("datapoint {index}: {source}")]
    Label { index: usize, source: LabelError },
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub d: usize,
    pub iterations: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub eval_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            d: 16,
            iterations: 4,
            batch_size: 8,
            epochs: 30,
            lr: 1e-4,
            seed: 0,
            eval_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::BadConfig(m.to_string()));
        if self.d == 0 || self.iterations == 0 || self.batch_size == 0 {
            return bad("d, iterations and batch size must be positive");
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be finite and nonnegative");
        }
        if !(0.0..1.0).contains(&self.eval_fraction) {
            return bad("eval fraction must be in [0, 1)");
        }
        Ok(())
    }
}

/// Several problems merged into one graph.
#[derive(Debug, Clone)]
pub struct Batch {
    pub graph: ClauseLiteralGraph,
    pub var_ranges: Vec<Range<usize>>,
    pub clause_ranges: Vec<Range<usize>>,
    pub labels: Vec<Vec<f64>>,
}

fn label(dp: &Datapoint, index: usize) -> Result<Vec<f64>, TrainError> {
    make_label_distribution(&dp.core_vars, dp.formula.num_vars())
        .map_err(|source| TrainError::Label { index, source })
}

/// Disjoint union of `dps`. Problem `j`'s variables occupy one contiguous
/// block; positive literal columns come first for every block, then all
/// negative ones in the same block order.
pub fn merge_batch(dps: &[&Datapoint]) -> Result<Batch, TrainError> {
    if dps.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let total_vars: usize = dps.iter().map(|d| d.formula.num_vars()).sum();
    let mut cells = Vec::new();
    let mut var_map = Vec::with_capacity(total_vars);
    let (mut var_ranges, mut clause_ranges, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    let (mut v0, mut r0) = (0usize, 0usize);
    for (j, dp) in dps.iter().enumerate() {
        let g = build_graph(&dp.formula);
        let n = g.num_vars();
        for &(r, c) in g.cells() {
            let c = c as usize;
            let col = if c < n {
                v0 + c
            } else {
                total_vars + v0 + (c - n)
            };
            cells.push(((r0 + r as usize) as u32, col as u32));
        }
        var_map.extend_from_slice(g.var_map());
        var_ranges.push(v0..v0 + n);
        clause_ranges.push(r0..r0 + g.num_clauses());
        labels.push(label(dp, j)?);
        v0 += n;
        r0 += g.num_clauses();
    }
    let graph = ClauseLiteralGraph::new(r0, total_vars, cells, var_map)?;
    Ok(Batch {
        graph,
        var_ranges,
        clause_ranges,
        labels,
    })
}

/// Mean per-problem KL of the batch and its parameter gradient.
pub fn batch_loss_and_grad(
    w: &NetworkWeights,
    batch: &Batch,
) -> Result<(f64, NetworkWeights), NetError> {
    let (v, trace) = forward_trace(w, &batch.graph)?;
    let b = batch.var_ranges.len() as f64;
    let mut dv = vec![0.0; v.len()];
    let mut loss = 0.0;
    for (range, p) in batch.var_ranges.iter().zip(&batch.labels) {
        let (l, g) = kl_loss(p, &v[range.clone()])?;
        loss += l / b;
        for (d, g) in dv[range.clone()].iter_mut().zip(g) {
            *d = g / b;
        }
    }
    let grads = backward(w, &batch.graph, &trace, &dv)?;
    Ok((loss, grads))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalReport {
    pub kl: f64,
    /// Predicted probability on the true core variables.
    pub core_mass: f64,
    pub recall_at_5: f64,
    pub recall_at_10: f64,
    pub recall_at_core: f64,
}

/// Fraction of `core` among the `k` highest scores (ties to lower index).
pub fn recall_at(scores: &[f64], core: &[bool], k: usize) -> f64 {
    let total = core.iter().filter(|&&c| c).count();
    if total == 0 {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let hit = order.iter().take(k).filter(|&&i| core[i]).count();
    hit as f64 / total as f64
}

/// Metrics for one problem's scores.
pub fn score_report(scores: &[f64], dp: &Datapoint) -> Result<EvalReport, TrainError> {
    let p = label(dp, 0)?;
    let core = dp.core_vars.as_bools();
    let (kl, _) = kl_loss(&p, scores)?;
    let q = softmax(scores);
    Ok(EvalReport {
        kl,
        core_mass: q.iter().zip(core).filter(|(_, &c)| c).map(|(x, _)| x).sum(),
        recall_at_5: recall_at(scores, core, 5),
        recall_at_10: recall_at(scores, core, 10),
        recall_at_core: recall_at(scores, core, dp.core_vars.count()),
    })
}

/// Metrics averaged over `dps`.
pub fn eval_metrics(w: &NetworkWeights, dps: &[&Datapoint]) -> Result<EvalReport, TrainError> {
    if dps.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut sum = EvalReport::default();
    for dp in dps {
        let v = forward(w, &build_graph(&dp.formula))?;
        let r = score_report(&v, dp)?;
        sum.kl += r.kl;
        sum.core_mass += r.core_mass;
        sum.recall_at_5 += r.recall_at_5;
        sum.recall_at_10 += r.recall_at_10;
        sum.recall_at_core += r.recall_at_core;
    }
    let n = dps.len() as f64;
    Ok(EvalReport {
        kl: sum.kl / n,
        core_mass: sum.core_mass / n,
        recall_at_5: sum.recall_at_5 / n,
        recall_at_10: sum.recall_at_10 / n,
        recall_at_core: sum.recall_at_core / n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub train_kl: f64,
    /// `None` without an eval split.
    pub eval: Option<EvalReport>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: NetworkWeights,
    /// Row 0 is the untrained network.
    pub curve: Vec<EpochRow>,
    pub train_indices: Vec<usize>,
    pub eval_indices: Vec<usize>,
}

/// Seeded shuffle, then the last `eval_fraction` of the order is held out.
pub fn split_indices(len: usize, eval_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut seeded(derive(seed, 1)));
    let mut n_eval = (len as f64 * eval_fraction).round() as usize;
    if eval_fraction > 0.0 && len >= 2 {
        n_eval = n_eval.max(1);
    }
    n_eval = n_eval.min(len.saturating_sub(1));
    let eval = order.split_off(len - n_eval);
    (order, eval)
}

fn mean_kl(w: &NetworkWeights, dps: &[&Datapoint]) -> Result<f64, TrainError> {
    let mut total = 0.0;
    for chunk in dps.chunks(16) {
        let batch = merge_batch(chunk)?;
        let v = forward(w, &batch.graph)?;
        for (range, p) in batch.var_ranges.iter().zip(&batch.labels) {
            total += kl_loss(p, &v[range.clone()])?.0;
        }
    }
    Ok(total / dps.len() as f64)
}

/// Trains from `init_weights(d, T, seed)`; `on_epoch` sees every curve row
/// as it is produced.
pub fn train_loop(
    dataset: &[Datapoint],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRow),
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let (train_idx, eval_idx) = split_indices(dataset.len(), cfg.eval_fraction, cfg.seed);
    let train: Vec<&Datapoint> = train_idx.iter().map(|&i| &dataset[i]).collect();
    let eval: Vec<&Datapoint> = eval_idx.iter().map(|&i| &dataset[i]).collect();
    for (&i, dp) in train_idx.iter().zip(&train) {
        label(dp, i)?;
    }

    let mut w = init_weights(cfg.d, cfg.iterations, derive(cfg.seed, 0));
    let mut opt = OptimizerState::new(
        &w,
        AdamConfig {
            lr: cfg.lr,
            ..AdamConfig::default()
        },
    );
    let mut rng = seeded(derive(cfg.seed, 2));

    let row = |epoch: usize, w: &NetworkWeights| -> Result<EpochRow, TrainError> {
        Ok(EpochRow {
            epoch,
            train_kl: mean_kl(w, &train)?,
            eval: if eval.is_empty() {
                None
            } else {
                Some(eval_metrics(w, &eval)?)
            },
        })
    };
    let mut curve = vec![row(0, &w)?];
    on_epoch(&curve[0]);

    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let members: Vec<&Datapoint> = chunk.iter().map(|&i| train[i]).collect();
            let batch = merge_batch(&members)?;
            let (_, grads) = batch_loss_and_grad(&w, &batch)?;
            adam_step(&mut w, &mut opt, &grads)?;
        }
        let r = row(epoch, &w)?;
        on_epoch(&r);
        curve.push(r);
    }
    Ok(TrainOutcome {
        weights: w,
        curve,
        train_indices: train_idx,
        eval_indices: eval_idx,
    })
}

pub const LOSSES_HEADER: &str = "epoch,train_kl,eval_kl,core_mass,recall@5,recall@10";

pub fn write_losses_csv<W: Write>(rows: &[EpochRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "{LOSSES_HEADER}")?;
    for r in rows {
        match &r.eval {
            Some(e) => writeln!(
                out,
                "{},{:.9},{:.9},{:.9},{:.9},{:.9}",
                r.epoch, r.train_kl, e.kl, e.core_mass, e.recall_at_5, e.recall_at_10
            )?,
            None => writeln!(out, "{},{:.9},,,,", r.epoch, r.train_kl)?,
        }
    }
    Ok(())
}

/// Datapoints whose label is the planted core of each instance.
pub fn planted_datapoints(instances: &[crate::planted::PlantedInstance]) -> Vec<Datapoint> {
    instances
        .iter()
        .map(|inst| Datapoint {
            formula: inst.formula.clone(),
            core_vars: crate::cnf::VarMask::from_vars(
                inst.formula.num_vars(),
                inst.core_vars.iter().copied(),
            ),
        })
        .collect()
}
