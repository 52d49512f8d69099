//! Message-passing network over the clause-literal incidence graph.
//!
//! Clause embeddings `C` (one row per clause) and literal embeddings `L`
//! (rows `0..n` for positive literals, `n..2n` for negative ones) start as
//! all ones. Each of `T` rounds computes
//!
//! ```text
//! C <- C_update([C | G L])
//! L <- L_update([L | G^T C | Flip(L)])
//! ```
//!
//! and the head reads `v = V_proj(Flop(L))`, one score per variable. `G` is
//! never materialised: products are gather-scatter sums over the cell list.
//! Gradients are computed by a hand-written reverse pass through all rounds.

mod adam;
mod io;
mod mlp;

pub use adam::{adam_step, AdamConfig, OptimizerState};
pub use io::{load_weights, read_weights_file, save_weights, write_weights_file, WeightsIoError};
pub use mlp::{Layer, Mlp, MlpCache};

use ndarray::{s, Array2};
use thiserror::Error;

use crate::cnf::{lit_to_column, Formula, Var};
use crate::rng::{seeded, Rng};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("graph has no {0}")]
    EmptyGraph(&'static str),
    #[error("cell ({row}, {col}) outside {rows}x{cols}")]
    CellOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("duplicate cell ({0}, {1})")]
    DuplicateCell(usize, usize),
    #[error("var_map has {got} entries, expected {expected}")]
    VarMapLength { expected: usize, got: usize },
    #[error("matrix has an odd number of rows ({0})")]
    OddRows(usize),
    #[error("weights dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
}

/// Sparse `n_c x 2n_v` incidence matrix stored as a list of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ClauseLiteralGraph {
    num_clauses: usize,
    num_vars: usize,
    cells: Vec<(u32, u32)>,
    var_map: Vec<Var>,
}

impl ClauseLiteralGraph {
    pub fn new(
        num_clauses: usize,
        num_vars: usize,
        cells: Vec<(u32, u32)>,
        var_map: Vec<Var>,
    ) -> Result<ClauseLiteralGraph, NetError> {
        if var_map.len() != num_vars {
            return Err(NetError::VarMapLength {
                expected: num_vars,
                got: var_map.len(),
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(cells.len());
        for &(r, c) in &cells {
            let (r, c) = (r as usize, c as usize);
            if r >= num_clauses || c >= 2 * num_vars {
                return Err(NetError::CellOutOfRange {
                    row: r,
                    col: c,
                    rows: num_clauses,
                    cols: 2 * num_vars,
                });
            }
            if !seen.insert((r, c)) {
                return Err(NetError::DuplicateCell(r, c));
            }
        }
        Ok(ClauseLiteralGraph {
            num_clauses,
            num_vars,
            cells,
            var_map,
        })
    }

    pub fn num_clauses(&self) -> usize {
        self.num_clauses
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[(u32, u32)] {
        &self.cells
    }

    /// Graph variable index to the variable it stands for.
    pub fn var_map(&self) -> &[Var] {
        &self.var_map
    }
}

/// One cell per literal occurrence. The formula's clauses must be normalized.
pub fn build_graph(formula: &Formula) -> ClauseLiteralGraph {
    let n = formula.num_vars();
    let cells = formula
        .clauses()
        .iter()
        .enumerate()
        .flat_map(|(r, c)| {
            c.iter().map(move |&l| {
                let col = lit_to_column(l, n).expect("formula literals are in range");
                (r as u32, col as u32)
            })
        })
        .collect();
    ClauseLiteralGraph {
        num_clauses: formula.num_clauses(),
        num_vars: n,
        cells,
        var_map: (0..n).map(Var::from_index).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkWeights {
    pub d: usize,
    pub iterations: usize,
    pub c_update: Mlp,
    pub l_update: Mlp,
    pub v_proj: Mlp,
}

/// Layer widths of the three networks for embedding dimension `d`.
pub fn mlp_dims(d: usize) -> [Vec<usize>; 3] {
    [
        vec![2 * d, d, d, d],
        vec![3 * d, d, d, d],
        vec![2 * d, d, d, 1],
    ]
}

/// Normal(0, 1/fan_in) matrices and zero biases, drawn from xoshiro256++
/// seeded with `seed`.
pub fn init_weights(d: usize, iterations: usize, seed: u64) -> NetworkWeights {
    let mut rng = seeded(seed);
    init_weights_with(d, iterations, &mut rng)
}

pub fn init_weights_with(d: usize, iterations: usize, rng: &mut Rng) -> NetworkWeights {
    assert!(d >= 1 && iterations >= 1);
    let [c, l, v] = mlp_dims(d);
    NetworkWeights {
        d,
        iterations,
        c_update: Mlp::random(&c, rng),
        l_update: Mlp::random(&l, rng),
        v_proj: Mlp::random(&v, rng),
    }
}

impl NetworkWeights {
    pub fn zeros_like(&self) -> NetworkWeights {
        NetworkWeights {
            d: self.d,
            iterations: self.iterations,
            c_update: Mlp::zeros(&self.c_update.dims()),
            l_update: Mlp::zeros(&self.l_update.dims()),
            v_proj: Mlp::zeros(&self.v_proj.dims()),
        }
    }

    pub fn mlps(&self) -> [&Mlp; 3] {
        [&self.c_update, &self.l_update, &self.v_proj]
    }

    pub fn num_params(&self) -> usize {
        self.mlps().iter().map(|m| m.num_params()).sum()
    }

    /// Parameter slices in file order: each network's layers, matrix then bias.
    pub fn params(&self) -> Vec<&[f64]> {
        self.mlps().into_iter().flat_map(Mlp::params).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = self.c_update.params_mut();
        out.extend(self.l_update.params_mut());
        out.extend(self.v_proj.params_mut());
        out
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.params().concat()
    }

    /// Checks that the three networks have the input/output shapes `d` requires.
    pub fn validate(&self) -> Result<(), NetError> {
        let d = self.d;
        let want = [
            ("c_update", 2 * d, d),
            ("l_update", 3 * d, d),
            ("v_proj", 2 * d, 1),
        ];
        for (m, (name, i, o)) in self.mlps().iter().zip(want) {
            if m.input_dim() != i || m.output_dim() != o {
                return Err(NetError::DimMismatch(format!(
                    "{name} is {}->{}, expected {i}->{o}",
                    m.input_dim(),
                    m.output_dim()
                )));
            }
            if m.dims()
                .windows(2)
                .zip(&m.layers)
                .any(|(w, l)| l.weight.dim() != (w[1], w[0]) || l.bias.len() != w[1])
            {
                return Err(NetError::DimMismatch(format!("{name} layers do not chain")));
            }
        }
        if self.iterations == 0 {
            return Err(NetError::DimMismatch("zero iterations".into()));
        }
        Ok(())
    }
}

/// Swaps the positive and negative row blocks.
pub fn flip(l: &Array2<f64>) -> Result<Array2<f64>, NetError> {
    let rows = l.nrows();
    if !rows.is_multiple_of(2) {
        return Err(NetError::OddRows(rows));
    }
    let n = rows / 2;
    let mut out = Array2::zeros(l.raw_dim());
    out.slice_mut(s![..n, ..]).assign(&l.slice(s![n.., ..]));
    out.slice_mut(s![n.., ..]).assign(&l.slice(s![..n, ..]));
    Ok(out)
}

/// Row `i` of the result is `[x_i | not x_i]`.
pub fn flop(l: &Array2<f64>) -> Result<Array2<f64>, NetError> {
    let rows = l.nrows();
    if !rows.is_multiple_of(2) {
        return Err(NetError::OddRows(rows));
    }
    let (n, d) = (rows / 2, l.ncols());
    let mut out = Array2::zeros((n, 2 * d));
    out.slice_mut(s![.., ..d]).assign(&l.slice(s![..n, ..]));
    out.slice_mut(s![.., d..]).assign(&l.slice(s![n.., ..]));
    Ok(out)
}

/// Adjoint of `flop`.
fn unflop(v: &Array2<f64>, d: usize) -> Array2<f64> {
    let n = v.nrows();
    let mut out = Array2::zeros((2 * n, d));
    out.slice_mut(s![..n, ..]).assign(&v.slice(s![.., ..d]));
    out.slice_mut(s![n.., ..]).assign(&v.slice(s![.., d..]));
    out
}

/// `G L`: row `r` sums the literal rows incident to clause `r`.
fn gather_to_clauses(g: &ClauseLiteralGraph, l: &Array2<f64>, out: &mut Array2<f64>) {
    for &(r, c) in &g.cells {
        let src = l.row(c as usize);
        let mut dst = out.row_mut(r as usize);
        dst += &src;
    }
}

/// `G^T C`: row `c` sums the clause rows containing literal column `c`.
fn gather_to_literals(g: &ClauseLiteralGraph, c: &Array2<f64>, out: &mut Array2<f64>) {
    for &(r, col) in &g.cells {
        let src = c.row(r as usize);
        let mut dst = out.row_mut(col as usize);
        dst += &src;
    }
}

fn hcat(parts: &[&Array2<f64>]) -> Array2<f64> {
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    ndarray::concatenate(ndarray::Axis(1), &views).expect("row counts agree")
}

fn check(w: &NetworkWeights, g: &ClauseLiteralGraph) -> Result<(), NetError> {
    w.validate()?;
    if g.num_vars == 0 {
        return Err(NetError::EmptyGraph("variables"));
    }
    if g.num_clauses == 0 {
        return Err(NetError::EmptyGraph("clauses"));
    }
    Ok(())
}

/// Saved activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    rounds: Vec<(MlpCache, MlpCache)>,
    head: MlpCache,
}

/// Per-variable scores `v`, length `n_v`.
pub fn forward(w: &NetworkWeights, g: &ClauseLiteralGraph) -> Result<Vec<f64>, NetError> {
    check(w, g)?;
    let d = w.d;
    let mut c = Array2::<f64>::ones((g.num_clauses, d));
    let mut l = Array2::<f64>::ones((2 * g.num_vars, d));
    for _ in 0..w.iterations {
        let mut gl = Array2::zeros((g.num_clauses, d));
        gather_to_clauses(g, &l, &mut gl);
        c = w.c_update.forward(&hcat(&[&c, &gl]));
        let mut gtc = Array2::zeros((2 * g.num_vars, d));
        gather_to_literals(g, &c, &mut gtc);
        l = w.l_update.forward(&hcat(&[&l, &gtc, &flip(&l)?]));
    }
    let v = w.v_proj.forward(&flop(&l)?);
    Ok(v.into_raw_vec_and_offset().0)
}

/// Like `forward`, keeping what `backward` needs.
pub fn forward_trace(
    w: &NetworkWeights,
    g: &ClauseLiteralGraph,
) -> Result<(Vec<f64>, Trace), NetError> {
    check(w, g)?;
    let d = w.d;
    let mut c = Array2::<f64>::ones((g.num_clauses, d));
    let mut l = Array2::<f64>::ones((2 * g.num_vars, d));
    let mut rounds = Vec::with_capacity(w.iterations);
    for _ in 0..w.iterations {
        let mut gl = Array2::zeros((g.num_clauses, d));
        gather_to_clauses(g, &l, &mut gl);
        let (c_next, c_cache) = w.c_update.forward_cached(hcat(&[&c, &gl]));
        c = c_next;
        let mut gtc = Array2::zeros((2 * g.num_vars, d));
        gather_to_literals(g, &c, &mut gtc);
        let flipped = flip(&l)?;
        let (l_next, l_cache) = w.l_update.forward_cached(hcat(&[&l, &gtc, &flipped]));
        l = l_next;
        rounds.push((c_cache, l_cache));
    }
    let (v, head) = w.v_proj.forward_cached(flop(&l)?);
    Ok((v.into_raw_vec_and_offset().0, Trace { rounds, head }))
}

/// Parameter gradients given `dv`, the loss gradient with respect to the
/// scores of the traced forward pass.
pub fn backward(
    w: &NetworkWeights,
    g: &ClauseLiteralGraph,
    trace: &Trace,
    dv: &[f64],
) -> Result<NetworkWeights, NetError> {
    if dv.len() != g.num_vars {
        return Err(NetError::Length {
            expected: g.num_vars,
            got: dv.len(),
        });
    }
    let d = w.d;
    let mut grads = w.zeros_like();
    let dv = Array2::from_shape_vec((g.num_vars, 1), dv.to_vec()).expect("shape");
    let dflop = w.v_proj.backward(&trace.head, dv, &mut grads.v_proj);
    let mut dl = unflop(&dflop, d);
    let mut dc = Array2::<f64>::zeros((g.num_clauses, d));
    for (c_cache, l_cache) in trace.rounds.iter().rev() {
        let dxl = w.l_update.backward(l_cache, dl, &mut grads.l_update);
        let mut dl_prev = dxl.slice(s![.., ..d]).to_owned();
        dl_prev += &flip(&dxl.slice(s![.., 2 * d..]).to_owned())?;
        let dgtc = dxl.slice(s![.., d..2 * d]).to_owned();
        gather_to_clauses(g, &dgtc, &mut dc);
        let dxc = w.c_update.backward(c_cache, dc, &mut grads.c_update);
        dc = dxc.slice(s![.., ..d]).to_owned();
        let dgl = dxc.slice(s![.., d..]).to_owned();
        gather_to_literals(g, &dgl, &mut dl_prev);
        dl = dl_prev;
    }
    Ok(grads)
}

/// Numerically stable softmax.
pub fn softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `KL(p* || softmax(v))` and its gradient `softmax(v) - p*`.
pub fn kl_loss(p_star: &[f64], v_hat: &[f64]) -> Result<(f64, Vec<f64>), NetError> {
    if p_star.len() != v_hat.len() {
        return Err(NetError::Length {
            expected: p_star.len(),
            got: v_hat.len(),
        });
    }
    let max = v_hat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + v_hat.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
    let loss = p_star
        .iter()
        .zip(v_hat)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &v)| p * (p.ln() - (v - log_z)))
        .sum::<f64>()
        .max(0.0);
    let grad = p_star
        .iter()
        .zip(v_hat)
        .map(|(&p, &v)| (v - log_z).exp() - p)
        .collect();
    Ok((loss, grad))
}

pub fn loss_and_grad(
    w: &NetworkWeights,
    g: &ClauseLiteralGraph,
    p_star: &[f64],
) -> Result<(f64, NetworkWeights), NetError> {
    let (v, trace) = forward_trace(w, g)?;
    let (loss, dv) = kl_loss(p_star, &v)?;
    let grads = backward(w, g, &trace, &dv)?;
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Formula;
    use crate::planted::random_ksat;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    fn two_clause_formula() -> Formula {
        Formula::from_dimacs_clauses(3, &[&[1, 2, 3], &[1, -2, -3]])
    }

    /// Same network computed with an explicit dense incidence matrix.
    fn dense_forward(w: &NetworkWeights, g: &ClauseLiteralGraph) -> Vec<f64> {
        let mut m = Array2::<f64>::zeros((g.num_clauses(), 2 * g.num_vars()));
        for &(r, c) in g.cells() {
            m[[r as usize, c as usize]] = 1.0;
        }
        let n = g.num_vars();
        let mut c = Array2::<f64>::ones((g.num_clauses(), w.d));
        let mut l = Array2::<f64>::ones((2 * n, w.d));
        for _ in 0..w.iterations {
            c = w.c_update.forward(&hcat(&[&c, &m.dot(&l)]));
            let mut fl = l.clone();
            for i in 0..n {
                fl.row_mut(i).assign(&l.row(i + n));
                fl.row_mut(i + n).assign(&l.row(i));
            }
            l = w.l_update.forward(&hcat(&[&l, &m.t().dot(&c), &fl]));
        }
        let mut v = Array2::<f64>::zeros((n, 2 * w.d));
        for i in 0..n {
            for k in 0..w.d {
                v[[i, k]] = l[[i, k]];
                v[[i, w.d + k]] = l[[i + n, k]];
            }
        }
        w.v_proj.forward(&v).column(0).to_vec()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
    }

    #[test]
    fn two_clause_matrix_cells() {
        let g = build_graph(&two_clause_formula());
        let mut cells = g.cells().to_vec();
        cells.sort();
        assert_eq!(cells, vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 4), (1, 5)]);
        assert_eq!(g.num_cells(), two_clause_formula().num_cells());
        let unit = build_graph(&Formula::from_dimacs_clauses(1, &[&[1]]));
        assert_eq!(unit.cells(), &[(0, 0)]);
    }

    #[test]
    fn graph_validation() {
        let v = vec![Var::from_index(0)];
        assert!(ClauseLiteralGraph::new(1, 1, vec![(0, 2)], v.clone()).is_err());
        assert!(ClauseLiteralGraph::new(1, 1, vec![(0, 1), (0, 1)], v.clone()).is_err());
        assert!(ClauseLiteralGraph::new(1, 2, vec![(0, 1)], v.clone()).is_err());
        assert!(ClauseLiteralGraph::new(1, 1, vec![(0, 1)], v).is_ok());
    }

    #[test]
    fn flip_flop_small() {
        let l = array![[1.5], [-2.0]];
        assert_eq!(flip(&l).unwrap(), array![[-2.0], [1.5]]);
        assert_eq!(flop(&l).unwrap(), array![[1.5, -2.0]]);
        assert_eq!(
            flip(&array![[1.0], [2.0], [3.0]]),
            Err(NetError::OddRows(3))
        );
        assert!(flop(&array![[1.0]]).is_err());
        let big = Array2::from_shape_fn((6, 4), |(i, j)| (i * 4 + j) as f64);
        assert_eq!(flip(&flip(&big).unwrap()).unwrap(), big);
        assert_eq!(flop(&big).unwrap().dim(), (3, 8));
        assert_eq!(unflop(&flop(&big).unwrap(), 4), big);
    }

    #[test]
    fn forward_matches_dense_oracle() {
        let mut rng = seeded(11);
        for seed in 0..5 {
            let f = random_ksat(8, 20, 3, &mut rng);
            let g = build_graph(&f);
            let w = init_weights(5, 3, seed);
            let sparse = forward(&w, &g).unwrap();
            assert_eq!(sparse.len(), 8);
            assert!(close(&sparse, &dense_forward(&w, &g), 1e-12));
        }
    }

    #[test]
    fn forward_rejects_mismatch_and_empty() {
        let g = build_graph(&two_clause_formula());
        let mut w = init_weights(4, 2, 0);
        w.v_proj = Mlp::zeros(&[6, 4, 1]);
        assert!(matches!(forward(&w, &g), Err(NetError::DimMismatch(_))));
        let w = init_weights(4, 2, 0);
        let empty = ClauseLiteralGraph::new(0, 1, vec![], vec![Var::from_index(0)]).unwrap();
        assert!(matches!(forward(&w, &empty), Err(NetError::EmptyGraph(_))));
    }

    #[test]
    fn kl_examples() {
        let (l, g) = kl_loss(&[1.0 / 3.0; 3], &[0.7; 3]).unwrap();
        assert!(l.abs() < 1e-15 && g.iter().all(|x| x.abs() < 1e-15));
        let (l, g) = kl_loss(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(close(&g, &[-0.5, 0.5], 1e-15));
        let (l, _) = kl_loss(&[0.5, 0.5, 0.0], &[0.0; 3]).unwrap();
        assert!((l - 1.5f64.ln()).abs() < 1e-12);
        assert!(kl_loss(&[1.0], &[0.0, 1.0]).is_err());
        let p = softmax(&[1000.0, 999.0, -1000.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_head_gives_log_n() {
        let g = build_graph(&random_ksat(7, 15, 3, &mut seeded(2)));
        let mut w = init_weights(4, 2, 9);
        let last = w.v_proj.layers.last_mut().unwrap();
        last.weight.fill(0.0);
        let (loss, _) = loss_and_grad(&w, &g, &[1.0 / 7.0; 7]).unwrap();
        assert_eq!(loss, 0.0);
        let mut p = vec![0.0; 7];
        p[3] = 1.0;
        let (loss, _) = loss_and_grad(&w, &g, &p).unwrap();
        assert!((loss - 7f64.ln()).abs() < 1e-12);
    }

    /// Zero biases put whole layers exactly on the ReLU kink when every unit
    /// below is inactive; random biases move the check point off it.
    fn jitter_biases(mut w: NetworkWeights, rng: &mut crate::rng::Rng) -> NetworkWeights {
        for m in [&mut w.c_update, &mut w.l_update, &mut w.v_proj] {
            for l in &mut m.layers {
                l.bias
                    .mapv_inplace(|_| rand::Rng::random_range(rng, -0.5..0.5));
            }
        }
        w
    }

    /// Below this magnitude the finite difference is dominated by roundoff
    /// (about eps * loss / h), so the error is measured relative to it.
    const GRAD_FLOOR: f64 = 1e-5;

    fn max_relative_gradient_error(w: &NetworkWeights, g: &ClauseLiteralGraph, p: &[f64]) -> f64 {
        let (_, grads) = loss_and_grad(w, g, p).unwrap();
        let h = 1e-5;
        let analytic = grads.flat_params();
        let mut worst: f64 = 0.0;
        let mut probe = w.clone();
        let mut k = 0;
        for pi in 0..w.params().len() {
            for j in 0..w.params()[pi].len() {
                let orig = w.params()[pi][j];
                probe.params_mut()[pi][j] = orig + h;
                let plus = loss_and_grad(&probe, g, p).unwrap().0;
                probe.params_mut()[pi][j] = orig - h;
                let minus = loss_and_grad(&probe, g, p).unwrap().0;
                probe.params_mut()[pi][j] = orig;
                let fd = (plus - minus) / (2.0 * h);
                let a = analytic[k];
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(GRAD_FLOOR);
                worst = worst.max(rel);
                k += 1;
            }
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..5 {
            let mut rng = seeded(100 + seed);
            let f = random_ksat(3, 2, 2, &mut rng);
            let g = build_graph(&f);
            let w = jitter_biases(init_weights(4, 2, seed), &mut rng);
            let p = [0.5, 0.5, 0.0];
            let err = max_relative_gradient_error(&w, &g, &p);
            assert!(err <= 1e-5, "seed {seed}: {err}");
        }
    }

    #[test]
    fn recurrence_is_not_detached() {
        let g = build_graph(&random_ksat(6, 12, 3, &mut seeded(4)));
        let p = [0.25, 0.25, 0.25, 0.25, 0.0, 0.0];
        let mut w = init_weights(4, 1, 5);
        let (_, g1) = loss_and_grad(&w, &g, &p).unwrap();
        w.iterations = 2;
        let (_, g2) = loss_and_grad(&w, &g, &p).unwrap();
        assert_ne!(g1.flat_params(), g2.flat_params());
    }

    #[test]
    fn init_statistics() {
        let a = init_weights(16, 4, 3);
        assert_eq!(a, init_weights(16, 4, 3));
        assert_ne!(a, init_weights(16, 4, 4));
        for m in a.mlps() {
            assert!(m.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        }
        let m = Mlp::random(&[100, 10], &mut seeded(8));
        let w = &m.layers[0].weight;
        let mean = w.mean().unwrap();
        let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (w.len() - 1) as f64;
        assert!((var - 0.01).abs() < 0.003, "{var}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn permutation_symmetries(seed in 0u64..1000, n in 2usize..9, m in 1usize..14) {
            let mut rng = seeded(seed);
            let f = random_ksat(n, m, 2.min(n), &mut rng);
            let w = init_weights(4, 3, seed);
            let g = build_graph(&f);
            let base = forward(&w, &g).unwrap();

            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let relabel = |col: u32| {
                let c = col as usize;
                if c < n { perm[c] as u32 } else { (n + perm[c - n]) as u32 }
            };
            let cells = g.cells().iter().map(|&(r, c)| (r, relabel(c))).collect();
            let mut var_map = vec![Var::from_index(0); n];
            for i in 0..n {
                var_map[perm[i]] = Var::from_index(i);
            }
            let gp = ClauseLiteralGraph::new(m, n, cells, var_map).unwrap();
            let out = forward(&w, &gp).unwrap();
            let permuted: Vec<f64> = (0..n).map(|i| out[perm[i]]).collect();
            prop_assert!(close(&base, &permuted, 1e-9));

            let mut rows: Vec<u32> = (0..m as u32).collect();
            rows.shuffle(&mut rng);
            let mut cells: Vec<(u32, u32)> =
                g.cells().iter().map(|&(r, c)| (rows[r as usize], c)).collect();
            let gr = ClauseLiteralGraph::new(m, n, cells.clone(), g.var_map().to_vec()).unwrap();
            prop_assert!(close(&base, &forward(&w, &gr).unwrap(), 1e-9));

            cells.shuffle(&mut rng);
            let gc = ClauseLiteralGraph::new(m, n, cells, g.var_map().to_vec()).unwrap();
            prop_assert!(close(&base, &forward(&w, &gc).unwrap(), 1e-9));
        }

        #[test]
        fn kl_is_nonnegative(v in proptest::collection::vec(-20.0f64..20.0, 1..12), seed in 0u64..100) {
            let mut rng = seeded(seed);
            let raw: Vec<f64> = v.iter().map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
            let s: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let (loss, g) = kl_loss(&p, &v).unwrap();
            prop_assert!(loss >= 0.0);
            prop_assert!(g.iter().sum::<f64>().abs() < 1e-12);
            let q = softmax(&v);
            prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let logits: Vec<f64> = q.iter().map(|x| x.ln()).collect();
            prop_assert!(kl_loss(&q, &logits).unwrap().0 < 1e-12);
        }
    }
}
