use super::{NetError, NetworkWeights};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates over the flattened parameter vector, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl OptimizerState {
    pub fn new(weights: &NetworkWeights, config: AdamConfig) -> OptimizerState {
        let n = weights.num_params();
        OptimizerState {
            config,
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// One bias-corrected ADAM update of `w` in place.
pub fn adam_step(
    w: &mut NetworkWeights,
    opt: &mut OptimizerState,
    grads: &NetworkWeights,
) -> Result<(), NetError> {
    let n = w.num_params();
    for (got, what) in [(grads.num_params(), "gradient"), (opt.m.len(), "moment")] {
        if got != n {
            return Err(NetError::DimMismatch(format!(
                "{what} has {got} entries, weights have {n}"
            )));
        }
    }
    if w.mlps()
        .iter()
        .zip(grads.mlps())
        .any(|(a, b)| a.dims() != b.dims())
    {
        return Err(NetError::DimMismatch("gradient layer shapes differ".into()));
    }
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
    } = opt.config;
    opt.step += 1;
    let t = opt.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    let g = grads.flat_params();
    let mut k = 0;
    for slice in w.params_mut() {
        for p in slice.iter_mut() {
            let gk = g[k];
            opt.m[k] = beta1 * opt.m[k] + (1.0 - beta1) * gk;
            opt.v[k] = beta2 * opt.v[k] + (1.0 - beta2) * gk * gk;
            let m_hat = opt.m[k] / c1;
            let v_hat = opt.v[k] / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
            k += 1;
        }
    }
    Ok(())
}
