//! Fully connected ReLU networks with a linear output layer, applied row-wise.

use ndarray::{Array1, Array2, Axis};
use rand_distr::{Distribution, Normal};

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out × in`, row-major.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn zeros(input: usize, output: usize) -> Layer {
        Layer {
            weight: Array2::zeros((output, input)),
            bias: Array1::zeros(output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.nrows()
    }

    fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut y = x.dot(&self.weight.t());
        y += &self.bias;
        y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Per-layer inputs and pre-activations saved for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
}

impl Mlp {
    /// Zero network with the given layer widths `[in, h1, ..., out]`.
    pub fn zeros(dims: &[usize]) -> Mlp {
        assert!(dims.len() >= 2);
        Mlp {
            layers: dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        }
    }

    /// Weights drawn from N(0, 1/fan_in), zero biases.
    pub fn random(dims: &[usize], rng: &mut Rng) -> Mlp {
        let mut m = Mlp::zeros(dims);
        for layer in &mut m.layers {
            let std = (1.0 / layer.input_dim() as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("positive std");
            for w in layer.weight.iter_mut() {
                *w = normal.sample(rng);
            }
        }
        m
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].input_dim()];
        d.extend(self.layers.iter().map(Layer::output_dim));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").output_dim()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let last = self.layers.len() - 1;
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.apply(&h);
            if i < last {
                h.mapv_inplace(|v| v.max(0.0));
            }
        }
        h
    }

    pub fn forward_cached(&self, x: Array2<f64>) -> (Array2<f64>, MlpCache) {
        let last = self.layers.len() - 1;
        let mut cache = MlpCache {
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(last),
        };
        let mut h = x;
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(&h);
            cache.inputs.push(h);
            if i < last {
                h = z.mapv(|v| v.max(0.0));
                cache.pre.push(z);
            } else {
                h = z;
            }
        }
        (h, cache)
    }

    /// Accumulates parameter gradients into `grads` and returns the input
    /// gradient.
    pub fn backward(&self, cache: &MlpCache, dy: Array2<f64>, grads: &mut Mlp) -> Array2<f64> {
        let mut delta = dy;
        for i in (0..self.layers.len()).rev() {
            if i < self.layers.len() - 1 {
                let z = &cache.pre[i];
                ndarray::Zip::from(&mut delta).and(z).for_each(|d, &z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
            }
            let g = &mut grads.layers[i];
            g.weight += &delta.t().dot(&cache.inputs[i]);
            g.bias += &delta.sum_axis(Axis(0));
            delta = delta.dot(&self.layers[i].weight);
        }
        delta
    }

    pub fn params(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    l.weight.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                [
                    l.weight.as_slice_mut().expect("standard layout"),
                    l.bias.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use ndarray::array;

    #[test]
    fn relu_between_layers_linear_output() {
        let mut m = Mlp::zeros(&[1, 1, 1]);
        m.layers[0].weight[[0, 0]] = 1.0;
        m.layers[1].weight[[0, 0]] = -2.0;
        m.layers[1].bias[0] = 0.5;
        let y = m.forward(&array![[3.0], [-3.0]]);
        assert_eq!(y, array![[-5.5], [0.5]]);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = seeded(3);
        let mut m = Mlp::random(&[3, 4, 4, 2], &mut rng);
        // Nonzero biases keep pre-activations away from the ReLU kink.
        for l in &mut m.layers {
            l.bias
                .mapv_inplace(|_| rand::Rng::random_range(&mut rng, 0.1..0.5));
        }
        let x = array![[0.3, -1.2, 0.7], [1.1, 0.4, -0.5]];
        let r = array![[0.2, -0.7], [1.3, 0.1]];
        let loss = |m: &Mlp, x: &Array2<f64>| (m.forward(x) * &r).sum();
        let (_, cache) = m.forward_cached(x.clone());
        let mut g = Mlp::zeros(&m.dims());
        let dx = m.backward(&cache, r.clone(), &mut g);
        let h = 1e-6;
        for (pi, p) in m.params().iter().enumerate() {
            for k in 0..p.len() {
                let mut plus = m.clone();
                plus.params_mut()[pi][k] += h;
                let mut minus = m.clone();
                minus.params_mut()[pi][k] -= h;
                let fd = (loss(&plus, &x) - loss(&minus, &x)) / (2.0 * h);
                assert!((fd - g.params()[pi][k]).abs() < 1e-6, "param {pi}/{k}");
            }
        }
        for i in 0..2 {
            for j in 0..3 {
                let mut xp = x.clone();
                xp[[i, j]] += h;
                let mut xm = x.clone();
                xm[[i, j]] -= h;
                let fd = (loss(&m, &xp) - loss(&m, &xm)) / (2.0 * h);
                assert!((fd - dx[[i, j]]).abs() < 1e-6);
            }
        }
    }
}
