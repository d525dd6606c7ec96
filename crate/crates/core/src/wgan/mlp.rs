use rand::Rng;

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => crate::metrics::logistic_sigmoid(x),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

/// Fully connected network with ReLU hidden layers.
///
/// Parameters are stored flat, layer by layer: the `out x in` weight block
/// (row-major) followed by the `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
    output: Activation,
}

/// Forward pass values kept for backpropagation.
pub struct ForwardCache {
    /// Input of every layer, then the network output.
    activations: Vec<Matrix>,
    /// Pre-activation of every layer.
    pre: Vec<Matrix>,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.activations
            .last()
            .expect("at least the input is cached")
    }
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// Weights drawn uniformly from `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output: Activation, rng: &mut R) -> Self {
        assert!(
            sizes.len() >= 2,
            "a network needs an input and an output layer"
        );
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            params.extend((0..w[0] * w[1]).map(|_| rng.random_range(-bound..=bound)));
            params.extend(std::iter::repeat_n(0.0, w[1]));
        }
        Mlp {
            sizes: sizes.to_vec(),
            params,
            output,
        }
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>, output: Activation) -> Self {
        assert_eq!(params.len(), param_count(sizes));
        Mlp {
            sizes: sizes.to_vec(),
            params,
            output,
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layer_count() {
            self.output
        } else {
            Activation::Relu
        }
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.layer_count());
        let mut acc = 0;
        for w in self.sizes.windows(2) {
            off.push(acc);
            acc += w[0] * w[1] + w[1];
        }
        off
    }

    pub fn forward_cached(&self, x: &Matrix) -> ForwardCache {
        assert_eq!(x.cols(), self.input_dim(), "input width mismatch");
        let offsets = self.offsets();
        let mut activations = vec![x.clone()];
        let mut pre = Vec::with_capacity(self.layer_count());
        for (l, &off) in offsets.iter().enumerate() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + fan_in * fan_out];
            let b = &self.params[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
            let input = activations.last().unwrap();
            let act = self.activation(l);
            let mut z = Matrix::zeros(input.rows(), fan_out);
            let mut a = Matrix::zeros(input.rows(), fan_out);
            for i in 0..input.rows() {
                let row = input.row(i);
                for o in 0..fan_out {
                    let wrow = &w[o * fan_in..(o + 1) * fan_in];
                    let v = b[o] + wrow.iter().zip(row).map(|(p, q)| p * q).sum::<f64>();
                    z.set(i, o, v);
                    a.set(i, o, act.apply(v));
                }
            }
            pre.push(z);
            activations.push(a);
        }
        ForwardCache { activations, pre }
    }

    pub fn forward(&self, x: &Matrix) -> Matrix {
        self.forward_cached(x).activations.pop().unwrap()
    }

    /// Backpropagates `grad_out` (dL/d output, one row per sample).
    /// Returns the parameter gradient and dL/d input.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Matrix) -> (Vec<f64>, Matrix) {
        let offsets = self.offsets();
        let mut grad = vec![0.0; self.params.len()];
        let mut delta = grad_out.clone();
        for l in (0..self.layer_count()).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let act = self.activation(l);
            let z = &cache.pre[l];
            let a = &cache.activations[l + 1];
            let input = &cache.activations[l];
            // dL/dz
            for i in 0..delta.rows() {
                for o in 0..fan_out {
                    let d = delta.get(i, o) * act.derivative(z.get(i, o), a.get(i, o));
                    delta.set(i, o, d);
                }
            }
            let mut next = Matrix::zeros(delta.rows(), fan_in);
            for i in 0..delta.rows() {
                let x = input.row(i);
                for o in 0..fan_out {
                    let d = delta.get(i, o);
                    if d == 0.0 {
                        continue;
                    }
                    let wg = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                    for (g, xi) in wg.iter_mut().zip(x) {
                        *g += d * xi;
                    }
                    grad[off + fan_in * fan_out + o] += d;
                    let wrow = &self.params[off + o * fan_in..off + (o + 1) * fan_in];
                    for (n, w) in next.row_mut(i).iter_mut().zip(wrow) {
                        *n += d * w;
                    }
                }
            }
            delta = next;
        }
        (grad, delta)
    }

    pub fn max_abs_param(&self) -> f64 {
        self.params.iter().fold(0.0, |m, p| m.max(p.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

/// RMSprop with a per-parameter running mean of squared gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    mean_square: Vec<f64>,
}

pub const RMSPROP_DECAY: f64 = 0.9;
pub const RMSPROP_EPSILON: f64 = 1e-8;

impl RmsProp {
    pub fn new(len: usize, learning_rate: f64) -> Self {
        RmsProp {
            learning_rate,
            decay: RMSPROP_DECAY,
            epsilon: RMSPROP_EPSILON,
            mean_square: vec![0.0; len],
        }
    }

    pub fn accumulators(&self) -> &[f64] {
        &self.mean_square
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        for ((p, g), s) in params.iter_mut().zip(grad).zip(&mut self.mean_square) {
            *s = self.decay * *s + (1.0 - self.decay) * g * g;
            *p -= self.learning_rate * g / (s.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Mlp::new(&[3, 4, 2], Activation::Identity, &mut rng);
        assert_eq!(net.params().len(), 3 * 4 + 4 + 4 * 2 + 2);
        let bound = 1.0 / 3f64.sqrt();
        assert!(net.params()[..12].iter().all(|w| w.abs() <= bound));
        assert!(net.params()[12..16].iter().all(|b| *b == 0.0));
    }

    #[test]
    fn linear_forward() {
        // y = 2 x0 - x1 + 0.5
        let net = Mlp::from_params(&[2, 1], vec![2.0, -1.0, 0.5], Activation::Identity);
        let y = net.forward(&Matrix::from_rows(&[[1.0, 1.0], [0.0, 2.0]]));
        assert_eq!(y.as_slice(), &[1.5, -1.5]);
    }

    #[test]
    fn rmsprop_first_step_is_normalized() {
        let mut opt = RmsProp::new(1, 0.01);
        let mut p = [0.0];
        opt.step(&mut p, &[-1.0]);
        // s = 0.1, step = 0.01 / sqrt(0.1)
        assert!((p[0] - 0.01 / 0.1f64.sqrt()).abs() < 1e-9);
    }
}
