//! Wasserstein GAN for augmenting small tables.
//!
//! Generator and critic are small MLPs trained with RMSprop. After every
//! critic update the critic weights are clipped to `[-clip, clip]`. The
//! generator ends in a sigmoid, so samples live in the encoded unit cube and
//! are mapped back to table cells by [`discretize`].

mod discretize;
mod mlp;

pub use discretize::{discretize, largest_remainder};
pub use mlp::{
    param_count, Activation, ForwardCache, Mlp, RmsProp, RMSPROP_DECAY, RMSPROP_EPSILON,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tabular::{Encoding, PointCloud, TabularDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Uniform,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanConfig {
    /// Defaults to the encoded data dimension.
    pub latent_dim: Option<usize>,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub batch_size: usize,
    pub n_critic: usize,
    pub learning_rate: f64,
    pub clip: f64,
    pub steps: usize,
    pub seed: u64,
    pub noise: NoiseKind,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            latent_dim: None,
            hidden_layers: 2,
            hidden_width: 32,
            batch_size: 10,
            n_critic: 1,
            learning_rate: 1e-5,
            clip: 0.01,
            steps: 500,
            seed: 0,
            noise: NoiseKind::Uniform,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("{what} must be positive")));
        if self.latent_dim == Some(0) {
            return bad("latent_dim");
        }
        if self.hidden_layers == 0 {
            return bad("hidden_layers");
        }
        if self.hidden_width == 0 {
            return bad("hidden_width");
        }
        if self.batch_size == 0 {
            return bad("batch_size");
        }
        if self.n_critic == 0 {
            return bad("n_critic");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        if !(self.clip > 0.0 && self.clip.is_finite()) {
            return bad("clip");
        }
        Ok(())
    }

    fn layer_sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut sizes = vec![input];
        sizes.extend(std::iter::repeat_n(self.hidden_width, self.hidden_layers));
        sizes.push(output);
        sizes
    }
}

/// Generator, critic, optimizer state and the sampling RNG.
#[derive(Debug, Clone)]
pub struct GanModel {
    pub config: GanConfig,
    pub generator: Mlp,
    pub critic: Mlp,
    gen_opt: RmsProp,
    critic_opt: RmsProp,
    rng: ChaCha8Rng,
    latent_dim: usize,
    steps_done: usize,
}

/// Per-step losses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub generator_loss: Vec<f64>,
    pub critic_loss: Vec<f64>,
}

impl TrainingTrace {
    pub fn len(&self) -> usize {
        self.generator_loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generator_loss.is_empty()
    }

    /// Writes `step,gen_loss,critic_loss` rows.
    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(e.to_string()))?;
        w.write_record(["step", "gen_loss", "critic_loss"])
            .map_err(|e| Error::Csv(e.to_string()))?;
        for (i, (g, c)) in self
            .generator_loss
            .iter()
            .zip(&self.critic_loss)
            .enumerate()
        {
            w.write_record([i.to_string(), g.to_string(), c.to_string()])
                .map_err(|e| Error::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn init_gan(config: &GanConfig, data_dim: usize) -> Result<GanModel> {
    config.validate()?;
    if data_dim == 0 {
        return Err(Error::InvalidConfig(
            "data dimension must be positive".into(),
        ));
    }
    let latent_dim = config.latent_dim.unwrap_or(data_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let generator = Mlp::new(
        &config.layer_sizes(latent_dim, data_dim),
        Activation::Sigmoid,
        &mut rng,
    );
    let critic = Mlp::new(
        &config.layer_sizes(data_dim, 1),
        Activation::Identity,
        &mut rng,
    );
    Ok(GanModel {
        gen_opt: RmsProp::new(generator.params().len(), config.learning_rate),
        critic_opt: RmsProp::new(critic.params().len(), config.learning_rate),
        config: config.clone(),
        generator,
        critic,
        rng,
        latent_dim,
        steps_done: 0,
    })
}

/// Critic loss `mean f(fake) - mean f(real)` and its parameter gradient.
pub fn critic_loss_grad(critic: &Mlp, real: &Matrix, fake: &Matrix) -> (f64, Vec<f64>) {
    let cr = critic.forward_cached(real);
    let cf = critic.forward_cached(fake);
    let (nr, nf) = (real.rows() as f64, fake.rows() as f64);
    let mean_real = cr.output().as_slice().iter().sum::<f64>() / nr;
    let mean_fake = cf.output().as_slice().iter().sum::<f64>() / nf;
    let (g_fake, _) = critic.backward(
        &cf,
        &Matrix::from_vec(fake.rows(), 1, vec![1.0 / nf; fake.rows()]),
    );
    let (g_real, _) = critic.backward(
        &cr,
        &Matrix::from_vec(real.rows(), 1, vec![-1.0 / nr; real.rows()]),
    );
    let grad = g_fake.iter().zip(&g_real).map(|(a, b)| a + b).collect();
    (mean_fake - mean_real, grad)
}

/// Generator loss `-mean f(g(z))` and its gradient with respect to the generator.
pub fn generator_loss_grad(generator: &Mlp, critic: &Mlp, latent: &Matrix) -> (f64, Vec<f64>) {
    let gc = generator.forward_cached(latent);
    let fake = gc.output();
    let cc = critic.forward_cached(fake);
    let m = latent.rows() as f64;
    let loss = -cc.output().as_slice().iter().sum::<f64>() / m;
    let (_, d_fake) = critic.backward(
        &cc,
        &Matrix::from_vec(latent.rows(), 1, vec![-1.0 / m; latent.rows()]),
    );
    let (grad, _) = generator.backward(&gc, &d_fake);
    (loss, grad)
}

impl GanModel {
    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn data_dim(&self) -> usize {
        self.generator.output_dim()
    }

    pub fn steps_done(&self) -> usize {
        self.steps_done
    }

    pub fn generator_optimizer(&self) -> &RmsProp {
        &self.gen_opt
    }

    pub fn critic_optimizer(&self) -> &RmsProp {
        &self.critic_opt
    }

    /// `k` latent vectors from the configured noise distribution.
    pub fn latent(&mut self, k: usize) -> Matrix {
        let d = self.latent_dim;
        let data: Vec<f64> = match self.config.noise {
            NoiseKind::Uniform => (0..k * d).map(|_| self.rng.random::<f64>()).collect(),
            NoiseKind::Normal => (0..k * d)
                .map(|_| StandardNormal.sample(&mut self.rng))
                .collect(),
        };
        Matrix::from_vec(k, d, data)
    }

    /// One RMSprop update of the critic followed by weight clipping.
    /// Returns the loss measured before the update.
    pub fn critic_step(&mut self, real: &Matrix, fake: &Matrix) -> Result<f64> {
        assert_eq!(real.cols(), fake.cols(), "batch widths differ");
        let (loss, grad) = critic_loss_grad(&self.critic, real, fake);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss {
                which: "critic",
                step: self.steps_done,
            });
        }
        self.critic_opt.step(self.critic.params_mut(), &grad);
        let c = self.config.clip;
        for p in self.critic.params_mut() {
            *p = p.clamp(-c, c);
        }
        Ok(loss)
    }

    /// One RMSprop update of the generator through the frozen critic.
    pub fn generator_step(&mut self, latent: &Matrix) -> Result<f64> {
        let (loss, grad) = generator_loss_grad(&self.generator, &self.critic, latent);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss {
                which: "generator",
                step: self.steps_done,
            });
        }
        self.gen_opt.step(self.generator.params_mut(), &grad);
        Ok(loss)
    }

    /// `k` generated rows from fresh latent draws.
    pub fn sample(&mut self, k: usize) -> Matrix {
        if k == 0 {
            return Matrix::zeros(0, self.data_dim());
        }
        let z = self.latent(k);
        self.generator.forward(&z)
    }

    /// One training iteration: `n_critic` critic steps, then one generator step.
    /// Minibatches are drawn from `real` with replacement.
    pub fn train_step(&mut self, real: &Matrix) -> Result<(f64, f64)> {
        let m = self.config.batch_size;
        let mut critic_loss = 0.0;
        for _ in 0..self.config.n_critic {
            let idx: Vec<usize> = (0..m)
                .map(|_| self.rng.random_range(0..real.rows()))
                .collect();
            let batch = real.select_rows(&idx);
            let z = self.latent(m);
            let fake = self.generator.forward(&z);
            critic_loss = self.critic_step(&batch, &fake)?;
        }
        let z = self.latent(m);
        let gen_loss = self.generator_step(&z)?;
        self.steps_done += 1;
        Ok((gen_loss, critic_loss))
    }
}

/// Trains a fresh model on `real` for `config.steps` iterations.
pub fn train(config: &GanConfig, real: &PointCloud) -> Result<(GanModel, TrainingTrace)> {
    train_with(config, real, |_| {})
}

/// [`train`] with a callback after every iteration, used to audit invariants.
pub fn train_with(
    config: &GanConfig,
    real: &PointCloud,
    mut on_step: impl FnMut(&GanModel),
) -> Result<(GanModel, TrainingTrace)> {
    if real.len() < 2 {
        return Err(Error::InvalidConfig(
            "training needs at least two rows".into(),
        ));
    }
    let mut model = init_gan(config, real.dim())?;
    let mut trace = TrainingTrace::default();
    for _ in 0..config.steps {
        let (g, c) = model.train_step(&real.points)?;
        trace.generator_loss.push(g);
        trace.critic_loss.push(c);
        on_step(&model);
    }
    Ok((model, trace))
}

/// `rate * n` synthetic rows in the schema of `real`, plus the training trace.
pub fn augment_with_trace(
    real: &TabularDataset,
    rate: usize,
    config: &GanConfig,
) -> Result<(TabularDataset, TrainingTrace)> {
    if rate == 0 {
        return Err(Error::InvalidConfig(
            "augmentation rate must be >= 1".into(),
        ));
    }
    let encoding = Encoding::fit(real);
    let cloud = encoding.encode(real)?;
    let (mut model, trace) = train(config, &cloud)?;
    let synthetic = model.sample(rate * real.n_rows());
    Ok((discretize(&synthetic, &encoding, real)?, trace))
}

pub fn augment(real: &TabularDataset, rate: usize, config: &GanConfig) -> Result<TabularDataset> {
    augment_with_trace(real, rate, config).map(|(ds, _)| ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_cloud(n: usize, d: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * d).map(|_| rng.random::<f64>()).collect();
        PointCloud::from_matrix(Matrix::from_vec(n, d, data))
    }

    #[test]
    fn init_is_deterministic_and_sized() {
        let cfg = GanConfig {
            seed: 1,
            ..Default::default()
        };
        let a = init_gan(&cfg, 13).unwrap();
        let b = init_gan(&cfg, 13).unwrap();
        assert_eq!(a.generator, b.generator);
        assert_eq!(a.critic, b.critic);
        let l = a.latent_dim();
        assert_eq!(l, 13);
        assert_eq!(
            a.generator.params().len(),
            l * 32 + 32 + 32 * 32 + 32 + 32 * 13 + 13
        );
        assert!(a
            .generator_optimizer()
            .accumulators()
            .iter()
            .all(|s| *s == 0.0));
    }

    #[test]
    fn identical_batches_have_zero_loss() {
        let mut m = init_gan(&GanConfig::default(), 3).unwrap();
        let batch = toy_cloud(10, 3, 2).points;
        assert_eq!(m.critic_step(&batch, &batch).unwrap(), 0.0);
        assert!(m.critic.max_abs_param() <= 0.01);
    }

    #[test]
    fn linear_critic_gradient_by_hand() {
        // f(x) = w x + b; real {1}, fake {0}: loss = -w, d/dw = -1, d/db = 0
        let critic = Mlp::from_params(&[1, 1], vec![0.3, 0.2], Activation::Identity);
        let (loss, grad) = critic_loss_grad(
            &critic,
            &Matrix::from_rows(&[[1.0]]),
            &Matrix::from_rows(&[[0.0]]),
        );
        assert!((loss + 0.3).abs() < 1e-15);
        assert_eq!(grad, vec![-1.0, 0.0]);
        let mut params = critic.params().to_vec();
        RmsProp::new(2, 1e-3).step(&mut params, &grad);
        assert!(params[0] > 0.3);
    }

    #[test]
    fn zero_critic_freezes_generator() {
        let mut m = init_gan(&GanConfig::default(), 4).unwrap();
        m.critic.params_mut().iter_mut().for_each(|p| *p = 0.0);
        let before = m.generator.clone();
        let z = m.latent(10);
        let loss = m.generator_step(&z).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(m.generator, before);
    }

    #[test]
    fn zero_steps_returns_initial_model() {
        let cfg = GanConfig {
            steps: 0,
            seed: 5,
            ..Default::default()
        };
        let cloud = toy_cloud(9, 7, 1);
        let (model, trace) = train(&cfg, &cloud).unwrap();
        assert!(trace.is_empty());
        let init = init_gan(&cfg, 7).unwrap();
        assert_eq!(model.generator, init.generator);
        assert_eq!(model.critic, init.critic);
    }

    #[test]
    fn training_is_reproducible_and_bounded() {
        let cfg = GanConfig {
            steps: 50,
            seed: 11,
            ..Default::default()
        };
        let cloud = toy_cloud(9, 7, 3);
        let (mut a, ta) = train(&cfg, &cloud).unwrap();
        let (mut b, tb) = train(&cfg, &cloud).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(ta.len(), 50);
        assert!(ta
            .generator_loss
            .iter()
            .chain(&ta.critic_loss)
            .all(|v| v.is_finite()));
        let sa = a.sample(110);
        assert_eq!(sa, b.sample(110));
        assert_eq!(sa.rows(), 110);
        assert!(sa.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(a.sample(0).rows(), 0);
    }

    #[test]
    fn bad_configs_rejected() {
        for cfg in [
            GanConfig {
                hidden_layers: 0,
                ..Default::default()
            },
            GanConfig {
                batch_size: 0,
                ..Default::default()
            },
            GanConfig {
                clip: 0.0,
                ..Default::default()
            },
            GanConfig {
                learning_rate: -1.0,
                ..Default::default()
            },
        ] {
            assert!(init_gan(&cfg, 3).is_err());
        }
        let one = toy_cloud(1, 2, 0);
        assert!(train(&GanConfig::default(), &one).is_err());
    }
}
