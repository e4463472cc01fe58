//! Clipped-surrogate policy gradient with a fixed-variance diagonal
//! Gaussian policy and a separate value network.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rl::adam::Adam;
use crate::rl::net::{Activation, Mlp};

const LN_2PI: f64 = 1.8378770664093453;

/// Log density of a diagonal Gaussian with one shared log standard
/// deviation across action dimensions.
pub fn gaussian_logp(mean: &[f64], log_std: f64, action: &[f64]) -> f64 {
    let inv_var = (-2.0 * log_std).exp();
    let mut lp = 0.0;
    for (m, a) in mean.iter().zip(action) {
        let d = a - m;
        lp += -0.5 * d * d * inv_var - log_std - 0.5 * LN_2PI;
    }
    lp
}

/// Policy and value networks plus their optimizers.
#[derive(Serialize, Deserialize, Clone)]
pub struct Ppo {
    pub policy: Mlp,
    pub value: Mlp,
    pub log_std: f64,
    pub opt_policy: Adam,
    pub opt_value: Adam,
}

/// One flattened batch of training data, index-aligned across fields.
pub struct Batch<'a> {
    pub obs: &'a [Vec<f64>],
    pub actions: &'a [Vec<f64>],
    pub logp_old: &'a [f64],
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default)]
pub struct UpdateStats {
    pub surrogate_loss: f64,
    pub value_loss: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

impl Ppo {
    pub fn new(
        obs_dim: usize,
        act_dim: usize,
        hidden: &[usize],
        activation: Activation,
        log_std: f64,
        learning_rate: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let mut p_sizes = vec![obs_dim];
        p_sizes.extend_from_slice(hidden);
        p_sizes.push(act_dim);
        let mut v_sizes = vec![obs_dim];
        v_sizes.extend_from_slice(hidden);
        v_sizes.push(1);
        // Small output gain keeps the initial policy close to the PD
        // setpoint and the initial values near zero.
        let policy = Mlp::new(&p_sizes, activation, 0.01, rng)?;
        let value = Mlp::new(&v_sizes, activation, 1.0, rng)?;
        let np = policy.params.len();
        let nv = value.params.len();
        Ok(Ppo {
            policy,
            value,
            log_std,
            opt_policy: Adam::new(np, learning_rate),
            opt_value: Adam::new(nv, learning_rate),
        })
    }

    /// Deterministic action: the policy mean.
    pub fn act_mean(&self, obs: &[f64]) -> Vec<f64> {
        self.policy.forward(obs)
    }

    /// Stochastic action and its log probability.
    pub fn sample_action(&self, obs: &[f64], rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
        let mean = self.policy.forward(obs);
        let std = self.log_std.exp();
        let action: Vec<f64> = mean
            .iter()
            .map(|m| {
                let z: f64 = StandardNormal.sample(rng);
                m + std * z
            })
            .collect();
        let lp = gaussian_logp(&mean, self.log_std, &action);
        (action, lp)
    }

    pub fn predict_value(&self, obs: &[f64]) -> f64 {
        self.value.forward(obs)[0]
    }

    /// Runs `n_epochs` of shuffled minibatch updates over `batch`.
    /// Stats are averaged over every minibatch pass.
    pub fn update(
        &mut self,
        batch: &Batch,
        clip_ratio: f64,
        n_epochs: usize,
        minibatch_size: usize,
        rng: &mut ChaCha8Rng,
    ) -> UpdateStats {
        let n = batch.obs.len();
        let mb = minibatch_size.min(n).max(1);
        let mut order: Vec<usize> = (0..n).collect();
        let mut grad_p = vec![0.0; self.policy.params.len()];
        let mut grad_v = vec![0.0; self.value.params.len()];
        let mut acc = UpdateStats::default();
        let mut passes = 0usize;
        for _ in 0..n_epochs {
            order.shuffle(rng);
            for chunk in order.chunks(mb) {
                grad_p.iter_mut().for_each(|g| *g = 0.0);
                grad_v.iter_mut().for_each(|g| *g = 0.0);
                let s = surrogate_loss_and_grad(
                    &self.policy,
                    self.log_std,
                    batch,
                    chunk,
                    clip_ratio,
                    &mut grad_p,
                );
                let vl = value_loss_and_grad(&self.value, batch, chunk, &mut grad_v);
                self.opt_policy.step(&mut self.policy.params, &grad_p);
                self.opt_value.step(&mut self.value.params, &grad_v);
                acc.surrogate_loss += s.surrogate_loss;
                acc.value_loss += vl;
                acc.approx_kl += s.approx_kl;
                acc.clip_fraction += s.clip_fraction;
                passes += 1;
            }
        }
        if passes > 0 {
            let inv = 1.0 / passes as f64;
            acc.surrogate_loss *= inv;
            acc.value_loss *= inv;
            acc.approx_kl *= inv;
            acc.clip_fraction *= inv;
        }
        acc
    }
}

/// Surrogate loss `-mean(min(r A, clip(r) A))` over `idx`, with the
/// policy gradient accumulated into `grad`. The clipped branch is
/// constant in the parameters, so samples where it binds contribute no
/// gradient: that happens iff `A > 0 && r > 1 + eps` or
/// `A < 0 && r < 1 - eps`.
pub fn surrogate_loss_and_grad(
    policy: &Mlp,
    log_std: f64,
    batch: &Batch,
    idx: &[usize],
    clip_ratio: f64,
    grad: &mut [f64],
) -> UpdateStats {
    let n = idx.len() as f64;
    let inv_var = (-2.0 * log_std).exp();
    let mut loss = 0.0;
    let mut kl = 0.0;
    let mut clipped = 0usize;
    let mut d_mean = Vec::new();
    for &i in idx {
        let cache = policy.forward_cached(&batch.obs[i]);
        let mean = cache.output();
        let lp = gaussian_logp(mean, log_std, &batch.actions[i]);
        let ratio = (lp - batch.logp_old[i]).exp();
        let adv = batch.advantages[i];
        let unclipped = ratio * adv;
        let bound = ratio.clamp(1.0 - clip_ratio, 1.0 + clip_ratio) * adv;
        loss += -unclipped.min(bound) / n;
        kl += (batch.logp_old[i] - lp) / n;
        if (ratio - 1.0).abs() > clip_ratio {
            clipped += 1;
        }
        let masked = (adv > 0.0 && ratio > 1.0 + clip_ratio)
            || (adv < 0.0 && ratio < 1.0 - clip_ratio);
        if !masked {
            // d loss / d mean_k = (-A r / n) * dlogp/dmean_k,
            // dlogp/dmean_k = (a_k - mean_k) / sigma^2.
            let scale = -adv * ratio / n;
            d_mean.clear();
            d_mean.extend(
                mean.iter()
                    .zip(&batch.actions[i])
                    .map(|(m, a)| scale * (a - m) * inv_var),
            );
            policy.backward(&cache, &d_mean, grad);
        }
    }
    UpdateStats {
        surrogate_loss: loss,
        value_loss: 0.0,
        approx_kl: kl,
        clip_fraction: clipped as f64 / n.max(1.0),
    }
}

/// Mean squared error of the value network against the return targets
/// over `idx`; gradient accumulated into `grad`.
pub fn value_loss_and_grad(value: &Mlp, batch: &Batch, idx: &[usize], grad: &mut [f64]) -> f64 {
    let n = idx.len() as f64;
    let mut loss = 0.0;
    for &i in idx {
        let cache = value.forward_cached(&batch.obs[i]);
        let v = cache.output()[0];
        let d = v - batch.returns[i];
        loss += d * d / n;
        value.backward(&cache, &[2.0 * d / n], grad);
    }
    loss
}
