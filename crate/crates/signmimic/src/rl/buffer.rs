//! Rollout storage and return / advantage computation.
//!
//! Transitions are stored env-major: all steps of env 0, then env 1,
//! and so on. Episode ends inside a segment are marked per step; an end
//! can carry a bootstrap value (time-limit truncation) or not (true
//! termination). Both advantage estimators respect those boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AdvantageMode {
    /// Discounted Monte Carlo return minus the value baseline:
    /// `A_t = R_t - V(s_t)`. Config files may also spell this `paper`.
    #[serde(alias = "paper")]
    MonteCarlo,
    /// Generalized advantage estimation with `lambda`.
    Gae,
}

/// How a step ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepEnd {
    /// Episode continues.
    Continue,
    /// Episode terminated; no value beyond this step.
    Terminate,
    /// Episode was cut by a time limit; `value` is V(s_{t+1}) and keeps
    /// contributing to the return.
    Truncate { value: f64 },
}

pub struct RolloutBuffer {
    pub num_envs: usize,
    pub steps_per_env: usize,
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub logps: Vec<f64>,
    pub ends: Vec<StepEnd>,
    filled: usize,
}

impl RolloutBuffer {
    pub fn new(num_envs: usize, steps_per_env: usize) -> Self {
        let n = num_envs * steps_per_env;
        RolloutBuffer {
            num_envs,
            steps_per_env,
            obs: Vec::with_capacity(n),
            actions: Vec::with_capacity(n),
            rewards: Vec::with_capacity(n),
            values: Vec::with_capacity(n),
            logps: Vec::with_capacity(n),
            ends: Vec::with_capacity(n),
            filled: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.filled
    }

    pub fn is_empty(&self) -> bool {
        self.filled == 0
    }

    pub fn capacity(&self) -> usize {
        self.num_envs * self.steps_per_env
    }

    pub fn push(
        &mut self,
        obs: Vec<f64>,
        action: Vec<f64>,
        reward: f64,
        value: f64,
        logp: f64,
        end: StepEnd,
    ) {
        assert!(self.filled < self.capacity(), "rollout buffer overfilled");
        self.obs.push(obs);
        self.actions.push(action);
        self.rewards.push(reward);
        self.values.push(value);
        self.logps.push(logp);
        self.ends.push(end);
        self.filled += 1;
    }

    /// The last step of every env segment must close its episode: either
    /// a real boundary or a truncation carrying the bootstrap value the
    /// collector computed for the next state.
    fn check_closed(&self) -> Result<()> {
        if self.filled != self.capacity() {
            return Err(Error::contract(format!(
                "rollout buffer holds {} of {} transitions",
                self.filled,
                self.capacity()
            )));
        }
        for e in 0..self.num_envs {
            let last = (e + 1) * self.steps_per_env - 1;
            if self.ends[last] == StepEnd::Continue {
                return Err(Error::contract(format!(
                    "env {e} segment does not close its episode"
                )));
            }
        }
        Ok(())
    }

    /// Per-step discounted returns and advantages. Returns are always the
    /// Monte Carlo targets used for the value loss; the advantage follows
    /// `mode`.
    pub fn returns_and_advantages(
        &self,
        mode: AdvantageMode,
        gamma: f64,
        lambda: f64,
        normalize: bool,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_closed()?;
        if !(0.0..=1.0).contains(&gamma) || !(0.0..=1.0).contains(&lambda) {
            return Err(Error::contract(format!("gamma {gamma} / lambda {lambda} out of [0,1]")));
        }
        let t_len = self.steps_per_env;
        let mut returns = vec![0.0; self.filled];
        let mut advantages = vec![0.0; self.filled];
        for e in 0..self.num_envs {
            let base = e * t_len;
            let mut run = 0.0;
            for t in (0..t_len).rev() {
                let i = base + t;
                run = match self.ends[i] {
                    StepEnd::Continue => self.rewards[i] + gamma * run,
                    StepEnd::Terminate => self.rewards[i],
                    StepEnd::Truncate { value } => self.rewards[i] + gamma * value,
                };
                returns[i] = run;
            }
            match mode {
                AdvantageMode::MonteCarlo => {
                    for t in 0..t_len {
                        let i = base + t;
                        advantages[i] = returns[i] - self.values[i];
                    }
                }
                AdvantageMode::Gae => {
                    let mut acc = 0.0;
                    for t in (0..t_len).rev() {
                        let i = base + t;
                        let (next_v, cont) = match self.ends[i] {
                            StepEnd::Continue => (self.values[i + 1], 1.0),
                            StepEnd::Terminate => (0.0, 0.0),
                            StepEnd::Truncate { value } => (value, 0.0),
                        };
                        let delta = self.rewards[i] + gamma * next_v - self.values[i];
                        // A truncation still bootstraps through delta but
                        // stops the lambda recursion like a termination.
                        acc = delta + gamma * lambda * cont * acc;
                        advantages[i] = acc;
                    }
                }
            }
        }
        if normalize {
            let mean = crate::math::mean(&advantages);
            let std = crate::math::std_dev(&advantages, mean);
            for a in advantages.iter_mut() {
                *a = (*a - mean) / (std + 1e-8);
            }
        }
        Ok((returns, advantages))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_buffer(rng: &mut ChaCha8Rng, num_envs: usize, t_len: usize) -> RolloutBuffer {
        let mut buf = RolloutBuffer::new(num_envs, t_len);
        for _ in 0..num_envs {
            for t in 0..t_len {
                let closing = t == t_len - 1;
                let end = match rng.gen_range(0..10) {
                    0 => StepEnd::Terminate,
                    1 | 2 => StepEnd::Truncate { value: rng.gen_range(-2.0..2.0) },
                    _ if closing => StepEnd::Truncate { value: rng.gen_range(-2.0..2.0) },
                    _ => StepEnd::Continue,
                };
                buf.push(
                    vec![0.0],
                    vec![0.0],
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    0.0,
                    end,
                );
            }
        }
        buf
    }

    /// O(T^2) oracle: for each step, walk forward summing discounted
    /// rewards until the episode closes.
    fn brute_returns(buf: &RolloutBuffer, gamma: f64) -> Vec<f64> {
        let t_len = buf.steps_per_env;
        let mut out = vec![0.0; buf.len()];
        for e in 0..buf.num_envs {
            for t in 0..t_len {
                let mut acc = 0.0;
                let mut disc = 1.0;
                for k in t..t_len {
                    let i = e * t_len + k;
                    acc += disc * buf.rewards[i];
                    match buf.ends[i] {
                        StepEnd::Continue => disc *= gamma,
                        StepEnd::Terminate => break,
                        StepEnd::Truncate { value } => {
                            acc += disc * gamma * value;
                            break;
                        }
                    }
                }
                out[e * t_len + t] = acc;
            }
        }
        out
    }

    /// O(T^2) GAE oracle: explicit lambda-weighted sum of deltas.
    fn brute_gae(buf: &RolloutBuffer, gamma: f64, lambda: f64) -> Vec<f64> {
        let t_len = buf.steps_per_env;
        let mut out = vec![0.0; buf.len()];
        for e in 0..buf.num_envs {
            let delta = |i: usize| -> f64 {
                let (next_v, _) = match buf.ends[i] {
                    StepEnd::Continue => (buf.values[i + 1], ()),
                    StepEnd::Terminate => (0.0, ()),
                    StepEnd::Truncate { value } => (value, ()),
                };
                buf.rewards[i] + gamma * next_v - buf.values[i]
            };
            for t in 0..t_len {
                let mut acc = 0.0;
                let mut w = 1.0;
                for k in t..t_len {
                    let i = e * t_len + k;
                    acc += w * delta(i);
                    if buf.ends[i] != StepEnd::Continue {
                        break;
                    }
                    w *= gamma * lambda;
                }
                out[e * t_len + t] = acc;
            }
        }
        out
    }

    #[test]
    fn recursions_match_brute_force_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..1000 {
            let buf = random_buffer(&mut rng, 1 + case % 3, 10);
            let gamma = rng.gen_range(0.0..1.0);
            let lambda = rng.gen_range(0.0..1.0);
            let (r_mc, a_mc) =
                buf.returns_and_advantages(AdvantageMode::MonteCarlo, gamma, lambda, false).unwrap();
            let want_r = brute_returns(&buf, gamma);
            for (got, want) in r_mc.iter().zip(&want_r) {
                assert!((got - want).abs() < 1e-12, "case {case}: {got} vs {want}");
            }
            for i in 0..buf.len() {
                assert!((a_mc[i] - (want_r[i] - buf.values[i])).abs() < 1e-12);
            }
            let (r_g, a_g) =
                buf.returns_and_advantages(AdvantageMode::Gae, gamma, lambda, false).unwrap();
            assert_eq!(r_g, r_mc);
            let want_a = brute_gae(&buf, gamma, lambda);
            for (got, want) in a_g.iter().zip(&want_a) {
                assert!((got - want).abs() < 1e-12, "case {case}: gae {got} vs {want}");
            }
        }
    }

    #[test]
    fn gae_with_unit_lambda_equals_monte_carlo_inside_episode() {
        // lambda = 1 telescopes the deltas into R_t - V_t as long as no
        // truncation bootstraps mid-segment.
        let mut buf = RolloutBuffer::new(1, 6);
        for t in 0..6 {
            let end = if t == 5 { StepEnd::Terminate } else { StepEnd::Continue };
            buf.push(vec![0.0], vec![0.0], (t as f64 * 1.3).sin(), 0.2 * t as f64, 0.0, end);
        }
        let (_, a_mc) =
            buf.returns_and_advantages(AdvantageMode::MonteCarlo, 0.9, 1.0, false).unwrap();
        let (_, a_g) = buf.returns_and_advantages(AdvantageMode::Gae, 0.9, 1.0, false).unwrap();
        for (x, y) in a_mc.iter().zip(&a_g) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization_centers_and_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let buf = random_buffer(&mut rng, 4, 25);
        let (_, a) =
            buf.returns_and_advantages(AdvantageMode::MonteCarlo, 0.95, 0.9, true).unwrap();
        let m = crate::math::mean(&a);
        assert!(m.abs() < 1e-10);
        assert!((crate::math::std_dev(&a, m) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn open_segment_is_rejected() {
        let mut buf = RolloutBuffer::new(1, 2);
        buf.push(vec![0.0], vec![0.0], 1.0, 0.0, 0.0, StepEnd::Continue);
        buf.push(vec![0.0], vec![0.0], 1.0, 0.0, 0.0, StepEnd::Continue);
        assert!(matches!(
            buf.returns_and_advantages(AdvantageMode::MonteCarlo, 0.9, 0.9, false),
            Err(Error::Contract(_))
        ));
    }
}
