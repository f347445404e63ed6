//! Soft actor-critic with a tanh-Gaussian policy, a soft-Q critic with a
//! Polyak-averaged target and an adaptive entropy temperature.
//!
//! The actor emits a mean and a log standard deviation per action head. Only
//! the first `entropy_dims` heads enter the log-probability; any further
//! heads (the separate flag in the flowsheet environment) are still sampled
//! and squashed but carry no entropy bonus.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::neural::{Adam, Mlp, NeuralError};

/// Stabilizer inside the tanh change-of-variables term.
pub const TANH_EPS: f64 = 1e-6;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SacConfig {
    pub hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub alpha_lr: f64,
    pub gamma: f64,
    /// Target smoothing coefficient.
    pub tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// No updates happen before the buffer holds this many transitions.
    pub min_buffer: usize,
    pub target_entropy: f64,
    pub initial_alpha: f64,
    pub learn_alpha: bool,
    pub log_std_min: f64,
    pub log_std_max: f64,
    /// Use two critics and their minimum instead of one.
    pub twin_critic: bool,
    /// Initial output bias of the means of heads outside the entropy set.
    pub flag_head_bias: f64,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 128],
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            alpha_lr: 3e-4,
            gamma: 0.99,
            tau: 0.005,
            batch_size: 64,
            buffer_capacity: 320_000,
            min_buffer: 320,
            target_entropy: -5.0,
            initial_alpha: 1.0,
            learn_alpha: true,
            log_std_min: -20.0,
            log_std_max: 2.0,
            twin_critic: false,
            flag_head_bias: 2.0,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<(), String> {
        let checks = [
            (self.actor_lr > 0.0, "actor_lr must be positive"),
            (self.critic_lr > 0.0, "critic_lr must be positive"),
            (self.alpha_lr > 0.0, "alpha_lr must be positive"),
            ((0.0..=1.0).contains(&self.gamma), "gamma must be in [0, 1]"),
            ((0.0..=1.0).contains(&self.tau), "tau must be in [0, 1]"),
            (self.batch_size > 0, "batch_size must be positive"),
            (
                self.buffer_capacity >= self.batch_size,
                "buffer_capacity below batch_size",
            ),
            (self.initial_alpha > 0.0, "initial_alpha must be positive"),
            (
                self.log_std_min < self.log_std_max,
                "log_std_min must be below log_std_max",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(msg.to_string()),
            None => Ok(()),
        }
    }
}

/// Output of the squashed Gaussian head for one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySample {
    pub action: Vec<f64>,
    pub pre_tanh: Vec<f64>,
    pub mean: Vec<f64>,
    /// Clamped log standard deviation.
    pub log_std: Vec<f64>,
    pub noise: Vec<f64>,
    pub log_prob: f64,
}

/// Apply the tanh-Gaussian head to raw actor outputs `[mu; log_std]`.
pub fn squash(
    raw: &[f64],
    noise: &[f64],
    entropy_dims: usize,
    log_std_bounds: (f64, f64),
) -> PolicySample {
    let a_dim = noise.len();
    debug_assert_eq!(raw.len(), 2 * a_dim);
    let mean = raw[..a_dim].to_vec();
    let log_std: Vec<f64> = raw[a_dim..]
        .iter()
        .map(|l| l.clamp(log_std_bounds.0, log_std_bounds.1))
        .collect();
    let pre_tanh: Vec<f64> = (0..a_dim)
        .map(|k| mean[k] + log_std[k].exp() * noise[k])
        .collect();
    let action: Vec<f64> = pre_tanh.iter().map(|u| u.tanh()).collect();
    let log_prob = (0..entropy_dims)
        .map(|k| {
            let t = action[k];
            -0.5 * noise[k] * noise[k] - log_std[k] - HALF_LN_2PI - (1.0 - t * t + TANH_EPS).ln()
        })
        .sum();
    PolicySample {
        action,
        pre_tanh,
        mean,
        log_std,
        noise: noise.to_vec(),
        log_prob,
    }
}

pub fn standard_normal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

/// Critic value at `(obs, action)`.
pub fn q_value(critic: &Mlp, obs: &[f64], action: &[f64]) -> f64 {
    critic
        .forward(&concat(obs, action))
        .expect("critic input size")[0]
}

/// Value and action-gradient of the critic. Parameter gradients go into
/// `scratch`, which the caller discards.
fn q_and_action_grad(
    critic: &Mlp,
    obs: &[f64],
    action: &[f64],
    scratch: &mut [f64],
) -> (f64, Vec<f64>) {
    let cache = critic
        .forward_cached(&concat(obs, action))
        .expect("critic input size");
    let q = cache.output()[0];
    let dx = critic
        .backward(&cache, &[1.0], scratch)
        .expect("critic gradient");
    (q, dx[obs.len()..].to_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub pre_tanh: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub done: bool,
}

/// Ring buffer with oldest-first eviction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    data: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            data: Vec::new(),
            next: 0,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.data[i]
    }

    /// Uniform minibatch, without replacement within the batch.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<&Transition> {
        let n = batch.min(self.data.len());
        rand::seq::index::sample(rng, self.data.len(), n)
            .into_iter()
            .map(|i| &self.data[i])
            .collect()
    }
}

/// Soft TD targets `r + gamma (1 - done) (min Q_target(s', a') - alpha log pi(a'|s'))`
/// with `a'` drawn from the current actor using `next_noise`.
#[allow(clippy::too_many_arguments)]
pub fn critic_targets(
    batch: &[&Transition],
    next_noise: &[Vec<f64>],
    actor: &Mlp,
    targets: &[Mlp],
    alpha: f64,
    gamma: f64,
    entropy_dims: usize,
    log_std_bounds: (f64, f64),
) -> Vec<f64> {
    batch
        .iter()
        .zip(next_noise)
        .map(|(t, eps)| {
            if t.done {
                return t.reward;
            }
            let raw = actor.forward(&t.next_obs).expect("actor input size");
            let s = squash(&raw, eps, entropy_dims, log_std_bounds);
            let q = targets
                .iter()
                .map(|c| q_value(c, &t.next_obs, &s.action))
                .fold(f64::INFINITY, f64::min);
            t.reward + gamma * (q - alpha * s.log_prob)
        })
        .collect()
}

/// `0.5 * mean((Q(s, a) - y)^2)` and its parameter gradient, `y` held fixed.
pub fn critic_loss_and_grad(critic: &Mlp, batch: &[&Transition], y: &[f64]) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; critic.params().len()];
    let n = batch.len() as f64;
    let mut loss = 0.0;
    for (t, y) in batch.iter().zip(y) {
        let cache = critic
            .forward_cached(&concat(&t.obs, &t.action))
            .expect("critic input size");
        let diff = cache.output()[0] - y;
        loss += 0.5 * diff * diff / n;
        critic
            .backward(&cache, &[diff / n], &mut grad)
            .expect("critic gradient");
    }
    (loss, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorObjective {
    pub loss: f64,
    pub grad: Vec<f64>,
    /// Per-sample log-probabilities of the reparameterized actions.
    pub log_probs: Vec<f64>,
}

/// `mean(alpha log pi(a~|s) - min_i Q_i(s, a~))` over `obs`, with `a~`
/// reparameterized from `noise`, and its gradient with respect to the actor
/// parameters. Critic parameters are held fixed.
pub fn actor_loss_and_grad(
    actor: &Mlp,
    critics: &[Mlp],
    obs: &[&[f64]],
    noise: &[Vec<f64>],
    alpha: f64,
    entropy_dims: usize,
    log_std_bounds: (f64, f64),
) -> ActorObjective {
    let mut grad = vec![0.0; actor.params().len()];
    let mut scratch: Vec<Vec<f64>> = critics
        .iter()
        .map(|c| vec![0.0; c.params().len()])
        .collect();
    let n = obs.len() as f64;
    let mut loss = 0.0;
    let mut log_probs = Vec::with_capacity(obs.len());
    for (s, eps) in obs.iter().zip(noise) {
        let cache = actor.forward_cached(s).expect("actor input size");
        let raw = cache.output();
        let a_dim = eps.len();
        let p = squash(raw, eps, entropy_dims, log_std_bounds);
        let (q, dq_da) = critics
            .iter()
            .zip(scratch.iter_mut())
            .map(|(c, sc)| q_and_action_grad(c, s, &p.action, sc))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least one critic");
        loss += (alpha * p.log_prob - q) / n;
        log_probs.push(p.log_prob);

        let mut up = vec![0.0; 2 * a_dim];
        for k in 0..a_dim {
            let t = p.action[k];
            let sech2 = 1.0 - t * t;
            let sigma_eps = p.log_std[k].exp() * eps[k];
            // d(loss)/du from the critic term
            let mut d_u = -dq_da[k] * sech2;
            let mut d_ls_direct = 0.0;
            if k < entropy_dims {
                d_u += alpha * 2.0 * t * sech2 / (sech2 + TANH_EPS);
                d_ls_direct = -alpha;
            }
            up[k] = d_u / n;
            let in_range = raw[a_dim + k] > log_std_bounds.0 && raw[a_dim + k] < log_std_bounds.1;
            if in_range {
                up[a_dim + k] = (d_ls_direct + d_u * sigma_eps) / n;
            }
        }
        actor
            .backward(&cache, &up, &mut grad)
            .expect("actor gradient");
    }
    ActorObjective {
        loss,
        grad,
        log_probs,
    }
}

/// `mean(-alpha (log pi + H))` with `alpha = exp(log_alpha)` and its
/// derivative with respect to `log_alpha`.
pub fn temperature_loss_and_grad(
    log_alpha: f64,
    log_probs: &[f64],
    target_entropy: f64,
) -> (f64, f64) {
    let alpha = log_alpha.exp();
    let n = log_probs.len() as f64;
    let mean_term = log_probs.iter().map(|lp| -lp - target_entropy).sum::<f64>() / n;
    (alpha * mean_term, alpha * mean_term)
}

/// `target <- tau * online + (1 - tau) * target`, elementwise.
pub fn polyak_update(target: &mut Mlp, online: &Mlp, tau: f64) {
    for (t, o) in target.params_mut().iter_mut().zip(online.params()) {
        *t = tau * o + (1.0 - tau) * *t;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha_loss: f64,
    pub alpha: f64,
    /// Mean `-log pi` of the actor batch.
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SacAgent {
    config: SacConfig,
    obs_dim: usize,
    action_dim: usize,
    entropy_dims: usize,
    actor: Mlp,
    critics: Vec<Mlp>,
    targets: Vec<Mlp>,
    actor_opt: Adam,
    critic_opts: Vec<Adam>,
    log_alpha: f64,
    alpha_opt: Adam,
    updates: u64,
}

impl SacAgent {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        action_dim: usize,
        entropy_dims: usize,
        config: SacConfig,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        assert!(
            entropy_dims <= action_dim,
            "entropy heads exceed action heads"
        );
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend(&config.hidden);
        actor_sizes.push(2 * action_dim);
        let mut critic_sizes = vec![obs_dim + action_dim];
        critic_sizes.extend(&config.hidden);
        critic_sizes.push(1);

        let mut actor = Mlp::init(&actor_sizes, rng)?;
        let out_bias = actor.bias_offset(actor_sizes.len() - 2);
        for k in entropy_dims..action_dim {
            actor.params_mut()[out_bias + k] = config.flag_head_bias;
        }
        let n_critics = if config.twin_critic { 2 } else { 1 };
        let critics = (0..n_critics)
            .map(|_| Mlp::init(&critic_sizes, rng))
            .collect::<Result<Vec<_>, _>>()?;
        let targets = critics.clone();
        let actor_opt = Adam::new(actor.params().len(), config.actor_lr);
        let critic_opts = critics
            .iter()
            .map(|c| Adam::new(c.params().len(), config.critic_lr))
            .collect();
        Ok(Self {
            obs_dim,
            action_dim,
            entropy_dims,
            actor,
            critics,
            targets,
            actor_opt,
            critic_opts,
            log_alpha: config.initial_alpha.ln(),
            alpha_opt: Adam::new(1, config.alpha_lr),
            updates: 0,
            config,
        })
    }

    pub fn config(&self) -> &SacConfig {
        &self.config
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn entropy_dims(&self) -> usize {
        self.entropy_dims
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn critics(&self) -> &[Mlp] {
        &self.critics
    }

    pub fn targets(&self) -> &[Mlp] {
        &self.targets
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn log_alpha(&self) -> f64 {
        self.log_alpha
    }

    /// Number of completed gradient updates.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    fn log_std_bounds(&self) -> (f64, f64) {
        (self.config.log_std_min, self.config.log_std_max)
    }

    pub fn act_with_noise(&self, obs: &[f64], noise: &[f64]) -> PolicySample {
        let raw = self.actor.forward(obs).expect("observation size");
        squash(&raw, noise, self.entropy_dims, self.log_std_bounds())
    }

    /// Stochastic actions draw standard normal noise; deterministic ones use
    /// zero noise, i.e. `tanh(mu)`.
    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], stochastic: bool, rng: &mut R) -> PolicySample {
        let noise = if stochastic {
            standard_normal(self.action_dim, rng)
        } else {
            vec![0.0; self.action_dim]
        };
        self.act_with_noise(obs, &noise)
    }

    /// One round of critic, actor, temperature and target updates on a fresh
    /// minibatch. Returns `None` while the buffer is below its minimum fill.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer,
        rng: &mut R,
    ) -> Option<UpdateStats> {
        if buffer.len() < self.config.min_buffer.max(1) {
            return None;
        }
        let bounds = self.log_std_bounds();
        let batch = buffer.sample(self.config.batch_size, rng);
        let alpha = self.alpha();

        let next_noise: Vec<Vec<f64>> = batch
            .iter()
            .map(|_| standard_normal(self.action_dim, rng))
            .collect();
        let y = critic_targets(
            &batch,
            &next_noise,
            &self.actor,
            &self.targets,
            alpha,
            self.config.gamma,
            self.entropy_dims,
            bounds,
        );
        let mut critic_loss = 0.0;
        for (critic, opt) in self.critics.iter_mut().zip(&mut self.critic_opts) {
            let (loss, grad) = critic_loss_and_grad(critic, &batch, &y);
            opt.step(critic.params_mut(), &grad).expect("critic layout");
            critic_loss += loss / if self.config.twin_critic { 2.0 } else { 1.0 };
        }

        let obs: Vec<&[f64]> = batch.iter().map(|t| t.obs.as_slice()).collect();
        let noise: Vec<Vec<f64>> = batch
            .iter()
            .map(|_| standard_normal(self.action_dim, rng))
            .collect();
        let obj = actor_loss_and_grad(
            &self.actor,
            &self.critics,
            &obs,
            &noise,
            alpha,
            self.entropy_dims,
            bounds,
        );
        self.actor_opt
            .step(self.actor.params_mut(), &obj.grad)
            .expect("actor layout");

        let (alpha_loss, d_log_alpha) =
            temperature_loss_and_grad(self.log_alpha, &obj.log_probs, self.config.target_entropy);
        if self.config.learn_alpha {
            let mut la = [self.log_alpha];
            self.alpha_opt
                .step(&mut la, &[d_log_alpha])
                .expect("scalar layout");
            self.log_alpha = la[0];
        }

        for (t, c) in self.targets.iter_mut().zip(&self.critics) {
            polyak_update(t, c, self.config.tau);
        }
        self.updates += 1;
        let entropy = -obj.log_probs.iter().sum::<f64>() / obj.log_probs.len() as f64;
        Some(UpdateStats {
            critic_loss,
            actor_loss: obj.loss,
            alpha_loss,
            alpha: self.alpha(),
            entropy,
        })
    }
}
