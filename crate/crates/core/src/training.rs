//! Episode rollouts and the off-policy training loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::column::SolveStatus;
use crate::env::{EnvConfig, EnvError, FlowsheetEnv, StepRecord, ACTION_DIM, DESIGN_DIM};
use crate::neural::NeuralError;
use crate::sac::{ReplayBuffer, SacAgent, SacConfig, Transition, UpdateStats};

/// One action choice.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: Vec<f64>,
    pub pre_tanh: Vec<f64>,
    /// Log-probability under the acting policy, when it has one.
    pub log_prob: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Rollout {
    pub transitions: Vec<Transition>,
    pub records: Vec<StepRecord>,
    pub log_probs: Vec<f64>,
    pub episode_return: f64,
    pub mass_closure_error: f64,
}

/// Play one episode from `reset` until done, choosing actions with `policy`.
pub fn rollout<F>(env: &mut FlowsheetEnv, episode: u64, mut policy: F) -> Result<Rollout, EnvError>
where
    F: FnMut(&[f64]) -> Decision,
{
    env.set_episode(episode);
    let mut obs = env.reset();
    env.set_episode(episode);
    let mut out = Rollout {
        transitions: Vec::new(),
        records: Vec::new(),
        log_probs: Vec::new(),
        episode_return: 0.0,
        mass_closure_error: 0.0,
    };
    loop {
        let d = policy(&obs);
        let step = env.step(&d.action)?;
        out.episode_return += step.reward;
        out.mass_closure_error = out.mass_closure_error.max(env.mass_closure_error());
        if let Some(lp) = d.log_prob {
            out.log_probs.push(lp);
        }
        out.transitions.push(Transition {
            obs: std::mem::take(&mut obs),
            action: d.action,
            pre_tanh: d.pre_tanh,
            reward: step.reward,
            next_obs: step.observation.clone(),
            done: step.done,
        });
        out.records.push(step.record);
        obs = step.observation;
        if step.done {
            return Ok(out);
        }
    }
}

/// Per-episode row of the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode: u64,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub moving_avg_return: f64,
    /// Empty when no update ran after this episode.
    pub critic_loss: Option<f64>,
    /// Mean `-log pi` of the actions taken.
    pub entropy: Option<f64>,
    pub alpha: Option<f64>,
    /// Steps in which a column was attempted.
    pub n_columns: usize,
    pub steps: usize,
    pub separate_fraction: f64,
    pub converged: usize,
    pub converged_with_warnings: usize,
    pub solver_failures: usize,
    pub first_rr: Option<f64>,
    pub first_n_stages: Option<usize>,
}

impl EpisodeMetrics {
    pub fn from_rollout(
        episode: u64,
        r: &Rollout,
        returns_window: &[f64],
        update: Option<&UpdateStats>,
        alpha: Option<f64>,
    ) -> Self {
        let count = |s: SolveStatus| {
            r.records
                .iter()
                .filter(|rec| rec.solve_status() == Some(s))
                .count()
        };
        let n_columns = r.records.iter().filter(|rec| rec.separate).count();
        let first = r.records.first().filter(|rec| rec.separate);
        Self {
            episode,
            episode_return: r.episode_return,
            moving_avg_return: returns_window.iter().sum::<f64>() / returns_window.len() as f64,
            critic_loss: update.map(|u| u.critic_loss),
            entropy: (!r.log_probs.is_empty())
                .then(|| -r.log_probs.iter().sum::<f64>() / r.log_probs.len() as f64),
            alpha,
            n_columns,
            steps: r.records.len(),
            separate_fraction: n_columns as f64 / r.records.len().max(1) as f64,
            converged: count(SolveStatus::Converged),
            converged_with_warnings: count(SolveStatus::ConvergedWithWarnings),
            solver_failures: count(SolveStatus::Failed),
            first_rr: first.map(|rec| rec.reflux_ratio),
            first_n_stages: first.map(|rec| rec.n_stages),
        }
    }
}

/// Everything needed to continue a training run bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainerState {
    pub agent: SacAgent,
    pub buffer: ReplayBuffer,
    pub rng: ChaCha8Rng,
    /// Episodes completed so far.
    pub episode: u64,
    pub returns: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("invalid agent configuration: {0}")]
    Config(String),
}

pub struct Trainer {
    env: FlowsheetEnv,
    state: TrainerState,
    updates_per_episode: usize,
    window: usize,
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub metrics: EpisodeMetrics,
    pub records: Vec<StepRecord>,
    pub mass_closure_error: f64,
}

impl Trainer {
    pub fn new(
        env_config: EnvConfig,
        sac: SacConfig,
        seed: u64,
        updates_per_episode: usize,
        window: usize,
    ) -> Result<Self, TrainError> {
        sac.validate().map_err(TrainError::Config)?;
        let env = FlowsheetEnv::new(env_config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agent = SacAgent::new(env.obs_dim(), ACTION_DIM, DESIGN_DIM, sac.clone(), &mut rng)?;
        let state = TrainerState {
            agent,
            buffer: ReplayBuffer::new(sac.buffer_capacity),
            rng,
            episode: 0,
            returns: Vec::new(),
        };
        Ok(Self {
            env,
            state,
            updates_per_episode,
            window: window.max(1),
        })
    }

    pub fn from_state(
        env_config: EnvConfig,
        state: TrainerState,
        updates_per_episode: usize,
        window: usize,
    ) -> Result<Self, TrainError> {
        let env = FlowsheetEnv::new(env_config)?;
        Ok(Self {
            env,
            state,
            updates_per_episode,
            window: window.max(1),
        })
    }

    pub fn state(&self) -> &TrainerState {
        &self.state
    }

    pub fn agent(&self) -> &SacAgent {
        &self.state.agent
    }

    pub fn episodes_done(&self) -> u64 {
        self.state.episode
    }

    /// Roll out one stochastic episode, store it, then update the agent.
    pub fn train_episode(&mut self) -> Result<EpisodeOutcome, TrainError> {
        let episode = self.state.episode + 1;
        let TrainerState {
            agent, buffer, rng, ..
        } = &mut self.state;
        let r = rollout(&mut self.env, episode, |obs| {
            let p = agent.act(obs, true, rng);
            Decision {
                action: p.action,
                pre_tanh: p.pre_tanh,
                log_prob: Some(p.log_prob),
            }
        })?;
        for t in &r.transitions {
            buffer.push(t.clone());
        }
        let mut last = None;
        for _ in 0..self.updates_per_episode {
            if let Some(s) = agent.update(buffer, rng) {
                last = Some(s);
            }
        }
        self.state.episode = episode;
        self.state.returns.push(r.episode_return);
        let start = self.state.returns.len().saturating_sub(self.window);
        let metrics = EpisodeMetrics::from_rollout(
            episode,
            &r,
            &self.state.returns[start..],
            last.as_ref(),
            Some(self.state.agent.alpha()),
        );
        Ok(EpisodeOutcome {
            metrics,
            mass_closure_error: r.mass_closure_error,
            records: r.records,
        })
    }
}

/// Uniform random actions in `[-1, 1]^6`, logged like the agent.
pub struct RandomAgent {
    env: FlowsheetEnv,
    rng: ChaCha8Rng,
    episode: u64,
    returns: Vec<f64>,
    window: usize,
}

impl RandomAgent {
    pub fn new(env_config: EnvConfig, seed: u64, window: usize) -> Result<Self, EnvError> {
        Ok(Self {
            env: FlowsheetEnv::new(env_config)?,
            rng: ChaCha8Rng::seed_from_u64(seed),
            episode: 0,
            returns: Vec::new(),
            window: window.max(1),
        })
    }

    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
        (0..ACTION_DIM)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect()
    }

    pub fn run_episode(&mut self) -> Result<EpisodeOutcome, EnvError> {
        let episode = self.episode + 1;
        let rng = &mut self.rng;
        let r = rollout(&mut self.env, episode, |_| {
            let action = Self::draw(rng);
            Decision {
                pre_tanh: action.iter().map(|a: &f64| a.atanh()).collect(),
                action,
                log_prob: None,
            }
        })?;
        self.episode = episode;
        self.returns.push(r.episode_return);
        let start = self.returns.len().saturating_sub(self.window);
        let metrics = EpisodeMetrics::from_rollout(episode, &r, &self.returns[start..], None, None);
        Ok(EpisodeOutcome {
            metrics,
            mass_closure_error: r.mass_closure_error,
            records: r.records,
        })
    }
}
