//! Run configuration, on-disk artifacts and the command implementations
//! behind the CLI.
//!
//! A training run directory holds:
//!
//! - `run_config.json`: the resolved configuration
//! - `metrics.csv`: one [`EpisodeMetrics`] row per episode
//! - `steps.csv`: one [`StepRecord`] row per environment step
//! - `checkpoints/latest.json`: resumable trainer state
//! - `checkpoints/best.json`: the state whose greedy policy scored best
//! - `summary.json`: wall clock and run totals
//!
//! `metrics.csv` and `steps.csv` depend only on the configuration and seed;
//! timing goes to `summary.json` alone.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{run_base_case, BaseCaseResult, SequenceTemplate, Topology, TuneOptions};
use crate::env::{EnvConfig, FlowsheetEnv, StepRecord};
use crate::sac::{SacAgent, SacConfig};
use crate::training::{
    rollout, Decision, EpisodeMetrics, EpisodeOutcome, RandomAgent, Rollout, TrainError, Trainer,
    TrainerState,
};

pub const CHECKPOINT_FORMAT: &str = "distrl-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("artifact error: {0}")]
    Artifact(String),
}

impl RunError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Artifact(_) => 3,
        }
    }
}

fn artifact(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Artifact(format!("{}: {e}", path.display()))
}

impl From<TrainError> for RunError {
    fn from(e: TrainError) -> Self {
        RunError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    /// Total episodes of the run, counting any resumed ones.
    pub episodes: u64,
    pub updates_per_episode: usize,
    /// Episodes between checkpoint writes; 0 writes only the final one.
    pub checkpoint_every: u64,
    pub moving_average_window: usize,
    /// Write the per-step log.
    pub step_log: bool,
    pub eval_episodes: usize,
    /// Separate environment file, resolved against the config file's
    /// directory. Overrides `[env]` when set.
    pub env_file: Option<PathBuf>,
    pub agent: SacConfig,
    pub env: EnvConfig,
    pub tune: TuneOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            episodes: 2000,
            updates_per_episode: 1,
            checkpoint_every: 100,
            moving_average_window: 100,
            step_log: true,
            eval_episodes: 1,
            env_file: None,
            agent: SacConfig::default(),
            env: EnvConfig::default(),
            tune: TuneOptions::default(),
        }
    }
}

/// Named configurations: one update per episode, or four.
pub const PRESETS: [&str; 2] = ["standard", "best_average"];

impl RunConfig {
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "standard" => Some(Self::default()),
            "best_average" => Some(Self {
                updates_per_episode: 4,
                ..Self::default()
            }),
            _ => None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, RunError> {
        toml::from_str(s).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("run config serializes")
    }

    /// Load a preset name or a `.toml`/`.json` file.
    pub fn load(spec: &str) -> Result<Self, RunError> {
        let path = Path::new(spec);
        if !path.exists() {
            return Self::preset(spec).ok_or_else(|| {
                RunError::Config(format!(
                    "{spec}: no such file or preset (presets: {})",
                    PRESETS.join(", ")
                ))
            });
        }
        let text =
            fs::read_to_string(path).map_err(|e| RunError::Config(format!("{spec}: {e}")))?;
        let mut cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{spec}: {e}")))?
        } else {
            toml::from_str(&text).map_err(|e| RunError::Config(format!("{spec}: {e}")))?
        };
        if let Some(env_file) = cfg.env_file.take() {
            let base = path.parent().unwrap_or(Path::new("."));
            let env_path = base.join(&env_file);
            let env_text = fs::read_to_string(&env_path)
                .map_err(|e| RunError::Config(format!("{}: {e}", env_path.display())))?;
            cfg.env = toml::from_str(&env_text)
                .map_err(|e| RunError::Config(format!("{}: {e}", env_path.display())))?;
            if let Some(c) = cfg.env.components.as_mut() {
                if c.is_relative() {
                    *c = env_path.parent().unwrap_or(Path::new(".")).join(&*c);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.agent.validate().map_err(RunError::Config)?;
        self.env
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        if self.moving_average_window == 0 {
            return Err(RunError::Config(
                "moving_average_window must be positive".into(),
            ));
        }
        // catches unknown components and bad feeds before a run starts
        FlowsheetEnv::new(self.env.clone()).map_err(|e| RunError::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: RunConfig,
    pub state: TrainerState,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<(), RunError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| artifact(dir, e))?;
        }
        let tmp = path.with_extension("json.tmp");
        let f = File::create(&tmp).map_err(|e| artifact(&tmp, e))?;
        serde_json::to_writer(BufWriter::new(f), self).map_err(|e| artifact(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| artifact(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let f = File::open(path).map_err(|e| artifact(path, e))?;
        let ck: Self =
            serde_json::from_reader(std::io::BufReader::new(f)).map_err(|e| artifact(path, e))?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(artifact(
                path,
                format!("unsupported checkpoint {} v{}", ck.format, ck.version),
            ));
        }
        Ok(ck)
    }
}

/// CSV writer that can continue an existing file, keeping only rows whose
/// episode is at most `keep_through`.
struct Log {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl Log {
    fn create<T>(
        path: &Path,
        keep_through: Option<u64>,
        episode_of: impl Fn(&T) -> u64,
    ) -> Result<Self, RunError>
    where
        T: Serialize + for<'de> Deserialize<'de>,
    {
        let kept: Vec<T> = match keep_through {
            Some(last) if path.exists() => read_csv::<T>(path)?
                .into_iter()
                .filter(|r| episode_of(r) <= last)
                .collect(),
            _ => Vec::new(),
        };
        let f = File::create(path).map_err(|e| artifact(path, e))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(f));
        for r in &kept {
            writer.serialize(r).map_err(|e| artifact(path, e))?;
        }
        Ok(Self {
            path: path.to_path_buf(),
            writer,
        })
    }

    fn write<T: Serialize>(&mut self, row: &T) -> Result<(), RunError> {
        self.writer
            .serialize(row)
            .map_err(|e| artifact(&self.path, e))
    }

    fn flush(&mut self) -> Result<(), RunError> {
        self.writer.flush().map_err(|e| artifact(&self.path, e))
    }
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, RunError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| artifact(path, e))?;
    rdr.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| artifact(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| artifact(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| artifact(path, e))?;
    }
    w.flush().map_err(|e| artifact(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| artifact(path, e))?;
    fs::write(path, text + "\n").map_err(|e| artifact(path, e))
}

fn create_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|e| artifact(dir, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub episodes: u64,
    pub wall_clock_seconds: f64,
    pub mean_return: f64,
    pub final_moving_average: f64,
    pub max_mass_closure_error: f64,
}

pub fn checkpoint_path(out: &Path) -> PathBuf {
    out.join("checkpoints").join("latest.json")
}

/// Checkpoint with the highest deterministic-policy return seen at a
/// checkpoint interval.
pub fn best_checkpoint_path(out: &Path) -> PathBuf {
    out.join("checkpoints").join("best.json")
}

/// One episode with the mean action.
pub fn greedy_rollout(
    env: &mut FlowsheetEnv,
    agent: &SacAgent,
    episode: u64,
) -> Result<Rollout, RunError> {
    let zeros = vec![0.0; agent.action_dim()];
    rollout(env, episode, |obs| {
        let p = agent.act_with_noise(obs, &zeros);
        Decision {
            action: p.action,
            pre_tanh: p.pre_tanh,
            log_prob: Some(p.log_prob),
        }
    })
    .map_err(|e| RunError::Config(e.to_string()))
}

/// Train from scratch, or continue from `resume` until `config.episodes`.
pub fn cmd_train(
    config: &RunConfig,
    out: &Path,
    resume: Option<&Path>,
) -> Result<RunSummary, RunError> {
    config.validate()?;
    create_dir(out)?;
    let (mut trainer, config) = match resume {
        None => (
            Trainer::new(
                config.env.clone(),
                config.agent.clone(),
                config.seed,
                config.updates_per_episode,
                config.moving_average_window,
            )?,
            config.clone(),
        ),
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            // the checkpoint fixes everything but the episode budget
            let cfg = RunConfig {
                episodes: config.episodes,
                checkpoint_every: config.checkpoint_every,
                ..ck.config
            };
            (
                Trainer::from_state(
                    cfg.env.clone(),
                    ck.state,
                    cfg.updates_per_episode,
                    cfg.moving_average_window,
                )?,
                cfg,
            )
        }
    };
    write_json(&out.join("run_config.json"), &config)?;
    let keep = resume.map(|_| trainer.episodes_done());
    let mut metrics = Log::create::<EpisodeMetrics>(&out.join("metrics.csv"), keep, |m| m.episode)?;
    let mut steps = if config.step_log {
        Some(Log::create::<StepRecord>(
            &out.join("steps.csv"),
            keep,
            |r| r.episode,
        )?)
    } else {
        None
    };
    let save = |trainer: &Trainer, path: &Path| {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            config: config.clone(),
            state: trainer.state().clone(),
        }
        .save(path)
    };
    let mut probe_env =
        FlowsheetEnv::new(config.env.clone()).map_err(|e| RunError::Config(e.to_string()))?;
    let best_path = best_checkpoint_path(out);
    let mut best = match resume {
        Some(_) if best_path.exists() => {
            let ck = Checkpoint::load(&best_path)?;
            greedy_rollout(&mut probe_env, &ck.state.agent, 0)?.episode_return
        }
        _ => f64::NEG_INFINITY,
    };

    let start = Instant::now();
    let mut closure: f64 = 0.0;
    while trainer.episodes_done() < config.episodes {
        let EpisodeOutcome {
            metrics: m,
            records,
            mass_closure_error,
        } = trainer.train_episode()?;
        closure = closure.max(mass_closure_error);
        metrics.write(&m)?;
        if let Some(s) = steps.as_mut() {
            for r in &records {
                s.write(r)?;
            }
        }
        if config.checkpoint_every > 0 && m.episode % config.checkpoint_every == 0 {
            metrics.flush()?;
            if let Some(s) = steps.as_mut() {
                s.flush()?;
            }
            save(&trainer, &checkpoint_path(out))?;
            let greedy = greedy_rollout(&mut probe_env, trainer.agent(), 0)?.episode_return;
            if greedy > best {
                best = greedy;
                save(&trainer, &best_path)?;
            }
        }
    }
    metrics.flush()?;
    if let Some(s) = steps.as_mut() {
        s.flush()?;
    }
    save(&trainer, &checkpoint_path(out))?;
    if !best_path.exists() {
        save(&trainer, &best_path)?;
    }
    let returns = &trainer.state().returns;
    let window = config.moving_average_window.min(returns.len()).max(1);
    let summary = RunSummary {
        episodes: trainer.episodes_done(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        mean_return: mean(returns),
        final_moving_average: mean(&returns[returns.len().saturating_sub(window)..]),
        max_mass_closure_error: closure,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Uniform random actions with the training log schema.
pub fn cmd_random_agent(config: &RunConfig, out: &Path) -> Result<RunSummary, RunError> {
    config.validate()?;
    create_dir(out)?;
    write_json(&out.join("run_config.json"), config)?;
    let mut agent = RandomAgent::new(
        config.env.clone(),
        config.seed,
        config.moving_average_window,
    )
    .map_err(|e| RunError::Config(e.to_string()))?;
    let mut metrics = Log::create::<EpisodeMetrics>(&out.join("metrics.csv"), None, |m| m.episode)?;
    let mut steps = if config.step_log {
        Some(Log::create::<StepRecord>(
            &out.join("steps.csv"),
            None,
            |r| r.episode,
        )?)
    } else {
        None
    };
    let start = Instant::now();
    let mut returns = Vec::new();
    let mut closure: f64 = 0.0;
    for _ in 0..config.episodes {
        let o = agent
            .run_episode()
            .map_err(|e| RunError::Config(e.to_string()))?;
        closure = closure.max(o.mass_closure_error);
        returns.push(o.metrics.episode_return);
        metrics.write(&o.metrics)?;
        if let Some(s) = steps.as_mut() {
            for r in &o.records {
                s.write(r)?;
            }
        }
    }
    metrics.flush()?;
    if let Some(s) = steps.as_mut() {
        s.flush()?;
    }
    let window = config.moving_average_window.min(returns.len()).max(1);
    let summary = RunSummary {
        episodes: config.episodes,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        mean_return: mean(&returns),
        final_moving_average: mean(&returns[returns.len().saturating_sub(window)..]),
        max_mass_closure_error: closure,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Deterministic-policy flowsheet of one evaluation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub checkpoint_episode: u64,
    pub episodes: usize,
    /// Scaled return of each evaluation episode.
    pub returns: Vec<f64>,
    /// M euro/yr, of the first episode.
    pub revenue: f64,
    pub tac: f64,
    pub penalty: f64,
    pub profit: f64,
    pub columns: Vec<StepRecord>,
}

pub fn cmd_eval(
    checkpoint: &Path,
    episodes: usize,
    out: Option<&Path>,
) -> Result<EvalReport, RunError> {
    let ck = Checkpoint::load(checkpoint)?;
    let mut env =
        FlowsheetEnv::new(ck.config.env.clone()).map_err(|e| RunError::Config(e.to_string()))?;
    let agent = &ck.state.agent;
    if agent.obs_dim() != env.obs_dim() {
        return Err(artifact(checkpoint, "agent does not match the environment"));
    }
    let episodes = episodes.max(1);
    let mut returns = Vec::with_capacity(episodes);
    let mut first = None;
    for ep in 0..episodes {
        let r = greedy_rollout(&mut env, agent, ep as u64 + 1)?;
        returns.push(r.episode_return);
        first.get_or_insert(r.records);
    }
    let columns = first.unwrap_or_default();
    let revenue: f64 = columns
        .iter()
        .map(|c| c.revenue_top + c.revenue_bottom)
        .sum();
    let tac: f64 = columns.iter().map(|c| c.tac).sum();
    let penalty: f64 = columns.iter().map(|c| c.penalty).sum();
    let report = EvalReport {
        checkpoint_episode: ck.state.episode,
        episodes,
        returns,
        revenue,
        tac,
        penalty,
        profit: revenue - tac - penalty,
        columns,
    };
    if let Some(dir) = out {
        create_dir(dir)?;
        write_json(&dir.join("eval.json"), &report)?;
        write_csv(&dir.join("eval_columns.csv"), &report.columns)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BaseCaseColumnRow {
    column: usize,
    light_key: String,
    heavy_key: String,
    feed_stream: usize,
    distillate_stream: usize,
    bottoms_stream: usize,
    n_stages: usize,
    feed_stage: usize,
    pressure: f64,
    reflux_ratio: f64,
    boilup_ratio: f64,
    distillate_fraction: f64,
    q_cnd_mw: f64,
    q_rbl_mw: f64,
    diameter: f64,
    height: f64,
    tac: f64,
    penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseCaseSummary {
    pub topology: Topology,
    pub revenue: f64,
    pub tac: f64,
    pub penalty: f64,
    pub profit: f64,
    pub products_on_spec: usize,
    pub mass_closure_error: f64,
}

impl From<&BaseCaseResult> for BaseCaseSummary {
    fn from(r: &BaseCaseResult) -> Self {
        Self {
            topology: r.topology,
            revenue: r.revenue,
            tac: r.tac,
            penalty: r.penalty,
            profit: r.profit,
            products_on_spec: r.products_on_spec,
            mass_closure_error: r.mass_closure_error,
        }
    }
}

/// Tune and cost both reference sequences, writing column and stream
/// tables for each when `out` is given.
pub fn cmd_base_case(
    config: &RunConfig,
    out: Option<&Path>,
) -> Result<Vec<BaseCaseResult>, RunError> {
    config.validate()?;
    let mut results = Vec::new();
    for topology in [Topology::Linear, Topology::Tree] {
        let template = SequenceTemplate::for_topology(topology, config.env.purity_spec);
        let r = run_base_case(&template, &config.env, &config.tune)
            .map_err(|e| RunError::Config(format!("{} base case: {e}", topology.as_str())))?;
        results.push(r);
    }
    if let Some(dir) = out {
        create_dir(dir)?;
        let bank = config
            .env
            .load_bank()
            .map_err(|e| RunError::Config(e.to_string()))?;
        for r in &results {
            let name = r.topology.as_str();
            let rows: Vec<BaseCaseColumnRow> = r
                .columns
                .iter()
                .map(|c| {
                    let sol = c.evaluation.solution.as_ref().expect("tuned columns solve");
                    let sz = c.evaluation.sizing.expect("tuned columns are sized");
                    BaseCaseColumnRow {
                        column: c.index,
                        light_key: c.light_key.clone(),
                        heavy_key: c.heavy_key.clone(),
                        feed_stream: c.feed_stream,
                        distillate_stream: c.distillate_stream,
                        bottoms_stream: c.bottoms_stream,
                        n_stages: c.spec.n_stages,
                        feed_stage: c.spec.feed_stage,
                        pressure: c.spec.condenser_pressure,
                        reflux_ratio: c.spec.reflux_ratio,
                        boilup_ratio: c.spec.boilup_ratio,
                        distillate_fraction: c.distillate_fraction,
                        q_cnd_mw: sol.q_cnd / 1e6,
                        q_rbl_mw: sol.q_rbl / 1e6,
                        diameter: sz.diameter,
                        height: sz.height,
                        tac: c.evaluation.tac(),
                        penalty: c.evaluation.penalties.total,
                    }
                })
                .collect();
            write_csv(&dir.join(format!("base_case_{name}_columns.csv")), &rows)?;
            write_stream_table(&dir.join(format!("base_case_{name}_streams.csv")), r, &bank)?;
        }
        let summaries: Vec<BaseCaseSummary> = results.iter().map(BaseCaseSummary::from).collect();
        write_json(&dir.join("base_case_summary.json"), &summaries)?;
    }
    Ok(results)
}

fn write_stream_table(
    path: &Path,
    r: &BaseCaseResult,
    bank: &crate::thermo::ComponentBank,
) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| artifact(path, e))?;
    let mut header: Vec<String> = [
        "stream",
        "role",
        "flow",
        "temperature",
        "pressure",
        "revenue",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(bank.names().map(|n| format!("x_{n}")));
    w.write_record(&header).map_err(|e| artifact(path, e))?;
    for row in &r.streams {
        let s = &row.stream;
        let role = serde_json::to_value(row.role)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        let mut rec = vec![
            row.number.to_string(),
            role,
            s.flow.to_string(),
            s.temperature.to_string(),
            s.pressure.to_string(),
            row.revenue.to_string(),
        ];
        rec.extend(s.composition.iter().map(|x| x.to_string()));
        w.write_record(&rec).map_err(|e| artifact(path, e))?;
    }
    w.flush().map_err(|e| artifact(path, e))
}

/// Run-level statistics in the shape of the paper's convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStats {
    pub episodes: u64,
    /// From `summary.json` when present.
    pub wall_clock_seconds: Option<f64>,
    pub steps: usize,
    pub separate_yes_pct: f64,
    pub separate_no_pct: f64,
    pub solver_runs: usize,
    pub converged_clean_pct: f64,
    pub converged_with_warnings_pct: f64,
    pub failed_pct: f64,
    pub mean_return: f64,
    pub max_return: f64,
    pub final_moving_average: f64,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

impl ConvergenceStats {
    pub fn from_metrics(rows: &[EpisodeMetrics], wall_clock_seconds: Option<f64>) -> Self {
        let steps: usize = rows.iter().map(|r| r.steps).sum();
        let yes: usize = rows.iter().map(|r| r.n_columns).sum();
        let clean: usize = rows.iter().map(|r| r.converged).sum();
        let warn: usize = rows.iter().map(|r| r.converged_with_warnings).sum();
        let failed: usize = rows.iter().map(|r| r.solver_failures).sum();
        let runs = clean + warn + failed;
        let returns: Vec<f64> = rows.iter().map(|r| r.episode_return).collect();
        Self {
            episodes: rows.len() as u64,
            wall_clock_seconds,
            steps,
            separate_yes_pct: pct(yes, steps),
            separate_no_pct: pct(steps - yes, steps),
            solver_runs: runs,
            converged_clean_pct: pct(clean, runs),
            converged_with_warnings_pct: pct(warn, runs),
            failed_pct: pct(failed, runs),
            mean_return: mean(&returns),
            max_return: returns.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            final_moving_average: rows.last().map_or(0.0, |r| r.moving_avg_return),
        }
    }

    pub fn to_markdown(&self) -> String {
        let wall = self
            .wall_clock_seconds
            .map_or("n/a".to_string(), |s| format!("{s:.1} s"));
        format!(
            "| Statistic | Value |\n|---|---|\n\
             | Episodes | {} |\n| Wall clock | {} |\n\
             | Separate: yes | {:.2} % |\n| Separate: no | {:.2} % |\n\
             | Solver runs | {} |\n| Converged | {:.2} % |\n\
             | Converged with warnings | {:.2} % |\n| Failed | {:.2} % |\n\
             | Mean return | {:.1} |\n| Max return | {:.1} |\n",
            self.episodes,
            wall,
            self.separate_yes_pct,
            self.separate_no_pct,
            self.solver_runs,
            self.converged_clean_pct,
            self.converged_with_warnings_pct,
            self.failed_pct,
            self.mean_return,
            self.max_return,
        )
    }
}

#[derive(Serialize)]
struct ReturnRow {
    episode: u64,
    #[serde(rename = "return")]
    episode_return: f64,
    moving_avg_return: f64,
}

#[derive(Serialize)]
struct TraceRow<T> {
    episode: u64,
    value: T,
}

#[derive(Serialize)]
struct EntropyRow {
    episode: u64,
    entropy: Option<f64>,
    alpha: Option<f64>,
}

/// Files written by [`cmd_report`] under `<run>/report/`.
pub const REPORT_FILES: [&str; 7] = [
    "convergence_stats.json",
    "convergence_stats.md",
    "return_curve.csv",
    "first_column_reflux.csv",
    "first_column_stages.csv",
    "critic_loss.csv",
    "entropy.csv",
];

/// Aggregate a finished run directory into statistics and plot-ready data.
pub fn cmd_report(run_dir: &Path) -> Result<ConvergenceStats, RunError> {
    let metrics_path = run_dir.join("metrics.csv");
    if !metrics_path.exists() {
        return Err(artifact(&metrics_path, "missing"));
    }
    let rows: Vec<EpisodeMetrics> = read_csv(&metrics_path)?;
    let summary_path = run_dir.join("summary.json");
    let wall = fs::read_to_string(&summary_path)
        .ok()
        .and_then(|t| serde_json::from_str::<RunSummary>(&t).ok())
        .map(|s| s.wall_clock_seconds);
    let stats = ConvergenceStats::from_metrics(&rows, wall);
    let dir = run_dir.join("report");
    create_dir(&dir)?;
    write_json(&dir.join(REPORT_FILES[0]), &stats)?;
    fs::write(dir.join(REPORT_FILES[1]), stats.to_markdown()).map_err(|e| artifact(&dir, e))?;
    let ret: Vec<ReturnRow> = rows
        .iter()
        .map(|r| ReturnRow {
            episode: r.episode,
            episode_return: r.episode_return,
            moving_avg_return: r.moving_avg_return,
        })
        .collect();
    write_csv(&dir.join(REPORT_FILES[2]), &ret)?;
    let reflux: Vec<TraceRow<f64>> = rows
        .iter()
        .filter_map(|r| {
            r.first_rr.map(|v| TraceRow {
                episode: r.episode,
                value: v,
            })
        })
        .collect();
    write_csv(&dir.join(REPORT_FILES[3]), &reflux)?;
    let stages: Vec<TraceRow<usize>> = rows
        .iter()
        .filter_map(|r| {
            r.first_n_stages.map(|v| TraceRow {
                episode: r.episode,
                value: v,
            })
        })
        .collect();
    write_csv(&dir.join(REPORT_FILES[4]), &stages)?;
    let loss: Vec<TraceRow<f64>> = rows
        .iter()
        .filter_map(|r| {
            r.critic_loss.map(|v| TraceRow {
                episode: r.episode,
                value: v,
            })
        })
        .collect();
    write_csv(&dir.join(REPORT_FILES[5]), &loss)?;
    let ent: Vec<EntropyRow> = rows
        .iter()
        .map(|r| EntropyRow {
            episode: r.episode,
            entropy: r.entropy,
            alpha: r.alpha,
        })
        .collect();
    write_csv(&dir.join(REPORT_FILES[6]), &ent)?;
    Ok(stats)
}
