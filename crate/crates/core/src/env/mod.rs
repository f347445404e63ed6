//! The sequential flowsheet-synthesis environment.
//!
//! Each step designs one column for the current stream. Products on spec are
//! sold, small streams leave as outlets, and the rest queue in a stream table
//! that always hands back its largest flow next.

mod action;
mod evaluate;
mod penalty;
mod table;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use action::{map_action, ActionBounds, ACTION_DIM, DESIGN_DIM};
pub use evaluate::{evaluate_column, ColumnEvaluation, EvaluationSettings};
pub use penalty::{penalties, CondenserRule, PenaltyAmounts, PenaltyLedger};
pub use table::{StreamTable, TableEntry};

use crate::column::{SolveStatus, SolverOptions};
use crate::economics::{revenue, CostFactors, PriceTable};
use crate::stream::Stream;
use crate::thermo::{ComponentBank, KELVIN, T_BRACKET};

/// Observation length for a bank of `n` components: flows, T, P, revenue.
pub fn observation_dim(n_components: usize) -> usize {
    n_components + 3
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("episode is over; call reset")]
    EpisodeOver,
    #[error("action has {0} entries, expected {ACTION_DIM}")]
    ActionLength(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedConfig {
    /// kmol/h
    pub flow: f64,
    /// degC
    pub temperature: f64,
    /// bar
    pub pressure: f64,
    /// Composition by component name, mol %. Renormalized on load.
    pub mol_percent: BTreeMap<String, f64>,
}

impl Default for FeedConfig {
    fn default() -> Self {
        let mol_percent = [
            ("ethane", 0.06),
            ("propane", 33.69),
            ("isobutane", 35.65),
            ("n-butane", 15.32),
            ("isopentane", 10.21),
            ("n-pentane", 5.13),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            flow: 12_400.0,
            temperature: 105.0,
            pressure: 17.0,
            mol_percent,
        }
    }
}

fn default_prices() -> BTreeMap<String, f64> {
    [
        ("ethane", 8.0),
        ("propane", 14.0),
        ("isobutane", 17.0),
        ("n-butane", 17.0),
        ("isopentane", 20.0),
        ("n-pentane", 20.0),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    /// Component data file; the built-in bank when absent.
    pub components: Option<PathBuf>,
    pub feed: FeedConfig,
    /// Product prices by component name, euro/kmol.
    pub prices: BTreeMap<String, f64>,
    /// Minimum dominant mole fraction for a stream to sell.
    pub purity_spec: f64,
    /// Streams below this flow leave as outlets, kmol/h.
    pub min_flow: f64,
    pub max_columns: usize,
    pub reward_scale: f64,
    /// Cumulative revenue is divided by this in the observation, M euro/yr.
    pub revenue_scale: f64,
    pub bounds: ActionBounds,
    pub penalties: PenaltyAmounts,
    pub condenser_rule: CondenserRule,
    pub cost: CostFactors,
    pub solver: SolverOptions,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            components: None,
            feed: FeedConfig::default(),
            prices: default_prices(),
            purity_spec: 0.95,
            min_flow: 3.6,
            max_columns: 12,
            reward_scale: 10.0,
            revenue_scale: 1000.0,
            bounds: ActionBounds::default(),
            penalties: PenaltyAmounts::default(),
            condenser_rule: CondenserRule::default(),
            cost: CostFactors::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl EnvConfig {
    pub fn load_bank(&self) -> Result<ComponentBank, EnvError> {
        match &self.components {
            None => Ok(ComponentBank::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| EnvError::Config(format!("{}: {e}", path.display())))?;
                ComponentBank::from_toml_str(&text).map_err(|e| EnvError::Config(e.to_string()))
            }
        }
    }

    /// Per-component values from a name-keyed map, in bank order.
    fn by_component(
        bank: &ComponentBank,
        map: &BTreeMap<String, f64>,
        what: &str,
    ) -> Result<Vec<f64>, EnvError> {
        if let Some(unknown) = map.keys().find(|k| bank.index_of(k).is_none()) {
            return Err(EnvError::Config(format!(
                "{what}: unknown component {unknown}"
            )));
        }
        bank.names()
            .map(|name| {
                map.get(name)
                    .copied()
                    .ok_or_else(|| EnvError::Config(format!("{what}: missing {name}")))
            })
            .collect()
    }

    /// Feed stream with the composition renormalized to sum to one. The flag
    /// reports whether the given percentages were off by more than 1e-9.
    pub fn feed_stream(&self, bank: &ComponentBank) -> Result<(Stream, bool), EnvError> {
        let pct = Self::by_component(bank, &self.feed.mol_percent, "feed")?;
        let total: f64 = pct.iter().sum();
        if pct.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || !(total > 0.0) {
            return Err(EnvError::Config(
                "feed composition must be non-negative".into(),
            ));
        }
        if !(self.feed.flow > 0.0 && self.feed.flow.is_finite()) {
            return Err(EnvError::Config("feed flow must be positive".into()));
        }
        let renormalized = (total / 100.0 - 1.0).abs() > 1e-9;
        let x = pct.iter().map(|p| p / total).collect();
        Ok((
            Stream::new(x, self.feed.flow, self.feed.temperature, self.feed.pressure),
            renormalized,
        ))
    }

    pub fn price_table(&self, bank: &ComponentBank) -> Result<PriceTable, EnvError> {
        let prices = Self::by_component(bank, &self.prices, "prices")?;
        if prices.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(EnvError::Config("prices must be non-negative".into()));
        }
        Ok(PriceTable::new(prices, self.purity_spec))
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        self.bounds.validate().map_err(EnvError::Config)?;
        let positive = [
            ("reward_scale", self.reward_scale),
            ("revenue_scale", self.revenue_scale),
            ("purity_spec", self.purity_spec),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(EnvError::Config(format!("{name} must be positive")));
        }
        if self.max_columns == 0 {
            return Err(EnvError::Config("max_columns must be at least 1".into()));
        }
        if !(self.min_flow >= 0.0) {
            return Err(EnvError::Config("min_flow must be non-negative".into()));
        }
        Ok(())
    }

    pub fn evaluation_settings(&self) -> EvaluationSettings<'_> {
        EvaluationSettings {
            cost: &self.cost,
            solver: &self.solver,
            penalties: &self.penalties,
            condenser_rule: self.condenser_rule,
        }
    }
}

/// Where a column product went.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fate {
    Sold,
    Outlet,
    Table,
}

/// One row of the per-step CSV log.
///
/// Money in M euro/yr, duties in W, temperatures in degC, flows in kmol/h.
/// Column fields are empty when no column was solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: u64,
    pub step: usize,
    pub a_stages: f64,
    pub a_feed: f64,
    pub a_pressure: f64,
    pub a_reflux: f64,
    pub a_boilup: f64,
    pub a_separate: f64,
    pub separate: bool,
    pub n_stages: usize,
    pub feed_stage: usize,
    pub pressure: f64,
    pub reflux_ratio: f64,
    pub boilup_ratio: f64,
    pub feed_flow: f64,
    pub status: String,
    pub iterations: Option<usize>,
    pub max_delta_t: Option<f64>,
    pub t_cnd: Option<f64>,
    pub t_rbl: Option<f64>,
    pub q_cnd: Option<f64>,
    pub q_rbl: Option<f64>,
    pub diameter: Option<f64>,
    pub height: Option<f64>,
    pub c_inv: Option<f64>,
    pub op_cnd: Option<f64>,
    pub op_rbl: Option<f64>,
    pub distillate_flow: Option<f64>,
    pub distillate_purity: Option<f64>,
    pub distillate_fate: Option<Fate>,
    pub bottoms_flow: Option<f64>,
    pub bottoms_purity: Option<f64>,
    pub bottoms_fate: Option<Fate>,
    pub revenue_top: f64,
    pub revenue_bottom: f64,
    pub tac: f64,
    pub penalty: f64,
    pub pen_condenser_duty: bool,
    pub pen_reboiler_duty: bool,
    pub pen_reboiler_temperature: bool,
    pub pen_condenser_dtlm: bool,
    pub pen_flowsheet_error: bool,
    pub raw_reward: f64,
    pub reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub record: StepRecord,
    /// The column attempted this step, if any.
    pub evaluation: Option<ColumnEvaluation>,
}

#[derive(Debug, Clone)]
pub struct FlowsheetEnv {
    config: EnvConfig,
    bank: ComponentBank,
    prices: PriceTable,
    feed: Stream,
    feed_renormalized: bool,
    table: StreamTable,
    current: Option<TableEntry>,
    steps: usize,
    revenue: f64,
    sold: Vec<f64>,
    discarded: Vec<f64>,
    episode: u64,
    done: bool,
}

impl FlowsheetEnv {
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        let bank = config.load_bank()?;
        Self::with_bank(config, bank)
    }

    pub fn with_bank(config: EnvConfig, bank: ComponentBank) -> Result<Self, EnvError> {
        config.validate()?;
        let (feed, feed_renormalized) = config.feed_stream(&bank)?;
        let prices = config.price_table(&bank)?;
        let n = bank.len();
        let mut env = Self {
            config,
            bank,
            prices,
            feed,
            feed_renormalized,
            table: StreamTable::new(),
            current: None,
            steps: 0,
            revenue: 0.0,
            sold: vec![0.0; n],
            discarded: vec![0.0; n],
            episode: 0,
            done: true,
        };
        env.clear();
        Ok(env)
    }

    fn clear(&mut self) {
        self.table.clear();
        let mut entry = StreamTable::new();
        entry.push(self.feed.clone(), false);
        self.current = entry.pop_largest();
        self.steps = 0;
        self.revenue = 0.0;
        self.sold.iter_mut().for_each(|v| *v = 0.0);
        self.discarded.iter_mut().for_each(|v| *v = 0.0);
        self.done = false;
    }

    /// Start a new episode from the feed.
    pub fn reset(&mut self) -> Vec<f64> {
        if self.steps > 0 || self.done {
            self.episode += 1;
        }
        self.clear();
        self.observation()
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn bank(&self) -> &ComponentBank {
        &self.bank
    }

    pub fn prices(&self) -> &PriceTable {
        &self.prices
    }

    pub fn feed(&self) -> &Stream {
        &self.feed
    }

    /// Whether the configured feed percentages had to be rescaled.
    pub fn feed_renormalized(&self) -> bool {
        self.feed_renormalized
    }

    pub fn current(&self) -> Option<&Stream> {
        self.current.as_ref().map(|e| &e.stream)
    }

    pub fn table(&self) -> &StreamTable {
        &self.table
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn cumulative_revenue(&self) -> f64 {
        self.revenue
    }

    pub fn obs_dim(&self) -> usize {
        observation_dim(self.bank.len())
    }

    pub fn set_episode(&mut self, episode: u64) {
        self.episode = episode;
    }

    pub fn observation(&self) -> Vec<f64> {
        let n = self.bank.len();
        let mut obs = vec![0.0; observation_dim(n)];
        if let Some(entry) = &self.current {
            let s = &entry.stream;
            for (o, f) in obs.iter_mut().zip(s.component_flows()) {
                *o = f / self.config.feed.flow;
            }
            obs[n] = normalize(s.temperature, temperature_range_c());
            obs[n + 1] = normalize(s.pressure, self.config.bounds.condenser_pressure);
        }
        obs[n + 2] = self.revenue / self.config.revenue_scale;
        obs
    }

    /// Invert [`observation`](Self::observation): component flows (kmol/h),
    /// temperature (degC), pressure (bar) and cumulative revenue (M euro/yr).
    pub fn decode_observation(&self, obs: &[f64]) -> (Vec<f64>, f64, f64, f64) {
        let n = self.bank.len();
        let flows = obs[..n].iter().map(|o| o * self.config.feed.flow).collect();
        (
            flows,
            denormalize(obs[n], temperature_range_c()),
            denormalize(obs[n + 1], self.config.bounds.condenser_pressure),
            obs[n + 2] * self.config.revenue_scale,
        )
    }

    /// Largest per-component imbalance between the feed and everything it
    /// has become (sold, outlets, queued, current), relative to feed flow.
    pub fn mass_closure_error(&self) -> f64 {
        let mut acc: Vec<f64> = self
            .sold
            .iter()
            .zip(&self.discarded)
            .map(|(a, b)| a + b)
            .collect();
        let streams = self
            .table
            .iter()
            .map(|e| &e.stream)
            .chain(self.current.as_ref().map(|e| &e.stream));
        for s in streams {
            for (a, f) in acc.iter_mut().zip(s.component_flows()) {
                *a += f;
            }
        }
        self.feed
            .component_flows()
            .iter()
            .zip(&acc)
            .map(|(f, a)| (f - a).abs())
            .fold(0.0, f64::max)
            / self.feed.flow
    }

    fn add(acc: &mut [f64], s: &Stream) {
        for (a, f) in acc.iter_mut().zip(s.component_flows()) {
            *a += f;
        }
    }

    /// Sell, vent or queue a column product. Returns its fate and revenue.
    fn route(&mut self, s: &Stream) -> (Fate, f64) {
        if s.flow > 0.0 && s.purity().1 >= self.config.purity_spec {
            Self::add(&mut self.sold, s);
            (
                Fate::Sold,
                revenue(s, &self.prices, self.config.cost.uptime),
            )
        } else if s.flow < self.config.min_flow {
            Self::add(&mut self.discarded, s);
            (Fate::Outlet, 0.0)
        } else {
            self.table.push(s.clone(), false);
            (Fate::Table, 0.0)
        }
    }

    pub fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        if action.len() != ACTION_DIM {
            return Err(EnvError::ActionLength(action.len()));
        }
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let entry = self.current.take().ok_or(EnvError::EpisodeOver)?;
        let (spec, separate) = map_action(action, &self.config.bounds);
        self.steps += 1;
        let mut rec = StepRecord {
            episode: self.episode,
            step: self.steps,
            a_stages: action[0],
            a_feed: action[1],
            a_pressure: action[2],
            a_reflux: action[3],
            a_boilup: action[4],
            a_separate: action[5],
            separate,
            n_stages: spec.n_stages,
            feed_stage: spec.feed_stage,
            pressure: spec.condenser_pressure,
            reflux_ratio: spec.reflux_ratio,
            boilup_ratio: spec.boilup_ratio,
            feed_flow: entry.stream.flow,
            status: "skipped".into(),
            iterations: None,
            max_delta_t: None,
            t_cnd: None,
            t_rbl: None,
            q_cnd: None,
            q_rbl: None,
            diameter: None,
            height: None,
            c_inv: None,
            op_cnd: None,
            op_rbl: None,
            distillate_flow: None,
            distillate_purity: None,
            distillate_fate: None,
            bottoms_flow: None,
            bottoms_purity: None,
            bottoms_fate: None,
            revenue_top: 0.0,
            revenue_bottom: 0.0,
            tac: 0.0,
            penalty: 0.0,
            pen_condenser_duty: false,
            pen_reboiler_duty: false,
            pen_reboiler_temperature: false,
            pen_condenser_dtlm: false,
            pen_flowsheet_error: false,
            raw_reward: 0.0,
            reward: 0.0,
            done: false,
        };
        let mut evaluation = None;
        if !separate {
            Self::add(&mut self.discarded, &entry.stream);
        } else {
            let ev = evaluate_column(
                &self.bank,
                &entry.stream,
                &spec,
                self.config.evaluation_settings(),
            );
            rec.status = ev.status.as_str().into();
            if let Some(sol) = &ev.solution {
                rec.iterations = Some(sol.iterations);
                rec.max_delta_t = Some(sol.max_delta_t);
            }
            if ev.usable() {
                let sol = ev
                    .solution
                    .as_ref()
                    .expect("usable evaluation has a solution");
                rec.t_cnd = Some(sol.distillate.temperature);
                rec.t_rbl = Some(sol.bottoms.temperature);
                rec.q_cnd = Some(sol.q_cnd);
                rec.q_rbl = Some(sol.q_rbl);
                let (top, bottom) = (sol.distillate.clone(), sol.bottoms.clone());
                let (fate_d, rev_d) = self.route(&top);
                let (fate_b, rev_b) = self.route(&bottom);
                rec.distillate_flow = Some(top.flow);
                rec.distillate_purity = Some(top.purity().1);
                rec.distillate_fate = Some(fate_d);
                rec.bottoms_flow = Some(bottom.flow);
                rec.bottoms_purity = Some(bottom.purity().1);
                rec.bottoms_fate = Some(fate_b);
                rec.revenue_top = rev_d;
                rec.revenue_bottom = rev_b;
            } else if entry.retried {
                Self::add(&mut self.discarded, &entry.stream);
            } else {
                self.table.push(entry.stream.clone(), true);
            }
            if let Some(sz) = &ev.sizing {
                rec.diameter = Some(sz.diameter);
                rec.height = Some(sz.height);
            }
            if let Some(c) = &ev.costs {
                rec.c_inv = Some(c.capital.c_inv);
                rec.op_cnd = Some(c.operating.op_cnd);
                rec.op_rbl = Some(c.operating.op_rbl);
                rec.tac = c.tac;
            }
            let p = &ev.penalties;
            rec.penalty = p.total;
            rec.pen_condenser_duty = p.condenser_duty;
            rec.pen_reboiler_duty = p.reboiler_duty;
            rec.pen_reboiler_temperature = p.reboiler_temperature;
            rec.pen_condenser_dtlm = p.condenser_dtlm;
            rec.pen_flowsheet_error = p.flowsheet_error;
            evaluation = Some(ev);
        }
        let rev = rec.revenue_top + rec.revenue_bottom;
        self.revenue += rev;
        rec.raw_reward = rev - rec.tac - rec.penalty;
        rec.reward = self.config.reward_scale * rec.raw_reward;

        self.current = self.table.pop_largest();
        self.done = self.current.is_none() || self.steps >= self.config.max_columns;
        rec.done = self.done;
        Ok(StepResult {
            observation: self.observation(),
            reward: rec.reward,
            done: self.done,
            record: rec,
            evaluation,
        })
    }
}

impl StepRecord {
    /// The solve outcome parsed back from the logged status.
    pub fn solve_status(&self) -> Option<SolveStatus> {
        match self.status.as_str() {
            "converged" => Some(SolveStatus::Converged),
            "converged_with_warnings" => Some(SolveStatus::ConvergedWithWarnings),
            "failed" => Some(SolveStatus::Failed),
            _ => None,
        }
    }
}

fn temperature_range_c() -> (f64, f64) {
    (T_BRACKET.0 - KELVIN, T_BRACKET.1 - KELVIN)
}

fn normalize(v: f64, (lo, hi): (f64, f64)) -> f64 {
    (v - lo) / (hi - lo)
}

fn denormalize(v: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + v * (hi - lo)
}
