//! Engineered reference sequences and the design-spec tuner behind them.
//!
//! Each template column fixes the key split, pressure and stage count. The
//! reflux ratio and distillate-to-feed ratio are tuned by two nested
//! bracketed root finds: the inner one on reflux ratio meets a distillate
//! purity, the outer one on D/F meets a light-key recovery or a bottoms
//! purity. Boilup follows from D/F and reflux under constant molal overflow.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::column::{
    solve_column, ColumnError, ColumnSolution, ColumnSpec, SolverOptions, RATIO_RANGE,
};
use crate::economics::revenue;
use crate::env::{evaluate_column, ColumnEvaluation, EnvConfig, EnvError, PenaltyLedger};
use crate::stream::Stream;
use crate::thermo::ComponentBank;

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("column {column}: {reason}")]
    Infeasible { column: usize, reason: String },
    #[error("column {column}: solver breakdown: {source}")]
    Solver {
        column: usize,
        #[source]
        source: ColumnError,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Linear,
    Tree,
}

impl Topology {
    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Linear => "linear",
            Topology::Tree => "tree",
        }
    }
}

/// Which stream a template column is fed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedSource {
    Feed,
    Distillate(usize),
    Bottoms(usize),
}

/// Distillate specification met by the reflux ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistillateTarget {
    /// Mole fraction of the light key.
    KeyPurity(f64),
    /// Mole fraction of the light key and everything lighter.
    LightPurity(f64),
}

/// Split specification met by the distillate-to-feed ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTarget {
    /// Fraction of the light key fed that leaves overhead.
    Recovery(f64),
    /// Mole fraction of the heavy key in the bottoms.
    BottomsPurity(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateColumn {
    /// Bank index of the light key; the heavy key is the next component.
    pub light_key: usize,
    pub source: FeedSource,
    /// bar
    pub pressure: f64,
    pub n_stages: usize,
    pub feed_stage: usize,
    pub distillate: DistillateTarget,
    pub split: SplitTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceTemplate {
    pub topology: Topology,
    pub columns: Vec<TemplateColumn>,
}

/// Margin added to product purity targets so that a tuned value within the
/// root-finding tolerance still clears the sales spec.
pub const PURITY_MARGIN: f64 = 1e-3;

impl SequenceTemplate {
    /// Direct sequence: each column takes the previous bottoms.
    pub fn linear(purity_spec: f64) -> Self {
        let product = DistillateTarget::KeyPurity(purity_spec + PURITY_MARGIN);
        let col = |lk, source, pressure, n: usize, split| TemplateColumn {
            light_key: lk,
            source,
            pressure,
            n_stages: n,
            feed_stage: n / 2,
            distillate: product,
            split,
        };
        Self {
            topology: Topology::Linear,
            columns: vec![
                col(1, FeedSource::Feed, 17.2, 30, SplitTarget::Recovery(0.99)),
                col(
                    2,
                    FeedSource::Bottoms(0),
                    7.2,
                    77,
                    SplitTarget::Recovery(0.99),
                ),
                col(
                    3,
                    FeedSource::Bottoms(1),
                    7.2,
                    30,
                    SplitTarget::Recovery(0.99),
                ),
                col(
                    4,
                    FeedSource::Bottoms(2),
                    2.0,
                    77,
                    SplitTarget::BottomsPurity(purity_spec + PURITY_MARGIN),
                ),
            ],
        }
    }

    /// Propane first, then butanes from pentanes, then both pairs in parallel.
    pub fn tree(purity_spec: f64) -> Self {
        let product = DistillateTarget::KeyPurity(purity_spec + PURITY_MARGIN);
        let bottoms = SplitTarget::BottomsPurity(purity_spec + PURITY_MARGIN);
        let col = |lk, source, pressure, n: usize, distillate, split| TemplateColumn {
            light_key: lk,
            source,
            pressure,
            n_stages: n,
            feed_stage: n / 2,
            distillate,
            split,
        };
        Self {
            topology: Topology::Tree,
            columns: vec![
                col(
                    1,
                    FeedSource::Feed,
                    17.2,
                    30,
                    product,
                    SplitTarget::Recovery(0.99),
                ),
                col(
                    3,
                    FeedSource::Bottoms(0),
                    7.2,
                    30,
                    DistillateTarget::LightPurity(0.995),
                    SplitTarget::Recovery(0.995),
                ),
                col(2, FeedSource::Distillate(1), 6.7, 85, product, bottoms),
                col(4, FeedSource::Bottoms(1), 2.0, 77, product, bottoms),
            ],
        }
    }

    pub fn for_topology(topology: Topology, purity_spec: f64) -> Self {
        match topology {
            Topology::Linear => Self::linear(purity_spec),
            Topology::Tree => Self::tree(purity_spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneOptions {
    /// Absolute tolerance on each target.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub reflux_bounds: (f64, f64),
    pub boilup_bounds: (f64, f64),
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 80,
            reflux_bounds: RATIO_RANGE,
            boilup_bounds: RATIO_RANGE,
        }
    }
}

/// Result of probing one point during a bracketed search.
enum Probe<T> {
    /// Target residual (increasing in the search variable) and payload.
    Value(f64, T),
    /// The point is past a feasibility limit on the high side.
    Overshoot,
}

enum RootFailure {
    /// Even the upper end falls short of the target.
    Unreachable,
    NoConvergence,
}

/// Find `x` in `[lo, hi]` with `|g(x)| < tol` for an increasing `g`.
///
/// Regula falsi with the Illinois modification while both ends carry a
/// value, bisection otherwise. A non-negative residual at `lo` returns `lo`.
fn bracketed_root<T, E>(
    mut g: impl FnMut(f64) -> Result<Probe<T>, E>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<Result<(f64, T), RootFailure>, E> {
    let (mut g_lo, payload) = match g(lo)? {
        Probe::Value(v, p) => (v, p),
        Probe::Overshoot => return Ok(Err(RootFailure::Unreachable)),
    };
    if g_lo >= -tol {
        return Ok(Ok((lo, payload)));
    }
    let mut g_hi = match g(hi)? {
        Probe::Value(v, p) if v.abs() < tol => return Ok(Ok((hi, p))),
        Probe::Value(v, _) if v < 0.0 => return Ok(Err(RootFailure::Unreachable)),
        Probe::Value(v, _) => Some(v),
        Probe::Overshoot => None,
    };
    let mut side = 0i8;
    for _ in 0..max_iterations {
        let x = match g_hi {
            Some(gh) => {
                let t = lo - g_lo * (hi - lo) / (gh - g_lo);
                if t > lo && t < hi {
                    t
                } else {
                    0.5 * (lo + hi)
                }
            }
            None => 0.5 * (lo + hi),
        };
        match g(x)? {
            Probe::Value(v, p) if v.abs() < tol => return Ok(Ok((x, p))),
            Probe::Value(v, _) if v < 0.0 => {
                lo = x;
                g_lo = v;
                if side == -1 {
                    if let Some(gh) = g_hi.as_mut() {
                        *gh *= 0.5;
                    }
                }
                side = -1;
            }
            Probe::Value(v, _) => {
                hi = x;
                g_hi = Some(v);
                if side == 1 {
                    g_lo *= 0.5;
                }
                side = 1;
            }
            Probe::Overshoot => {
                hi = x;
                g_hi = None;
                side = 0;
            }
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(Err(RootFailure::NoConvergence))
}

fn distillate_metric(sol: &ColumnSolution, lk: usize, target: DistillateTarget) -> (f64, f64) {
    let x = &sol.distillate.composition;
    match target {
        DistillateTarget::KeyPurity(t) => (x[lk], t),
        DistillateTarget::LightPurity(t) => (x[..=lk].iter().sum(), t),
    }
}

fn split_metric(feed: &Stream, sol: &ColumnSolution, lk: usize, target: SplitTarget) -> (f64, f64) {
    match target {
        SplitTarget::Recovery(t) => {
            let fed = feed.flow * feed.composition[lk];
            let top = sol.distillate.flow * sol.distillate.composition[lk];
            (if fed > 0.0 { top / fed } else { 1.0 }, t)
        }
        SplitTarget::BottomsPurity(t) => (sol.bottoms.composition[lk + 1], t),
    }
}

/// Reflux bounds at a given D/F that keep the boilup ratio in range.
fn reflux_window(df: f64, opts: &TuneOptions) -> (f64, f64) {
    // BR = (RR + 1) D/B
    let b_over_d = (1.0 - df) / df;
    // pulled in slightly so the boilup recomputed from RR stays inside
    let lo = opts
        .reflux_bounds
        .0
        .max(opts.boilup_bounds.0 * b_over_d - 1.0 + 1e-9);
    let hi = opts
        .reflux_bounds
        .1
        .min(opts.boilup_bounds.1 * b_over_d - 1.0 - 1e-9);
    (lo, hi)
}

fn spec_for(col: &TemplateColumn, rr: f64, df: f64) -> ColumnSpec {
    ColumnSpec {
        n_stages: col.n_stages,
        feed_stage: col.feed_stage,
        condenser_pressure: col.pressure,
        reflux_ratio: rr,
        boilup_ratio: ColumnSpec::boilup_for(df, rr),
    }
}

/// Smallest reflux ratio meeting the distillate target at fixed D/F.
///
/// Returns `None` when no reflux inside the bounds reaches the target.
#[allow(clippy::too_many_arguments)]
pub fn tune_reflux(
    bank: &ComponentBank,
    feed: &Stream,
    col: &TemplateColumn,
    df: f64,
    opts: &TuneOptions,
    solver: &SolverOptions,
) -> Result<Option<(ColumnSpec, ColumnSolution)>, ColumnError> {
    let (lo, hi) = reflux_window(df, opts);
    if !(lo <= hi) {
        return Ok(None);
    }
    let found = bracketed_root(
        |rr| -> Result<Probe<(ColumnSpec, ColumnSolution)>, ColumnError> {
            let spec = spec_for(col, rr, df);
            let sol = solve_column(bank, feed, &spec, solver)?;
            if !sol.converged() {
                return Ok(Probe::Overshoot);
            }
            let (m, t) = distillate_metric(&sol, col.light_key, col.distillate);
            Ok(Probe::Value(m - t, (spec, sol)))
        },
        lo,
        hi,
        opts.tolerance,
        opts.max_iterations,
    )?;
    Ok(found.ok().map(|(_, p)| p))
}

/// Tuned column: spec plus the converged solution at that spec.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedColumn {
    pub spec: ColumnSpec,
    pub distillate_fraction: f64,
    pub solution: ColumnSolution,
}

pub fn design_spec_tune(
    bank: &ComponentBank,
    feed: &Stream,
    col: &TemplateColumn,
    opts: &TuneOptions,
    solver: &SolverOptions,
    index: usize,
) -> Result<TunedColumn, TuneError> {
    let z = &feed.composition;
    let lk = col.light_key;
    if lk + 1 >= z.len() {
        return Err(TuneError::Infeasible {
            column: index,
            reason: "light key has no heavier neighbour".into(),
        });
    }
    let lighter: f64 = z[..lk].iter().sum();
    let df_lo = (lighter + 0.5 * z[lk]).max(1e-3);
    let df_hi = (lighter + z[lk] + 0.5 * z[lk + 1]).min(0.999);
    let found = bracketed_root(
        |df| -> Result<Probe<(ColumnSpec, ColumnSolution)>, ColumnError> {
            match tune_reflux(bank, feed, col, df, opts, solver)? {
                None => Ok(Probe::Overshoot),
                Some((spec, sol)) => {
                    let (m, t) = split_metric(feed, &sol, lk, col.split);
                    Ok(Probe::Value(m - t, (spec, sol)))
                }
            }
        },
        df_lo,
        df_hi,
        opts.tolerance,
        opts.max_iterations,
    )
    .map_err(|source| TuneError::Solver {
        column: index,
        source,
    })?;
    match found {
        Ok((df, (spec, solution))) => Ok(TunedColumn {
            spec,
            distillate_fraction: df,
            solution,
        }),
        Err(RootFailure::Unreachable) => Err(TuneError::Infeasible {
            column: index,
            reason: "split target out of reach within the reflux and boilup bounds".into(),
        }),
        Err(RootFailure::NoConvergence) => Err(TuneError::Infeasible {
            column: index,
            reason: "design spec search did not converge".into(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamRole {
    Feed,
    Product,
    Intermediate,
    Outlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRow {
    pub number: usize,
    pub role: StreamRole,
    pub stream: Stream,
    /// M euro/yr
    pub revenue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseCaseColumn {
    pub index: usize,
    pub light_key: String,
    pub heavy_key: String,
    pub spec: ColumnSpec,
    pub distillate_fraction: f64,
    pub feed_stream: usize,
    pub distillate_stream: usize,
    pub bottoms_stream: usize,
    pub evaluation: ColumnEvaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseCaseResult {
    pub topology: Topology,
    pub columns: Vec<BaseCaseColumn>,
    pub streams: Vec<StreamRow>,
    /// M euro/yr
    pub revenue: f64,
    pub tac: f64,
    pub penalty: f64,
    pub profit: f64,
    /// Products meeting the purity spec.
    pub products_on_spec: usize,
    pub penalties: Vec<PenaltyLedger>,
    /// Largest per-component imbalance over the sequence, relative to feed.
    pub mass_closure_error: f64,
}

/// Tune, solve and cost every column of a template in order.
pub fn run_base_case(
    template: &SequenceTemplate,
    env: &EnvConfig,
    opts: &TuneOptions,
) -> Result<BaseCaseResult, TuneError> {
    let bank = env.load_bank()?;
    let (feed, _) = env.feed_stream(&bank)?;
    let prices = env.price_table(&bank)?;
    let settings = env.evaluation_settings();
    let uptime = env.cost.uptime;

    let mut streams = vec![StreamRow {
        number: 1,
        role: StreamRole::Feed,
        stream: feed.clone(),
        revenue: 0.0,
    }];
    let mut columns: Vec<BaseCaseColumn> = Vec::new();
    for (i, col) in template.columns.iter().enumerate() {
        let feed_no = match col.source {
            FeedSource::Feed => 1,
            FeedSource::Distillate(c) => columns[c].distillate_stream,
            FeedSource::Bottoms(c) => columns[c].bottoms_stream,
        };
        streams[feed_no - 1].role = StreamRole::Intermediate;
        let col_feed = streams[feed_no - 1].stream.clone();
        let tuned = design_spec_tune(&bank, &col_feed, col, opts, &env.solver, i + 1)?;
        let ev = evaluate_column(&bank, &col_feed, &tuned.spec, settings);
        let sol = ev
            .solution
            .as_ref()
            .filter(|_| ev.usable())
            .ok_or_else(|| TuneError::Infeasible {
                column: i + 1,
                reason: "tuned column failed to re-solve".into(),
            })?;
        let mut numbers = [0; 2];
        for (k, s) in [&sol.distillate, &sol.bottoms].into_iter().enumerate() {
            let rev = revenue(s, &prices, uptime);
            let role = if rev > 0.0 || s.purity().1 >= prices.purity_spec {
                StreamRole::Product
            } else if s.flow < env.min_flow {
                StreamRole::Outlet
            } else {
                StreamRole::Intermediate
            };
            numbers[k] = streams.len() + 1;
            streams.push(StreamRow {
                number: numbers[k],
                role,
                stream: s.clone(),
                revenue: rev,
            });
        }
        let name = |k: usize| bank.get(k).name.clone();
        columns.push(BaseCaseColumn {
            index: i + 1,
            light_key: name(col.light_key),
            heavy_key: name(col.light_key + 1),
            spec: tuned.spec,
            distillate_fraction: tuned.distillate_fraction,
            feed_stream: feed_no,
            distillate_stream: numbers[0],
            bottoms_stream: numbers[1],
            evaluation: ev,
        });
    }

    // every stream fed onward is consumed; all others leave the sequence
    let mut leaving = vec![0.0; bank.len()];
    for row in streams
        .iter()
        .filter(|r| r.role != StreamRole::Intermediate || !is_fed(r.number, &columns))
    {
        if row.role == StreamRole::Feed {
            continue;
        }
        for (a, f) in leaving.iter_mut().zip(row.stream.component_flows()) {
            *a += f;
        }
    }
    let mass_closure_error = feed
        .component_flows()
        .iter()
        .zip(&leaving)
        .map(|(f, l)| (f - l).abs())
        .fold(0.0, f64::max)
        / feed.flow;

    let revenue: f64 = streams.iter().map(|r| r.revenue).sum();
    let tac: f64 = columns.iter().map(|c| c.evaluation.tac()).sum();
    let penalties: Vec<PenaltyLedger> = columns.iter().map(|c| c.evaluation.penalties).collect();
    let penalty: f64 = penalties.iter().map(|p| p.total).sum();
    Ok(BaseCaseResult {
        topology: template.topology,
        products_on_spec: streams
            .iter()
            .filter(|r| r.role == StreamRole::Product)
            .count(),
        columns,
        streams,
        revenue,
        tac,
        penalty,
        profit: revenue - tac - penalty,
        penalties,
        mass_closure_error,
    })
}

fn is_fed(number: usize, columns: &[BaseCaseColumn]) -> bool {
    columns.iter().any(|c| c.feed_stream == number)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_on_monotone_function() {
        let r = bracketed_root::<(), ()>(
            |x| Ok(Probe::Value(x * x * x - 2.0, ())),
            0.0,
            3.0,
            1e-10,
            200,
        )
        .unwrap();
        let (x, _) = r.ok().unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-9);
    }

    #[test]
    fn overshoot_region_is_bisected() {
        let r = bracketed_root::<(), ()>(
            |x| {
                Ok(if x > 0.7 {
                    Probe::Overshoot
                } else {
                    Probe::Value(x - 0.5, ())
                })
            },
            0.0,
            1.0,
            1e-9,
            200,
        )
        .unwrap();
        assert!((r.ok().unwrap().0 - 0.5).abs() < 1e-8);
    }

    #[test]
    fn unreachable_and_trivial_targets() {
        let r = bracketed_root::<(), ()>(|x| Ok(Probe::Value(x - 5.0, ())), 0.0, 1.0, 1e-9, 50);
        assert!(matches!(r, Ok(Err(RootFailure::Unreachable))));
        let r = bracketed_root::<(), ()>(|x| Ok(Probe::Value(x + 1.0, ())), 0.0, 1.0, 1e-9, 50);
        assert_eq!(r.unwrap().ok().unwrap().0, 0.0);
    }

    #[test]
    fn reflux_window_respects_boilup() {
        let opts = TuneOptions::default();
        // D/F = 0.5: BR = RR + 1, so RR in [1, 19]
        let (lo, hi) = reflux_window(0.5, &opts);
        assert!(lo == 1.0 && (hi - 19.0).abs() < 1e-8 && hi < 19.0);
        let (lo, hi) = reflux_window(0.02, &opts);
        assert!(lo > hi);
    }
}
