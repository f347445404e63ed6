//! Tray-by-tray column model and geometric sizing.
//!
//! The solver is the bubble-point (Wang-Henke) method under constant molal
//! overflow with a saturated-liquid feed: flows are fixed by the reflux and
//! boilup ratios, the component balances form one tridiagonal system per
//! component, and stage temperatures are torn and updated by bubble points
//! until they stop moving.
//!
//! Stage 1 is a total condenser, stage N a partial reboiler; all stages sit
//! at the condenser pressure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economics::CostFactors;
use crate::stream::Stream;
use crate::thermo::{ComponentBank, ThermoError, GAS_CONSTANT, KELVIN};
use crate::tridiag::{self, TridiagError};

/// kmol/h to mol/s.
const KMOL_H_TO_MOL_S: f64 = 1000.0 / 3600.0;

/// Bounds on the column design variables.
pub const STAGE_RANGE: (usize, usize) = (20, 100);
pub const PRESSURE_RANGE: (f64, f64) = (0.5, 30.0);
pub const RATIO_RANGE: (f64, f64) = (1.0, 20.0);
pub const FEED_FRACTION_RANGE: (f64, f64) = (0.2, 0.8);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ColumnError {
    #[error("invalid column spec: {0}")]
    InvalidSpec(String),
    #[error("invalid feed: {0}")]
    InvalidFeed(String),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error("tridiagonal solve failed for component {component}: {source}")]
    Tridiagonal {
        component: usize,
        source: TridiagError,
    },
}

/// The five design decisions for one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    /// Equilibrium stages including condenser (stage 1) and reboiler (stage N).
    pub n_stages: usize,
    /// Feed stage, 1-based.
    pub feed_stage: usize,
    /// bar
    pub condenser_pressure: f64,
    /// L/D
    pub reflux_ratio: f64,
    /// V'/B
    pub boilup_ratio: f64,
}

impl ColumnSpec {
    pub fn new(
        n_stages: usize,
        feed_stage: usize,
        condenser_pressure: f64,
        reflux_ratio: f64,
        boilup_ratio: f64,
    ) -> Result<Self, ColumnError> {
        let spec = Self {
            n_stages,
            feed_stage,
            condenser_pressure,
            reflux_ratio,
            boilup_ratio,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Admissible feed stages for a column of `n_stages`.
    pub fn feed_stage_bounds(n_stages: usize) -> (usize, usize) {
        let n = n_stages as f64;
        (
            (FEED_FRACTION_RANGE.0 * n - 1e-9).ceil() as usize,
            (FEED_FRACTION_RANGE.1 * n + 1e-9).floor() as usize,
        )
    }

    pub fn validate(&self) -> Result<(), ColumnError> {
        let err = |m: String| Err(ColumnError::InvalidSpec(m));
        if !(STAGE_RANGE.0..=STAGE_RANGE.1).contains(&self.n_stages) {
            return err(format!(
                "n_stages {} outside {:?}",
                self.n_stages, STAGE_RANGE
            ));
        }
        let (lo, hi) = Self::feed_stage_bounds(self.n_stages);
        if !(lo..=hi).contains(&self.feed_stage) {
            return err(format!(
                "feed stage {} outside [{lo}, {hi}]",
                self.feed_stage
            ));
        }
        let in_range = |v: f64, r: (f64, f64)| v >= r.0 && v <= r.1;
        if !in_range(self.condenser_pressure, PRESSURE_RANGE) {
            return err(format!(
                "condenser pressure {} bar",
                self.condenser_pressure
            ));
        }
        if !in_range(self.reflux_ratio, RATIO_RANGE) {
            return err(format!("reflux ratio {}", self.reflux_ratio));
        }
        if !in_range(self.boilup_ratio, RATIO_RANGE) {
            return err(format!("boilup ratio {}", self.boilup_ratio));
        }
        Ok(())
    }

    /// Distillate-to-feed ratio implied by the CMO closure,
    /// `D/F = BR / (RR + 1 + BR)`.
    pub fn distillate_fraction(&self) -> f64 {
        self.boilup_ratio / (self.reflux_ratio + 1.0 + self.boilup_ratio)
    }

    /// Boilup ratio that yields distillate fraction `df` at reflux ratio `rr`.
    pub fn boilup_for(df: f64, rr: f64) -> f64 {
        (rr + 1.0) * df / (1.0 - df)
    }
}

/// Overall CMO mass balance for a saturated-liquid feed: `(D, B)` in the
/// units of `feed_flow`.
pub fn product_split(feed_flow: f64, reflux_ratio: f64, boilup_ratio: f64) -> (f64, f64) {
    let d = boilup_ratio * feed_flow / (reflux_ratio + 1.0 + boilup_ratio);
    (d, feed_flow - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the largest stage temperature change, K.
    pub tolerance: f64,
    /// Iteration-capped runs whose last change is below this count as
    /// converged with warnings, K.
    pub loose_tolerance: f64,
    /// Half-width of the initial linear temperature profile, K.
    pub initial_spread: f64,
    /// Relaxation applied to the bubble-point temperature update.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-4,
            loose_tolerance: 1e-2,
            initial_spread: 20.0,
            damping: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    ConvergedWithWarnings,
    Failed,
}

impl SolveStatus {
    pub fn is_converged(self) -> bool {
        !matches!(self, SolveStatus::Failed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::ConvergedWithWarnings => "converged_with_warnings",
            SolveStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSolution {
    /// Stage temperatures, K, condenser first.
    pub stage_t: Vec<f64>,
    /// Liquid leaving each stage, kmol/h (reflux on stage 1, bottoms on N).
    pub stage_l: Vec<f64>,
    /// Vapor leaving each stage, kmol/h (zero on the total condenser).
    pub stage_v: Vec<f64>,
    pub stage_x: Vec<Vec<f64>>,
    pub stage_y: Vec<Vec<f64>>,
    /// Vapor molar mass per stage, g/mol.
    pub stage_vapor_mw: Vec<f64>,
    pub pressure: f64,
    pub distillate: Stream,
    pub bottoms: Stream,
    /// Condenser duty, W (negative: heat removed).
    pub q_cnd: f64,
    /// Reboiler duty, W.
    pub q_rbl: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Largest stage temperature change on the final iteration, K.
    pub max_delta_t: f64,
    /// 0-based index of the stage with the largest volumetric vapor load.
    pub max_vapor_stage: usize,
    /// True if any stage temperature left a component's data range.
    pub extrapolated: bool,
}

impl ColumnSolution {
    pub fn converged(&self) -> bool {
        self.status.is_converged()
    }
}

/// Solve one column for `feed` (saturated liquid) under `spec`.
///
/// Non-convergence is reported through [`SolveStatus::Failed`]; thermodynamic
/// or linear-algebra breakdowns return an error.
pub fn solve_column(
    bank: &ComponentBank,
    feed: &Stream,
    spec: &ColumnSpec,
    opts: &SolverOptions,
) -> Result<ColumnSolution, ColumnError> {
    spec.validate()?;
    let nc = bank.len();
    if feed.composition.len() != nc {
        return Err(ColumnError::InvalidFeed(format!(
            "composition has {} entries, bank has {nc}",
            feed.composition.len()
        )));
    }
    if !(feed.flow > 0.0) {
        return Err(ColumnError::InvalidFeed(format!(
            "flow {} kmol/h",
            feed.flow
        )));
    }

    let n = spec.n_stages;
    let f_idx = spec.feed_stage - 1;
    let p = spec.condenser_pressure;
    let flow = feed.flow;
    let (d, b) = product_split(flow, spec.reflux_ratio, spec.boilup_ratio);
    let reflux = spec.reflux_ratio * d;
    let vap = (spec.reflux_ratio + 1.0) * d;

    let mut liquid = vec![0.0; n];
    let mut vapor = vec![0.0; n];
    for j in 0..n {
        liquid[j] = if j == n - 1 {
            b
        } else if j < f_idx {
            reflux
        } else {
            reflux + flow
        };
        if j > 0 {
            vapor[j] = vap;
        }
    }

    let t_feed = bank.bubble_point(&feed.composition, p)?;
    let spread = opts.initial_spread;
    let mut temps: Vec<f64> = (0..n)
        .map(|j| t_feed - spread + 2.0 * spread * j as f64 / (n - 1) as f64)
        .collect();

    let mut k = vec![vec![0.0; nc]; n];
    let mut xu = vec![vec![0.0; nc]; n];
    let mut xn = vec![vec![0.0; nc]; n];
    let (mut sub, mut diag, mut sup, mut rhs) = (
        vec![0.0; n - 1],
        vec![0.0; n],
        vec![0.0; n - 1],
        vec![0.0; n],
    );
    let mut scratch = vec![0.0; n];
    let mut col = vec![0.0; n];
    let (mut fz, mut d_calc, mut b_calc) = (vec![0.0; nc], vec![0.0; nc], vec![0.0; nc]);
    let (mut scale, mut d_corr) = (vec![0.0; nc], vec![0.0; nc]);

    let mut status = SolveStatus::Failed;
    let mut iterations = 0;
    let mut max_delta = f64::INFINITY;

    for it in 1..=opts.max_iterations {
        iterations = it;
        for (kj, tj) in k.iter_mut().zip(&temps) {
            bank.k_values_into(*tj, p, kj);
        }
        for i in 0..nc {
            for j in 0..n {
                let withdraw = if j == 0 { d } else { 0.0 };
                diag[j] = -(liquid[j] + withdraw + vapor[j] * k[j][i]);
                rhs[j] = if j == f_idx {
                    -flow * feed.composition[i]
                } else {
                    0.0
                };
                if j + 1 < n {
                    sub[j] = liquid[j];
                    sup[j] = vapor[j + 1] * k[j + 1][i];
                }
            }
            tridiag::solve_into(&sub, &diag, &sup, &rhs, &mut scratch, &mut col).map_err(
                |source| ColumnError::Tridiagonal {
                    component: i,
                    source,
                },
            )?;
            for j in 0..n {
                xu[j][i] = col[j].max(0.0);
            }
        }
        // theta correction: rescale component profiles so the distillate
        // total matches the CMO distillate rate
        for i in 0..nc {
            fz[i] = flow * feed.composition[i];
            d_calc[i] = d * xu[0][i];
            b_calc[i] = b * xu[n - 1][i];
        }
        let theta = theta_factor(&d_calc, &b_calc, &fz, d);
        for i in 0..nc {
            let denom = d_calc[i] + theta * b_calc[i];
            scale[i] = if fz[i] > 0.0 && denom > 0.0 {
                fz[i] / denom
            } else {
                0.0
            };
            d_corr[i] = (d_calc[i] * scale[i]).clamp(0.0, fz[i]);
        }
        max_delta = 0.0;
        for j in 0..n {
            for i in 0..nc {
                xn[j][i] = xu[j][i] * scale[i];
            }
            let s: f64 = xn[j].iter().sum();
            if !(s > 0.0 && s.is_finite()) {
                return Err(ColumnError::Tridiagonal {
                    component: 0,
                    source: TridiagError::NonFinite,
                });
            }
            xn[j].iter_mut().for_each(|x| *x /= s);
            let t_new = bank.bubble_point_from(&xn[j], p, Some(temps[j]))?;
            let step = t_new - temps[j];
            max_delta = f64::max(max_delta, step.abs());
            temps[j] += opts.damping * step;
        }
        if max_delta < opts.tolerance {
            status = SolveStatus::Converged;
            break;
        }
    }
    if status == SolveStatus::Failed && max_delta < opts.loose_tolerance {
        status = SolveStatus::ConvergedWithWarnings;
    }

    // Corrected distillate flows; bottoms by difference so every component
    // balance closes exactly.
    let mut dist_flows = vec![0.0; nc];
    let mut bot_flows = vec![0.0; nc];
    for i in 0..nc {
        dist_flows[i] = d_corr[i];
        bot_flows[i] = fz[i] - d_corr[i];
    }
    let distillate = Stream::from_component_flows(&dist_flows, temps[0] - KELVIN, p);
    let bottoms = Stream::from_component_flows(&bot_flows, temps[n - 1] - KELVIN, p);

    let mut stage_y = vec![vec![0.0; nc]; n];
    let mut stage_vapor_mw = vec![0.0; n];
    let mut extrapolated = false;
    for j in 0..n {
        let mut s = 0.0;
        for (i, c) in bank.components().iter().enumerate() {
            let (ps, clamped) = c.psat_clamped(temps[j]);
            extrapolated |= clamped;
            stage_y[j][i] = ps / p * xn[j][i];
            s += stage_y[j][i];
        }
        stage_y[j].iter_mut().for_each(|y| *y /= s);
        stage_vapor_mw[j] = bank.mixture_molar_mass(&stage_y[j]);
    }
    let max_vapor_stage = (0..n)
        .map(|j| (j, vapor[j] * (temps[j] * stage_vapor_mw[j]).sqrt()))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
        .0;

    let q_cnd = -vap * KMOL_H_TO_MOL_S * bank.mixture_dh_vap(&distillate.composition);
    let q_rbl = spec.boilup_ratio * b * KMOL_H_TO_MOL_S * bank.mixture_dh_vap(&bottoms.composition);

    Ok(ColumnSolution {
        stage_t: temps,
        stage_l: liquid,
        stage_v: vapor,
        stage_x: xn,
        stage_y,
        stage_vapor_mw,
        pressure: p,
        distillate,
        bottoms,
        q_cnd,
        q_rbl,
        status,
        iterations,
        max_delta_t: max_delta,
        max_vapor_stage,
        extrapolated,
    })
}

/// Holland's theta: the root of `sum_i fz_i d_i / (d_i + theta b_i) = target`,
/// with `d_i`, `b_i` the calculated product flows. Searched in `ln theta`.
fn theta_factor(d_calc: &[f64], b_calc: &[f64], fz: &[f64], target: f64) -> f64 {
    let h = |theta: f64| -> (f64, f64) {
        let mut v = -target;
        let mut dv = 0.0;
        for ((di, bi), fi) in d_calc.iter().zip(b_calc).zip(fz) {
            let denom = di + theta * bi;
            if *fi > 0.0 && denom > 0.0 {
                v += fi * di / denom;
                dv -= fi * di * bi / (denom * denom);
            }
        }
        (v, dv * theta) // derivative with respect to ln theta
    };
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if h(lo.exp()).0 <= 0.0 {
        return lo.exp();
    }
    if h(hi.exp()).0 >= 0.0 {
        return hi.exp();
    }
    let mut phi: f64 = 0.0;
    for _ in 0..100 {
        let (v, dv) = h(phi.exp());
        if v.abs() <= 1e-12 * target {
            break;
        }
        if v > 0.0 {
            lo = phi;
        } else {
            hi = phi;
        }
        let step = phi - v / dv;
        phi = if dv < 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-14 {
            break;
        }
    }
    phi.exp()
}

/// Geometric sizing of a solved column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSizing {
    /// m
    pub diameter: f64,
    /// m
    pub height: f64,
    /// m2
    pub area_cnd: f64,
    /// m2
    pub area_rbl: f64,
    /// degC
    pub dtlm_cnd: f64,
    /// degC
    pub dtlm_rbl: f64,
    /// Condenser temperature, degC.
    pub t_cnd: f64,
    /// Reboiler temperature, degC.
    pub t_rbl: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SizingError {
    #[error("cannot size an unconverged column")]
    NotConverged,
    /// A heat exchanger has no positive driving force. `partial` carries the
    /// remaining geometry with the offending area(s) set to zero.
    #[error(
        "non-positive driving force (condenser dTlm {:.3}, reboiler dT {:.3})",
        partial.dtlm_cnd, partial.dtlm_rbl
    )]
    DrivingForce {
        condenser: bool,
        reboiler: bool,
        partial: Box<ColumnSizing>,
    },
}

/// Effective diameter from the gas-load factor, m.
///
/// `vapor_flow` is in kmol/s: with that unit and the `* 1000` on the g/mol
/// molar mass the expression is the F-factor area `Phi/f * sqrt(R T Mw / P)`
/// in SI units.
pub fn effective_diameter(
    vapor_flow: f64,
    temperature: f64,
    vapor_mw: f64,
    pressure_pa: f64,
    gas_load_factor: f64,
    gas_constant: f64,
) -> f64 {
    // the correlation's rounded pi, kept so costs match the published tables
    #[allow(clippy::approx_constant)]
    let pi = 3.1416;
    (4.0 * vapor_flow / (pi * gas_load_factor)
        * (gas_constant * temperature * vapor_mw * 1000.0 / pressure_pa).sqrt())
    .sqrt()
}

/// `L = n_s * HETP + H0`, m.
pub fn column_height(n_stages: usize, hetp: f64, clearance: f64) -> f64 {
    n_stages as f64 * hetp + clearance
}

/// Cube-root mean temperature difference of the condenser, degC.
pub fn condenser_dtlm(t_cnd: f64, t_in: f64, t_out: f64) -> f64 {
    let a = t_cnd - t_in;
    let b = t_cnd - t_out;
    (a * b * (a + b) / 2.0).cbrt()
}

/// `A_cnd = -Q_cnd / (K_cnd * dTlm)`, m2.
pub fn condenser_area(q_cnd: f64, k_cnd: f64, dtlm: f64) -> f64 {
    -q_cnd / (k_cnd * dtlm)
}

/// `A_rbl = Q_rbl / (K_rbl * (T_steam - T_rbl))`, m2.
pub fn reboiler_area(q_rbl: f64, k_rbl: f64, dt: f64) -> f64 {
    q_rbl / (k_rbl * dt)
}

pub fn size_column(
    sol: &ColumnSolution,
    spec: &ColumnSpec,
    f: &CostFactors,
) -> Result<ColumnSizing, SizingError> {
    if !sol.converged() {
        return Err(SizingError::NotConverged);
    }
    let p_pa = sol.pressure * 1e5;
    let d_eff_max = sol
        .stage_v
        .iter()
        .zip(&sol.stage_t)
        .zip(&sol.stage_vapor_mw)
        .filter(|((v, _), _)| **v > 0.0)
        .map(|((v, t), mw)| {
            effective_diameter(v / 3600.0, *t, *mw, p_pa, f.gas_load_f, GAS_CONSTANT)
        })
        .fold(0.0, f64::max);
    let t_cnd = sol.distillate.temperature;
    let t_rbl = sol.bottoms.temperature;
    let dtlm_cnd = condenser_dtlm(t_cnd, f.t_cool_in, f.t_cool_out);
    let dtlm_rbl = f.t_steam - t_rbl;
    let cnd_bad = !(dtlm_cnd > 0.0);
    let rbl_bad = !(dtlm_rbl > 0.0);
    let sizing = ColumnSizing {
        diameter: 1.1 * d_eff_max,
        height: column_height(spec.n_stages, f.hetp, f.h0),
        area_cnd: if cnd_bad {
            0.0
        } else {
            condenser_area(sol.q_cnd, f.k_cnd, dtlm_cnd)
        },
        area_rbl: if rbl_bad {
            0.0
        } else {
            reboiler_area(sol.q_rbl, f.k_rbl, dtlm_rbl)
        },
        dtlm_cnd,
        dtlm_rbl,
        t_cnd,
        t_rbl,
    };
    if cnd_bad || rbl_bad {
        return Err(SizingError::DrivingForce {
            condenser: cnd_bad,
            reboiler: rbl_bad,
            partial: Box::new(sizing),
        });
    }
    Ok(sizing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{Antoine, ComponentSpec};

    fn feed() -> Stream {
        let z = [0.06, 33.69, 35.65, 15.32, 10.21, 5.13];
        let s: f64 = z.iter().sum();
        Stream::new(z.iter().map(|v| v / s).collect(), 12_400.0, 105.0, 17.0)
    }

    /// Two pseudo-components with a large, nearly constant relative
    /// volatility.
    pub(crate) fn binary_bank() -> ComponentBank {
        let mk = |name: &str, a: f64| ComponentSpec {
            name: name.into(),
            formula: String::new(),
            molar_mass: 50.0,
            antoine: Antoine {
                a,
                b: 1000.0,
                c: -20.0,
            },
            dh_vap: 20_000.0,
            t_min: 150.0,
            t_max: 500.0,
            fit_range: None,
        };
        ComponentBank::new(vec![mk("light", 4.8), mk("heavy", 4.0)]).unwrap()
    }

    #[test]
    fn cmo_split_example() {
        let (d, b) = product_split(100.0, 1.0, 2.0);
        assert_eq!(d, 50.0);
        assert_eq!(d + b, 100.0);
        let spec = ColumnSpec::new(40, 20, 5.0, 1.0, 2.0).unwrap();
        assert_eq!(spec.distillate_fraction(), 0.5);
        assert!((ColumnSpec::boilup_for(0.5, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn spec_bounds_enforced() {
        assert!(ColumnSpec::new(19, 10, 5.0, 2.0, 2.0).is_err());
        assert!(ColumnSpec::new(101, 50, 5.0, 2.0, 2.0).is_err());
        assert!(ColumnSpec::new(50, 9, 5.0, 2.0, 2.0).is_err());
        assert!(ColumnSpec::new(50, 41, 5.0, 2.0, 2.0).is_err());
        assert!(ColumnSpec::new(50, 10, 0.4, 2.0, 2.0).is_err());
        assert!(ColumnSpec::new(50, 10, 5.0, 0.9, 2.0).is_err());
        assert!(ColumnSpec::new(50, 10, 5.0, 2.0, 21.0).is_err());
        assert!(ColumnSpec::new(50, 40, 30.0, 20.0, 1.0).is_ok());
        assert_eq!(ColumnSpec::feed_stage_bounds(21), (5, 16));
        assert_eq!(ColumnSpec::feed_stage_bounds(60), (12, 48));
    }

    #[test]
    fn solves_default_feed_and_conserves_mass() {
        let bank = ComponentBank::default();
        let spec = ColumnSpec::new(40, 20, 17.2, 5.0, 2.0).unwrap();
        let sol = solve_column(&bank, &feed(), &spec, &SolverOptions::default()).unwrap();
        assert_eq!(
            sol.status,
            SolveStatus::Converged,
            "iters {}",
            sol.iterations
        );
        let f = feed().component_flows();
        let d = sol.distillate.component_flows();
        let b = sol.bottoms.component_flows();
        for i in 0..6 {
            assert!(((d[i] + b[i]) - f[i]).abs() <= 1e-6 * f[i].max(1e-12));
        }
        for w in sol.stage_t.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        assert!(sol.q_cnd < 0.0 && sol.q_rbl > 0.0);
    }

    #[test]
    fn sharp_binary_split() {
        let bank = binary_bank();
        let feed = Stream::new(vec![0.5, 0.5], 100.0, 50.0, 2.0);
        // D/F = 0.5 with RR = 8: BR = 9
        let spec = ColumnSpec::new(40, 20, 2.0, 8.0, 9.0).unwrap();
        let sol = solve_column(&bank, &feed, &spec, &SolverOptions::default()).unwrap();
        assert!(sol.converged());
        assert!(sol.distillate.composition[0] > 0.99);
        assert!(sol.bottoms.composition[1] > 0.99);
    }

    #[test]
    fn pure_feed_stays_pure() {
        let bank = ComponentBank::default();
        let mut z = vec![0.0; 6];
        z[2] = 1.0;
        let feed = Stream::new(z, 500.0, 40.0, 5.0);
        let spec = ColumnSpec::new(30, 15, 5.0, 3.0, 4.0).unwrap();
        let sol = solve_column(&bank, &feed, &spec, &SolverOptions::default()).unwrap();
        assert!(sol.converged());
        assert!((sol.distillate.composition[2] - 1.0).abs() < 1e-12);
        assert!((sol.bottoms.composition[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_feed() {
        let bank = ComponentBank::default();
        let mut f = feed();
        f.flow = 0.0;
        let spec = ColumnSpec::new(40, 20, 17.2, 5.0, 2.0).unwrap();
        assert!(matches!(
            solve_column(&bank, &f, &spec, &SolverOptions::default()),
            Err(ColumnError::InvalidFeed(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let bank = ComponentBank::default();
        let spec = ColumnSpec::new(60, 30, 17.2, 5.0, 2.0).unwrap();
        let opts = SolverOptions {
            max_iterations: 1,
            ..SolverOptions::default()
        };
        let sol = solve_column(&bank, &feed(), &spec, &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::Failed);
        assert_eq!(
            size_column(&sol, &spec, &CostFactors::default()),
            Err(SizingError::NotConverged)
        );
    }

    #[test]
    fn driving_force_examples() {
        assert_eq!(201.0 - 100.0, 101.0);
        let dt = condenser_dtlm(50.0, 30.0, 40.0);
        assert!((dt - (20.0f64 * 10.0 * 30.0 / 2.0).cbrt()).abs() < 1e-12);
        assert!((dt - 14.42).abs() < 5e-3);
        assert!(condenser_dtlm(40.0, 30.0, 40.0) == 0.0);
        assert!(condenser_dtlm(37.0, 30.0, 40.0) < 0.0);
        assert!(condenser_dtlm(20.0, 30.0, 40.0) < 0.0);
        assert_eq!(column_height(20, 0.6, 4.0), 16.0);
    }

    #[test]
    fn sizing_is_positive_for_sensible_column() {
        let bank = ComponentBank::default();
        let spec = ColumnSpec::new(40, 20, 17.2, 5.0, 2.0).unwrap();
        let sol = solve_column(&bank, &feed(), &spec, &SolverOptions::default()).unwrap();
        let sz = size_column(&sol, &spec, &CostFactors::default()).unwrap();
        assert!(sz.diameter > 0.0 && sz.height > 0.0);
        assert!(sz.area_cnd > 0.0 && sz.area_rbl > 0.0);
    }

    #[test]
    fn low_pressure_light_column_flags_condenser() {
        let bank = ComponentBank::default();
        // propane-rich overhead at 2 bar condenses far below cooling water
        let spec = ColumnSpec::new(40, 20, 2.0, 5.0, 2.0).unwrap();
        let sol = solve_column(&bank, &feed(), &spec, &SolverOptions::default()).unwrap();
        match size_column(&sol, &spec, &CostFactors::default()) {
            Err(SizingError::DrivingForce {
                condenser,
                reboiler,
                partial,
            }) => {
                assert!(condenser && !reboiler);
                assert_eq!(partial.area_cnd, 0.0);
                assert!(partial.area_rbl > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diameter_magnitude_for_large_propane_column() {
        // 51,134 kmol/h of propane vapor at 330 K and 17.2 bar
        let d = 1.1 * effective_diameter(51_134.0 / 3600.0, 330.0, 44.1, 17.2e5, 1.6, 8.314);
        assert!(d > 9.0 && d < 12.0, "D = {d}");
    }
}
