//! Pure-component property data and ideal vapor-liquid equilibrium.
//!
//! K-values follow Raoult's law, `K = psat(T) / P`, with saturation pressures
//! from a base-10 Antoine correlation (bar, kelvin). Bubble and dew
//! temperatures are found by safeguarded Newton iteration inside a fixed
//! search bracket.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Temperature search bracket for bubble/dew point solves, kelvin.
pub const T_BRACKET: (f64, f64) = (150.0, 500.0);

/// Pressure range accepted by the bubble/dew point solvers, bar.
pub const P_RANGE: (f64, f64) = (0.1, 50.0);

/// Gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314;

/// Kelvin offset for degrees Celsius.
pub const KELVIN: f64 = 273.15;

const COMPOSITION_TOL: f64 = 1e-9;

/// Default component data shipped with the crate.
pub const DEFAULT_COMPONENTS_TOML: &str = include_str!("../data/components.toml");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("pressure must be positive, got {0} bar")]
    NonPositivePressure(f64),
    #[error("pressure {0} bar outside solver range [{lo}, {hi}] bar", lo = P_RANGE.0, hi = P_RANGE.1)]
    PressureOutOfRange(f64),
    #[error("composition length {got} does not match component count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("composition must be non-negative and sum to 1 (sum = {sum})")]
    InvalidComposition { sum: f64 },
    #[error("no {kind} temperature in [{lo}, {hi}] K at {pressure} bar")]
    NoRoot {
        kind: &'static str,
        pressure: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid component data: {0}")]
    InvalidData(String),
}

/// Antoine coefficients for `log10(psat / bar) = a - b / (T / K + c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Antoine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub name: String,
    #[serde(default)]
    pub formula: String,
    /// g/mol
    pub molar_mass: f64,
    pub antoine: Antoine,
    /// Molar heat of vaporization, J/mol.
    pub dh_vap: f64,
    /// Lower end of the evaluation range, kelvin.
    pub t_min: f64,
    /// Upper end of the evaluation range, kelvin.
    pub t_max: f64,
    /// Range of the data the correlation was fitted to, informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_range: Option<(f64, f64)>,
}

impl ComponentSpec {
    pub fn validate(&self) -> Result<(), ThermoError> {
        let bad = |msg: &str| Err(ThermoError::InvalidData(format!("{}: {msg}", self.name)));
        if !(self.molar_mass > 0.0) {
            return bad("molar_mass must be positive");
        }
        if !(self.dh_vap > 0.0) {
            return bad("dh_vap must be positive");
        }
        if !(self.t_min < self.t_max) {
            return bad("t_min must be below t_max");
        }
        // psat strictly increasing on the range needs b > 0 and T + c > 0.
        if !(self.antoine.b > 0.0) || !(self.t_min + self.antoine.c > 0.0) {
            return bad("Antoine form not monotone over the valid range");
        }
        Ok(())
    }

    /// Saturation pressure in bar and whether `t` had to be clamped into the
    /// valid range.
    pub fn psat_clamped(&self, t: f64) -> (f64, bool) {
        let tc = t.clamp(self.t_min, self.t_max);
        let Antoine { a, b, c } = self.antoine;
        (10f64.powf(a - b / (tc + c)), tc != t)
    }

    /// Saturation pressure in bar.
    pub fn psat(&self, t: f64) -> f64 {
        self.psat_clamped(t).0
    }

    /// `d ln(psat) / dT`, zero where psat is clamped.
    pub fn dln_psat_dt(&self, t: f64) -> f64 {
        if t < self.t_min || t > self.t_max {
            return 0.0;
        }
        let Antoine { b, c, .. } = self.antoine;
        std::f64::consts::LN_10 * b / ((t + c) * (t + c))
    }

    /// Ideal K-value `psat(T) / P`.
    pub fn k_value(&self, t: f64, p: f64) -> Result<f64, ThermoError> {
        if !(p > 0.0) {
            return Err(ThermoError::NonPositivePressure(p));
        }
        Ok(self.psat(t) / p)
    }
}

#[derive(Debug, Deserialize)]
struct ComponentFile {
    component: Vec<ComponentSpec>,
}

/// Ordered set of components; every composition vector indexes against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentBank {
    components: Vec<ComponentSpec>,
}

impl Default for ComponentBank {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_COMPONENTS_TOML).expect("shipped component data is valid")
    }
}

impl ComponentBank {
    pub fn new(components: Vec<ComponentSpec>) -> Result<Self, ThermoError> {
        if components.is_empty() {
            return Err(ThermoError::InvalidData("empty component list".into()));
        }
        for c in &components {
            c.validate()?;
        }
        Ok(Self { components })
    }

    /// Parse a component data file (`[[component]]` records).
    pub fn from_toml_str(s: &str) -> Result<Self, ThermoError> {
        let file: ComponentFile =
            toml::from_str(s).map_err(|e| ThermoError::InvalidData(e.to_string()))?;
        Self::new(file.component)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ComponentSpec] {
        &self.components
    }

    pub fn get(&self, i: usize) -> &ComponentSpec {
        &self.components[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.components.iter().map(|c| c.name.as_str())
    }

    /// Mole-fraction weighted molar mass, g/mol.
    pub fn mixture_molar_mass(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(x)
            .map(|(c, xi)| c.molar_mass * xi)
            .sum()
    }

    /// Mole-fraction weighted heat of vaporization, J/mol.
    pub fn mixture_dh_vap(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(x)
            .map(|(c, xi)| c.dh_vap * xi)
            .sum()
    }

    /// Fill `k` with K-values at `(t, p)`.
    pub fn k_values_into(&self, t: f64, p: f64, k: &mut [f64]) {
        for (ki, c) in k.iter_mut().zip(&self.components) {
            *ki = c.psat(t) / p;
        }
    }

    fn check_composition(&self, x: &[f64], p: f64) -> Result<(), ThermoError> {
        if x.len() != self.len() {
            return Err(ThermoError::LengthMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        let sum: f64 = x.iter().sum();
        if x.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > COMPOSITION_TOL {
            return Err(ThermoError::InvalidComposition { sum });
        }
        if !(p >= P_RANGE.0 && p <= P_RANGE.1) {
            return Err(ThermoError::PressureOutOfRange(p));
        }
        Ok(())
    }

    /// `sum_i K_i x_i - 1` and its temperature derivative.
    pub fn bubble_residual(&self, x: &[f64], t: f64, p: f64) -> (f64, f64) {
        let mut f = -1.0;
        let mut df = 0.0;
        for (c, xi) in self.components.iter().zip(x) {
            if *xi == 0.0 {
                continue;
            }
            let kx = c.psat(t) / p * xi;
            f += kx;
            df += kx * c.dln_psat_dt(t);
        }
        (f, df)
    }

    /// `sum_i y_i / K_i - 1` and its temperature derivative.
    pub fn dew_residual(&self, y: &[f64], t: f64, p: f64) -> (f64, f64) {
        let mut f = -1.0;
        let mut df = 0.0;
        for (c, yi) in self.components.iter().zip(y) {
            if *yi == 0.0 {
                continue;
            }
            let term = yi * p / c.psat(t);
            f += term;
            df -= term * c.dln_psat_dt(t);
        }
        (f, df)
    }

    /// Bubble-point temperature (K) of liquid `x` at `p` bar.
    pub fn bubble_point(&self, x: &[f64], p: f64) -> Result<f64, ThermoError> {
        self.bubble_point_from(x, p, None)
    }

    /// Bubble point with an optional starting guess (e.g. the previous
    /// iterate of a tray solve).
    pub fn bubble_point_from(
        &self,
        x: &[f64],
        p: f64,
        guess: Option<f64>,
    ) -> Result<f64, ThermoError> {
        self.check_composition(x, p)?;
        solve_monotone(|t| self.bubble_residual(x, t, p), guess, true).ok_or(ThermoError::NoRoot {
            kind: "bubble",
            pressure: p,
            lo: T_BRACKET.0,
            hi: T_BRACKET.1,
        })
    }

    /// Dew-point temperature (K) of vapor `y` at `p` bar.
    pub fn dew_point(&self, y: &[f64], p: f64) -> Result<f64, ThermoError> {
        self.dew_point_from(y, p, None)
    }

    pub fn dew_point_from(
        &self,
        y: &[f64],
        p: f64,
        guess: Option<f64>,
    ) -> Result<f64, ThermoError> {
        self.check_composition(y, p)?;
        solve_monotone(|t| self.dew_residual(y, t, p), guess, false).ok_or(ThermoError::NoRoot {
            kind: "dew",
            pressure: p,
            lo: T_BRACKET.0,
            hi: T_BRACKET.1,
        })
    }
}

/// Root of a monotone residual on `T_BRACKET` by Newton steps kept inside a
/// shrinking sign bracket, falling back to bisection when a step leaves it.
fn solve_monotone<F>(f: F, guess: Option<f64>, increasing: bool) -> Option<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let sign = if increasing { 1.0 } else { -1.0 };
    let (mut lo, mut hi) = T_BRACKET;
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if sign * f_lo > 0.0 || sign * f_hi < 0.0 {
        return None;
    }
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    let mut t = match guess {
        Some(g) if g > lo && g < hi => g,
        _ => 0.5 * (lo + hi),
    };
    for _ in 0..200 {
        let (fv, dfv) = f(t);
        if fv == 0.0 || (fv.abs() < 1e-13) {
            return Some(t);
        }
        if sign * fv < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo < 1e-11 {
            return Some(0.5 * (lo + hi));
        }
        let newton = t - fv / dfv;
        t = if dfv != 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Some(t)
}
