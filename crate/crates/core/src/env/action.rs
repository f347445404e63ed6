use serde::{Deserialize, Serialize};

use crate::column::{ColumnSpec, FEED_FRACTION_RANGE, PRESSURE_RANGE, RATIO_RANGE, STAGE_RANGE};

/// Number of entries in an action vector: five design variables and the
/// separate flag.
pub const ACTION_DIM: usize = 6;

/// Number of continuous design heads (the entropy-bearing part of the action).
pub const DESIGN_DIM: usize = 5;

/// Ranges the `[-1, 1]` action entries are mapped onto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionBounds {
    pub n_stages: (usize, usize),
    /// Feed stage as a fraction of the stage count.
    pub feed_fraction: (f64, f64),
    /// bar
    pub condenser_pressure: (f64, f64),
    pub reflux_ratio: (f64, f64),
    pub boilup_ratio: (f64, f64),
}

impl Default for ActionBounds {
    fn default() -> Self {
        Self {
            n_stages: STAGE_RANGE,
            feed_fraction: FEED_FRACTION_RANGE,
            condenser_pressure: PRESSURE_RANGE,
            reflux_ratio: RATIO_RANGE,
            boilup_ratio: RATIO_RANGE,
        }
    }
}

impl ActionBounds {
    /// Bounds must lie inside what the column model accepts.
    pub fn validate(&self) -> Result<(), String> {
        let within = |(lo, hi): (f64, f64), (a, b): (f64, f64)| lo <= hi && lo >= a && hi <= b;
        let stages = (self.n_stages.0 as f64, self.n_stages.1 as f64);
        let ok = within(stages, (STAGE_RANGE.0 as f64, STAGE_RANGE.1 as f64))
            && within(self.feed_fraction, FEED_FRACTION_RANGE)
            && within(self.condenser_pressure, PRESSURE_RANGE)
            && within(self.reflux_ratio, RATIO_RANGE)
            && within(self.boilup_ratio, RATIO_RANGE);
        if ok {
            Ok(())
        } else {
            Err(format!("action bounds outside column limits: {self:?}"))
        }
    }
}

fn affine(a: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + (a.clamp(-1.0, 1.0) + 1.0) * 0.5 * (hi - lo)
}

/// Map a `[-1, 1]^6` action onto a column spec and the separate decision.
///
/// Entries outside `[-1, 1]` are clamped. The stage count is rounded first;
/// the feed stage is then placed between `0.2 n` and `0.8 n` of that count.
pub fn map_action(action: &[f64], bounds: &ActionBounds) -> (ColumnSpec, bool) {
    assert_eq!(
        action.len(),
        ACTION_DIM,
        "action must have {ACTION_DIM} entries"
    );
    let stages = (bounds.n_stages.0 as f64, bounds.n_stages.1 as f64);
    let n_stages = affine(action[0], stages).round() as usize;
    let n = n_stages as f64;
    let feed_lo = bounds.feed_fraction.0 * n;
    let feed_hi = bounds.feed_fraction.1 * n;
    let (lo, hi) = ColumnSpec::feed_stage_bounds(n_stages);
    let feed_stage = (affine(action[1], (feed_lo, feed_hi)).round() as usize).clamp(lo, hi);
    let spec = ColumnSpec {
        n_stages,
        feed_stage,
        condenser_pressure: affine(action[2], bounds.condenser_pressure),
        reflux_ratio: affine(action[3], bounds.reflux_ratio),
        boilup_ratio: affine(action[4], bounds.boilup_ratio),
    };
    (spec, action[5] >= 0.0)
}
