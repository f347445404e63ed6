//! Penalties for non-sensible column designs.

use serde::{Deserialize, Serialize};

use crate::column::ColumnSolution;
use crate::economics::CostFactors;

/// Penalty amounts, M euro.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyAmounts {
    pub condenser_duty: f64,
    pub reboiler_duty: f64,
    pub reboiler_temperature: f64,
    pub condenser_dtlm: f64,
    pub flowsheet_error: f64,
}

impl Default for PenaltyAmounts {
    fn default() -> Self {
        Self {
            condenser_duty: 5.0,
            reboiler_duty: 5.0,
            reboiler_temperature: 5.0,
            condenser_dtlm: 5.0,
            flowsheet_error: 10.0,
        }
    }
}

/// How the condenser driving-force condition is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CondenserRule {
    /// Penalize `dTlm <= 0`, i.e. the condenser is not above the cooling
    /// water return temperature.
    #[default]
    NonPositive,
    /// Penalize `dTlm <= T_cool` with the supply temperature taken literally.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PenaltyLedger {
    pub condenser_duty: bool,
    pub reboiler_duty: bool,
    pub reboiler_temperature: bool,
    pub condenser_dtlm: bool,
    pub flowsheet_error: bool,
    /// Sum of triggered amounts, M euro.
    pub total: f64,
}

impl PenaltyLedger {
    pub fn flowsheet_error(amounts: &PenaltyAmounts) -> Self {
        Self {
            flowsheet_error: true,
            total: amounts.flowsheet_error,
            ..Self::default()
        }
    }

    pub fn any(&self) -> bool {
        self.condenser_duty
            || self.reboiler_duty
            || self.reboiler_temperature
            || self.condenser_dtlm
            || self.flowsheet_error
    }
}

/// Evaluate the design conditions of a converged column. `dtlm_cnd` is the
/// condenser mean temperature difference from sizing, whether or not sizing
/// succeeded.
pub fn penalties(
    sol: &ColumnSolution,
    dtlm_cnd: f64,
    f: &CostFactors,
    amounts: &PenaltyAmounts,
    rule: CondenserRule,
) -> PenaltyLedger {
    let mut ledger = PenaltyLedger {
        condenser_duty: sol.q_cnd >= 0.0,
        reboiler_duty: sol.q_rbl <= 0.0,
        reboiler_temperature: sol.bottoms.temperature >= f.t_steam,
        condenser_dtlm: match rule {
            CondenserRule::NonPositive => !(dtlm_cnd > 0.0),
            CondenserRule::Literal => !(dtlm_cnd > f.t_cool_in),
        },
        ..PenaltyLedger::default()
    };
    let mut total = 0.0;
    for (hit, amount) in [
        (ledger.condenser_duty, amounts.condenser_duty),
        (ledger.reboiler_duty, amounts.reboiler_duty),
        (ledger.reboiler_temperature, amounts.reboiler_temperature),
        (ledger.condenser_dtlm, amounts.condenser_dtlm),
    ] {
        if hit {
            total += amount;
        }
    }
    ledger.total = total;
    ledger
}
