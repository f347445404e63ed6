use serde::{Deserialize, Serialize};

use super::penalty::{penalties, CondenserRule, PenaltyAmounts, PenaltyLedger};
use crate::column::{
    size_column, solve_column, ColumnSizing, ColumnSolution, ColumnSpec, SizingError, SolveStatus,
    SolverOptions,
};
use crate::economics::{cost_report, CostFactors, CostReport};
use crate::stream::Stream;
use crate::thermo::ComponentBank;

/// Everything the environment and the baselines need to know about one
/// attempted column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnEvaluation {
    pub spec: ColumnSpec,
    /// `None` when the solver raised an error.
    pub solution: Option<ColumnSolution>,
    pub status: SolveStatus,
    pub sizing: Option<ColumnSizing>,
    pub costs: Option<CostReport>,
    pub penalties: PenaltyLedger,
    pub error: Option<String>,
}

impl ColumnEvaluation {
    /// True when products exist and may be routed.
    pub fn usable(&self) -> bool {
        self.status.is_converged() && self.solution.is_some()
    }

    pub fn tac(&self) -> f64 {
        self.costs.map_or(0.0, |c| c.tac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationSettings<'a> {
    pub cost: &'a CostFactors,
    pub solver: &'a SolverOptions,
    pub penalties: &'a PenaltyAmounts,
    pub condenser_rule: CondenserRule,
}

/// Solve, size, cost and penalize one column.
///
/// A solver error or non-convergence yields the flowsheet-error penalty and no
/// costs. A driving-force sizing failure still costs the column, with the
/// offending exchanger area zeroed, and leaves the penalty to the ledger.
pub fn evaluate_column(
    bank: &ComponentBank,
    feed: &Stream,
    spec: &ColumnSpec,
    s: EvaluationSettings<'_>,
) -> ColumnEvaluation {
    let failed = |solution, status, error| ColumnEvaluation {
        spec: *spec,
        solution,
        status,
        sizing: None,
        costs: None,
        penalties: PenaltyLedger::flowsheet_error(s.penalties),
        error,
    };
    let sol = match solve_column(bank, feed, spec, s.solver) {
        Ok(sol) => sol,
        Err(e) => return failed(None, SolveStatus::Failed, Some(e.to_string())),
    };
    if !sol.converged() {
        let msg = format!(
            "no convergence after {} iterations (last dT {:.3e} K)",
            sol.iterations, sol.max_delta_t
        );
        return failed(Some(sol), SolveStatus::Failed, Some(msg));
    }
    let (sizing, error) = match size_column(&sol, spec, s.cost) {
        Ok(sz) => (sz, None),
        Err(SizingError::DrivingForce { partial, .. }) => {
            let msg = SizingError::DrivingForce {
                condenser: !(partial.dtlm_cnd > 0.0),
                reboiler: !(partial.dtlm_rbl > 0.0),
                partial: partial.clone(),
            }
            .to_string();
            (*partial, Some(msg))
        }
        Err(SizingError::NotConverged) => unreachable!("solution checked as converged"),
    };
    let ledger = penalties(&sol, sizing.dtlm_cnd, s.cost, s.penalties, s.condenser_rule);
    let costs = cost_report(&sizing, sol.q_cnd, sol.q_rbl, s.cost);
    ColumnEvaluation {
        spec: *spec,
        status: sol.status,
        solution: Some(sol),
        sizing: Some(sizing),
        costs: Some(costs),
        penalties: ledger,
        error,
    }
}
