use serde::{Deserialize, Serialize};

use super::{filter_dominated, ParetoError};
use crate::model::{optimize, Objective, ObjectiveSpec, ObjectiveTriple, PlanOutcome, PlannedSolution, SolutionPlan};
use crate::scenario::Scenario;
use crate::solver::MilpOptions;

/// Relative slack granted to an objective once its optimum is fixed as a bound.
pub const LEXICOGRAPHIC_SLACK: f64 = 1e-9;

/// The six orderings of the three objectives, in lexicographic order.
pub const ORDERS: [[Objective; 3]; 6] = {
    use Objective::*;
    [
        [Profit, Waste, Unmet],
        [Profit, Unmet, Waste],
        [Waste, Profit, Unmet],
        [Waste, Unmet, Profit],
        [Unmet, Profit, Waste],
        [Unmet, Waste, Profit],
    ]
};

#[derive(Debug, Clone)]
pub struct LexicographicRun {
    pub order: [Objective; 3],
    pub plan: SolutionPlan,
    pub objectives: ObjectiveTriple,
    /// Optimum of each stage, in `order`.
    pub stage_optima: [f64; 3],
    pub node_count: u64,
}

fn solve_stage(s: &Scenario, spec: &ObjectiveSpec, options: MilpOptions) -> Result<PlannedSolution, ParetoError> {
    match optimize(s, spec, options)? {
        PlanOutcome::Optimal(sol) => Ok(*sol),
        PlanOutcome::Infeasible { .. } => Err(ParetoError::Infeasible(spec.optimized)),
        PlanOutcome::Unbounded { .. } => Err(ParetoError::Unbounded(spec.optimized)),
    }
}

/// Bound value that keeps `objective` within the lexicographic slack of `optimum`.
fn fixed_bound(objective: Objective, optimum: f64) -> f64 {
    let slack = LEXICOGRAPHIC_SLACK * optimum.abs().max(1.0);
    if objective.is_maximized() {
        optimum - slack
    } else {
        optimum + slack
    }
}

/// Optimizes the objectives one after another, fixing each optimum as a
/// bound for the later stages.
pub fn lexicographic_optimize(
    s: &Scenario,
    order: [Objective; 3],
    options: MilpOptions,
) -> Result<LexicographicRun, ParetoError> {
    let mut fixed: Vec<(Objective, f64)> = Vec::with_capacity(2);
    let mut stage_optima = [0.0; 3];
    let mut node_count = 0;
    let mut last = None;
    for (stage, &objective) in order.iter().enumerate() {
        let spec = fixed.iter().fold(ObjectiveSpec::optimize(objective), |spec, &(o, b)| spec.with_bound(o, b));
        let sol = solve_stage(s, &spec, options)?;
        node_count += sol.node_count;
        stage_optima[stage] = sol.solver_objective;
        fixed.push((objective, fixed_bound(objective, sol.solver_objective)));
        last = Some(sol);
    }
    let sol = last.expect("three stages ran");
    Ok(LexicographicRun { order, plan: sol.plan, objectives: sol.objectives, stage_optima, node_count })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffTable {
    /// Row `i` is the triple of the first ordering that starts with objective `i`.
    pub entries: [ObjectiveTriple; 3],
    pub best: ObjectiveTriple,
    pub worst: ObjectiveTriple,
    /// All six runs, in [`ORDERS`] order.
    pub runs: Vec<([Objective; 3], ObjectiveTriple)>,
}

impl PayoffTable {
    /// Builds the table from the six runs, given in [`ORDERS`] order.
    pub fn from_runs(runs: Vec<([Objective; 3], ObjectiveTriple)>) -> PayoffTable {
        let entries = Objective::ALL.map(|o| {
            runs.iter().find(|(order, _)| order[0] == o).map(|(_, t)| *t).expect("every objective leads a run")
        });
        let mut best = ObjectiveTriple::default();
        for (i, o) in Objective::ALL.into_iter().enumerate() {
            best.set(o, entries[i].get(o));
            for (_, t) in &runs {
                if o.better(t.get(o), best.get(o)) {
                    best.set(o, t.get(o));
                }
            }
        }
        let labeled: Vec<(usize, ObjectiveTriple)> = runs.iter().map(|(_, t)| *t).enumerate().collect();
        let kept = filter_dominated(&labeled);
        let mut worst = best;
        for o in Objective::ALL {
            for (_, t) in &kept {
                if o.better(worst.get(o), t.get(o)) {
                    worst.set(o, t.get(o));
                }
            }
        }
        PayoffTable { entries, best, worst, runs }
    }
}

/// Runs all six lexicographic orderings and collects the objective ranges.
pub fn payoff_table(s: &Scenario, options: MilpOptions) -> Result<PayoffTable, ParetoError> {
    use rayon::prelude::*;
    let runs = ORDERS
        .par_iter()
        .map(|&order| lexicographic_optimize(s, order, options).map(|run| (order, run.objectives)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PayoffTable::from_runs(runs))
}
