//! The ε-constraint method: lexicographic payoff table, ε grids, front
//! generation and dominance filtering over [`ObjectiveTriple`]s.

mod front;
mod payoff;

use thiserror::Error;

pub use front::{
    epsilon_grid, generate_front, generate_front_with, label_for, CellOutcome, CellReport, EpsilonGrid, FrontDocument, FrontOptions, FrontSolution,
    GridMode, ParetoSet, ParetoSolution, RunReport, DEFAULT_GRID_SIZE, DUPLICATE_RESOLUTION, FRONT_SCHEMA_VERSION,
};
pub use payoff::{lexicographic_optimize, payoff_table, LexicographicRun, PayoffTable, LEXICOGRAPHIC_SLACK, ORDERS};

use crate::model::{ModelError, Objective, ObjectiveTriple};

#[derive(Debug, Error)]
pub enum ParetoError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no feasible plan exists while optimizing {0}")]
    Infeasible(Objective),
    #[error("{0} is unbounded")]
    Unbounded(Objective),
    #[error("grid size must be at least 1")]
    EmptyGrid,
}

/// True when `a` is at least as good as `b` in every objective and strictly
/// better in one.
pub fn dominates(a: &ObjectiveTriple, b: &ObjectiveTriple) -> bool {
    let no_worse = a.profit >= b.profit && a.waste <= b.waste && a.unmet <= b.unmet;
    let better = a.profit > b.profit || a.waste < b.waste || a.unmet < b.unmet;
    no_worse && better
}

/// Keeps the points no other point dominates. Points with identical triples
/// collapse to the first one; the input order is otherwise preserved.
pub fn filter_dominated<L: Clone>(points: &[(L, ObjectiveTriple)]) -> Vec<(L, ObjectiveTriple)> {
    let mut out: Vec<(L, ObjectiveTriple)> = Vec::new();
    for (i, (label, t)) in points.iter().enumerate() {
        let duplicate = points[..i].iter().any(|(_, u)| u == t);
        let dominated = points.iter().any(|(_, u)| dominates(u, t));
        if !duplicate && !dominated {
            out.push((label.clone(), *t));
        }
    }
    out
}
