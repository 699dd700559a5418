use std::collections::HashSet;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{payoff_table, ParetoError, PayoffTable};
use crate::model::{
    optimize, ModelError, Objective, ObjectiveSpec, ObjectiveTriple, PlanDocument, PlanOutcome, SolutionPlan,
};
use crate::scenario::Scenario;
use crate::solver::MilpOptions;

pub const FRONT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_GRID_SIZE: usize = 10;
/// Relative resolution at which front triples count as equal.
pub const DUPLICATE_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// The i-th bound of every constrained objective together: g solves.
    #[default]
    Diagonal,
    /// Every combination of bounds: g² solves.
    Full,
}

impl GridMode {
    pub fn name(self) -> &'static str {
        match self {
            GridMode::Diagonal => "diagonal",
            GridMode::Full => "full",
        }
    }
}

impl std::str::FromStr for GridMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diagonal" => Ok(GridMode::Diagonal),
            "full" => Ok(GridMode::Full),
            other => Err(format!("unknown grid mode {other:?} (expected diagonal or full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonGrid {
    pub grid_size: usize,
    pub mode: GridMode,
    pub optimized: Objective,
    /// The two objectives turned into bounds, in canonical order.
    pub constrained: [Objective; 2],
    /// Bound values per constrained objective, from worst to best.
    pub values: [Vec<f64>; 2],
}

fn spaced(worst: f64, best: f64, g: usize) -> Vec<f64> {
    if g == 1 {
        return vec![worst];
    }
    let last = (g - 1) as f64;
    (0..g).map(|k| if k + 1 == g { best } else { worst + (best - worst) * k as f64 / last }).collect()
}

impl EpsilonGrid {
    pub fn new(table: &PayoffTable, grid_size: usize, mode: GridMode, optimized: Objective) -> Result<Self, ParetoError> {
        if grid_size == 0 {
            return Err(ParetoError::EmptyGrid);
        }
        let mut others = Objective::ALL.into_iter().filter(|&o| o != optimized);
        let constrained = [others.next().expect("three objectives"), others.next().expect("three objectives")];
        let values = constrained.map(|o| spaced(table.worst.get(o), table.best.get(o), grid_size));
        Ok(EpsilonGrid { grid_size, mode, optimized, constrained, values })
    }

    /// Value indices of each cell, in grid index order.
    pub fn cells(&self) -> Vec<[usize; 2]> {
        let g = self.grid_size;
        match self.mode {
            GridMode::Diagonal => (0..g).map(|k| [k, k]).collect(),
            GridMode::Full => (0..g).flat_map(|i| (0..g).map(move |j| [i, j])).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self.mode {
            GridMode::Diagonal => self.grid_size,
            GridMode::Full => self.grid_size * self.grid_size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The solve specification of every cell, in grid index order.
    pub fn specs(&self) -> Vec<ObjectiveSpec> {
        self.cells()
            .into_iter()
            .map(|[i, j]| {
                ObjectiveSpec::optimize(self.optimized)
                    .with_bound(self.constrained[0], self.values[0][i])
                    .with_bound(self.constrained[1], self.values[1][j])
            })
            .collect()
    }
}

/// Grid over the ranges of `table` with profit as the optimized objective.
pub fn epsilon_grid(table: &PayoffTable, grid_size: usize, mode: GridMode) -> Result<EpsilonGrid, ParetoError> {
    EpsilonGrid::new(table, grid_size, mode, Objective::Profit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrontOptions {
    pub grid_size: usize,
    pub mode: GridMode,
    pub optimized: Objective,
    pub milp: MilpOptions,
}

impl Default for FrontOptions {
    fn default() -> Self {
        FrontOptions {
            grid_size: DEFAULT_GRID_SIZE,
            mode: GridMode::Diagonal,
            optimized: Objective::Profit,
            milp: MilpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Optimal { objectives: ObjectiveTriple },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub index: usize,
    pub spec: ObjectiveSpec,
    #[serde(flatten)]
    pub outcome: CellOutcome,
    pub node_count: u64,
    /// Label of the front solution this cell produced, if it survived filtering.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub payoff: PayoffTable,
    pub grid: EpsilonGrid,
    pub cells: Vec<CellReport>,
    /// Optimal cells whose triple repeated an earlier cell.
    pub duplicates: usize,
    /// Optimal cells dropped because another optimum dominates them.
    pub dominated: usize,
}

impl RunReport {
    pub fn infeasible_cells(&self) -> impl Iterator<Item = &CellReport> {
        self.cells.iter().filter(|c| c.outcome == CellOutcome::Infeasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSolution {
    pub label: String,
    pub plan: SolutionPlan,
    pub objectives: ObjectiveTriple,
    /// Grid index of the cell that produced the solution.
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSet {
    pub solutions: Vec<ParetoSolution>,
    pub report: RunReport,
}

impl ParetoSet {
    pub fn get(&self, label: &str) -> Option<&ParetoSolution> {
        self.solutions.iter().find(|s| s.label == label)
    }

    pub fn labeled_triples(&self) -> Vec<(String, ObjectiveTriple)> {
        self.solutions.iter().map(|s| (s.label.clone(), s.objectives)).collect()
    }
}

/// `A`..`Z`, then `AA`, `AB`, … for the solution at `index`.
pub fn label_for(index: usize) -> String {
    let mut n = index + 1;
    let mut out = Vec::new();
    while n > 0 {
        let r = (n - 1) % 26;
        out.push(b'A' + r as u8);
        n = (n - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii letters")
}

type Key = [i64; 3];

fn quantize(triples: &[ObjectiveTriple]) -> Vec<Key> {
    let scale = Objective::ALL.map(|o| triples.iter().map(|t| t.get(o).abs()).fold(1.0_f64, f64::max));
    triples
        .iter()
        .map(|t| {
            let mut k = [0i64; 3];
            for (i, o) in Objective::ALL.into_iter().enumerate() {
                k[i] = (t.get(o) / (DUPLICATE_RESOLUTION * scale[i])).round() as i64;
            }
            k
        })
        .collect()
}

fn key_dominates(a: &Key, b: &Key) -> bool {
    // Profit is maximized, the other two minimized.
    let no_worse = a[0] >= b[0] && a[1] <= b[1] && a[2] <= b[2];
    no_worse && a != b
}

/// Solves every ε-cell over the payoff ranges of `s` and keeps the distinct
/// non-dominated optima, labeled by decreasing profit.
pub fn generate_front(s: &Scenario, options: &FrontOptions) -> Result<ParetoSet, ParetoError> {
    let payoff = payoff_table(s, options.milp)?;
    generate_front_with(s, payoff, options)
}

/// As [`generate_front`], reusing an already computed payoff table.
pub fn generate_front_with(s: &Scenario, payoff: PayoffTable, options: &FrontOptions) -> Result<ParetoSet, ParetoError> {
    let grid = EpsilonGrid::new(&payoff, options.grid_size, options.mode, options.optimized)?;
    let specs = grid.specs();
    let solved: Vec<PlanOutcome> = specs
        .par_iter()
        .map(|spec| optimize(s, spec, options.milp))
        .collect::<Result<Vec<_>, ModelError>>()?;

    let mut cells = Vec::with_capacity(specs.len());
    let mut optima = Vec::new();
    for (index, (spec, outcome)) in specs.iter().zip(solved).enumerate() {
        let (outcome, node_count) = match outcome {
            PlanOutcome::Optimal(sol) => {
                let report = (CellOutcome::Optimal { objectives: sol.objectives }, sol.node_count);
                optima.push((index, *sol));
                report
            }
            PlanOutcome::Infeasible { node_count } => {
                info!("grid cell {index} is infeasible: {spec:?}");
                (CellOutcome::Infeasible, node_count)
            }
            PlanOutcome::Unbounded { node_count } => {
                info!("grid cell {index} is unbounded: {spec:?}");
                (CellOutcome::Unbounded, node_count)
            }
        };
        cells.push(CellReport { index, spec: *spec, outcome, node_count, label: None });
    }

    let triples: Vec<ObjectiveTriple> = optima.iter().map(|(_, sol)| sol.objectives).collect();
    let keys = quantize(&triples);
    let mut seen = HashSet::new();
    let (mut duplicates, mut dominated) = (0, 0);
    let mut kept = Vec::new();
    for (i, key) in keys.iter().enumerate() {
        if !seen.insert(*key) {
            duplicates += 1;
        } else if keys.iter().any(|other| key_dominates(other, key)) {
            dominated += 1;
        } else {
            kept.push(i);
        }
    }
    kept.sort_by(|&a, &b| triples[b].profit.total_cmp(&triples[a].profit).then(optima[a].0.cmp(&optima[b].0)));

    let mut solutions = Vec::with_capacity(kept.len());
    let mut taken: Vec<Option<(usize, crate::model::PlannedSolution)>> = optima.into_iter().map(Some).collect();
    for (rank, i) in kept.into_iter().enumerate() {
        let (cell, sol) = taken[i].take().expect("each optimum is kept once");
        let label = label_for(rank);
        cells[cell].label = Some(label.clone());
        solutions.push(ParetoSolution { label, plan: sol.plan, objectives: sol.objectives, cell });
    }
    Ok(ParetoSet { solutions, report: RunReport { payoff, grid, cells, duplicates, dominated } })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSolution {
    pub label: String,
    pub objectives: ObjectiveTriple,
    pub plan: PlanDocument,
}

/// Exported front: one record per solution with its full plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontDocument {
    pub schema_version: u32,
    pub optimized: Objective,
    pub grid_size: usize,
    pub mode: GridMode,
    pub solutions: Vec<FrontSolution>,
}

impl FrontDocument {
    pub fn from_set(s: &Scenario, set: &ParetoSet) -> Result<Self, ModelError> {
        let solutions = set
            .solutions
            .iter()
            .map(|sol| {
                Ok(FrontSolution {
                    label: sol.label.clone(),
                    objectives: sol.objectives,
                    plan: PlanDocument::from_plan(s, &sol.plan)?,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(FrontDocument {
            schema_version: FRONT_SCHEMA_VERSION,
            optimized: set.report.grid.optimized,
            grid_size: set.report.grid.grid_size,
            mode: set.report.grid.mode,
            solutions,
        })
    }

    pub fn get(&self, label: &str) -> Option<&FrontSolution> {
        self.solutions.iter().find(|s| s.label == label)
    }

    pub fn labels(&self) -> Vec<String> {
        self.solutions.iter().map(|s| s.label.clone()).collect()
    }
}
