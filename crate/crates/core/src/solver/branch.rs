use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::simplex::{Basis, LpData};
use super::{
    MixedProgram, ObjectiveSense, SolveOutcome, SolveStatus, SolverError, INTEGRALITY_TOLERANCE, RELATIVE_GAP,
};

pub const DEFAULT_NODE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MilpOptions {
    /// Maximum number of LP relaxations before giving up.
    pub node_limit: u64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions { node_limit: DEFAULT_NODE_LIMIT }
    }
}

pub fn solve_milp(program: &MixedProgram) -> Result<SolveOutcome, SolverError> {
    solve_milp_with(program, MilpOptions::default())
}

/// Best-bound branch-and-bound over the binary columns.
///
/// Branches on the most fractional binary (lowest column index on ties). An
/// unbounded root relaxation means every integer-feasible point is unbounded
/// too, since binaries are bounded and cannot carry a recession direction; in
/// that case the search only has to decide integer feasibility.
///
/// Each child relaxation starts from the optimal basis of its parent.
pub fn solve_milp_with(program: &MixedProgram, options: MilpOptions) -> Result<SolveOutcome, SolverError> {
    program.validate()?;
    let data = LpData::new(program);
    let mut search = Search::new(program, &data, options);
    let root_bounds: Vec<(f64, f64)> = program.columns.iter().map(|c| (c.lower, c.upper)).collect();
    let (root, root_basis) = search.relax(&root_bounds, None)?;
    match root.status {
        SolveStatus::Infeasible => Ok(SolveOutcome::infeasible(search.nodes)),
        SolveStatus::Unbounded => {
            let mut feasibility = program.clone();
            feasibility.objective.clear();
            let feasibility_data = LpData::new(&feasibility);
            let mut inner = Search::new(&feasibility, &feasibility_data, options);
            inner.nodes = search.nodes;
            let found = inner.run(root_bounds)?;
            Ok(match found {
                Some(_) => SolveOutcome::unbounded(inner.nodes),
                None => SolveOutcome::infeasible(inner.nodes),
            })
        }
        SolveStatus::Optimal => {
            let Some(incumbent) = search.run_from(root_bounds, root, root_basis)? else {
                return Ok(SolveOutcome::infeasible(search.nodes));
            };
            // Re-solve with every binary pinned so the reported point is exactly integral.
            let mut pinned = incumbent.bounds;
            for &j in &search.binaries {
                let v = pinned[j].0;
                pinned[j] = (v, v);
            }
            let (mut outcome, _) = search.relax(&pinned, incumbent.basis.as_ref())?;
            outcome.node_count = search.nodes;
            if outcome.status != SolveStatus::Optimal {
                // Should not happen: the pinned program contains the incumbent.
                return Ok(SolveOutcome::infeasible(search.nodes));
            }
            Ok(outcome)
        }
    }
}

struct Node {
    bound: f64,
    /// `bound` quantized to the search's gap resolution, so that nodes whose
    /// bounds differ only by rounding compare equal.
    key: i64,
    depth: u32,
    id: u64,
    bounds: Vec<(f64, f64)>,
    assignment: Vec<f64>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap: larger bound first; on equal bounds the deeper node, then
    // the newer one, so plateaus are dived rather than searched breadth-first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| self.depth.cmp(&other.depth))
            .then_with(|| self.id.cmp(&other.id))
    }
}

struct Incumbent {
    /// Node bounds with the binaries fixed at their rounded values.
    bounds: Vec<(f64, f64)>,
    value: f64,
    basis: Option<Basis>,
}

struct Search<'a> {
    data: &'a LpData<'a>,
    binaries: Vec<usize>,
    /// +1 to maximize, -1 to minimize: nodes are compared on `sign * objective`.
    sign: f64,
    nodes: u64,
    next_id: u64,
    limit: u64,
    /// Width of one bound quantum, fixed from the root bound.
    quantum: f64,
}

impl<'a> Search<'a> {
    fn new(program: &'a MixedProgram, data: &'a LpData<'a>, options: MilpOptions) -> Self {
        let sign = match program.sense {
            ObjectiveSense::Maximize => 1.0,
            ObjectiveSense::Minimize => -1.0,
        };
        Search { data, binaries: program.binary_columns(), sign, nodes: 0, next_id: 0, limit: options.node_limit, quantum: RELATIVE_GAP }
    }

    fn relax(
        &mut self,
        bounds: &[(f64, f64)],
        warm: Option<&Basis>,
    ) -> Result<(SolveOutcome, Option<Basis>), SolverError> {
        if self.nodes >= self.limit {
            return Err(SolverError::NodeLimit { limit: self.limit });
        }
        self.nodes += 1;
        self.data.solve(bounds, warm)
    }

    fn most_fractional(&self, assignment: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.binaries {
            let v = assignment[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac <= INTEGRALITY_TOLERANCE {
                continue;
            }
            if best.map_or(true, |(_, f)| frac > f) {
                best = Some((j, frac));
            }
        }
        best.map(|(j, _)| j)
    }

    fn run(&mut self, root_bounds: Vec<(f64, f64)>) -> Result<Option<Incumbent>, SolverError> {
        let (root, basis) = self.relax(&root_bounds, None)?;
        if root.status != SolveStatus::Optimal {
            return Ok(None);
        }
        self.run_from(root_bounds, root, basis)
    }

    fn run_from(
        &mut self,
        root_bounds: Vec<(f64, f64)>,
        root: SolveOutcome,
        root_basis: Option<Basis>,
    ) -> Result<Option<Incumbent>, SolverError> {
        let mut heap = BinaryHeap::new();
        let mut incumbent: Option<Incumbent> = None;
        if let Some(v) = root.objective_value {
            self.quantum = RELATIVE_GAP * v.abs().max(1.0);
        }
        self.consider(root_bounds, root, root_basis, 0, &mut heap, &mut incumbent);

        while let Some(node) = heap.pop() {
            if let Some(best) = &incumbent {
                if !improves(node.bound, best.value) {
                    break;
                }
            }
            let Some(j) = self.most_fractional(&node.assignment) else {
                continue;
            };
            let (lower, upper) = node.bounds[j];
            for value in [0.0, 1.0] {
                let mut child = node.bounds.clone();
                child[j] = (lower.max(value), upper.min(value));
                let (outcome, basis) = self.relax(&child, node.basis.as_ref())?;
                if outcome.status == SolveStatus::Optimal {
                    self.consider(child, outcome, basis, node.depth + 1, &mut heap, &mut incumbent);
                }
            }
        }
        Ok(incumbent)
    }

    fn consider(
        &mut self,
        bounds: Vec<(f64, f64)>,
        outcome: SolveOutcome,
        basis: Option<Basis>,
        depth: u32,
        heap: &mut BinaryHeap<Node>,
        incumbent: &mut Option<Incumbent>,
    ) {
        let Some(value) = outcome.objective_value else { return };
        let Some(assignment) = outcome.assignment else { return };
        let bound = self.sign * value;
        if let Some(best) = incumbent {
            if !improves(bound, best.value) {
                return;
            }
        }
        if self.most_fractional(&assignment).is_none() {
            let mut fixed = bounds;
            for &j in &self.binaries {
                let v = assignment[j].round();
                fixed[j] = (v, v);
            }
            *incumbent = Some(Incumbent { bounds: fixed, value: bound, basis });
        } else {
            let id = self.next_id;
            self.next_id += 1;
            let key = (bound / self.quantum).round() as i64;
            heap.push(Node { bound, key, depth, id, bounds, assignment, basis });
        }
    }
}

fn improves(bound: f64, incumbent: f64) -> bool {
    bound > incumbent + RELATIVE_GAP * incumbent.abs().max(1.0)
}
