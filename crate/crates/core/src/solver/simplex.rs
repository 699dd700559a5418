//! Bounded revised simplex.
//!
//! Every row `i` gets a slack `s_i = a_i x` whose bounds encode the row sense,
//! so the system is `A x - s = 0` with bounds on every variable. The primal
//! method minimizes the sum of bound violations while any basic variable is
//! infeasible and the true objective afterwards; it starts from any basis.
//! The dual method is used when a warm-start basis is still dual feasible,
//! which is the normal situation after a branching bound change.
//!
//! Primal pricing is Dantzig's largest reduced cost with a Harris ratio test
//! until a streak of degenerate pivots, then Bland's rule until the next pivot
//! that makes progress.

use super::factor::Factor;
use super::{MixedProgram, ObjectiveSense, RowSense, SolveOutcome, SolveStatus, SolverError};

const DEGENERATE_STREAK_FOR_BLAND: usize = 50;
/// The dual pass hands over to the primal after this many pivots in a row
/// without relative progress of the objective.
const DUAL_STALL: usize = 500;
const REFACTOR_INTERVAL: usize = 64;
const PRIMAL_TOLERANCE: f64 = 1e-9;
const DUAL_TOLERANCE: f64 = 1e-9;
/// Residual violation tolerated once a feasible basis has been reached, so
/// rounding noise does not restart phase one.
const POLISH_TOLERANCE: f64 = 1e-7;
/// Tableau entries at or below this magnitude are treated as zero.
const ZERO_TOLERANCE: f64 = 1e-9;
/// Smallest dual pivot accepted, relative to the largest entry of its row.
const DUAL_PIVOT_TOLERANCE: f64 = 1e-7;

/// Solves the continuous relaxation of `program` (binaries relaxed to their bounds).
pub fn solve_lp(program: &MixedProgram) -> Result<SolveOutcome, SolverError> {
    program.validate()?;
    let bounds: Vec<(f64, f64)> = program.columns.iter().map(|c| (c.lower, c.upper)).collect();
    solve_with_bounds(program, &bounds)
}

/// Solves the relaxation with column bounds replaced by `bounds`, from a
/// cold start. The program must already be validated.
pub(crate) fn solve_with_bounds(program: &MixedProgram, bounds: &[(f64, f64)]) -> Result<SolveOutcome, SolverError> {
    Ok(LpData::new(program).solve(bounds, None)?.0)
}

/// Constraint matrix `[A | -I]` in compressed columns, after scaling.
pub(crate) struct Matrix {
    pub(crate) rows: usize,
    pub(crate) structural: usize,
    start: Vec<usize>,
    index: Vec<usize>,
    value: Vec<f64>,
}

impl Matrix {
    /// Nonzeros of column `var`; slack columns are `-e_i`.
    pub(crate) fn column(&self, var: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (structural, slack) = if var < self.structural {
            (self.start[var]..self.start[var + 1], None)
        } else {
            (0..0, Some((var - self.structural, -1.0)))
        };
        structural.map(|k| (self.index[k], self.value[k])).chain(slack)
    }

    fn dot(&self, var: usize, y: &[f64]) -> f64 {
        if var < self.structural {
            (self.start[var]..self.start[var + 1]).map(|k| self.value[k] * y[self.index[k]]).sum()
        } else {
            -y[var - self.structural]
        }
    }

    fn dense_column(&self, var: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.rows];
        for (i, v) in self.column(var) {
            a[i] = v;
        }
        a
    }
}

fn power_of_two_near(x: f64) -> f64 {
    if x > 0.0 && x.is_finite() {
        2f64.powi(x.log2().round() as i32)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

/// A simplex basis that can seed a later solve of the same program with
/// different column bounds.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Basis {
    states: Vec<State>,
    order: Vec<usize>,
}

/// Scaled program data shared by every solve with different bounds.
pub(crate) struct LpData<'a> {
    pub(crate) program: &'a MixedProgram,
    matrix: Matrix,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    cost: Vec<f64>,
    cost_scale: f64,
}

impl<'a> LpData<'a> {
    pub(crate) fn new(program: &'a MixedProgram) -> Self {
        let m = program.rows.len();
        let n = program.columns.len();
        let mut row_max = vec![0.0_f64; m];
        for (i, row) in program.rows.iter().enumerate() {
            for &(_, a) in &row.coefficients {
                row_max[i] = row_max[i].max(a.abs());
            }
        }
        let row_scale: Vec<f64> = row_max.iter().map(|&r| 1.0 / power_of_two_near(r)).collect();
        let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in program.rows.iter().enumerate() {
            for &(j, a) in &row.coefficients {
                if a != 0.0 {
                    entries[j].push((i, a * row_scale[i]));
                }
            }
        }
        let mut col_scale = vec![1.0; n];
        let mut start = Vec::with_capacity(n + 1);
        let mut index = Vec::new();
        let mut value = Vec::new();
        for (j, col) in entries.iter_mut().enumerate() {
            col.sort_by_key(|&(i, _)| i);
            // Merge repeated rows within a column.
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for &(i, a) in col.iter() {
                match merged.last_mut() {
                    Some((r, v)) if *r == i => *v += a,
                    _ => merged.push((i, a)),
                }
            }
            merged.retain(|&(_, a)| a != 0.0);
            let max = merged.iter().fold(0.0_f64, |acc, &(_, a)| acc.max(a.abs()));
            col_scale[j] = 1.0 / power_of_two_near(max);
            start.push(index.len());
            for (i, a) in merged {
                index.push(i);
                value.push(a * col_scale[j]);
            }
        }
        start.push(index.len());

        let direction = match program.sense {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        };
        let mut cost = vec![0.0; n + m];
        for &(j, c) in &program.objective {
            cost[j] += direction * c * col_scale[j];
        }
        let cost_scale = cost.iter().fold(1.0_f64, |acc, c| acc.max(c.abs()));
        LpData {
            program,
            matrix: Matrix { rows: m, structural: n, start, index, value },
            row_scale,
            col_scale,
            cost,
            cost_scale,
        }
    }

    /// Solves with column `bounds`, optionally starting from `warm`.
    /// Returns the final basis whenever the solve reached optimality.
    pub(crate) fn solve(
        &self,
        bounds: &[(f64, f64)],
        warm: Option<&Basis>,
    ) -> Result<(SolveOutcome, Option<Basis>), SolverError> {
        debug_assert_eq!(bounds.len(), self.program.columns.len());
        if bounds.iter().any(|&(l, u)| l > u) {
            return Ok((SolveOutcome::infeasible(1), None));
        }
        let n = self.matrix.structural;
        let m = self.matrix.rows;
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        for (j, &(l, u)) in bounds.iter().enumerate() {
            lower.push(l / self.col_scale[j]);
            upper.push(u / self.col_scale[j]);
        }
        for (i, row) in self.program.rows.iter().enumerate() {
            let b = row.rhs * self.row_scale[i];
            let (l, u) = match row.sense {
                RowSense::Le => (f64::NEG_INFINITY, b),
                RowSense::Ge => (b, f64::INFINITY),
                RowSense::Eq => (b, b),
            };
            lower.push(l);
            upper.push(u);
        }

        let mut engine = Engine::new(self, lower.clone(), upper.clone(), warm);
        let status = match engine.run() {
            Err(SolverError::IterationLimit { .. }) if warm.is_some() => {
                engine = Engine::new(self, lower, upper, None);
                engine.run()?
            }
            other => other?,
        };
        Ok(match status {
            End::Infeasible => (SolveOutcome::infeasible(1), None),
            End::Unbounded => (SolveOutcome::unbounded(1), None),
            End::Optimal => {
                let assignment: Vec<f64> = (0..n)
                    .map(|j| {
                        let v = engine.x[j] * self.col_scale[j];
                        let (l, u) = bounds[j];
                        if v < l && v > l - 1e-9 * (1.0 + l.abs()) {
                            l
                        } else if v > u && v < u + 1e-9 * (1.0 + u.abs()) {
                            u
                        } else {
                            v
                        }
                    })
                    .collect();
                let objective_value = self.program.objective_value(&assignment);
                let outcome = SolveOutcome {
                    status: SolveStatus::Optimal,
                    assignment: Some(assignment),
                    objective_value: Some(objective_value),
                    node_count: 1,
                };
                (outcome, Some(Basis { states: engine.state, order: engine.basis }))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Optimal,
    Infeasible,
    Unbounded,
}

struct Engine<'d, 'a> {
    data: &'d LpData<'a>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<State>,
    /// Variable held at each basis position.
    basis: Vec<usize>,
    x: Vec<f64>,
    factor: Option<Factor>,
    iterations: usize,
    limit: usize,
}

impl<'d, 'a> Engine<'d, 'a> {
    fn new(data: &'d LpData<'a>, lower: Vec<f64>, upper: Vec<f64>, warm: Option<&Basis>) -> Self {
        let n = data.matrix.structural;
        let m = data.matrix.rows;
        let total = n + m;
        let (state, basis) = match warm {
            Some(b) if b.states.len() == total && b.order.len() == m => (b.states.clone(), b.order.clone()),
            _ => Self::slack_basis(n, m),
        };
        let mut engine = Engine {
            data,
            lower,
            upper,
            state,
            basis,
            x: vec![0.0; total],
            factor: None,
            iterations: 0,
            limit: 10_000 + 100 * (m + total),
        };
        engine.place_nonbasics();
        engine
    }

    fn slack_basis(n: usize, m: usize) -> (Vec<State>, Vec<usize>) {
        let mut state = vec![State::Lower; n + m];
        for s in &mut state[n..] {
            *s = State::Basic;
        }
        (state, (n..n + m).collect())
    }

    fn total(&self) -> usize {
        self.x.len()
    }

    /// Puts every nonbasic variable on a finite bound consistent with its state.
    fn place_nonbasics(&mut self) {
        for j in 0..self.total() {
            if self.state[j] == State::Basic {
                continue;
            }
            let (l, u) = (self.lower[j], self.upper[j]);
            let state = match self.state[j] {
                State::Upper if u.is_finite() => State::Upper,
                _ if l.is_finite() => State::Lower,
                _ if u.is_finite() => State::Upper,
                _ => State::Zero,
            };
            self.state[j] = state;
            self.x[j] = match state {
                State::Lower => l,
                State::Upper => u,
                _ => 0.0,
            };
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }

    /// Refactors the basis and recomputes the basic values. A singular basis
    /// is replaced by the all-slack basis.
    fn refactor(&mut self) {
        let matrix = &self.data.matrix;
        self.factor = Factor::new(matrix, &self.basis);
        if self.factor.is_none() {
            let n = matrix.structural;
            for j in 0..n {
                if self.state[j] == State::Basic {
                    self.state[j] = State::Lower;
                }
            }
            for j in n..self.total() {
                self.state[j] = State::Basic;
            }
            self.basis = (n..self.total()).collect();
            self.place_nonbasics();
            self.factor = Factor::new(matrix, &self.basis);
        }
        let mut r = vec![0.0; matrix.rows];
        for j in 0..self.total() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for (i, v) in matrix.column(j) {
                    r[i] -= v * self.x[j];
                }
            }
        }
        let xb = self.factor().ftran(matrix, &r);
        for (p, &var) in self.basis.iter().enumerate() {
            self.x[var] = xb[p];
        }
    }

    fn factor(&self) -> &Factor {
        self.factor.as_ref().expect("slack basis always factors")
    }

    fn tolerance(&self, bound: f64) -> f64 {
        PRIMAL_TOLERANCE * (1.0 + bound.abs())
    }

    /// Signed bound violation of a variable: negative below, positive above.
    fn violation(&self, j: usize) -> f64 {
        let (x, l, u) = (self.x[j], self.lower[j], self.upper[j]);
        if x < l - self.tolerance(l) {
            x - l
        } else if x > u + self.tolerance(u) {
            x - u
        } else {
            0.0
        }
    }

    fn within_polish(&self, j: usize) -> bool {
        let (x, l, u) = (self.x[j], self.lower[j], self.upper[j]);
        x >= l - POLISH_TOLERANCE * (1.0 + l.abs()) && x <= u + POLISH_TOLERANCE * (1.0 + u.abs())
    }

    fn run(&mut self) -> Result<End, SolverError> {
        self.refactor();
        let dual_tol = DUAL_TOLERANCE * self.data.cost_scale;
        let infeasible = self.basis.iter().any(|&v| self.violation(v) != 0.0);
        if infeasible {
            let d = self.reduced_costs(false);
            let dual_feasible = (0..self.total()).all(|j| self.dual_ok(j, d[j], dual_tol));
            if dual_feasible {
                self.dual(d)?;
            }
        }
        self.primal()
    }

    fn dual_ok(&self, j: usize, d: f64, tol: f64) -> bool {
        if self.is_fixed(j) {
            return true;
        }
        match self.state[j] {
            State::Basic => true,
            State::Lower => d >= -tol,
            State::Upper => d <= tol,
            State::Zero => d.abs() <= tol,
        }
    }

    /// Reduced costs for all variables; `phase_one` prices the sum of
    /// infeasibilities instead of the objective.
    fn reduced_costs(&self, phase_one: bool) -> Vec<f64> {
        let matrix = &self.data.matrix;
        let cb: Vec<f64> = self
            .basis
            .iter()
            .map(|&v| {
                if phase_one {
                    let viol = self.violation(v);
                    if viol < 0.0 {
                        -1.0
                    } else if viol > 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.data.cost[v]
                }
            })
            .collect();
        let y = self.factor().btran(matrix, &cb);
        (0..self.total())
            .map(|j| {
                if self.state[j] == State::Basic {
                    0.0
                } else {
                    let c = if phase_one { 0.0 } else { self.data.cost[j] };
                    c - matrix.dot(j, &y)
                }
            })
            .collect()
    }

    /// Counts an iteration; returns true when the basis was just refactored.
    fn tick(&mut self) -> Result<bool, SolverError> {
        self.iterations += 1;
        if self.iterations > self.limit {
            return Err(SolverError::IterationLimit { limit: self.limit });
        }
        if self.factor().eta_count() >= REFACTOR_INTERVAL {
            self.refactor();
            return Ok(true);
        }
        Ok(false)
    }

    fn exchange(&mut self, position: usize, entering: usize, alpha: &[f64], leaving_state: State) {
        let leaving = self.basis[position];
        self.state[leaving] = leaving_state;
        self.x[leaving] = match leaving_state {
            State::Lower => self.lower[leaving],
            State::Upper => self.upper[leaving],
            _ => 0.0,
        };
        self.state[entering] = State::Basic;
        self.basis[position] = entering;
        self.factor.as_mut().expect("factored").update(position, alpha);
    }

    fn primal(&mut self) -> Result<End, SolverError> {
        let matrix = &self.data.matrix;
        let dual_tol = DUAL_TOLERANCE * self.data.cost_scale;
        let mut degenerate = 0usize;
        let mut confirmed = false;
        let mut feasible_once = false;
        loop {
            self.tick()?;
            let phase_one = self.basis.iter().any(|&v| self.violation(v) != 0.0)
                && !(feasible_once && self.basis.iter().all(|&v| self.within_polish(v)));
            let d = self.reduced_costs(phase_one);
            feasible_once |= !phase_one;
            let tol = if phase_one { DUAL_TOLERANCE } else { dual_tol };
            let bland = degenerate >= DEGENERATE_STREAK_FOR_BLAND;

            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.total() {
                if self.state[j] == State::Basic || self.is_fixed(j) {
                    continue;
                }
                let score = match self.state[j] {
                    State::Lower => -d[j],
                    State::Upper => d[j],
                    _ => d[j].abs(),
                };
                if score <= tol {
                    continue;
                }
                if bland {
                    entering = Some((j, score));
                    break;
                }
                if entering.map_or(true, |(_, s)| score > s) {
                    entering = Some((j, score));
                }
            }
            let Some((q, _)) = entering else {
                if confirmed || self.factor().eta_count() == 0 {
                    return Ok(if phase_one { End::Infeasible } else { End::Optimal });
                }
                self.refactor();
                confirmed = true;
                continue;
            };
            confirmed = false;
            let dir = match self.state[q] {
                State::Lower => 1.0,
                State::Upper => -1.0,
                _ => -d[q].signum(),
            };
            let alpha = self.factor().ftran(matrix, &matrix.dense_column(q));
            // Candidate limits: (position, exact step, Harris step, leaving state).
            let mut candidates: Vec<(usize, f64, f64, State)> = Vec::new();
            for (p, &a) in alpha.iter().enumerate() {
                if a.abs() <= ZERO_TOLERANCE {
                    continue;
                }
                let b = self.basis[p];
                let rate = -dir * a;
                let (xb, l, u) = (self.x[b], self.lower[b], self.upper[b]);
                let target = if !phase_one {
                    // Values slightly past a bound block at once.
                    if rate < 0.0 {
                        l.is_finite().then_some((l, State::Lower))
                    } else {
                        u.is_finite().then_some((u, State::Upper))
                    }
                } else if rate < 0.0 {
                    if xb > u + self.tolerance(u) {
                        Some((u, State::Upper))
                    } else if xb < l - self.tolerance(l) || !l.is_finite() {
                        None
                    } else {
                        Some((l, State::Lower))
                    }
                } else if xb < l - self.tolerance(l) {
                    Some((l, State::Lower))
                } else if xb > u + self.tolerance(u) || !u.is_finite() {
                    None
                } else {
                    Some((u, State::Upper))
                };
                if let Some((bound, leaving_state)) = target {
                    // A value already past its bound (within tolerance) allows no step.
                    let distance = if rate < 0.0 { xb - bound } else { bound - xb }.max(0.0);
                    let exact = distance / rate.abs();
                    let harris = (distance + self.tolerance(bound)) / rate.abs();
                    candidates.push((p, exact, harris, leaving_state));
                }
            }
            let flip = self.upper[q] - self.lower[q];

            let chosen = if bland {
                let mut best: Option<(usize, f64, State)> = None;
                for &(p, exact, _, st) in &candidates {
                    let replace = match best {
                        None => true,
                        Some((bp, bs, _)) => {
                            let tie = 1e-12 * bs.max(1.0);
                            exact < bs - tie || (exact <= bs + tie && self.basis[p] < self.basis[bp])
                        }
                    };
                    if replace {
                        best = Some((p, exact, st));
                    }
                }
                best
            } else {
                let theta = candidates.iter().fold(f64::INFINITY, |acc, c| acc.min(c.2));
                let mut best: Option<(usize, f64, State)> = None;
                let mut best_pivot = 0.0;
                for &(p, exact, _, st) in &candidates {
                    if exact <= theta && alpha[p].abs() > best_pivot {
                        best = Some((p, exact, st));
                        best_pivot = alpha[p].abs();
                    }
                }
                best
            };

            let exchange = match chosen {
                Some((_, s, _)) => !(flip <= s),
                None if flip.is_finite() => false,
                None => {
                    if phase_one {
                        // Cannot happen in exact arithmetic; refresh and retry.
                        self.refactor();
                        continue;
                    }
                    return Ok(End::Unbounded);
                }
            };
            let step = match chosen {
                Some((_, s, _)) if exchange => s,
                _ => flip,
            };
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for (p, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let b = self.basis[p];
                    self.x[b] -= dir * step * a;
                }
            }
            if exchange {
                let (p, _, st) = chosen.expect("exchange has a leaving row");
                self.x[q] += dir * step;
                self.exchange(p, q, &alpha, st);
            } else {
                let to_upper = dir > 0.0;
                self.state[q] = if to_upper { State::Upper } else { State::Lower };
                self.x[q] = if to_upper { self.upper[q] } else { self.lower[q] };
            }
        }
    }

    /// Dual simplex from a dual feasible basis. Stops when primal feasible,
    /// when a row proves infeasibility or after a long degenerate stall; the
    /// caller's primal pass finishes from there.
    fn dual(&mut self, mut d: Vec<f64>) -> Result<(), SolverError> {
        let matrix = &self.data.matrix;
        let dual_tol = DUAL_TOLERANCE * self.data.cost_scale;
        let mut degenerate = 0usize;
        let mut objective: f64 = (0..self.total()).map(|j| self.data.cost[j] * self.x[j]).sum();
        let mut stalled = 0usize;
        loop {
            if self.tick()? {
                d = self.reduced_costs(false);
            }
            if stalled >= DUAL_STALL {
                return Ok(());
            }
            let bland = degenerate >= DEGENERATE_STREAK_FOR_BLAND;
            let mut leaving: Option<(usize, f64)> = None;
            for (p, &v) in self.basis.iter().enumerate() {
                let viol = self.violation(v);
                if viol == 0.0 {
                    continue;
                }
                let replace = match leaving {
                    None => true,
                    Some((bp, bv)) if bland => v < self.basis[bp] && bv != 0.0,
                    Some((_, bv)) => viol.abs() > bv.abs(),
                };
                if replace {
                    leaving = Some((p, viol));
                }
            }
            let Some((r, viol)) = leaving else { return Ok(()) };
            let b = self.basis[r];
            let mut e = vec![0.0; matrix.rows];
            e[r] = 1.0;
            let rho = self.factor().btran(matrix, &e);
            let row: Vec<f64> = (0..self.total())
                .map(|j| if self.state[j] == State::Basic || self.is_fixed(j) { 0.0 } else { matrix.dot(j, &rho) })
                .collect();
            let row_max = row.iter().fold(0.0_f64, |acc, a| acc.max(a.abs()));
            let pivot_tol = (DUAL_PIVOT_TOLERANCE * row_max).max(ZERO_TOLERANCE);
            let below = viol < 0.0;

            let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
            for (j, &a) in row.iter().enumerate() {
                if !(a.abs() > pivot_tol) {
                    continue;
                }
                let eligible = match self.state[j] {
                    State::Lower => (a < 0.0) == below,
                    State::Upper => (a > 0.0) == below,
                    State::Zero => true,
                    State::Basic => false,
                };
                if eligible {
                    // Distance of d_j from losing dual feasibility; a slightly
                    // wrong sign counts as zero.
                    let room = match self.state[j] {
                        State::Lower => d[j].max(0.0),
                        State::Upper => (-d[j]).max(0.0),
                        _ => 0.0,
                    };
                    let exact = room / a.abs();
                    let harris = (room + dual_tol) / a.abs();
                    candidates.push((j, exact, harris));
                }
            }
            if candidates.is_empty() {
                return Ok(());
            }
            let q = if bland {
                let mut best: Option<(usize, f64)> = None;
                for &(j, exact, _) in &candidates {
                    if best.map_or(true, |(_, s)| exact < s - 1e-12 * s.max(1.0)) {
                        best = Some((j, exact));
                    }
                }
                best.expect("non-empty").0
            } else {
                let theta = candidates.iter().fold(f64::INFINITY, |acc, c| acc.min(c.2));
                let mut best: Option<usize> = None;
                for &(j, exact, _) in &candidates {
                    if exact <= theta && best.map_or(true, |bj| row[j].abs() > row[bj].abs()) {
                        best = Some(j);
                    }
                }
                match best {
                    Some(j) => j,
                    // Only reachable with non-finite data; let the primal pass recover.
                    None => return Ok(()),
                }
            };

            let alpha = self.factor().ftran(matrix, &matrix.dense_column(q));
            if (alpha[r] - row[q]).abs() > 1e-6 * (1.0 + row[q].abs()) {
                self.refactor();
                d = self.reduced_costs(false);
                continue;
            }
            let target = if below { self.lower[b] } else { self.upper[b] };
            let delta = (self.x[b] - target) / alpha[r];
            self.x[q] += delta;
            for (p, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let v = self.basis[p];
                    self.x[v] -= a * delta;
                }
            }
            // Step along the dual ray: nonpositive when raising a variable
            // to its lower bound, nonnegative when lowering it to its upper.
            let magnitude = candidates.iter().find(|c| c.0 == q).map_or(0.0, |c| c.1);
            let theta = if below { -magnitude } else { magnitude };
            if theta.abs() <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            let gain = theta.abs() * viol.abs();
            objective += gain;
            if gain <= 1e-9 * (1.0 + objective.abs()) {
                stalled += 1;
            } else {
                stalled = 0;
            }
            for j in 0..self.total() {
                if row[j] != 0.0 {
                    d[j] -= theta * row[j];
                }
            }
            d[q] = 0.0;
            d[b] = -theta;
            let leaving_state = if below { State::Lower } else { State::Upper };
            self.exchange(r, q, &alpha, leaving_state);
        }
    }
}
