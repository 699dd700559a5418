use super::simplex::solve_with_bounds;
use super::{MixedProgram, ObjectiveSense, SolveOutcome, SolveStatus, SolverError};

pub const BRUTE_FORCE_MAX_BINARIES: usize = 20;

/// Tries every 0/1 assignment of the binary columns and solves the remaining
/// continuous LP for each. Ties keep the first assignment in enumeration
/// order, where bit `i` of the counter is the `i`-th binary column.
pub fn brute_force_milp(program: &MixedProgram) -> Result<SolveOutcome, SolverError> {
    program.validate()?;
    let binaries = program.binary_columns();
    if binaries.len() > BRUTE_FORCE_MAX_BINARIES {
        return Err(SolverError::TooManyBinaries { count: binaries.len(), max: BRUTE_FORCE_MAX_BINARIES });
    }
    let sign = match program.sense {
        ObjectiveSense::Maximize => 1.0,
        ObjectiveSense::Minimize => -1.0,
    };
    let base: Vec<(f64, f64)> = program.columns.iter().map(|c| (c.lower, c.upper)).collect();
    let mut best: Option<SolveOutcome> = None;
    let mut solved = 0u64;
    for mask in 0u64..(1u64 << binaries.len()) {
        let mut bounds = base.clone();
        for (bit, &j) in binaries.iter().enumerate() {
            let v = (mask >> bit & 1) as f64;
            bounds[j] = (bounds[j].0.max(v), bounds[j].1.min(v));
        }
        let outcome = solve_with_bounds(program, &bounds)?;
        solved += 1;
        match outcome.status {
            SolveStatus::Infeasible => {}
            SolveStatus::Unbounded => return Ok(SolveOutcome::unbounded(solved)),
            SolveStatus::Optimal => {
                let value = sign * outcome.objective_value.unwrap_or(f64::NEG_INFINITY);
                let better = best
                    .as_ref()
                    .map_or(true, |b| value > sign * b.objective_value.unwrap_or(f64::NEG_INFINITY));
                if better {
                    best = Some(outcome);
                }
            }
        }
    }
    Ok(match best {
        Some(mut b) => {
            b.node_count = solved;
            b
        }
        None => SolveOutcome::infeasible(solved),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_lp, RowSense};

    #[test]
    fn zero_binaries_equals_lp() {
        let mut p = MixedProgram::new(ObjectiveSense::Minimize);
        let x = p.add_continuous("x", 0.0, 5.0);
        let y = p.add_continuous("y", 0.0, 5.0);
        p.add_row("r", vec![(x, 1.0), (y, 2.0)], RowSense::Ge, 3.0);
        p.objective = vec![(x, 2.0), (y, 3.0)];
        let brute = brute_force_milp(&p).unwrap();
        let lp = solve_lp(&p).unwrap();
        assert_eq!(brute.assignment, lp.assignment);
        assert_eq!(brute.objective_value, lp.objective_value);
    }

    #[test]
    fn infeasible_everywhere() {
        let mut p = MixedProgram::new(ObjectiveSense::Maximize);
        let a = p.add_binary("a");
        let b = p.add_binary("b");
        p.add_row("r", vec![(a, 1.0), (b, 1.0)], RowSense::Ge, 3.0);
        assert_eq!(brute_force_milp(&p).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn too_many_binaries() {
        let mut p = MixedProgram::new(ObjectiveSense::Maximize);
        for i in 0..21 {
            p.add_binary(format!("b{i}"));
        }
        assert!(matches!(brute_force_milp(&p), Err(SolverError::TooManyBinaries { count: 21, .. })));
    }

    #[test]
    fn dominates_every_assignment() {
        let mut p = MixedProgram::new(ObjectiveSense::Maximize);
        let b: Vec<usize> = (0..4).map(|i| p.add_binary(format!("b{i}"))).collect();
        let x = p.add_continuous("x", 0.0, 10.0);
        p.add_row("link", vec![(x, 1.0), (b[0], -3.0), (b[1], -2.0)], RowSense::Le, 1.0);
        p.add_row("budget", b.iter().map(|&c| (c, 1.0)).collect(), RowSense::Le, 2.0);
        p.objective = vec![(x, 1.0), (b[2], 0.5), (b[3], -0.25), (b[1], 0.1)];
        let best = brute_force_milp(&p).unwrap().objective_value.unwrap();
        for mask in 0..16u32 {
            let mut fixed = p.clone();
            for (i, &c) in b.iter().enumerate() {
                let v = (mask >> i & 1) as f64;
                fixed.columns[c].lower = v;
                fixed.columns[c].upper = v;
            }
            if let Some(v) = solve_lp(&fixed).unwrap().objective_value {
                assert!(best >= v - 1e-12);
            }
        }
    }
}
