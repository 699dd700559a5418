//! Exact reference solver for small mixed 0/1 linear programs.
//!
//! [`solve_lp`] is a bounded-variable primal simplex on a dense tableau,
//! [`solve_milp`] runs best-bound branch-and-bound over the binary columns and
//! [`brute_force_milp`] enumerates every binary assignment. The last one exists
//! to check the other two and refuses programs with more than
//! [`BRUTE_FORCE_MAX_BINARIES`] binaries.

mod branch;
mod brute;
mod factor;
mod lp_format;
mod simplex;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use branch::{solve_milp, solve_milp_with, MilpOptions, DEFAULT_NODE_LIMIT};
pub use brute::{brute_force_milp, BRUTE_FORCE_MAX_BINARIES};
pub use lp_format::to_lp_format;
pub use simplex::solve_lp;

/// Absolute tolerance for a binary value to count as integral.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-7;
/// Absolute per-row tolerance for a reported optimum.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;
/// Relative optimality gap at which branch-and-bound prunes a node.
pub const RELATIVE_GAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("branch-and-bound node limit of {limit} exceeded")]
    NodeLimit { limit: u64 },
    #[error("brute force supports at most {max} binary columns, program has {count}")]
    TooManyBinaries { count: usize, max: usize },
    #[error("simplex iteration limit of {limit} exceeded")]
    IterationLimit { limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(with = "lower_bound")]
    pub lower: f64,
    #[serde(with = "upper_bound")]
    pub upper: f64,
}

/// Infinite bounds are written as `null`.
macro_rules! infinite_as_null {
    ($name:ident, $inf:expr) => {
        mod $name {
            use serde::{Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                if v.is_infinite() {
                    s.serialize_none()
                } else {
                    s.serialize_some(v)
                }
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                Ok(Option::<f64>::deserialize(d)?.unwrap_or($inf))
            }
        }
    };
}
infinite_as_null!(lower_bound, f64::NEG_INFINITY);
infinite_as_null!(upper_bound, f64::INFINITY);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for RowSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        })
    }
}

/// A linear constraint over sparse `(column index, coefficient)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub coefficients: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violates this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
}

/// Linear program with continuous and binary columns.
///
/// The objective is `offset + Σ c_j x_j`; the offset lets callers keep
/// constant terms (e.g. total demand) out of the column space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProgram {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub objective: Vec<(usize, f64)>,
    pub objective_offset: f64,
    pub sense: ObjectiveSense,
}

impl MixedProgram {
    pub fn new(sense: ObjectiveSense) -> Self {
        MixedProgram {
            columns: Vec::new(),
            rows: Vec::new(),
            objective: Vec::new(),
            objective_offset: 0.0,
            sense,
        }
    }

    pub fn add_column(&mut self, name: impl Into<String>, kind: ColumnKind, lower: f64, upper: f64) -> usize {
        self.columns.push(Column { name: name.into(), kind, lower, upper });
        self.columns.len() - 1
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.add_column(name, ColumnKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.add_column(name, ColumnKind::Binary, 0.0, 1.0)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coefficients: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row { name: name.into(), coefficients, sense, rhs });
        self.rows.len() - 1
    }

    pub fn binary_columns(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Binary)
            .map(|(j, _)| j)
            .collect()
    }

    /// Objective value of an assignment, including the offset.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().map(|&(j, c)| c * values[j]).sum::<f64>()
    }

    /// Largest row or bound violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(values));
        let bounds = self
            .columns
            .iter()
            .zip(values)
            .map(|(c, &v)| (c.lower - v).max(v - c.upper).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.columns.len();
        for (j, col) in self.columns.iter().enumerate() {
            if col.lower.is_nan() || col.upper.is_nan() {
                return Err(SolverError::Malformed(format!("column {j} has a NaN bound")));
            }
            if col.lower == f64::INFINITY || col.upper == f64::NEG_INFINITY {
                return Err(SolverError::Malformed(format!("column {j} has an unsatisfiable infinite bound")));
            }
            if col.kind == ColumnKind::Binary && (col.lower < 0.0 || col.upper > 1.0) {
                return Err(SolverError::Malformed(format!(
                    "binary column {j} has bounds [{}, {}] outside [0, 1]",
                    col.lower, col.upper
                )));
            }
        }
        let check_terms = |what: &str, terms: &[(usize, f64)]| -> Result<(), SolverError> {
            let mut seen = vec![false; n];
            for &(j, a) in terms {
                if j >= n {
                    return Err(SolverError::Malformed(format!("{what} references undeclared column {j}")));
                }
                if seen[j] {
                    return Err(SolverError::Malformed(format!("{what} lists column {j} twice")));
                }
                seen[j] = true;
                if !a.is_finite() {
                    return Err(SolverError::Malformed(format!("{what} has a non-finite coefficient")));
                }
            }
            Ok(())
        };
        check_terms("objective", &self.objective)?;
        if !self.objective_offset.is_finite() {
            return Err(SolverError::Malformed("objective offset is not finite".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            check_terms(&format!("row {i}"), &row.coefficients)?;
            if !row.rhs.is_finite() {
                return Err(SolverError::Malformed(format!("row {i} has a non-finite rhs")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Column values, present iff optimal.
    pub assignment: Option<Vec<f64>>,
    /// Objective value including the offset, present iff optimal.
    pub objective_value: Option<f64>,
    /// Number of LP relaxations solved.
    pub node_count: u64,
}

impl SolveOutcome {
    pub(crate) fn infeasible(node_count: u64) -> Self {
        SolveOutcome { status: SolveStatus::Infeasible, assignment: None, objective_value: None, node_count }
    }

    pub(crate) fn unbounded(node_count: u64) -> Self {
        SolveOutcome { status: SolveStatus::Unbounded, assignment: None, objective_value: None, node_count }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
