//! Commands behind the `cropplan` binary and the HTTP session API.

pub mod http;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use cropplan_core::group::{
    compare_rankings, rank_ballots, AlternativeSet, BallotSet, ComparisonDocument, GroupError, RankingDocument,
};
use cropplan_core::model::ObjectiveTriple;
use cropplan_core::pareto::{generate_front, FrontDocument, FrontOptions, GridMode, ParetoError, RunReport};
use cropplan_core::scenario::{parse_scenario, ScenarioError};
use cropplan_core::service::ServiceError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", .path.display())]
    Document { path: PathBuf, message: String },
    #[error("{}: {source}", .path.display())]
    Scenario { path: PathBuf, source: ScenarioError },
    #[error(transparent)]
    Pareto(#[from] ParetoError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("NO_BALLOTS: {} holds no ballots", .0.display())]
    NoBallots(PathBuf),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for domain errors, 2 for usage and I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Document { .. } | CliError::Usage(_) => 2,
            CliError::Scenario { source: ScenarioError::Invalid(_), .. } => 1,
            CliError::Scenario { .. } => 2,
            CliError::Service(ServiceError::Io { .. }) => 2,
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Document { path: path.to_path_buf(), message: e.to_string() })
}

/// Writes `doc` as pretty JSON to `out`, or to stdout when `out` is `None`.
pub fn write_json<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).expect("documents serialize");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Alternatives with their objectives, read from a front export, an
/// alternative set, or a bare JSON list of ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternatives {
    pub ids: Vec<String>,
    pub objectives: BTreeMap<String, ObjectiveTriple>,
}

pub fn load_alternatives(path: &Path) -> Result<Alternatives, CliError> {
    let value: serde_json::Value = read_json(path)?;
    let bad = |e: serde_json::Error| CliError::Document { path: path.to_path_buf(), message: e.to_string() };
    if value.get("solutions").is_some() {
        let front: FrontDocument = serde_json::from_value(value).map_err(bad)?;
        let objectives = front.solutions.iter().map(|s| (s.label.clone(), s.objectives)).collect();
        return Ok(Alternatives { ids: front.labels(), objectives });
    }
    if value.get("alternatives").is_some() {
        let set: AlternativeSet = serde_json::from_value(value).map_err(bad)?;
        return Ok(Alternatives { ids: set.ids(), objectives: set.objectives() });
    }
    let ids: Vec<String> = serde_json::from_value(value).map_err(bad)?;
    Ok(Alternatives { ids, objectives: BTreeMap::new() })
}

pub struct SolveSummary {
    pub report: RunReport,
    pub wall_time: Duration,
    pub front_size: usize,
}

impl fmt::Display for SolveSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.report;
        write!(
            f,
            "grid solves: {}, skipped infeasible cells: {}, duplicates: {}, dominated: {}, front size: {}, wall time: {:.2} s",
            r.cells.len(),
            r.infeasible_cells().count(),
            r.duplicates,
            r.dominated,
            self.front_size,
            self.wall_time.as_secs_f64()
        )
    }
}

pub fn cmd_solve(scenario: &Path, grid_size: usize, mode: GridMode, out: Option<&Path>) -> Result<SolveSummary, CliError> {
    let started = Instant::now();
    let s = parse_scenario(&read(scenario)?).map_err(|source| CliError::Scenario { path: scenario.to_path_buf(), source })?;
    let options = FrontOptions { grid_size, mode, ..FrontOptions::default() };
    let set = generate_front(&s, &options)?;
    let doc = FrontDocument::from_set(&s, &set).map_err(ParetoError::from)?;
    write_json(&doc, out)?;
    Ok(SolveSummary { front_size: doc.solutions.len(), report: set.report, wall_time: started.elapsed() })
}

pub fn cmd_rank(ballots: &Path, alternatives: &Path, out: Option<&Path>) -> Result<RankingDocument, CliError> {
    let text = read(ballots)?;
    let set: BallotSet = if text.trim().is_empty() {
        BallotSet::new(Vec::new())
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Document { path: ballots.to_path_buf(), message: e.to_string() })?
    };
    if set.ballots.is_empty() {
        return Err(CliError::NoBallots(ballots.to_path_buf()));
    }
    let alts = load_alternatives(alternatives)?;
    let doc: RankingDocument = rank_ballots(&alts.ids, &set.ballots)?.into();
    write_json(&doc, out)?;
    Ok(doc)
}

pub fn cmd_compare(first: &Path, second: &Path, objectives: &Path, out: Option<&Path>) -> Result<ComparisonDocument, CliError> {
    let a: RankingDocument = read_json(first)?;
    let b: RankingDocument = read_json(second)?;
    let alts = load_alternatives(objectives)?;
    let doc: ComparisonDocument = compare_rankings(&a.ranking, &b.ranking, &alts.objectives)?.into();
    write_json(&doc, out)?;
    Ok(doc)
}
