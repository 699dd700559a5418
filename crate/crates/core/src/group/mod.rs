//! Weighted Borda aggregation of complete rankings, dense group ranking and
//! position-by-position comparison of two rankings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ObjectiveTriple;

pub const GROUP_SCHEMA_VERSION: u32 = 1;
/// Relative difference below which two point totals count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ballot {
    pub voter_id: String,
    pub weight: f64,
    /// Alternative ids, best first.
    pub ranking: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BallotIssueCode {
    Incomplete,
    Repeated,
    Unknown,
    NonpositiveWeight,
}

impl BallotIssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            BallotIssueCode::Incomplete => "INCOMPLETE",
            BallotIssueCode::Repeated => "REPEATED",
            BallotIssueCode::Unknown => "UNKNOWN",
            BallotIssueCode::NonpositiveWeight => "NONPOSITIVE_WEIGHT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotIssue {
    pub code: BallotIssueCode,
    /// The alternative concerned, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternative: Option<String>,
}

impl fmt::Display for BallotIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.alternative {
            Some(a) => write!(f, "{} ({a})", self.code.as_str()),
            None => f.write_str(self.code.as_str()),
        }
    }
}

fn join_issues(issues: &[BallotIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Error, PartialEq)]
pub enum GroupError {
    #[error("ballot of {voter} is invalid: {}", join_issues(.issues))]
    InvalidBallot { voter: String, issues: Vec<BallotIssue> },
    #[error("the alternative set is empty")]
    NoAlternatives,
    #[error("the alternative set repeats {0}")]
    DuplicateAlternative(String),
    #[error("rankings cover different alternatives: {0}")]
    Mismatch(String),
}

/// Every problem with `ballot` against `alternatives`; empty when valid.
pub fn ballot_issues(ballot: &Ballot, alternatives: &[String]) -> Vec<BallotIssue> {
    issues_against(ballot, alternatives, &index_of(alternatives))
}

fn index_of(alternatives: &[String]) -> HashMap<&str, usize> {
    alternatives.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect()
}

fn issues_against(ballot: &Ballot, alternatives: &[String], index: &HashMap<&str, usize>) -> Vec<BallotIssue> {
    let mut issues = Vec::new();
    if !(ballot.weight > 0.0) || !ballot.weight.is_finite() {
        issues.push(BallotIssue { code: BallotIssueCode::NonpositiveWeight, alternative: None });
    }
    let mut seen = vec![false; alternatives.len()];
    for id in &ballot.ranking {
        match index.get(id.as_str()) {
            None => issues.push(BallotIssue { code: BallotIssueCode::Unknown, alternative: Some(id.clone()) }),
            Some(&i) if seen[i] => {
                issues.push(BallotIssue { code: BallotIssueCode::Repeated, alternative: Some(id.clone()) })
            }
            Some(&i) => seen[i] = true,
        }
    }
    for (id, _) in alternatives.iter().zip(&seen).filter(|(_, &s)| !s) {
        issues.push(BallotIssue { code: BallotIssueCode::Incomplete, alternative: Some(id.clone()) });
    }
    issues
}

pub fn validate_ballot(ballot: &Ballot, alternatives: &[String]) -> Result<(), Vec<BallotIssue>> {
    let issues = ballot_issues(ballot, alternatives);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

fn check_alternatives(alternatives: &[String]) -> Result<(), GroupError> {
    if alternatives.is_empty() {
        return Err(GroupError::NoAlternatives);
    }
    let mut seen = BTreeSet::new();
    for a in alternatives {
        if !seen.insert(a.as_str()) {
            return Err(GroupError::DuplicateAlternative(a.clone()));
        }
    }
    Ok(())
}

/// Weighted Borda points: the alternative at 1-based position `k` of a
/// ballot gets `weight * (n - k)`.
pub fn borda_scores(alternatives: &[String], ballots: &[Ballot]) -> Result<BTreeMap<String, f64>, GroupError> {
    check_alternatives(alternatives)?;
    let n = alternatives.len();
    let index = index_of(alternatives);
    let mut points = vec![0.0; n];
    for b in ballots {
        let issues = issues_against(b, alternatives, &index);
        if !issues.is_empty() {
            return Err(GroupError::InvalidBallot { voter: b.voter_id.clone(), issues });
        }
        for (k, id) in b.ranking.iter().enumerate() {
            points[index[id.as_str()]] += b.weight * (n - 1 - k) as f64;
        }
    }
    Ok(alternatives.iter().cloned().zip(points).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub alternative: String,
    pub points: f64,
    pub rank: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupRanking {
    pub entries: Vec<RankEntry>,
}

impl GroupRanking {
    pub fn order(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.alternative.as_str()).collect()
    }

    pub fn rank_of(&self, alternative: &str) -> Option<u32> {
        self.entries.iter().find(|e| e.alternative == alternative).map(|e| e.rank)
    }

    /// True when the alternative shares its rank with another one.
    pub fn is_tied(&self, alternative: &str) -> bool {
        match self.rank_of(alternative) {
            Some(r) => self.entries.iter().filter(|e| e.rank == r).count() > 1,
            None => false,
        }
    }
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Sorts by points descending with dense ranks; tied alternatives share a
/// rank and are listed by id.
pub fn rank_by_points<'a, I>(points: I) -> GroupRanking
where
    I: IntoIterator<Item = (&'a String, &'a f64)>,
{
    let mut items: Vec<(&str, f64)> = points.into_iter().map(|(k, &v)| (k.as_str(), v)).collect();
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let mut entries = Vec::with_capacity(items.len());
    let mut group: Vec<(&str, f64)> = Vec::new();
    let mut rank = 0u32;
    let flush = |group: &mut Vec<(&str, f64)>, rank: u32, entries: &mut Vec<RankEntry>| {
        group.sort_by(|a, b| a.0.cmp(b.0));
        for (id, p) in group.drain(..) {
            entries.push(RankEntry { alternative: id.to_string(), points: p, rank });
        }
    };
    for item in items {
        match group.first() {
            Some(head) if tied(head.1, item.1) => group.push(item),
            _ => {
                if !group.is_empty() {
                    flush(&mut group, rank, &mut entries);
                }
                rank += 1;
                group.push(item);
            }
        }
    }
    if !group.is_empty() {
        flush(&mut group, rank, &mut entries);
    }
    GroupRanking { entries }
}

/// Borda points followed by dense ranking.
pub fn rank_ballots(alternatives: &[String], ballots: &[Ballot]) -> Result<GroupRanking, GroupError> {
    Ok(rank_by_points(&borda_scores(alternatives, ballots)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// 1-based position in both listings.
    pub position: usize,
    pub first: String,
    pub second: String,
    /// Objectives of `first` minus objectives of `second`.
    pub delta: ObjectiveTriple,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RankingComparison {
    pub rows: Vec<ComparisonRow>,
}

/// Pairs the two rankings position by position, tie groups in listed order.
pub fn compare_rankings(
    first: &GroupRanking,
    second: &GroupRanking,
    objectives: &BTreeMap<String, ObjectiveTriple>,
) -> Result<RankingComparison, GroupError> {
    let a: BTreeSet<&str> = first.order().into_iter().collect();
    let b: BTreeSet<&str> = second.order().into_iter().collect();
    if a != b || a.len() != first.entries.len() || b.len() != second.entries.len() {
        let only: Vec<&str> = a.symmetric_difference(&b).copied().collect();
        return Err(GroupError::Mismatch(if only.is_empty() {
            "a ranking lists an alternative twice".to_string()
        } else {
            format!("not in both: {}", only.join(", "))
        }));
    }
    if let Some(missing) = a.iter().find(|id| !objectives.contains_key(**id)) {
        return Err(GroupError::Mismatch(format!("no objectives for {missing}")));
    }
    let rows = first
        .entries
        .iter()
        .zip(&second.entries)
        .enumerate()
        .map(|(i, (x, y))| ComparisonRow {
            position: i + 1,
            first: x.alternative.clone(),
            second: y.alternative.clone(),
            delta: objectives[&x.alternative].delta(&objectives[&y.alternative]),
        })
        .collect();
    Ok(RankingComparison { rows })
}

/// Ballot file for offline aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallotSet {
    pub schema_version: u32,
    pub ballots: Vec<Ballot>,
}

impl BallotSet {
    pub fn new(ballots: Vec<Ballot>) -> Self {
        BallotSet { schema_version: GROUP_SCHEMA_VERSION, ballots }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectives: Option<ObjectiveTriple>,
}

/// Alternative universe for offline aggregation and comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSet {
    pub schema_version: u32,
    pub alternatives: Vec<Alternative>,
}

impl AlternativeSet {
    pub fn ids(&self) -> Vec<String> {
        self.alternatives.iter().map(|a| a.id.clone()).collect()
    }

    pub fn objectives(&self) -> BTreeMap<String, ObjectiveTriple> {
        self.alternatives.iter().filter_map(|a| a.objectives.map(|o| (a.id.clone(), o))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub ranking: GroupRanking,
}

impl From<GroupRanking> for RankingDocument {
    fn from(ranking: GroupRanking) -> Self {
        RankingDocument { schema_version: GROUP_SCHEMA_VERSION, ranking }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub comparison: RankingComparison,
}

impl From<RankingComparison> for ComparisonDocument {
    fn from(comparison: RankingComparison) -> Self {
        ComparisonDocument { schema_version: GROUP_SCHEMA_VERSION, comparison }
    }
}
