use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::group::{ballot_issues, rank_ballots, Ballot, GroupRanking};
use crate::model::{ObjectiveTriple, PlanDocument};
use crate::pareto::FrontDocument;

pub const SESSION_SCHEMA_VERSION: u32 = 1;
pub const MIN_ALTERNATIVES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Draft,
    Voting,
    Closed,
}

impl SessionState {
    pub fn name(self) -> &'static str {
        match self {
            SessionState::Draft => "draft",
            SessionState::Voting => "voting",
            SessionState::Closed => "closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionAlternative {
    pub id: String,
    pub objectives: ObjectiveTriple,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanDocument>,
}

impl SessionAlternative {
    pub fn from_front(front: &FrontDocument) -> Vec<SessionAlternative> {
        front
            .solutions
            .iter()
            .map(|s| SessionAlternative { id: s.label.clone(), objectives: s.objectives, plan: Some(s.plan.clone()) })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Voter {
    pub voter_id: String,
    pub weight: f64,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub facilitator: String,
    pub state: SessionState,
    pub alternatives: Vec<SessionAlternative>,
    pub voters: Vec<Voter>,
    pub ballots: BTreeMap<String, Ballot>,
    pub result: Option<GroupRanking>,
}

/// One acknowledged mutation, as written to the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Created { session: String, facilitator: String },
    AlternativesAdded { session: String, alternatives: Vec<SessionAlternative> },
    VoterRegistered { session: String, voter_id: String, weight: f64, token: String },
    VotingOpened { session: String },
    BallotSubmitted { session: String, voter_id: String, ranking: Vec<String> },
    Closed { session: String, allow_missing: bool },
    Imported { session: String, snapshot: SessionExport, tokens: Vec<String> },
}

impl Event {
    pub fn session(&self) -> &str {
        match self {
            Event::Created { session, .. }
            | Event::AlternativesAdded { session, .. }
            | Event::VoterRegistered { session, .. }
            | Event::VotingOpened { session }
            | Event::BallotSubmitted { session, .. }
            | Event::Closed { session, .. }
            | Event::Imported { session, .. } => session,
        }
    }
}

impl Session {
    pub fn new(id: String, facilitator: String) -> Session {
        Session {
            id,
            facilitator,
            state: SessionState::Draft,
            alternatives: Vec::new(),
            voters: Vec::new(),
            ballots: BTreeMap::new(),
            result: None,
        }
    }

    fn require(&self, allowed: &[SessionState]) -> Result<(), ServiceError> {
        if allowed.contains(&self.state) {
            Ok(())
        } else {
            Err(ServiceError::WrongState { session: self.id.clone(), state: self.state })
        }
    }

    pub fn alternative_ids(&self) -> Vec<String> {
        self.alternatives.iter().map(|a| a.id.clone()).collect()
    }

    pub fn voter(&self, voter_id: &str) -> Option<&Voter> {
        self.voters.iter().find(|v| v.voter_id == voter_id)
    }

    pub fn voter_by_token(&self, token: &str) -> Option<&Voter> {
        self.voters.iter().find(|v| v.token == token)
    }

    pub fn missing_ballots(&self) -> Vec<String> {
        self.voters.iter().filter(|v| !self.ballots.contains_key(&v.voter_id)).map(|v| v.voter_id.clone()).collect()
    }

    /// Validates and applies one event. On error the session is unchanged.
    pub fn apply(&mut self, event: &Event) -> Result<(), ServiceError> {
        match event {
            Event::Created { .. } | Event::Imported { .. } => {
                Err(ServiceError::Duplicate(format!("session {}", self.id)))
            }
            Event::AlternativesAdded { alternatives, .. } => {
                self.require(&[SessionState::Draft])?;
                let mut ids: Vec<&str> = self.alternatives.iter().map(|a| a.id.as_str()).collect();
                for a in alternatives {
                    if ids.contains(&a.id.as_str()) {
                        return Err(ServiceError::Duplicate(format!("alternative {}", a.id)));
                    }
                    ids.push(&a.id);
                }
                self.alternatives.extend(alternatives.iter().cloned());
                Ok(())
            }
            Event::VoterRegistered { voter_id, weight, token, .. } => {
                self.require(&[SessionState::Draft, SessionState::Voting])?;
                if !(*weight > 0.0) || !weight.is_finite() {
                    return Err(ServiceError::NonpositiveWeight(*weight));
                }
                if self.voter(voter_id).is_some() {
                    return Err(ServiceError::Duplicate(format!("voter {voter_id}")));
                }
                self.voters.push(Voter { voter_id: voter_id.clone(), weight: *weight, token: token.clone() });
                Ok(())
            }
            Event::VotingOpened { .. } => {
                self.require(&[SessionState::Draft])?;
                if self.alternatives.len() < MIN_ALTERNATIVES {
                    return Err(ServiceError::TooFewAlternatives(self.alternatives.len()));
                }
                if self.voters.is_empty() {
                    return Err(ServiceError::NoVoters);
                }
                self.state = SessionState::Voting;
                Ok(())
            }
            Event::BallotSubmitted { voter_id, ranking, .. } => {
                self.require(&[SessionState::Voting])?;
                let voter = self.voter(voter_id).ok_or(ServiceError::BadToken)?;
                let ballot = Ballot { voter_id: voter_id.clone(), weight: voter.weight, ranking: ranking.clone() };
                let issues = ballot_issues(&ballot, &self.alternative_ids());
                if !issues.is_empty() {
                    return Err(ServiceError::InvalidBallot(issues));
                }
                self.ballots.insert(voter_id.clone(), ballot);
                Ok(())
            }
            Event::Closed { allow_missing, .. } => {
                self.require(&[SessionState::Voting])?;
                let missing = self.missing_ballots();
                if !missing.is_empty() && !allow_missing {
                    return Err(ServiceError::MissingBallots(missing));
                }
                if self.ballots.is_empty() {
                    return Err(ServiceError::NoBallots);
                }
                let ballots: Vec<Ballot> = self.ballots.values().cloned().collect();
                self.result = Some(rank_ballots(&self.alternative_ids(), &ballots)?);
                self.state = SessionState::Closed;
                Ok(())
            }
        }
    }

    /// Rebuilds a session from an export, handing out the given tokens in voter order.
    pub fn from_export(id: String, snapshot: &SessionExport, tokens: &[String]) -> Result<Session, ServiceError> {
        if snapshot.schema_version != SESSION_SCHEMA_VERSION {
            return Err(ServiceError::BadDocument(format!("unsupported schema version {}", snapshot.schema_version)));
        }
        if tokens.len() != snapshot.voters.len() {
            return Err(ServiceError::BadDocument("token count does not match voters".into()));
        }
        let mut s = Session::new(id.clone(), snapshot.facilitator.clone());
        s.apply(&Event::AlternativesAdded { session: id.clone(), alternatives: snapshot.alternatives.clone() })?;
        for (v, token) in snapshot.voters.iter().zip(tokens) {
            s.apply(&Event::VoterRegistered {
                session: id.clone(),
                voter_id: v.voter_id.clone(),
                weight: v.weight,
                token: token.clone(),
            })?;
        }
        if snapshot.state == SessionState::Draft {
            if !snapshot.ballots.is_empty() || snapshot.result.is_some() {
                return Err(ServiceError::BadDocument("a draft session carries no ballots or result".into()));
            }
            return Ok(s);
        }
        s.apply(&Event::VotingOpened { session: id.clone() })?;
        for b in &snapshot.ballots {
            let v = s.voter(&b.voter_id).ok_or_else(|| ServiceError::BadDocument(format!("ballot from unknown voter {}", b.voter_id)))?;
            if v.weight != b.weight {
                return Err(ServiceError::BadDocument(format!("ballot weight of {} differs from the voter", b.voter_id)));
            }
            s.apply(&Event::BallotSubmitted { session: id.clone(), voter_id: b.voter_id.clone(), ranking: b.ranking.clone() })?;
        }
        if snapshot.state == SessionState::Closed {
            s.apply(&Event::Closed { session: id.clone(), allow_missing: true })?;
            if s.result != snapshot.result {
                return Err(ServiceError::BadDocument("stored result does not match the ballots".into()));
            }
        } else if snapshot.result.is_some() {
            return Err(ServiceError::BadDocument("only a closed session carries a result".into()));
        }
        Ok(s)
    }

    pub fn export(&self) -> SessionExport {
        SessionExport {
            schema_version: SESSION_SCHEMA_VERSION,
            id: self.id.clone(),
            facilitator: self.facilitator.clone(),
            state: self.state,
            alternatives: self.alternatives.clone(),
            voters: self.voters.iter().map(|v| ExportedVoter { voter_id: v.voter_id.clone(), weight: v.weight }).collect(),
            ballots: self.ballots.values().cloned().collect(),
            result: self.result.clone(),
        }
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            facilitator: self.facilitator.clone(),
            state: self.state,
            alternatives: self.alternatives.iter().map(AlternativeCard::from).collect(),
            voters: self
                .voters
                .iter()
                .map(|v| VoterStatus {
                    voter_id: v.voter_id.clone(),
                    weight: v.weight,
                    has_voted: self.ballots.contains_key(&v.voter_id),
                })
                .collect(),
            ballot_count: self.ballots.len(),
            result: self.result.clone(),
        }
    }

    pub fn voter_view(&self, voter: &Voter) -> VoterView {
        VoterView {
            session: self.id.clone(),
            state: self.state,
            voter_id: voter.voter_id.clone(),
            weight: voter.weight,
            alternatives: self.alternatives.iter().map(AlternativeCard::from).collect(),
            ballot: self.ballots.get(&voter.voter_id).map(|b| b.ranking.clone()),
            result: self.result.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedVoter {
    pub voter_id: String,
    pub weight: f64,
}

/// Token-free snapshot of a session. Serializing the same session always
/// gives the same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionExport {
    pub schema_version: u32,
    pub id: String,
    pub facilitator: String,
    pub state: SessionState,
    pub alternatives: Vec<SessionAlternative>,
    pub voters: Vec<ExportedVoter>,
    /// Sorted by voter id.
    pub ballots: Vec<Ballot>,
    pub result: Option<GroupRanking>,
}

/// What a voter sees of an alternative: its label, objectives and planted
/// hectares per farmer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeCard {
    pub id: String,
    pub objectives: ObjectiveTriple,
    pub area_by_farmer: Vec<FarmerArea>,
    pub total_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmerArea {
    pub farmer: String,
    pub area: f64,
}

impl From<&SessionAlternative> for AlternativeCard {
    fn from(a: &SessionAlternative) -> Self {
        let area_by_farmer: Vec<FarmerArea> = a
            .plan
            .as_ref()
            .map(|p| p.area_by_farmer().into_iter().map(|(farmer, area)| FarmerArea { farmer, area }).collect())
            .unwrap_or_default();
        let total_area = area_by_farmer.iter().map(|f| f.area).sum();
        AlternativeCard { id: a.id.clone(), objectives: a.objectives, area_by_farmer, total_area }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterStatus {
    pub voter_id: String,
    pub weight: f64,
    pub has_voted: bool,
}

/// Facilitator view: ballot arrival per voter, never ballot contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub facilitator: String,
    pub state: SessionState,
    pub alternatives: Vec<AlternativeCard>,
    pub voters: Vec<VoterStatus>,
    pub ballot_count: usize,
    pub result: Option<GroupRanking>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterView {
    pub session: String,
    pub state: SessionState,
    pub voter_id: String,
    pub weight: f64,
    pub alternatives: Vec<AlternativeCard>,
    /// The voter's own current ballot, if any.
    pub ballot: Option<Vec<String>>,
    pub result: Option<GroupRanking>,
}
