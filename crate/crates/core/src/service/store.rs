use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::session::{Event, Session, SessionAlternative, SessionExport, SessionSummary, VoterView};
use super::ServiceError;
use crate::group::GroupRanking;

pub const EVENT_LOG_FILE: &str = "events.jsonl";

struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    fn io(&self, source: std::io::Error) -> ServiceError {
        ServiceError::Io { path: self.path.clone(), source }
    }

    /// Appends one line and waits for it to reach the disk.
    fn append(&mut self, event: &Event) -> Result<(), ServiceError> {
        let mut line = serde_json::to_vec(event).expect("events serialize");
        line.push(b'\n');
        self.file.write_all(&line).map_err(|e| self.io(e))?;
        self.file.sync_data().map_err(|e| self.io(e))
    }
}

#[derive(Default)]
struct Inner {
    sessions: Vec<Session>,
    next_id: u64,
    log: Option<EventLog>,
}

impl Inner {
    fn position(&self, id: &str) -> Result<usize, ServiceError> {
        self.sessions.iter().position(|s| s.id == id).ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    fn get(&self, id: &str) -> Result<&Session, ServiceError> {
        self.position(id).map(|i| &self.sessions[i])
    }

    /// The id the next created session gets; taken once its event is applied.
    fn fresh_id(&self) -> String {
        format!("s{}", self.next_id + 1)
    }

    fn note_id(&mut self, id: &str) {
        if let Some(n) = id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
            self.next_id = self.next_id.max(n);
        }
    }

    /// Applies `event` in memory without touching the log.
    fn apply(&mut self, event: &Event) -> Result<usize, ServiceError> {
        match event {
            Event::Created { session, facilitator } => {
                if self.position(session).is_ok() {
                    return Err(ServiceError::Duplicate(format!("session {session}")));
                }
                self.note_id(session);
                self.sessions.push(Session::new(session.clone(), facilitator.clone()));
                Ok(self.sessions.len() - 1)
            }
            Event::Imported { session, snapshot, tokens } => {
                if self.position(session).is_ok() {
                    return Err(ServiceError::Duplicate(format!("session {session}")));
                }
                let s = Session::from_export(session.clone(), snapshot, tokens)?;
                self.note_id(session);
                self.sessions.push(s);
                Ok(self.sessions.len() - 1)
            }
            other => {
                let i = self.position(other.session())?;
                let mut updated = self.sessions[i].clone();
                updated.apply(other)?;
                self.sessions[i] = updated;
                Ok(i)
            }
        }
    }

    /// Validates, logs, then applies. Nothing changes unless the log write succeeded.
    fn commit(&mut self, event: Event) -> Result<&Session, ServiceError> {
        let i = match &event {
            Event::Created { .. } | Event::Imported { .. } => None,
            other => Some(self.position(other.session())?),
        };
        match i {
            Some(i) => {
                let mut updated = self.sessions[i].clone();
                updated.apply(&event)?;
                if let Some(log) = &mut self.log {
                    log.append(&event)?;
                }
                self.sessions[i] = updated;
                Ok(&self.sessions[i])
            }
            None => {
                if let Event::Imported { session, snapshot, tokens } = &event {
                    Session::from_export(session.clone(), snapshot, tokens)?;
                }
                if let Some(log) = &mut self.log {
                    log.append(&event)?;
                }
                let i = self.apply(&event)?;
                Ok(&self.sessions[i])
            }
        }
    }
}

/// Result of importing a snapshot: the new session and one fresh token per voter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportOutcome {
    pub session: SessionSummary,
    pub tokens: Vec<VoterToken>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterToken {
    pub voter_id: String,
    pub token: String,
}

/// All sessions, guarded by one lock: mutations are serialized, reads run
/// concurrently.
pub struct SessionStore {
    inner: RwLock<Inner>,
}

fn new_token() -> String {
    let bytes: [u8; 16] = rand::thread_rng().gen();
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl SessionStore {
    /// A store that keeps nothing on disk.
    pub fn in_memory() -> SessionStore {
        SessionStore { inner: RwLock::new(Inner::default()) }
    }

    /// Opens or creates the event log in `dir` and replays it. A torn final
    /// line, left by a crash during a write, is dropped from the file.
    pub fn open(dir: &Path) -> Result<SessionStore, ServiceError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ServiceError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let path = dir.join(EVENT_LOG_FILE);
        let text = match fs::read(&path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io(&path)(e)),
        };
        let mut inner = Inner::default();
        let mut offset = 0;
        let mut keep = text.len();
        let mut line_no = 0;
        while offset < text.len() {
            line_no += 1;
            let end = text[offset..].iter().position(|&b| b == b'\n').map(|p| offset + p);
            let line = &text[offset..end.unwrap_or(text.len())];
            let last = end.map_or(true, |e| text[e + 1..].iter().all(|b| b.is_ascii_whitespace()));
            if !line.iter().all(|b| b.is_ascii_whitespace()) {
                match serde_json::from_slice::<Event>(line) {
                    Ok(event) => {
                        inner.apply(&event).map_err(|e| ServiceError::CorruptLog { line: line_no, message: e.to_string() })?;
                    }
                    Err(_) if last => {
                        log::warn!("dropping torn last line {line_no} of {}", path.display());
                        keep = offset;
                        break;
                    }
                    Err(e) => return Err(ServiceError::CorruptLog { line: line_no, message: e.to_string() }),
                }
            }
            offset = end.map_or(text.len(), |e| e + 1);
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io(&path))?;
        if keep < text.len() {
            file.set_len(keep as u64).map_err(io(&path))?;
        } else if !text.is_empty() && text.last() != Some(&b'\n') {
            // A complete final event without its newline: terminate it.
            (&file).write_all(b"\n").map_err(io(&path))?;
        }
        file.sync_all().map_err(io(&path))?;
        inner.log = Some(EventLog { path, file });
        Ok(SessionStore { inner: RwLock::new(inner) })
    }

    fn read<T>(&self, f: impl FnOnce(&Inner) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        f(&self.inner.read().unwrap_or_else(|p| p.into_inner()))
    }

    fn write<T>(&self, f: impl FnOnce(&mut Inner) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        f(&mut self.inner.write().unwrap_or_else(|p| p.into_inner()))
    }

    pub fn create_session(&self, facilitator: &str) -> Result<SessionSummary, ServiceError> {
        self.write(|inner| {
            let session = inner.fresh_id();
            inner.commit(Event::Created { session, facilitator: facilitator.to_string() }).map(Session::summary)
        })
    }

    pub fn list_sessions(&self) -> Vec<SessionSummary> {
        self.read(|inner| Ok(inner.sessions.iter().map(Session::summary).collect())).unwrap_or_default()
    }

    pub fn session(&self, id: &str) -> Result<Session, ServiceError> {
        self.read(|inner| inner.get(id).cloned())
    }

    pub fn summary(&self, id: &str) -> Result<SessionSummary, ServiceError> {
        self.read(|inner| inner.get(id).map(Session::summary))
    }

    pub fn add_alternatives(&self, id: &str, alternatives: Vec<SessionAlternative>) -> Result<SessionSummary, ServiceError> {
        self.write(|inner| inner.commit(Event::AlternativesAdded { session: id.to_string(), alternatives }).map(Session::summary))
    }

    /// Registers a voter and returns their access token.
    pub fn register_voter(&self, id: &str, voter_id: &str, weight: f64) -> Result<String, ServiceError> {
        self.write(|inner| {
            let existing = inner.get(id)?;
            let token = loop {
                let t = new_token();
                if existing.voter_by_token(&t).is_none() {
                    break t;
                }
            };
            let event = Event::VoterRegistered {
                session: id.to_string(),
                voter_id: voter_id.to_string(),
                weight,
                token: token.clone(),
            };
            inner.commit(event)?;
            Ok(token)
        })
    }

    pub fn open_voting(&self, id: &str) -> Result<SessionSummary, ServiceError> {
        self.write(|inner| inner.commit(Event::VotingOpened { session: id.to_string() }).map(Session::summary))
    }

    /// Stores the ballot of the voter holding `token`, replacing an earlier one.
    pub fn submit_ballot(&self, id: &str, token: &str, ranking: Vec<String>) -> Result<VoterView, ServiceError> {
        self.write(|inner| {
            let voter_id = inner.get(id)?.voter_by_token(token).ok_or(ServiceError::BadToken)?.voter_id.clone();
            let s = inner.commit(Event::BallotSubmitted { session: id.to_string(), voter_id: voter_id.clone(), ranking })?;
            Ok(s.voter_view(s.voter(&voter_id).expect("registered")))
        })
    }

    /// Closes voting and computes the group ranking. Unless `allow_missing`,
    /// every registered voter must have voted.
    pub fn close_and_rank(&self, id: &str, allow_missing: bool) -> Result<GroupRanking, ServiceError> {
        self.write(|inner| {
            let s = inner.commit(Event::Closed { session: id.to_string(), allow_missing })?;
            Ok(s.result.clone().expect("closed sessions carry a result"))
        })
    }

    pub fn result(&self, id: &str) -> Result<GroupRanking, ServiceError> {
        self.read(|inner| {
            let s = inner.get(id)?;
            s.result.clone().ok_or(ServiceError::WrongState { session: s.id.clone(), state: s.state })
        })
    }

    pub fn voter_view(&self, id: &str, token: &str) -> Result<VoterView, ServiceError> {
        self.read(|inner| {
            let s = inner.get(id)?;
            Ok(s.voter_view(s.voter_by_token(token).ok_or(ServiceError::BadToken)?))
        })
    }

    pub fn export(&self, id: &str) -> Result<SessionExport, ServiceError> {
        self.read(|inner| inner.get(id).map(Session::export))
    }

    /// The export as pretty JSON with a trailing newline.
    pub fn export_json(&self, id: &str) -> Result<String, ServiceError> {
        let mut text = serde_json::to_string_pretty(&self.export(id)?).expect("exports serialize");
        text.push('\n');
        Ok(text)
    }

    /// Recreates an exported session under a new id with fresh voter tokens.
    pub fn import(&self, snapshot: SessionExport) -> Result<ImportOutcome, ServiceError> {
        self.write(|inner| {
            let tokens: Vec<String> = snapshot.voters.iter().map(|_| new_token()).collect();
            let voters: Vec<String> = snapshot.voters.iter().map(|v| v.voter_id.clone()).collect();
            let session = inner.fresh_id();
            let s = inner.commit(Event::Imported { session, snapshot, tokens: tokens.clone() })?;
            Ok(ImportOutcome {
                session: s.summary(),
                tokens: voters.into_iter().zip(tokens).map(|(voter_id, token)| VoterToken { voter_id, token }).collect(),
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObjectiveTriple;
    use crate::service::SessionState;

    fn alternatives(labels: &str) -> Vec<SessionAlternative> {
        labels
            .chars()
            .enumerate()
            .map(|(i, c)| SessionAlternative {
                id: c.to_string(),
                objectives: ObjectiveTriple::new(100.0 - i as f64, i as f64, 2.0 * i as f64),
                plan: None,
            })
            .collect()
    }

    fn ranking(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    fn code<T: std::fmt::Debug>(r: Result<T, ServiceError>) -> &'static str {
        r.unwrap_err().code()
    }

    /// A voting session over ABCD with voters v1 (weight 1) and v2 (weight 2).
    fn voting(store: &SessionStore) -> (String, String, String) {
        let id = store.create_session("fac").unwrap().id;
        store.add_alternatives(&id, alternatives("ABCD")).unwrap();
        let t1 = store.register_voter(&id, "v1", 1.0).unwrap();
        let t2 = store.register_voter(&id, "v2", 2.0).unwrap();
        store.open_voting(&id).unwrap();
        (id, t1, t2)
    }

    #[test]
    fn create_gives_empty_drafts_with_distinct_ids() {
        let store = SessionStore::in_memory();
        let a = store.create_session("x").unwrap();
        let b = store.create_session("x").unwrap();
        assert_eq!(a.state, SessionState::Draft);
        assert!(a.alternatives.is_empty() && a.ballot_count == 0);
        assert_ne!(a.id, b.id);
        assert_eq!(store.list_sessions().len(), 2);
    }

    #[test]
    fn alternatives_only_in_draft_and_unique() {
        let store = SessionStore::in_memory();
        let id = store.create_session("x").unwrap().id;
        assert_eq!(store.add_alternatives(&id, alternatives("ABCDEFGHIJ")).unwrap().alternatives.len(), 10);
        assert_eq!(code(store.add_alternatives(&id, alternatives("A"))), "DUPLICATE");
        store.register_voter(&id, "v", 1.0).unwrap();
        store.open_voting(&id).unwrap();
        assert_eq!(code(store.add_alternatives(&id, alternatives("K"))), "WRONG_STATE");
        assert_eq!(code(store.add_alternatives("nope", alternatives("K"))), "NOT_FOUND");
    }

    #[test]
    fn voter_registration_rules() {
        let store = SessionStore::in_memory();
        let id = store.create_session("x").unwrap().id;
        assert_eq!(code(store.register_voter(&id, "v", 0.0)), "NONPOSITIVE_WEIGHT");
        assert_eq!(code(store.register_voter(&id, "v", -1.0)), "NONPOSITIVE_WEIGHT");
        let t = store.register_voter(&id, "v", 5.0).unwrap();
        assert_eq!(t.len(), 32);
        assert!(t.chars().all(|c| c.is_ascii_hexdigit()));
        assert_eq!(code(store.register_voter(&id, "v", 1.0)), "DUPLICATE");
    }

    #[test]
    fn opening_prerequisites() {
        let store = SessionStore::in_memory();
        let id = store.create_session("x").unwrap().id;
        store.add_alternatives(&id, alternatives("A")).unwrap();
        store.register_voter(&id, "v", 1.0).unwrap();
        assert_eq!(code(store.open_voting(&id)), "TOO_FEW_ALTERNATIVES");
        store.add_alternatives(&id, alternatives("B")).unwrap();
        assert_eq!(store.open_voting(&id).unwrap().state, SessionState::Voting);
        assert_eq!(code(store.open_voting(&id)), "WRONG_STATE");
        let other = store.create_session("x").unwrap().id;
        store.add_alternatives(&other, alternatives("AB")).unwrap();
        assert_eq!(code(store.open_voting(&other)), "NO_VOTERS");
    }

    #[test]
    fn ballots_replace_and_need_tokens() {
        let store = SessionStore::in_memory();
        let (id, t1, _) = voting(&store);
        store.submit_ballot(&id, &t1, ranking("ABCD")).unwrap();
        assert_eq!(store.summary(&id).unwrap().ballot_count, 1);
        let view = store.submit_ballot(&id, &t1, ranking("DCBA")).unwrap();
        assert_eq!(view.ballot, Some(ranking("DCBA")));
        assert_eq!(store.summary(&id).unwrap().ballot_count, 1);
        assert_eq!(store.session(&id).unwrap().ballots["v1"].ranking, ranking("DCBA"));
        assert_eq!(code(store.submit_ballot(&id, &"0".repeat(32), ranking("ABCD"))), "BAD_TOKEN");
        assert_eq!(code(store.submit_ballot(&id, &t1, ranking("ABC"))), "INVALID_BALLOT");
        assert_eq!(code(store.voter_view(&id, "feed")), "BAD_TOKEN");
    }

    #[test]
    fn strict_close_needs_every_ballot() {
        let store = SessionStore::in_memory();
        let (id, t1, t2) = voting(&store);
        store.submit_ballot(&id, &t1, ranking("ABCD")).unwrap();
        assert_eq!(code(store.close_and_rank(&id, false)), "MISSING_BALLOTS");
        assert_eq!(code(store.result(&id)), "WRONG_STATE");
        store.submit_ballot(&id, &t2, ranking("BACD")).unwrap();
        let result = store.close_and_rank(&id, false).unwrap();
        // A: 3 + 2*2 = 7, B: 2 + 2*3 = 8, C: 2, D: 0.
        assert_eq!(result.order(), vec!["B", "A", "C", "D"]);
        assert_eq!(result.entries[0].points, 8.0);
        assert_eq!(code(store.submit_ballot(&id, &t1, ranking("ABCD"))), "WRONG_STATE");
        assert_eq!(code(store.close_and_rank(&id, true)), "WRONG_STATE");
        assert_eq!(store.result(&id).unwrap(), result);
    }

    #[test]
    fn override_closes_with_missing_ballots() {
        let store = SessionStore::in_memory();
        let (id, t1, _) = voting(&store);
        assert_eq!(code(store.close_and_rank(&id, true)), "NO_BALLOTS");
        store.submit_ballot(&id, &t1, ranking("CABD")).unwrap();
        assert_eq!(store.close_and_rank(&id, true).unwrap().order(), vec!["C", "A", "B", "D"]);
    }

    #[test]
    fn five_equal_ballots_rank_all_ten() {
        let store = SessionStore::in_memory();
        let id = store.create_session("x").unwrap().id;
        store.add_alternatives(&id, alternatives("ABCDEFGHIJ")).unwrap();
        let tokens: Vec<String> = (0..5).map(|i| store.register_voter(&id, &format!("f{i}"), 1.0).unwrap()).collect();
        store.open_voting(&id).unwrap();
        for (i, t) in tokens.iter().enumerate() {
            let mut r = ranking("ABCDEFGHIJ");
            r.rotate_left(i);
            store.submit_ballot(&id, t, r).unwrap();
        }
        assert_eq!(store.close_and_rank(&id, false).unwrap().entries.len(), 10);
    }

    #[test]
    fn voters_see_cards_not_other_ballots() {
        let store = SessionStore::in_memory();
        let (id, t1, t2) = voting(&store);
        store.submit_ballot(&id, &t2, ranking("DCBA")).unwrap();
        let view = store.voter_view(&id, &t1).unwrap();
        assert_eq!(view.voter_id, "v1");
        assert_eq!(view.ballot, None);
        assert_eq!(view.alternatives.len(), 4);
        let summary = store.summary(&id).unwrap();
        assert_eq!(summary.voters.iter().map(|v| v.has_voted).collect::<Vec<_>>(), vec![false, true]);
        let text = serde_json::to_string(&summary).unwrap();
        assert!(!text.contains(&t1) && !text.contains("DCBA"));
    }

    #[test]
    fn export_has_no_tokens_and_imports_back() {
        let store = SessionStore::in_memory();
        let (id, t1, t2) = voting(&store);
        store.submit_ballot(&id, &t1, ranking("ABCD")).unwrap();
        store.submit_ballot(&id, &t2, ranking("BADC")).unwrap();
        store.close_and_rank(&id, false).unwrap();
        let text = store.export_json(&id).unwrap();
        assert!(!text.contains(&t1) && !text.contains(&t2) && !text.contains("token"));
        assert_eq!(text, store.export_json(&id).unwrap());
        let outcome = store.import(store.export(&id).unwrap()).unwrap();
        assert_ne!(outcome.session.id, id);
        assert_eq!(outcome.tokens.len(), 2);
        let mut again = store.export(&outcome.session.id).unwrap();
        again.id = id.clone();
        assert_eq!(again, store.export(&id).unwrap());
    }

    #[test]
    fn import_rejects_inconsistent_results() {
        let store = SessionStore::in_memory();
        let (id, t1, t2) = voting(&store);
        store.submit_ballot(&id, &t1, ranking("ABCD")).unwrap();
        store.submit_ballot(&id, &t2, ranking("BADC")).unwrap();
        store.close_and_rank(&id, false).unwrap();
        let mut snapshot = store.export(&id).unwrap();
        snapshot.result.as_mut().unwrap().entries.swap(0, 1);
        assert_eq!(code(store.import(snapshot)), "BAD_DOCUMENT");
        assert_eq!(store.list_sessions().len(), 1);
    }

    fn scripted(store: &SessionStore) -> String {
        let (id, t1, t2) = voting(store);
        store.submit_ballot(&id, &t1, ranking("ABCD")).unwrap();
        store.submit_ballot(&id, &t2, ranking("CBAD")).unwrap();
        id
    }

    #[test]
    fn restart_restores_sessions_and_tokens() {
        let dir = tempfile::tempdir().unwrap();
        let (id, before, token) = {
            let store = SessionStore::open(dir.path()).unwrap();
            let id = scripted(&store);
            let token = store.register_voter(&id, "late", 1.0).unwrap();
            let text = store.export_json(&id).unwrap();
            (id, text, token)
        };
        let store = SessionStore::open(dir.path()).unwrap();
        assert_eq!(store.export_json(&id).unwrap(), before);
        store.submit_ballot(&id, &token, ranking("DABC")).unwrap();
        store.close_and_rank(&id, false).unwrap();
        assert_eq!(store.create_session("y").unwrap().id, "s2");
    }

    #[test]
    fn torn_last_line_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let id = scripted(&SessionStore::open(dir.path()).unwrap());
        let path = dir.path().join(EVENT_LOG_FILE);
        let mut bytes = fs::read(&path).unwrap();
        let good = bytes.len();
        bytes.extend_from_slice(br#"{"event":"closed","sess"#);
        fs::write(&path, &bytes).unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        assert_eq!(store.summary(&id).unwrap().state, SessionState::Voting);
        assert_eq!(fs::metadata(&path).unwrap().len() as usize, good);
        store.close_and_rank(&id, false).unwrap();
        drop(store);
        let store = SessionStore::open(dir.path()).unwrap();
        assert_eq!(store.summary(&id).unwrap().state, SessionState::Closed);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        scripted(&SessionStore::open(dir.path()).unwrap());
        let path = dir.path().join(EVENT_LOG_FILE);
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.insert(1, "not json");
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        assert!(matches!(SessionStore::open(dir.path()), Err(ServiceError::CorruptLog { line: 2, .. })));
    }

    #[test]
    fn unusable_directory_fails_to_open() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        let err = SessionStore::open(&file.join("state")).err().unwrap();
        assert_eq!(err.code(), "IO");
        assert!(err.to_string().contains("plain"));
    }
}
