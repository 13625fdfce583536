//! Session lifecycle: launching runs, answering, rolling back, persistence.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use qhorn_core::bridge::Factory;
use qhorn_core::oracle::replay;
use qhorn_core::verify::build_verification_set_with;
use qhorn_core::{
    counting_wrapper, learn_qhorn1, learn_rp, run_verification, simulated_oracle, Interactive, Label,
    OracleStats, QhornQuery, QueryClass, RpOptions, Step, TranscriptEntry,
};

use crate::error::SessionError;
use crate::model::{Mode, OracleKind, PendingQuestion, Session, SessionRequest, SessionResult, Status, TranscriptView};
use crate::store::{read_events, Event, EventLog};

/// Owns every session; safe to share between request handlers.
///
/// Calls that advance a run block until the run asks its next question or
/// finishes, so async callers should go through `spawn_blocking`.
pub struct SessionManager {
    data_dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<Entry>>>,
}

struct Entry {
    runner: Mutex<Runner>,
    // last committed state; readers never wait on a run
    snapshot: RwLock<Session>,
}

struct Runner {
    id: String,
    request: SessionRequest,
    n: usize,
    labels: Vec<String>,
    verification_items: Option<usize>,
    run: Option<Interactive<SessionResult>>,
    outcome: Option<Result<SessionResult, String>>,
    discarded: Vec<TranscriptEntry>,
    log: Option<EventLog>,
}

fn learned(query: QhornQuery) -> SessionResult {
    SessionResult::Learned { shorthand: query.to_string(), query, consistency: Default::default() }
}

/// The run a request describes, checked before anything is launched.
fn prepare(request: &SessionRequest) -> Result<(usize, Factory<SessionResult>, Option<usize>), SessionError> {
    let n = request.validate()?;
    Ok(match request.mode {
        Mode::LearnQhorn1 => {
            if let Some(t) = &request.target {
                QueryClass::Qhorn1.check(t)?;
            }
            (n, Arc::new(move |o| learn_qhorn1(o, n).map(learned)), None)
        }
        Mode::LearnRp => {
            if let Some(t) = &request.target {
                QueryClass::Rp.check(t)?;
            }
            let options = RpOptions { theta_cap: request.theta_cap.unwrap_or(RpOptions::default().theta_cap), ..RpOptions::default() };
            (n, Arc::new(move |o| learn_rp(o, n, options).map(learned)), None)
        }
        Mode::Verify => {
            let query = request.query.as_ref().expect("validated");
            let items = Arc::new(build_verification_set_with(query, request.a3_mode.unwrap_or_default())?);
            let size = items.len();
            let factory: Factory<SessionResult> =
                Arc::new(move |o| run_verification(o, &items).map(|report| SessionResult::Verification { report }));
            (n, factory, Some(size))
        }
    })
}

fn stats_of(transcript: &[TranscriptEntry]) -> OracleStats {
    let mut stats = OracleStats::default();
    for e in transcript {
        stats.record(&e.question);
    }
    stats
}

impl Runner {
    fn start(id: String, request: SessionRequest) -> Result<(Runner, Session), SessionError> {
        let (n, factory, verification_items) = prepare(&request)?;
        let labels = request.labels(n);
        let mut runner = Runner {
            id,
            request,
            n,
            labels,
            verification_items,
            run: None,
            outcome: None,
            discarded: Vec::new(),
            log: None,
        };
        let snapshot = match runner.request.oracle {
            OracleKind::Simulated => {
                let request = &runner.request;
                let answers = request.target.as_ref().or(request.intended.as_ref()).or(request.query.as_ref());
                let mut oracle = counting_wrapper(simulated_oracle(answers.expect("validated").clone()));
                runner.outcome = Some(factory(&mut oracle).map_err(|e| e.to_string()));
                let (_, _, transcript) = oracle.into_parts();
                runner.finished(transcript)
            }
            OracleKind::Interactive => {
                runner.run = Some(Interactive::with_factory(factory, Vec::new()));
                runner.advance()
            }
        };
        Ok((runner, snapshot))
    }

    fn view(&self, status: Status, pending: Option<PendingQuestion>, transcript: Vec<TranscriptEntry>) -> Session {
        let (result, error) = match &self.outcome {
            Some(Ok(r)) => (Some(r.clone()), None),
            Some(Err(e)) => (None, Some(e.clone())),
            None => (None, None),
        };
        Session {
            id: self.id.clone(),
            mode: self.request.mode,
            n: self.n,
            propositions: self.labels.clone(),
            oracle: self.request.oracle,
            status,
            pending,
            questions_answered: transcript.len(),
            stats: stats_of(&transcript),
            transcript,
            discarded: self.discarded.clone(),
            result,
            error,
            verification_items: self.verification_items,
        }
    }

    fn finished(&mut self, transcript: Vec<TranscriptEntry>) -> Session {
        if let Some(Ok(SessionResult::Learned { query, consistency, .. })) = &mut self.outcome {
            *consistency = replay(&transcript, query);
        }
        let status = match &self.outcome {
            Some(Ok(_)) => Status::Done,
            _ => Status::Failed,
        };
        self.view(status, None, transcript)
    }

    /// Waits for the run's next question or its result.
    fn advance(&mut self) -> Session {
        let run = self.run.as_ref().expect("interactive run");
        match run.wait() {
            Step::Question { index, question, phase } => {
                let pending = PendingQuestion::render(index, phase, &question, &self.labels);
                let transcript = run.transcript();
                self.view(Status::AwaitingAnswer, Some(pending), transcript)
            }
            Step::Done => {
                if let Some(r) = run.take_result() {
                    self.outcome = Some(r.map_err(|e| e.to_string()));
                }
                let transcript = run.transcript();
                self.finished(transcript)
            }
        }
    }

    fn log(&mut self, event: &Event) -> Result<(), SessionError> {
        match &mut self.log {
            Some(log) => log.append(event),
            None => Ok(()),
        }
    }

    fn answer(&mut self, current: &Session, answer: bool, index: Option<usize>) -> Result<(), SessionError> {
        let (Some(_), Some(pending)) = (&self.run, &current.pending) else {
            return Err(SessionError::NoPendingQuestion);
        };
        if index.is_some_and(|i| i != pending.index) {
            return Err(SessionError::StaleAnswer { given: index.unwrap_or_default(), pending: pending.index });
        }
        let i = pending.index;
        self.log(&Event::Answer { i, answer })?;
        let run = self.run.as_ref().expect("checked above");
        run.submit(Label::from_bool(answer))?;
        Ok(())
    }

    fn rollback(&mut self, to: usize) -> Result<(), SessionError> {
        let Some(run) = &mut self.run else { return Err(SessionError::NotInteractive) };
        let transcript = run.transcript();
        if to > transcript.len() {
            return Err(SessionError::RollbackOutOfRange { to, answered: transcript.len() });
        }
        self.log(&Event::Rollback { to })?;
        let run = self.run.as_mut().expect("checked above");
        run.rollback(to)?;
        self.discarded.extend(transcript.into_iter().skip(to));
        self.outcome = None;
        Ok(())
    }
}

impl SessionManager {
    /// Sessions that live only as long as the manager.
    pub fn in_memory() -> SessionManager {
        SessionManager { data_dir: None, sessions: RwLock::new(HashMap::new()) }
    }

    /// Persists sessions under `dir`, restoring every session already logged there.
    pub fn open(dir: impl AsRef<Path>) -> Result<SessionManager, SessionError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        let mut sessions = HashMap::new();
        for path in paths {
            let (id, entry) = restore(&path)?;
            sessions.insert(id, Arc::new(entry));
        }
        Ok(SessionManager { data_dir: Some(dir.to_path_buf()), sessions: RwLock::new(sessions) })
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.data_dir.as_deref()
    }

    fn entry(&self, id: &str) -> Result<Arc<Entry>, SessionError> {
        let sessions = self.sessions.read().unwrap_or_else(|e| e.into_inner());
        sessions.get(id).cloned().ok_or_else(|| SessionError::UnknownSession(id.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().unwrap_or_else(|e| e.into_inner()).keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn create(&self, request: SessionRequest) -> Result<Session, SessionError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        // reject bad requests before anything touches the disk
        prepare(&request)?;
        let log = match &self.data_dir {
            Some(dir) => {
                let mut log = EventLog::create(dir, &id)?;
                log.append(&Event::Created { id: id.clone(), request: Box::new(request.clone()) })?;
                Some(log)
            }
            None => None,
        };
        let (mut runner, snapshot) = Runner::start(id.clone(), request)?;
        runner.log = log;
        let entry = Entry { runner: Mutex::new(runner), snapshot: RwLock::new(snapshot.clone()) };
        self.sessions.write().unwrap_or_else(|e| e.into_inner()).insert(id, Arc::new(entry));
        Ok(snapshot)
    }

    pub fn get(&self, id: &str) -> Result<Session, SessionError> {
        Ok(self.entry(id)?.snapshot())
    }

    pub fn transcript(&self, id: &str) -> Result<TranscriptView, SessionError> {
        let s = self.get(id)?;
        Ok(TranscriptView { id: s.id, entries: s.transcript, discarded: s.discarded })
    }

    pub fn result(&self, id: &str) -> Result<SessionResult, SessionError> {
        let s = self.get(id)?;
        s.result.ok_or_else(|| SessionError::NotDone { id: s.id, status: s.status.to_string() })
    }

    /// Answers the pending question. With `index`, the answer is refused
    /// unless that question is still the pending one.
    pub fn answer(&self, id: &str, answer: bool, index: Option<usize>) -> Result<Session, SessionError> {
        self.entry(id)?.answer(answer, index)
    }

    /// Drops every answer from `to` on and resumes from question `to`.
    pub fn rollback(&self, id: &str, to: usize) -> Result<Session, SessionError> {
        self.entry(id)?.rollback(to)
    }
}

impl Entry {
    fn snapshot(&self) -> Session {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn commit(&self, s: &Session) {
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = s.clone();
    }

    fn mark_running(&self) {
        let mut s = self.snapshot.write().unwrap_or_else(|e| e.into_inner());
        s.status = Status::Running;
        s.pending = None;
    }

    fn answer(&self, answer: bool, index: Option<usize>) -> Result<Session, SessionError> {
        let mut runner = self.runner.lock().unwrap_or_else(|e| e.into_inner());
        runner.answer(&self.snapshot(), answer, index)?;
        self.mark_running();
        let s = runner.advance();
        self.commit(&s);
        Ok(s)
    }

    fn rollback(&self, to: usize) -> Result<Session, SessionError> {
        let mut runner = self.runner.lock().unwrap_or_else(|e| e.into_inner());
        runner.rollback(to)?;
        self.mark_running();
        let s = runner.advance();
        self.commit(&s);
        Ok(s)
    }
}

/// Rebuilds a session by replaying its log through the live code path.
fn restore(path: &Path) -> Result<(String, Entry), SessionError> {
    let corrupt = |reason: String| SessionError::CorruptLog { path: path.display().to_string(), reason };
    let mut events = read_events(path)?.into_iter();
    let Some(Event::Created { id, request }) = events.next() else { unreachable!("read_events checks the head") };
    let (runner, snapshot) = Runner::start(id.clone(), *request).map_err(|e| corrupt(e.to_string()))?;
    let entry = Entry { runner: Mutex::new(runner), snapshot: RwLock::new(snapshot) };
    for event in events {
        match event {
            Event::Answer { i, answer } => entry.answer(answer, Some(i)),
            Event::Rollback { to } => entry.rollback(to),
            Event::Created { .. } => return Err(corrupt("repeated `created` event".into())),
        }
        .map_err(|e| corrupt(e.to_string()))?;
    }
    entry.runner.lock().unwrap_or_else(|e| e.into_inner()).log = Some(EventLog::open_append(path)?);
    Ok((id, entry))
}
