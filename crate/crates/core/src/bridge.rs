//! Runs a learner or verifier on its own thread and turns its oracle calls
//! into pending questions that a caller answers one at a time.
//!
//! Runs are deterministic given the answers, so a rollback restarts the run
//! and replays the kept prefix of the transcript without surfacing it.

use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread::JoinHandle;

use crate::bits::Question;
use crate::error::QhornError;
use crate::oracle::{MembershipOracle, OracleError, Phase, TranscriptEntry};
use crate::query::Label;

pub type Factory<R> = Arc<dyn Fn(&mut dyn MembershipOracle) -> Result<R, QhornError> + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Question { index: usize, question: Question, phase: Phase },
    Done,
}

struct State<R> {
    pending: Option<(Question, Phase)>,
    answer: Option<Label>,
    closed: bool,
    result: Option<Result<R, QhornError>>,
    finished: bool,
    transcript: Vec<TranscriptEntry>,
}

struct Shared<R> {
    state: Mutex<State<R>>,
    cond: Condvar,
}

impl<R> Shared<R> {
    fn lock(&self) -> MutexGuard<'_, State<R>> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }
}

struct BridgeOracle<R> {
    shared: Arc<Shared<R>>,
    replay: std::vec::IntoIter<TranscriptEntry>,
}

impl<R> MembershipOracle for BridgeOracle<R> {
    fn ask(&mut self, question: &Question, phase: Phase) -> Result<Label, OracleError> {
        if let Some(e) = self.replay.next() {
            if e.question == *question {
                let mut st = self.shared.lock();
                let i = st.transcript.len();
                st.transcript.push(TranscriptEntry { i, question: question.clone(), label: e.label, phase });
                return Ok(e.label);
            }
            // diverged: the rest of the recorded answers no longer apply
            self.replay = Vec::new().into_iter();
        }
        let mut st = self.shared.lock();
        if st.closed {
            return Err(OracleError::Closed);
        }
        st.pending = Some((question.clone(), phase));
        st.answer = None;
        self.shared.cond.notify_all();
        while st.answer.is_none() && !st.closed {
            st = self.shared.cond.wait(st).unwrap_or_else(|e| e.into_inner());
        }
        if st.closed {
            return Err(OracleError::Closed);
        }
        let label = st.answer.take().expect("answer present");
        let i = st.transcript.len();
        st.transcript.push(TranscriptEntry { i, question: question.clone(), label, phase });
        Ok(label)
    }
}

/// A learner run paused at each question.
pub struct Interactive<R: Send + 'static> {
    factory: Factory<R>,
    shared: Arc<Shared<R>>,
    handle: Option<JoinHandle<()>>,
}

impl<R: Send + 'static> Interactive<R> {
    pub fn start<F>(f: F) -> Interactive<R>
    where
        F: Fn(&mut dyn MembershipOracle) -> Result<R, QhornError> + Send + Sync + 'static,
    {
        Self::with_factory(Arc::new(f), Vec::new())
    }

    /// Starts a run that first answers from `prefix` for as long as the
    /// learner asks the same questions.
    pub fn with_factory(factory: Factory<R>, prefix: Vec<TranscriptEntry>) -> Interactive<R> {
        let shared = Arc::new(Shared {
            state: Mutex::new(State {
                pending: None,
                answer: None,
                closed: false,
                result: None,
                finished: false,
                transcript: Vec::new(),
            }),
            cond: Condvar::new(),
        });
        let thread_shared = shared.clone();
        let thread_factory = factory.clone();
        let handle = std::thread::spawn(move || {
            let mut oracle = BridgeOracle { shared: thread_shared.clone(), replay: prefix.into_iter() };
            let result = thread_factory(&mut oracle);
            let mut st = thread_shared.lock();
            st.pending = None;
            st.result = Some(result);
            st.finished = true;
            thread_shared.cond.notify_all();
        });
        Interactive { factory, shared, handle: Some(handle) }
    }

    /// Blocks until the run asks a question or finishes.
    pub fn wait(&self) -> Step {
        let mut st = self.shared.lock();
        loop {
            if let Some((question, phase)) = &st.pending {
                return Step::Question { index: st.transcript.len(), question: question.clone(), phase: *phase };
            }
            if st.finished {
                return Step::Done;
            }
            st = self.shared.cond.wait(st).unwrap_or_else(|e| e.into_inner());
        }
    }

    pub fn submit(&self, label: Label) -> Result<(), QhornError> {
        let mut st = self.shared.lock();
        if st.pending.is_none() || st.closed {
            return Err(QhornError::Precondition("no pending question".into()));
        }
        st.pending = None;
        st.answer = Some(label);
        self.shared.cond.notify_all();
        Ok(())
    }

    /// Moves the result out once the run is done.
    pub fn take_result(&self) -> Option<Result<R, QhornError>> {
        self.shared.lock().result.take()
    }

    pub fn is_finished(&self) -> bool {
        self.shared.lock().finished
    }

    /// Answered questions so far, in order.
    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.shared.lock().transcript.clone()
    }

    pub fn answered(&self) -> usize {
        self.shared.lock().transcript.len()
    }

    /// Discards every answer from index `to` on and restarts the run.
    pub fn rollback(&mut self, to: usize) -> Result<(), QhornError> {
        let mut prefix = self.transcript();
        if to > prefix.len() {
            return Err(QhornError::Precondition(format!("cannot roll back to {to}: only {} answers", prefix.len())));
        }
        prefix.truncate(to);
        self.close();
        *self = Self::with_factory(self.factory.clone(), prefix);
        Ok(())
    }

    /// Stops the run; a learner blocked on a question fails with `OracleError::Closed`.
    pub fn close(&mut self) {
        {
            let mut st = self.shared.lock();
            st.closed = true;
            self.shared.cond.notify_all();
        }
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl<R: Send + 'static> Drop for Interactive<R> {
    fn drop(&mut self) {
        self.close();
    }
}
