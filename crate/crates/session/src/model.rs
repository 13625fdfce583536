//! Requests, snapshots and result views exchanged with clients.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use qhorn_core::oracle::InconsistencyReport;
use qhorn_core::{A3Mode, OracleStats, Phase, QhornQuery, Question, TranscriptEntry, VerificationReport, MAX_ARITY};

use crate::error::SessionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    LearnQhorn1,
    LearnRp,
    Verify,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Simulated,
    #[default]
    Interactive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    AwaitingAnswer,
    Running,
    Done,
    Failed,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::AwaitingAnswer => "awaiting_answer",
            Status::Running => "running",
            Status::Done => "done",
            Status::Failed => "failed",
        })
    }
}

/// Body of `POST /api/sessions`.
///
/// Learning needs `n`; a simulated learner also needs `target`. Verification
/// needs `query`; a simulated verifier answers from `intended`, or from
/// `query` itself when that is absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRequest {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub oracle: OracleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<QhornQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<QhornQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intended: Option<QhornQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propositions: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a3_mode: Option<A3Mode>,
}

impl SessionRequest {
    pub fn learn(mode: Mode, n: usize, oracle: OracleKind) -> SessionRequest {
        SessionRequest {
            mode,
            n: Some(n),
            oracle,
            target: None,
            query: None,
            intended: None,
            propositions: None,
            theta_cap: None,
            a3_mode: None,
        }
    }

    pub fn verify(query: QhornQuery, oracle: OracleKind) -> SessionRequest {
        SessionRequest { query: Some(query), n: None, ..SessionRequest::learn(Mode::Verify, 0, oracle) }
    }

    pub fn with_target(mut self, target: QhornQuery) -> SessionRequest {
        self.target = Some(target);
        self
    }

    pub fn with_intended(mut self, intended: QhornQuery) -> SessionRequest {
        self.intended = Some(intended);
        self
    }

    pub fn with_propositions(mut self, propositions: Vec<String>) -> SessionRequest {
        self.propositions = Some(propositions);
        self
    }

    /// Checks the request and returns its arity.
    pub(crate) fn validate(&self) -> Result<usize, SessionError> {
        let invalid = |m: &str| Err(SessionError::InvalidRequest(m.to_string()));
        let n = match self.mode {
            Mode::Verify => {
                let Some(q) = &self.query else { return invalid("verify mode needs `query`") };
                if self.n.is_some_and(|n| n != q.arity()) {
                    return invalid("`n` differs from the arity of `query`");
                }
                if self.target.is_some() {
                    return invalid("verify mode takes `intended`, not `target`");
                }
                if let Some(i) = &self.intended {
                    if i.arity() != q.arity() {
                        return invalid("`intended` and `query` differ in arity");
                    }
                    if self.oracle == OracleKind::Interactive {
                        return invalid("`intended` only applies to a simulated oracle");
                    }
                }
                q.arity()
            }
            Mode::LearnQhorn1 | Mode::LearnRp => {
                let Some(n) = self.n else { return invalid("learning needs `n`") };
                if n == 0 || n > MAX_ARITY {
                    return Err(qhorn_core::QhornError::ArityOutOfRange(n).into());
                }
                if self.query.is_some() || self.intended.is_some() {
                    return invalid("learning takes `target`, not `query`/`intended`");
                }
                match (&self.target, self.oracle) {
                    (None, OracleKind::Simulated) => return invalid("a simulated oracle needs `target`"),
                    (Some(_), OracleKind::Interactive) => return invalid("an interactive oracle takes no `target`"),
                    (Some(t), _) if t.arity() != n => return invalid("`n` differs from the arity of `target`"),
                    _ => {}
                }
                n
            }
        };
        if self.theta_cap.is_some() && self.mode != Mode::LearnRp {
            return invalid("`theta_cap` only applies to learn-rp");
        }
        if self.a3_mode.is_some() && self.mode != Mode::Verify {
            return invalid("`a3_mode` only applies to verify");
        }
        if let Some(p) = &self.propositions {
            if p.len() != n {
                return invalid(&format!("{} propositions for arity {n}", p.len()));
            }
        }
        Ok(n)
    }

    /// Proposition names shown to the user, `x1..xn` when none are given.
    pub(crate) fn labels(&self, n: usize) -> Vec<String> {
        let from_query = [&self.query, &self.target].into_iter().flatten().find_map(|q| q.vocabulary());
        match (&self.propositions, from_query) {
            (Some(p), _) => p.clone(),
            (None, Some(v)) => v.to_vec(),
            (None, None) => (1..=n).map(|i| format!("x{i}")).collect(),
        }
    }
}

/// The question a session is waiting on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PendingQuestion {
    pub index: usize,
    pub phase: Phase,
    pub tuples: Vec<String>,
    /// One object per tuple, proposition name to truth value.
    pub rows: Vec<Map<String, Value>>,
}

impl PendingQuestion {
    pub fn render(index: usize, phase: Phase, question: &Question, labels: &[String]) -> PendingQuestion {
        let rows = question
            .iter()
            .map(|t| {
                labels
                    .iter()
                    .enumerate()
                    .map(|(i, name)| (name.clone(), Value::Bool(t.true_set().bits() >> i & 1 == 1)))
                    .collect()
            })
            .collect();
        PendingQuestion { index, phase, tuples: question.to_strings(), rows }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SessionResult {
    Learned {
        query: QhornQuery,
        shorthand: String,
        /// Answers in the transcript that the learned query labels differently.
        consistency: InconsistencyReport,
    },
    Verification {
        report: VerificationReport,
    },
}

/// Snapshot returned by every endpoint that reads or changes a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub mode: Mode,
    pub n: usize,
    pub propositions: Vec<String>,
    pub oracle: OracleKind,
    pub status: Status,
    pub pending: Option<PendingQuestion>,
    pub questions_answered: usize,
    pub transcript: Vec<TranscriptEntry>,
    /// Answers dropped by rollbacks, oldest first.
    pub discarded: Vec<TranscriptEntry>,
    pub result: Option<SessionResult>,
    pub error: Option<String>,
    pub stats: OracleStats,
    /// Size of the verification set, in verify mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification_items: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptView {
    pub id: String,
    pub entries: Vec<TranscriptEntry>,
    pub discarded: Vec<TranscriptEntry>,
}
