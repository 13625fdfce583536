use thiserror::Error;

use qhorn_core::QhornError;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Query(#[from] QhornError),
    #[error("no pending question")]
    NoPendingQuestion,
    #[error("stale answer: question {given} was answered already, pending is {pending}")]
    StaleAnswer { given: usize, pending: usize },
    #[error("cannot roll back to {to}: {answered} questions answered")]
    RollbackOutOfRange { to: usize, answered: usize },
    #[error("sessions with a simulated oracle cannot be rolled back")]
    NotInteractive,
    #[error("session {id} has no result yet (status {status})")]
    NotDone { id: String, status: String },
    #[error("corrupt event log {path}: {reason}")]
    CorruptLog { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SessionError {
    /// Errors caused by the caller rather than the service.
    pub fn is_client_error(&self) -> bool {
        !matches!(self, SessionError::Io(_) | SessionError::CorruptLog { .. })
    }
}
