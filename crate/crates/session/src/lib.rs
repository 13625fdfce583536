//! Interactive learning and verification sessions, persisted as event logs
//! and served over HTTP.

pub mod error;
pub mod http;
pub mod manager;
pub mod model;
pub mod store;

pub use error::SessionError;
pub use http::{router, router_with_assets, serve};
pub use manager::SessionManager;
pub use model::{Mode, OracleKind, PendingQuestion, Session, SessionRequest, SessionResult, Status, TranscriptView};

/// Environment variable that overrides the data directory.
pub const DATA_DIR_ENV: &str = "QHORN_DATA";
