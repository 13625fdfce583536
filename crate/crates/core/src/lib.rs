//! Learning and verifying quantified Boolean (qhorn) queries from
//! membership questions.
//!
//! A question is a set of Boolean tuples; an oracle labels it as an answer
//! or a non-answer. [`learn_qhorn1`] and [`learn_rp`] recover a hidden query
//! from such labels, and [`build_verification_set`] derives a short list of
//! questions that certifies a given query.

pub mod bits;
pub mod bridge;
pub mod brute;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod qhorn1;
pub mod query;
pub mod rp;
pub mod search;
pub mod verify;

pub use bits::{format_tuple, parse_tuple, Question, Tuple, VarId, VarSet, MAX_ARITY};
pub use bridge::{Interactive, Step};
pub use brute::{equivalent_bruteforce, equivalent_sampled, CompiledQuery};
pub use error::QhornError;
pub use oracle::{
    counting_wrapper, replay, simulated_oracle, CountingOracle, FnOracle, InconsistencyReport, MembershipOracle,
    OracleError, OracleStats, Phase, SimulatedOracle, TranscriptEntry,
};
pub use qhorn1::learn_qhorn1;
pub use query::{
    causal_density, equivalent, evaluate, existential_distinguishing_tuples, head_closure, is_qhorn1,
    is_role_preserving, normalize, universal_distinguishing_tuple, violates_universal, ExistentialConj, Label,
    NormalizedQuery, QhornQuery, QueryClass, UniversalHorn,
};
pub use rp::{learn_rp, RpOptions};
pub use verify::{
    build_verification_set, run_verification, verification_set_size, A3Mode, Discrepancy, ItemKind, Verdict,
    VerificationItem, VerificationReport,
};
