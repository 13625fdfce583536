//! Membership oracles: simulated answers, counting/transcript wrapper, and
//! replay checking.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Question;
use crate::query::{Label, QhornQuery};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle closed")]
    Closed,
    #[error("oracle failure: {0}")]
    Failed(String),
}

/// Which part of a run asked a question.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    HeadClassification,
    BodySearch,
    Existential,
    Prune,
    Verification,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::HeadClassification => "head-classification",
            Phase::BodySearch => "body-search",
            Phase::Existential => "existential",
            Phase::Prune => "prune",
            Phase::Verification => "verification",
        })
    }
}

pub trait MembershipOracle {
    fn ask(&mut self, question: &Question, phase: Phase) -> Result<Label, OracleError>;
}

impl<O: MembershipOracle + ?Sized> MembershipOracle for &mut O {
    fn ask(&mut self, question: &Question, phase: Phase) -> Result<Label, OracleError> {
        (**self).ask(question, phase)
    }
}

impl<O: MembershipOracle + ?Sized> MembershipOracle for Box<O> {
    fn ask(&mut self, question: &Question, phase: Phase) -> Result<Label, OracleError> {
        (**self).ask(question, phase)
    }
}

/// Answers by evaluating a hidden target query.
#[derive(Clone, Debug)]
pub struct SimulatedOracle {
    target: QhornQuery,
}

impl SimulatedOracle {
    pub fn new(target: QhornQuery) -> SimulatedOracle {
        SimulatedOracle { target }
    }

    pub fn target(&self) -> &QhornQuery {
        &self.target
    }
}

pub fn simulated_oracle(target: QhornQuery) -> SimulatedOracle {
    SimulatedOracle::new(target)
}

impl MembershipOracle for SimulatedOracle {
    fn ask(&mut self, question: &Question, _phase: Phase) -> Result<Label, OracleError> {
        self.target.evaluate(question).map_err(|e| OracleError::Failed(e.to_string()))
    }
}

/// Adapts a closure, handy for scripted answers.
pub struct FnOracle<F>(pub F);

impl<F: FnMut(&Question, Phase) -> Result<Label, OracleError>> MembershipOracle for FnOracle<F> {
    fn ask(&mut self, question: &Question, phase: Phase) -> Result<Label, OracleError> {
        (self.0)(question, phase)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub questions: usize,
    pub tuples: usize,
    pub max_tuples: usize,
}

impl OracleStats {
    pub fn record(&mut self, question: &Question) {
        self.questions += 1;
        self.tuples += question.len();
        self.max_tuples = self.max_tuples.max(question.len());
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub i: usize,
    #[serde(flatten)]
    pub question: Question,
    pub label: Label,
    pub phase: Phase,
}

impl TranscriptEntry {
    pub fn tuple_count(&self) -> usize {
        self.question.len()
    }

    /// One JSON line, `{"i":0,"tuples":[…],"label":"answer","phase":"body-search"}`.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript entry serializes")
    }
}

/// Counts questions and records a transcript; labels pass through unchanged.
#[derive(Debug)]
pub struct CountingOracle<O> {
    inner: O,
    stats: OracleStats,
    transcript: Vec<TranscriptEntry>,
}

impl<O: MembershipOracle> CountingOracle<O> {
    pub fn new(inner: O) -> CountingOracle<O> {
        CountingOracle { inner, stats: OracleStats::default(), transcript: Vec::new() }
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn into_parts(self) -> (O, OracleStats, Vec<TranscriptEntry>) {
        (self.inner, self.stats, self.transcript)
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

pub fn counting_wrapper<O: MembershipOracle>(inner: O) -> CountingOracle<O> {
    CountingOracle::new(inner)
}

impl<O: MembershipOracle> MembershipOracle for CountingOracle<O> {
    fn ask(&mut self, question: &Question, phase: Phase) -> Result<Label, OracleError> {
        let label = self.inner.ask(question, phase)?;
        self.stats.record(question);
        self.transcript.push(TranscriptEntry { i: self.transcript.len(), question: question.clone(), label, phase });
        Ok(label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub i: usize,
    pub question: Question,
    pub recorded: Label,
    pub expected: Label,
}

/// Transcript entries whose recorded label disagrees with a query.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InconsistencyReport {
    pub checked: usize,
    pub conflicts: Vec<Conflict>,
}

impl InconsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.conflicts.is_empty()
    }
}

pub fn replay(transcript: &[TranscriptEntry], query: &QhornQuery) -> InconsistencyReport {
    let conflicts = transcript
        .iter()
        .filter_map(|e| {
            let expected = query.evaluate(&e.question).ok()?;
            (expected != e.label).then(|| Conflict { i: e.i, question: e.question.clone(), recorded: e.label, expected })
        })
        .collect();
    InconsistencyReport { checked: transcript.len(), conflicts }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> QhornQuery {
        QhornQuery::parse_shorthand("∀x1x4→x5 ∀x3x4→x5 ∀x1x2→x6 ∃x1x2x3 ∃x2x3x4 ∃x1x2x5 ∃x2x3x5x6", 6).unwrap()
    }

    #[test]
    fn simulated_answers() {
        let mut o = simulated_oracle(example());
        let ask = |o: &mut SimulatedOracle, ts: &[&str]| o.ask(&Question::parse(ts).unwrap(), Phase::Verification).unwrap();
        assert_eq!(ask(&mut o, &["111111", "100101"]), Label::NonAnswer);
        assert_eq!(ask(&mut o, &["111111"]), Label::Answer);
        assert_eq!(o.ask(&Question::empty(6).unwrap(), Phase::Existential).unwrap(), Label::NonAnswer);
    }

    #[test]
    fn counting_stats_and_transcript() {
        let mut c = counting_wrapper(simulated_oracle(example()));
        assert_eq!(c.stats(), OracleStats::default());
        for ts in [["111111", "100101"], ["111111", "011111"], ["111111", "000000"]] {
            c.ask(&Question::parse(&ts).unwrap(), Phase::BodySearch).unwrap();
        }
        assert_eq!(c.stats(), OracleStats { questions: 3, tuples: 6, max_tuples: 2 });
        assert_eq!(
            c.transcript()[0].to_json_line(),
            r#"{"i":0,"tuples":["100101","111111"],"label":"non-answer","phase":"body-search"}"#
        );
        assert!(replay(c.transcript(), &example()).is_consistent());
        let other = QhornQuery::parse_shorthand("∃x1", 6).unwrap();
        assert!(!replay(c.transcript(), &other).is_consistent());
        let back: TranscriptEntry = serde_json::from_str(&c.transcript()[1].to_json_line()).unwrap();
        assert_eq!(back, c.transcript()[1]);
    }
}
