//! qhorn queries: representation, evaluation and the shorthand notation.

mod class;
mod json;
mod normal;
mod shorthand;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{check_arity, Question, Tuple, VarId, VarSet};
use crate::error::QhornError;

pub use class::{causal_density, is_qhorn1, is_role_preserving, QueryClass};
pub use json::QueryJson;
pub use normal::{equivalent, existential_distinguishing_tuples, normalize, universal_distinguishing_tuple, NormalizedQuery};

/// Response to a membership question.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Answer,
    NonAnswer,
}

impl Label {
    pub fn from_bool(answer: bool) -> Label {
        if answer {
            Label::Answer
        } else {
            Label::NonAnswer
        }
    }

    pub fn is_answer(self) -> bool {
        self == Label::Answer
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Answer => "answer",
            Label::NonAnswer => "non-answer",
        })
    }
}

/// `∀ body → head`. An empty body is the bodyless form `∀head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UniversalHorn {
    pub body: VarSet,
    pub head: VarId,
}

impl UniversalHorn {
    pub fn new(body: VarSet, head: VarId) -> UniversalHorn {
        UniversalHorn { body, head }
    }

    pub fn bodyless(head: VarId) -> UniversalHorn {
        UniversalHorn { body: VarSet::EMPTY, head }
    }

    pub fn is_bodyless(&self) -> bool {
        self.body.is_empty()
    }

    /// Variables of the implied guarantee clause, `body ∪ {head}`.
    pub fn guarantee(&self) -> VarSet {
        self.body.with(self.head)
    }

    pub fn violated_by(&self, t: Tuple) -> bool {
        let s = t.true_set();
        self.body.is_subset(s) && !s.contains(self.head)
    }
}

impl fmt::Display for UniversalHorn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bodyless() {
            write!(f, "∀{}", self.head)
        } else {
            write!(f, "∀{}→{}", self.body, self.head)
        }
    }
}

/// `∃ vars`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExistentialConj {
    pub vars: VarSet,
}

impl ExistentialConj {
    pub fn new(vars: VarSet) -> ExistentialConj {
        ExistentialConj { vars }
    }

    pub fn witnessed_by(&self, t: Tuple) -> bool {
        self.vars.is_subset(t.true_set())
    }
}

impl fmt::Display for ExistentialConj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "∃{}", self.vars)
    }
}

/// A conjunction of universal Horn expressions (each with its implicit
/// guarantee clause) and existential conjunctions over `n` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QhornQuery {
    n: usize,
    universals: Vec<UniversalHorn>,
    existentials: Vec<ExistentialConj>,
    vocabulary: Option<Vec<String>>,
}

impl QhornQuery {
    /// Validates arity and variable ranges and drops duplicate expressions,
    /// keeping first occurrences.
    pub fn new(
        n: usize,
        universals: impl IntoIterator<Item = UniversalHorn>,
        existentials: impl IntoIterator<Item = ExistentialConj>,
    ) -> Result<QhornQuery, QhornError> {
        check_arity(n)?;
        let mut us: Vec<UniversalHorn> = Vec::new();
        for u in universals {
            if u.head.index() >= n || !u.body.within(n) {
                return Err(QhornError::VarOutOfRange { set: u.guarantee().to_one_based(), n });
            }
            if u.body.contains(u.head) {
                return Err(QhornError::InvalidQuery(format!("{} has its head in its body", u.head)));
            }
            if !us.contains(&u) {
                us.push(u);
            }
        }
        let mut es: Vec<ExistentialConj> = Vec::new();
        for e in existentials {
            if e.vars.is_empty() {
                return Err(QhornError::InvalidQuery("empty existential conjunction".into()));
            }
            if !e.vars.within(n) {
                return Err(QhornError::VarOutOfRange { set: e.vars.to_one_based(), n });
            }
            if !es.contains(&e) {
                es.push(e);
            }
        }
        Ok(QhornQuery { n, universals: us, existentials: es, vocabulary: None })
    }

    /// The query with no expressions; every non-empty and empty object is an answer.
    pub fn empty(n: usize) -> Result<QhornQuery, QhornError> {
        QhornQuery::new(n, [], [])
    }

    pub fn with_vocabulary(mut self, vocabulary: Vec<String>) -> Result<QhornQuery, QhornError> {
        if vocabulary.len() != self.n {
            return Err(QhornError::InvalidQuery(format!(
                "vocabulary has {} propositions for {} variables",
                vocabulary.len(),
                self.n
            )));
        }
        self.vocabulary = Some(vocabulary);
        Ok(self)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn universals(&self) -> &[UniversalHorn] {
        &self.universals
    }

    pub fn existentials(&self) -> &[ExistentialConj] {
        &self.existentials
    }

    pub fn vocabulary(&self) -> Option<&[String]> {
        self.vocabulary.as_deref()
    }

    /// Query size `k`: number of expressions, guarantee clauses not counted.
    pub fn size(&self) -> usize {
        self.universals.len() + self.existentials.len()
    }

    /// Variables that head some universal Horn expression.
    pub fn heads(&self) -> VarSet {
        self.universals.iter().map(|u| u.head).collect()
    }

    /// Evaluates a membership question.
    pub fn evaluate(&self, obj: &Question) -> Result<Label, QhornError> {
        if obj.arity() != self.n {
            return Err(QhornError::ArityMismatch { expected: self.n, found: obj.arity() });
        }
        Ok(self.eval_iter(obj.iter()))
    }

    /// Evaluates a slice of tuples as an object; duplicates are harmless.
    pub fn evaluate_tuples(&self, tuples: &[Tuple]) -> Result<Label, QhornError> {
        if let Some(t) = tuples.iter().find(|t| t.arity() != self.n) {
            return Err(QhornError::ArityMismatch { expected: self.n, found: t.arity() });
        }
        Ok(self.eval_iter(tuples.iter().copied()))
    }

    pub(crate) fn eval_iter<I: Iterator<Item = Tuple> + Clone>(&self, tuples: I) -> Label {
        let sets = tuples.map(Tuple::true_set);
        let ok = sets.clone().all(|s| self.universals.iter().all(|u| !u.body.is_subset(s) || s.contains(u.head)))
            && self.universals.iter().all(|u| sets.clone().any(|s| u.guarantee().is_subset(s)))
            && self.existentials.iter().all(|e| sets.clone().any(|s| e.vars.is_subset(s)));
        Label::from_bool(ok)
    }
}

impl fmt::Display for QhornQuery {
    /// Shorthand notation, e.g. `∀x1x4→x5 ∃x2x3x5x6`; the empty query is `⊤`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size() == 0 {
            return f.write_str("⊤");
        }
        let mut first = true;
        for u in &self.universals {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{u}")?;
        }
        for e in &self.existentials {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

pub fn evaluate(q: &QhornQuery, obj: &Question) -> Result<Label, QhornError> {
    q.evaluate(obj)
}

/// True iff some universal has its body true and its head false in `t`.
pub fn violates_universal(t: Tuple, universals: &[UniversalHorn]) -> bool {
    universals.iter().any(|u| u.violated_by(t))
}

/// Least superset of `vars` closed under the universals' implications.
pub fn head_closure(vars: VarSet, universals: &[UniversalHorn]) -> VarSet {
    let mut out = vars;
    loop {
        let next = universals
            .iter()
            .filter(|u| u.body.is_subset(out))
            .fold(out, |acc, u| acc.with(u.head));
        if next == out {
            return out;
        }
        out = next;
    }
}
