//! Exact learner for qhorn-1: classify variables, find the bodies of the
//! universal heads, then recover the existential Horn expressions.

use crate::bits::{check_arity, Question, Tuple, VarId, VarSet};
use crate::error::QhornError;
use crate::oracle::{MembershipOracle, Phase};
use crate::query::{ExistentialConj, Label, QhornQuery, UniversalHorn};
use crate::search::{find, find_all};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qhorn1State {
    pub n: usize,
    /// Universal head variables.
    pub universal: VarSet,
    /// Everything else.
    pub existential: VarSet,
    /// Learned bodies, pairwise disjoint, all within `existential`.
    pub bodies: Vec<VarSet>,
    pub universals: Vec<UniversalHorn>,
    pub existentials: Vec<ExistentialConj>,
}

impl Qhorn1State {
    pub fn new(n: usize, universal: VarSet, existential: VarSet) -> Qhorn1State {
        Qhorn1State { n, universal, existential, bodies: Vec::new(), universals: Vec::new(), existentials: Vec::new() }
    }

    fn body_vars(&self) -> VarSet {
        self.bodies.iter().fold(VarSet::EMPTY, |acc, b| acc.union(*b))
    }

    fn body_containing(&self, v: VarSet) -> Option<VarSet> {
        self.bodies.iter().copied().find(|b| !b.is_disjoint(v))
    }

    pub fn query(&self) -> Result<QhornQuery, QhornError> {
        QhornQuery::new(self.n, self.universals.iter().copied(), self.existentials.iter().copied())
    }
}

fn top(n: usize) -> Result<Tuple, QhornError> {
    Tuple::all_true(n)
}

/// `{1^n, 1^n with x false}` for every `x`; a non-answer marks a universal head.
pub fn classify_variables<O: MembershipOracle + ?Sized>(oracle: &mut O, n: usize) -> Result<(VarSet, VarSet), QhornError> {
    let t = top(n)?;
    let mut u = VarSet::EMPTY;
    for i in 0..n {
        let x = VarId(i as u8);
        let q = Question::new(n, [t, t.cleared(VarSet::singleton(x))])?;
        if oracle.ask(&q, Phase::HeadClassification)? == Label::NonAnswer {
            u.insert(x);
        }
    }
    Ok((u, VarSet::full(n).difference(u)))
}

/// `{1^n, 1^n with h and V false}`.
pub fn universal_dependence_question(h: VarId, v: VarSet, n: usize) -> Result<Question, QhornError> {
    let t = top(n)?;
    if v.contains(h) {
        return Err(QhornError::Precondition(format!("{h} is both the head and in the dependence set")));
    }
    Question::new(n, [t, t.with_false(v.with(h))?])
}

/// `{1^n with X false, 1^n with Y false}` for disjoint non-empty `X`, `Y`.
pub fn existential_independence_question(x: VarSet, y: VarSet, n: usize) -> Result<Question, QhornError> {
    if x.is_empty() || y.is_empty() || !x.is_disjoint(y) {
        return Err(QhornError::Precondition("independence question needs disjoint non-empty sets".into()));
    }
    let t = top(n)?;
    Question::new(n, [t.with_false(x)?, t.with_false(y)?])
}

/// One tuple per `d ∈ D` with only `d` (and `context_false`) false.
pub fn matrix_question(d: VarSet, n: usize, context_false: VarSet) -> Result<Question, QhornError> {
    if d.len() < 2 {
        return Err(QhornError::Precondition("matrix question needs at least two variables".into()));
    }
    let base = top(n)?.with_false(context_false)?;
    let tuples = d.iter().map(|v| base.with_false(VarSet::singleton(v))).collect::<Result<Vec<_>, _>>()?;
    Question::new(n, tuples)
}

/// Searches `D`, the dependents of `x`, for existential head variables.
/// Returns `∅` when `D` holds at most one head.
pub fn get_head<O: MembershipOracle + ?Sized>(oracle: &mut O, x: VarId, d: VarSet, n: usize) -> Result<VarSet, QhornError> {
    if d.contains(x) {
        return Err(QhornError::Precondition(format!("{x} listed among its own dependents")));
    }
    if d.len() < 2 {
        return Ok(VarSet::EMPTY);
    }
    let split = |s: VarSet| s.split_at(s.len().div_ceil(2));
    let (mut d1, mut d2, mut d3) = (d, VarSet::EMPTY, VarSet::EMPTY);
    // every pass halves a candidate set, so a correct oracle never needs this many
    let cap = 4 * d.len() + 8;
    for _ in 0..cap {
        if d1.is_empty() {
            break;
        }
        if d1.len() < 2 {
            return Ok(VarSet::EMPTY);
        }
        let answer = oracle.ask(&matrix_question(d1, n, VarSet::EMPTY)?, Phase::Existential)?.is_answer();
        if answer {
            if d1.len() == 2 && d2.is_empty() {
                return Ok(d1);
            } else if d1.len() > 2 && d2.is_empty() {
                (d1, d3) = split(d1);
            } else if d2.len() == 1 {
                return Ok(d2);
            } else {
                (d2, d3) = split(d2);
                d1 = d1.difference(d3);
            }
        } else if d3.is_empty() {
            return Ok(VarSet::EMPTY);
        } else if d3.len() == 1 {
            return Ok(d3);
        } else {
            (d2, d3) = split(d3);
            d1 = d1.union(d2);
        }
    }
    Ok(VarSet::EMPTY)
}

pub fn learn_universal_bodies<O: MembershipOracle + ?Sized>(oracle: &mut O, state: &mut Qhorn1State) -> Result<(), QhornError> {
    let n = state.n;
    for h in state.universal.iter() {
        let build = |v: VarSet| universal_dependence_question(h, v, n).expect("head outside existential set");
        let b = find(oracle, Phase::BodySearch, &build, Label::NonAnswer, state.body_vars())?;
        let body = match state.body_containing(b).filter(|_| !b.is_empty()) {
            Some(known) => known,
            None => {
                let body = find_all(oracle, Phase::BodySearch, &build, Label::NonAnswer, state.existential)?;
                if !body.is_empty() {
                    state.bodies.push(body);
                }
                body
            }
        };
        state.universals.push(UniversalHorn::new(body, h));
    }
    Ok(())
}

pub fn learn_existential<O: MembershipOracle + ?Sized>(oracle: &mut O, state: &mut Qhorn1State) -> Result<(), QhornError> {
    let n = state.n;
    let mut e_set = state.existential;
    let mut consumed = state.body_vars();
    for e in state.existential.difference(consumed).iter() {
        if consumed.contains(e) {
            continue;
        }
        let ex = VarSet::singleton(e);
        let build = |v: VarSet| existential_independence_question(ex, v, n).expect("disjoint by construction");
        let b = find(oracle, Phase::Existential, &build, Label::Answer, state.body_vars())?;
        if let Some(body) = state.body_containing(b).filter(|_| !b.is_empty()) {
            state.existentials.push(ExistentialConj::new(body.with(e)));
            consumed.insert(e);
            continue;
        }
        let d = find_all(oracle, Phase::Existential, &build, Label::Answer, e_set.without(e))?;
        if d.is_empty() {
            state.existentials.push(ExistentialConj::new(ex));
            consumed.insert(e);
            continue;
        }
        let mut heads = get_head(oracle, e, d, n)?;
        if heads.is_empty() {
            state.existentials.push(ExistentialConj::new(d.with(e)));
            state.bodies.push(d);
        } else {
            let h = heads.first().expect("non-empty");
            for x in d.difference(heads).iter() {
                let q = existential_independence_question(VarSet::singleton(h), VarSet::singleton(x), n)?;
                if oracle.ask(&q, Phase::Existential)?.is_answer() {
                    heads.insert(x);
                }
            }
            let body = d.difference(heads).with(e);
            state.bodies.push(body);
            for h in heads.iter() {
                state.existentials.push(ExistentialConj::new(body.with(h)));
            }
        }
        e_set = e_set.difference(d);
        consumed = consumed.union(d).with(e);
    }
    Ok(())
}

/// Learns a qhorn-1 target with `O(n lg n)` questions.
pub fn learn_qhorn1<O: MembershipOracle + ?Sized>(oracle: &mut O, n: usize) -> Result<QhornQuery, QhornError> {
    check_arity(n)?;
    let (u, e) = classify_variables(oracle, n)?;
    let mut state = Qhorn1State::new(n, u, e);
    learn_universal_bodies(oracle, &mut state)?;
    learn_existential(oracle, &mut state)?;
    state.query()
}
