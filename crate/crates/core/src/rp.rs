//! Exact learner for role-preserving qhorn.
//!
//! Universal Horn expressions are found per head by searching a lattice over
//! the non-head variables with the head fixed false. Existential
//! conjunctions are found by a top-down walk of the full lattice that prunes
//! each frontier with a binary search.

use std::collections::BTreeSet;

use crate::bits::{check_arity, Question, Tuple, VarId, VarSet};
use crate::error::QhornError;
use crate::oracle::{MembershipOracle, Phase};
use crate::qhorn1::classify_variables;
use crate::query::{head_closure, violates_universal, ExistentialConj, Label, QhornQuery, UniversalHorn};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RpOptions {
    /// Abort when a head turns out to have more bodies than this.
    pub theta_cap: usize,
    /// Accept a frontier tuple equal to a guarantee closure without asking
    /// when nothing else in the question covers that guarantee.
    pub downset_optimization: bool,
}

impl Default for RpOptions {
    fn default() -> Self {
        RpOptions { theta_cap: 3, downset_optimization: true }
    }
}

/// Universal head variables; same probes as qhorn-1 classification.
pub fn detect_heads_rp<O: MembershipOracle + ?Sized>(oracle: &mut O, n: usize) -> Result<VarSet, QhornError> {
    Ok(classify_variables(oracle, n)?.0)
}

fn probe<O: MembershipOracle + ?Sized>(oracle: &mut O, n: usize, false_vars: VarSet) -> Result<Label, QhornError> {
    let t = Tuple::all_true(n)?;
    Ok(oracle.ask(&Question::new(n, [t, t.with_false(false_vars)?])?, Phase::BodySearch)?)
}

/// `{1^n, tuple with h and every non-head false}`; a non-answer means `h` is bodyless.
pub fn is_bodyless<O: MembershipOracle + ?Sized>(oracle: &mut O, h: VarId, heads: VarSet, n: usize) -> Result<bool, QhornError> {
    if !heads.contains(h) {
        return Err(QhornError::Precondition(format!("{h} is not a head")));
    }
    let non_heads = VarSet::full(n).difference(heads);
    Ok(probe(oracle, n, non_heads.with(h))? == Label::NonAnswer)
}

/// Greedy pass over `candidates`: a variable whose removal still leaves a
/// violated body is not needed. Returns an inclusion-minimal body.
pub fn learn_one_body<O: MembershipOracle + ?Sized>(
    oracle: &mut O,
    h: VarId,
    candidates: VarSet,
    fixed_false: VarSet,
    heads: VarSet,
    n: usize,
) -> Result<VarSet, QhornError> {
    if !candidates.is_disjoint(heads) || !fixed_false.is_disjoint(heads) {
        return Err(QhornError::Precondition("body candidates must be non-head variables".into()));
    }
    let mut x = VarSet::EMPTY;
    for v in candidates.iter() {
        if probe(oracle, n, x.union(fixed_false).with(v).with(h))? == Label::NonAnswer {
            x.insert(v);
        }
    }
    Ok(candidates.difference(x))
}

/// Search roots: one variable flipped from each known body, deduplicated,
/// dropping roots that flip a strict superset of another root's variables.
fn search_roots(bodies: &[VarSet]) -> Vec<VarSet> {
    let mut roots: Vec<VarSet> = vec![VarSet::EMPTY];
    for b in bodies {
        roots = roots.iter().flat_map(|r| b.iter().map(move |v| r.with(v))).collect();
    }
    let mut seen = BTreeSet::new();
    roots.retain(|r| seen.insert(*r));
    let all = roots.clone();
    roots.retain(|r| !all.iter().any(|o| o.is_strict_subset(*r)));
    roots
}

/// All dominant bodies of a head that is not bodyless.
pub fn learn_bodies_for_head<O: MembershipOracle + ?Sized>(
    oracle: &mut O,
    h: VarId,
    heads: VarSet,
    n: usize,
    theta_cap: usize,
) -> Result<Vec<VarSet>, QhornError> {
    let non_heads = VarSet::full(n).difference(heads);
    // the head is universal and not bodyless, so the top probe is known to be a non-answer
    let first = learn_one_body(oracle, h, non_heads, VarSet::EMPTY, heads, n)?;
    if first.is_empty() {
        return Err(QhornError::Inconsistent(format!("{h} has an empty body but answered as not bodyless")));
    }
    let mut bodies = vec![first];
    let mut answered: Vec<VarSet> = Vec::new();
    loop {
        let next = search_roots(&bodies).into_iter().find(|f| !answered.iter().any(|a| a.is_subset(*f)));
        let Some(f) = next else { break };
        if probe(oracle, n, f.with(h))? == Label::Answer {
            answered.push(f);
            continue;
        }
        let body = learn_one_body(oracle, h, non_heads.difference(f), f, heads, n)?;
        if body.is_empty() || bodies.iter().any(|b| b.is_subset(body) || body.is_subset(*b)) {
            return Err(QhornError::Inconsistent(format!("body search for {h} produced a non-minimal body")));
        }
        bodies.push(body);
        if bodies.len() > theta_cap {
            return Err(QhornError::CausalDensityCap { head: h.one_based(), cap: theta_cap });
        }
    }
    Ok(bodies)
}

fn split_floor(v: Vec<Tuple>) -> (Vec<Tuple>, Vec<Tuple>) {
    let mut a = v;
    let b = a.split_off(a.len() / 2);
    (a, b)
}

fn question(n: usize, parts: &[&[Tuple]]) -> Question {
    Question::from_tuples_unchecked(n, parts.iter().flat_map(|p| p.iter().copied()))
}

/// Shrinks `c` to a minimal `K` such that `K ∪ O` is still an answer.
/// Requires `C ∪ O` to be an answer.
pub fn prune<O: MembershipOracle + ?Sized>(oracle: &mut O, n: usize, c: &[Tuple], o: &[Tuple]) -> Result<Vec<Tuple>, QhornError> {
    let mut keep: Vec<Tuple> = Vec::new();
    let (mut t1, mut t2) = split_floor(c.to_vec());
    while !(t1.is_empty() && t2.is_empty()) {
        let q = question(n, &[&t1, &keep, o]);
        if oracle.ask(&q, Phase::Prune)?.is_answer() {
            (t1, t2) = split_floor(t1);
        } else if t2.len() == 1 {
            keep.append(&mut t2);
            (t1, t2) = split_floor(t1);
        } else if t2.is_empty() {
            return Err(QhornError::Inconsistent(format!("prune lost an answer: {q} is a non-answer")));
        } else {
            let (a, b) = split_floor(std::mem::take(&mut t2));
            t1.extend(a);
            t2 = b;
        }
    }
    Ok(keep)
}

/// Top-down lattice walk returning the distinguishing tuples of the
/// dominant existential conjunctions (guarantee closures included).
pub fn learn_existential_conjunctions<O: MembershipOracle + ?Sized>(
    oracle: &mut O,
    universals: &[UniversalHorn],
    n: usize,
    downset_optimization: bool,
) -> Result<Vec<Tuple>, QhornError> {
    let all = VarSet::full(n);
    let tuple = |bits: u32| Tuple::from_set_unchecked(n, VarSet::from_bits(bits));
    let guarantees: Vec<(VarSet, VarSet)> =
        universals.iter().map(|u| (u.guarantee(), head_closure(u.guarantee(), universals))).collect();
    let mut d: Vec<Tuple> = Vec::new();
    let mut frontier: BTreeSet<u32> = BTreeSet::from([all.bits()]);
    while !frontier.is_empty() {
        let mut next: BTreeSet<u32> = BTreeSet::new();
        while let Some(bits) = frontier.pop_first() {
            let t = tuple(bits);
            let rest: Vec<Tuple> = frontier.iter().chain(&next).map(|&b| tuple(b)).collect();
            if downset_optimization {
                let s = t.true_set();
                let only_witness = guarantees.iter().any(|&(g, closure)| {
                    closure == s && !d.iter().chain(&rest).any(|o| g.is_subset(o.true_set()))
                });
                if only_witness {
                    d.push(t);
                    continue;
                }
            }
            let children: Vec<Tuple> = t.children(all).into_iter().filter(|c| !violates_universal(*c, universals)).collect();
            if oracle.ask(&question(n, &[&d, &rest, &children]), Phase::Existential)?.is_answer() {
                let context: Vec<Tuple> = d.iter().chain(&rest).copied().collect();
                for k in prune(oracle, n, &children, &context)? {
                    next.insert(k.true_set().bits());
                }
            } else {
                d.push(t);
            }
        }
        frontier = next;
    }
    Ok(d)
}

/// Learns a role-preserving target: heads, bodyless checks, bodies per
/// head, then existential conjunctions.
pub fn learn_rp<O: MembershipOracle + ?Sized>(oracle: &mut O, n: usize, options: RpOptions) -> Result<QhornQuery, QhornError> {
    check_arity(n)?;
    let heads = detect_heads_rp(oracle, n)?;
    let mut universals = Vec::new();
    for h in heads.iter() {
        if is_bodyless(oracle, h, heads, n)? {
            universals.push(UniversalHorn::bodyless(h));
        } else {
            for body in learn_bodies_for_head(oracle, h, heads, n, options.theta_cap)? {
                universals.push(UniversalHorn::new(body, h));
            }
        }
    }
    let d = learn_existential_conjunctions(oracle, &universals, n, options.downset_optimization)?;
    let closures: Vec<VarSet> = universals.iter().map(|u| head_closure(u.guarantee(), &universals)).collect();
    let existentials = d
        .iter()
        .map(|t| t.true_set())
        .filter(|s| !closures.contains(s))
        .map(ExistentialConj::new)
        .collect::<Vec<_>>();
    QhornQuery::new(n, universals, existentials)
}
