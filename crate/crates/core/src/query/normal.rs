//! Normal form: head-closed dominant existentials (guarantee closures
//! included) and dominant universals.

use std::collections::BTreeSet;

use super::{head_closure, ExistentialConj, QhornQuery, UniversalHorn};
use crate::bits::{Tuple, VarSet};
use crate::error::QhornError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedQuery {
    n: usize,
    universals: Vec<UniversalHorn>,
    existentials: Vec<VarSet>,
    guarantee: Vec<bool>,
    heads: VarSet,
}

impl NormalizedQuery {
    pub fn arity(&self) -> usize {
        self.n
    }

    /// Dominant universals, ordered by head, then body size, then body mask.
    pub fn universals(&self) -> &[UniversalHorn] {
        &self.universals
    }

    /// Dominant head-closed conjunctions, largest first, ties by mask.
    pub fn existentials(&self) -> &[VarSet] {
        &self.existentials
    }

    /// Whether `existentials()[i]` is the closure of some universal's guarantee clause.
    pub fn is_guarantee(&self, i: usize) -> bool {
        self.guarantee[i]
    }

    pub fn heads(&self) -> VarSet {
        self.heads
    }

    pub fn non_heads(&self) -> VarSet {
        VarSet::full(self.n).difference(self.heads)
    }

    pub fn existential_tuples(&self) -> Vec<Tuple> {
        self.existentials.iter().map(|&c| Tuple::from_set_unchecked(self.n, c)).collect()
    }

    /// Head false, body true, other heads true, everything else false.
    pub fn universal_tuple(&self, u: &UniversalHorn) -> Tuple {
        Tuple::from_set_unchecked(self.n, u.body.union(self.heads.without(u.head)))
    }

    pub fn universal_tuples(&self) -> Vec<Tuple> {
        self.universals.iter().map(|u| self.universal_tuple(u)).collect()
    }

    /// Bodies of the dominant universals with head `h`.
    pub fn bodies_of(&self, h: crate::bits::VarId) -> impl Iterator<Item = VarSet> + '_ {
        self.universals.iter().filter(move |u| u.head == h).map(|u| u.body)
    }

    /// Plain query with the same semantics; guarantee-only conjunctions are dropped.
    pub fn to_query(&self) -> QhornQuery {
        let existentials = self
            .existentials
            .iter()
            .zip(&self.guarantee)
            .filter(|(_, &g)| !g)
            .map(|(&c, _)| ExistentialConj::new(c));
        QhornQuery::new(self.n, self.universals.iter().copied(), existentials).expect("normal form is valid")
    }
}

fn dominant_universals(universals: &[UniversalHorn]) -> Vec<UniversalHorn> {
    let mut out: Vec<UniversalHorn> = universals
        .iter()
        .filter(|u| {
            !universals
                .iter()
                .any(|o| o.head == u.head && o.body.is_strict_subset(u.body))
        })
        .copied()
        .collect();
    out.sort_by_key(|u| (u.head, u.body.len(), u.body.bits()));
    out.dedup();
    out
}

fn maximal_sets(mut sets: Vec<VarSet>) -> Vec<VarSet> {
    sets.sort_by_key(|s| (std::cmp::Reverse(s.len()), s.bits()));
    sets.dedup();
    let all = sets.clone();
    sets.retain(|s| !all.iter().any(|o| s.is_strict_subset(*o)));
    sets
}

pub fn normalize(q: &QhornQuery) -> NormalizedQuery {
    let universals = dominant_universals(q.universals());
    let closures: Vec<VarSet> = universals.iter().map(|u| head_closure(u.guarantee(), &universals)).collect();
    // a dominated universal still contributes its guarantee clause
    let candidates = q
        .existentials()
        .iter()
        .map(|e| e.vars)
        .chain(q.universals().iter().map(|u| u.guarantee()))
        .map(|c| head_closure(c, &universals))
        .collect();
    let existentials = maximal_sets(candidates);
    let guarantee = existentials.iter().map(|c| closures.contains(c)).collect();
    let heads = universals.iter().map(|u| u.head).collect();
    NormalizedQuery { n: q.arity(), universals, existentials, guarantee, heads }
}

pub fn existential_distinguishing_tuples(nq: &NormalizedQuery) -> Vec<Tuple> {
    nq.existential_tuples()
}

pub fn universal_distinguishing_tuple(u: &UniversalHorn, nq: &NormalizedQuery) -> Tuple {
    nq.universal_tuple(u)
}

/// Semantic equivalence of role-preserving queries by comparing the
/// distinguishing tuples of their normal forms.
pub fn equivalent(q1: &QhornQuery, q2: &QhornQuery) -> Result<bool, QhornError> {
    if q1.arity() != q2.arity() {
        return Err(QhornError::ArityMismatch { expected: q1.arity(), found: q2.arity() });
    }
    let (a, b) = (normalize(q1), normalize(q2));
    let set = |ts: Vec<Tuple>| ts.into_iter().collect::<BTreeSet<_>>();
    Ok(a.heads == b.heads
        && set(a.existential_tuples()) == set(b.existential_tuples())
        && set(a.universal_tuples()) == set(b.universal_tuples()))
}
