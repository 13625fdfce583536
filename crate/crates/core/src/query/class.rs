use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{normal::normalize, QhornQuery};
use crate::bits::VarSet;
use crate::error::QhornError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryClass {
    Qhorn1,
    Rp,
}

impl QueryClass {
    pub fn name(self) -> &'static str {
        match self {
            QueryClass::Qhorn1 => "qhorn1",
            QueryClass::Rp => "rp",
        }
    }

    pub fn contains(self, q: &QhornQuery) -> bool {
        match self {
            QueryClass::Qhorn1 => is_qhorn1(q),
            QueryClass::Rp => is_role_preserving(q),
        }
    }

    pub fn check(self, q: &QhornQuery) -> Result<(), QhornError> {
        if self.contains(q) {
            Ok(())
        } else {
            Err(QhornError::ClassViolation(self.name()))
        }
    }
}

impl fmt::Display for QueryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryClass {
    type Err = QhornError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qhorn1" | "qhorn-1" => Ok(QueryClass::Qhorn1),
            "rp" | "role-preserving" => Ok(QueryClass::Rp),
            _ => Err(QhornError::InvalidQuery(format!("unknown query class {s:?}"))),
        }
    }
}

/// No variable is both a universal head and a universal body variable.
pub fn is_role_preserving(q: &QhornQuery) -> bool {
    let bodies = q.universals().iter().fold(VarSet::EMPTY, |acc, u| acc.union(u.body));
    q.heads().is_disjoint(bodies)
}

/// Checks the qhorn-1 restrictions. Existential conjunctions carry no roles,
/// so each one must admit a reading `B ∪ {h}` (or a headless `B`) whose body
/// is a universal body, the shared overlap with sibling conjunctions, or
/// private to it.
pub fn is_qhorn1(q: &QhornQuery) -> bool {
    let us = q.universals();
    let heads = q.heads();
    // one body per head
    if heads.len() != us.len() {
        return false;
    }
    let mut bodies: Vec<VarSet> = us.iter().map(|u| u.body).filter(|b| !b.is_empty()).collect();
    bodies.sort_by_key(|b| b.bits());
    bodies.dedup();
    if bodies.iter().any(|a| bodies.iter().any(|b| a != b && !a.is_disjoint(*b))) {
        return false;
    }
    let body_vars = bodies.iter().fold(VarSet::EMPTY, |acc, b| acc.union(*b));
    if !heads.is_disjoint(body_vars) {
        return false;
    }

    let conjs: Vec<VarSet> = q.existentials().iter().map(|e| e.vars).collect();
    let mut used = heads.union(body_vars);
    let mut ex_bodies: Vec<VarSet> = Vec::new();
    for (i, &c) in conjs.iter().enumerate() {
        if !c.is_disjoint(heads) {
            return false;
        }
        let touching: Vec<VarSet> = bodies.iter().copied().filter(|b| !b.is_disjoint(c)).collect();
        let body = match touching.as_slice() {
            [] => {
                let overlaps: Vec<VarSet> = conjs
                    .iter()
                    .enumerate()
                    .filter(|&(j, o)| j != i && !o.is_disjoint(c))
                    .map(|(_, &o)| o.intersection(c))
                    .collect();
                match overlaps.first() {
                    None => c,
                    Some(&o) if overlaps.iter().all(|&x| x == o) => o,
                    Some(_) => return false,
                }
            }
            [b] if b.is_subset(c) => *b,
            _ => return false,
        };
        if c.difference(body).len() > 1 {
            return false;
        }
        ex_bodies.push(body);
    }
    let all_bodies: Vec<VarSet> = bodies.iter().chain(&ex_bodies).copied().collect();
    if all_bodies.iter().any(|a| all_bodies.iter().any(|b| a != b && !a.is_disjoint(*b))) {
        return false;
    }
    used = used.union(all_bodies.iter().fold(VarSet::EMPTY, |acc, b| acc.union(*b)));
    // each existential head occurs exactly once
    for (i, &c) in conjs.iter().enumerate() {
        let head = c.difference(ex_bodies[i]);
        if !head.is_disjoint(used) {
            return false;
        }
        used = used.union(head);
    }
    // every variable takes part in some expression
    used == VarSet::full(q.arity())
}

/// Largest number of dominant universals sharing one head.
pub fn causal_density(q: &QhornQuery) -> usize {
    let nq = normalize(q);
    nq.heads().iter().map(|h| nq.bodies_of(h).count()).max().unwrap_or(0)
}
