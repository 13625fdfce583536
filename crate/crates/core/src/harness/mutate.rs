use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::rng_for;
use crate::bits::{VarId, VarSet};
use crate::error::QhornError;
use crate::query::{equivalent, head_closure, is_role_preserving, normalize, ExistentialConj, QhornQuery, UniversalHorn};

pub const MUTATION_ATTEMPTS: usize = 50;

fn pick<R: Rng>(rng: &mut R, s: VarSet) -> Option<VarId> {
    s.iter().collect::<Vec<_>>().choose(rng).copied()
}

fn one_edit<R: Rng>(rng: &mut R, q: &QhornQuery) -> Option<QhornQuery> {
    let n = q.arity();
    let all = VarSet::full(n);
    let mut us: Vec<UniversalHorn> = q.universals().to_vec();
    let mut es: Vec<ExistentialConj> = q.existentials().to_vec();
    let heads = q.heads();
    let bodies = us.iter().fold(VarSet::EMPTY, |a, u| a.union(u.body));
    match rng.random_range(0..7) {
        0 => {
            let i = rng.random_range(0..us.len().max(1));
            let u = us.get_mut(i)?;
            u.body.insert(pick(rng, all.difference(heads).difference(u.body))?);
        }
        1 => {
            let i = rng.random_range(0..us.len().max(1));
            let u = us.get_mut(i)?;
            u.body.remove(pick(rng, u.body)?);
        }
        2 => {
            let i = rng.random_range(0..es.len().max(1));
            let e = es.get_mut(i)?;
            e.vars.insert(pick(rng, all.difference(e.vars))?);
        }
        3 => {
            let i = rng.random_range(0..es.len().max(1));
            let e = es.get_mut(i)?;
            if e.vars.len() < 2 {
                es.remove(i);
            } else {
                e.vars.remove(pick(rng, e.vars)?);
            }
        }
        4 => {
            let total = us.len() + es.len();
            if total == 0 {
                return None;
            }
            let i = rng.random_range(0..total);
            if i < us.len() {
                us.remove(i);
            } else {
                es.remove(i - us.len());
            }
        }
        5 => {
            if rng.random_bool(0.5) {
                // a free variable becomes a bodyless head
                us.push(UniversalHorn::bodyless(pick(rng, all.difference(heads).difference(bodies))?));
            } else {
                let h = pick(rng, heads)?;
                us.retain(|u| u.head != h);
            }
        }
        _ => {
            let size = rng.random_range(1..=n.min(3));
            let mut vars: Vec<VarId> = all.iter().collect();
            vars.shuffle(rng);
            es.push(ExistentialConj::new(vars.into_iter().take(size).collect()));
        }
    }
    let m = QhornQuery::new(n, us, es).ok()?;
    is_role_preserving(&m).then_some(m)
}

/// One random class-preserving edit that changes the semantics.
pub fn mutate_query(q: &QhornQuery, seed: u64) -> Result<QhornQuery, QhornError> {
    if !is_role_preserving(q) {
        return Err(QhornError::ClassViolation("mutation needs a role-preserving query"));
    }
    let mut rng = rng_for(seed);
    for _ in 0..MUTATION_ATTEMPTS {
        if let Some(m) = one_edit(&mut rng, q) {
            if !equivalent(q, &m)? {
                return Ok(m);
            }
        }
    }
    Err(QhornError::MutationExhausted(MUTATION_ATTEMPTS))
}

/// A syntactically different query with the same semantics: dominated
/// conjunctions and universals (when their guarantee is already implied)
/// are added, implied heads dropped from conjunctions, and expressions
/// shuffled.
pub fn equivalent_variant(q: &QhornQuery, seed: u64) -> Result<QhornQuery, QhornError> {
    let mut rng = rng_for(seed);
    let nq = normalize(q);
    let n = q.arity();
    let mut us: Vec<UniversalHorn> = nq.universals().to_vec();
    let mut es: Vec<ExistentialConj> = Vec::new();
    for (i, &c) in nq.existentials().iter().enumerate() {
        if !nq.is_guarantee(i) {
            // drop heads already implied by the rest of the conjunction
            let mut vars = c;
            for u in nq.universals() {
                if vars.contains(u.head) && !u.is_bodyless() && u.body.is_subset(vars) && rng.random_bool(0.5) {
                    vars.remove(u.head);
                }
            }
            es.push(ExistentialConj::new(vars));
        }
        if c.len() > 1 && rng.random_bool(0.5) {
            es.push(ExistentialConj::new(c.without(pick(&mut rng, c).expect("non-empty"))));
        }
    }
    let extra: Vec<UniversalHorn> = nq
        .universals()
        .iter()
        .filter_map(|u| {
            let free = VarSet::full(n).difference(nq.heads()).difference(u.body);
            let v = pick(&mut rng, free)?;
            // its guarantee clause must already be implied
            let covered = nq.existentials().iter().any(|c| head_closure(u.guarantee().with(v), nq.universals()).is_subset(*c));
            (covered && rng.random_bool(0.5)).then(|| UniversalHorn::new(u.body.with(v), u.head))
        })
        .collect();
    us.extend(extra);
    us.shuffle(&mut rng);
    es.shuffle(&mut rng);
    let v = QhornQuery::new(n, us, es)?;
    if equivalent(q, &v)? {
        Ok(v)
    } else {
        Err(QhornError::Inconsistent(format!("variant {v} of {q} is not equivalent")))
    }
}
