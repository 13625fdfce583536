use rand::seq::SliceRandom;
use rand::Rng;

use super::{rng_for, GenSpec};
use crate::bits::{check_arity, VarId, VarSet};
use crate::error::QhornError;
use crate::query::{causal_density, is_role_preserving, normalize, ExistentialConj, QhornQuery, QueryClass, UniversalHorn};

/// One block of a qhorn-1 partition. `heads` pairs each head with
/// `true` for universal, `false` for existential. A singleton block with
/// a universal head is `∀x`; a block without heads is one conjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartPlan {
    pub vars: VarSet,
    pub heads: Vec<(VarId, bool)>,
}

pub fn qhorn1_from_partition(n: usize, parts: &[PartPlan]) -> Result<QhornQuery, QhornError> {
    let mut universals = Vec::new();
    let mut existentials = Vec::new();
    for p in parts {
        let heads: VarSet = p.heads.iter().map(|&(h, _)| h).collect();
        if !heads.is_subset(p.vars) {
            return Err(QhornError::InvalidQuery("part head outside its part".into()));
        }
        let body = p.vars.difference(heads);
        if p.heads.is_empty() {
            existentials.push(ExistentialConj::new(p.vars));
        }
        for &(h, universal) in &p.heads {
            if universal {
                universals.push(UniversalHorn::new(body, h));
            } else {
                existentials.push(ExistentialConj::new(body.with(h)));
            }
        }
    }
    let q = QhornQuery::new(n, universals, existentials)?;
    QueryClass::Qhorn1.check(&q)?;
    Ok(q)
}

pub fn gen_random(spec: &GenSpec) -> Result<QhornQuery, QhornError> {
    match spec.class {
        QueryClass::Qhorn1 => gen_random_qhorn1(spec),
        QueryClass::Rp => gen_random_rp(spec),
    }
}

/// Random partition of the variables; each block becomes a bodyless
/// universal, a conjunction, or a shared body with one or more heads.
pub fn gen_random_qhorn1(spec: &GenSpec) -> Result<QhornQuery, QhornError> {
    check_arity(spec.n)?;
    if spec.n == 0 {
        return QhornQuery::empty(0);
    }
    let mut rng = rng_for(spec.seed);
    let mut vars: Vec<VarId> = (0..spec.n as u8).map(VarId).collect();
    vars.shuffle(&mut rng);
    let cut = rng.random_range(0.3..0.7);
    let mut blocks: Vec<Vec<VarId>> = vec![vec![vars[0]]];
    for &v in &vars[1..] {
        if rng.random_bool(cut) {
            blocks.push(vec![v]);
        } else {
            blocks.last_mut().expect("non-empty").push(v);
        }
    }
    let parts: Vec<PartPlan> = blocks
        .into_iter()
        .map(|b| {
            let vars: VarSet = b.iter().copied().collect();
            let heads = if b.len() == 1 {
                if rng.random_bool(0.5) { vec![(b[0], true)] } else { Vec::new() }
            } else {
                let count = if rng.random_bool(0.5) { 1 } else { rng.random_range(0..b.len()) };
                b[..count].iter().map(|&h| (h, rng.random_bool(0.5))).collect()
            };
            PartPlan { vars, heads }
        })
        .collect();
    qhorn1_from_partition(spec.n, &parts)
}

fn random_subset<R: Rng>(rng: &mut R, from: VarSet, max: usize) -> VarSet {
    let mut pool: Vec<VarId> = from.iter().collect();
    pool.shuffle(rng);
    let size = rng.random_range(1..=max.min(pool.len()).max(1));
    pool.into_iter().take(size).collect()
}

/// Heads, up to `theta` incomparable bodies per head over the non-heads,
/// and random conjunctions, returned in normal form.
pub fn gen_random_rp(spec: &GenSpec) -> Result<QhornQuery, QhornError> {
    let q = normalize(&gen_random_rp_raw(spec)?).to_query();
    debug_assert!(is_role_preserving(&q) && causal_density(&q) <= spec.theta.max(1));
    Ok(q)
}

/// Like [`gen_random_rp`] but before normalization, with some dominated
/// expressions mixed in.
pub fn gen_random_rp_raw(spec: &GenSpec) -> Result<QhornQuery, QhornError> {
    check_arity(spec.n)?;
    let n = spec.n;
    let mut rng = rng_for(spec.seed);
    let all = VarSet::full(n);
    let mut universals = Vec::new();
    if spec.theta > 0 && n > 0 {
        let max_heads = (n / 3).max(1);
        let mut vars: Vec<VarId> = all.iter().collect();
        vars.shuffle(&mut rng);
        let heads: VarSet = vars.into_iter().take(rng.random_range(1..=max_heads)).collect();
        let non_heads = all.difference(heads);
        for h in heads.iter() {
            if non_heads.is_empty() || rng.random_bool(0.2) {
                universals.push(UniversalHorn::bodyless(h));
                continue;
            }
            let want = rng.random_range(1..=spec.theta);
            let mut bodies: Vec<VarSet> = Vec::new();
            for _ in 0..want * 4 {
                if bodies.len() == want {
                    break;
                }
                let b = random_subset(&mut rng, non_heads, 3);
                if bodies.iter().all(|o| !o.is_subset(b) && !b.is_subset(*o)) {
                    bodies.push(b);
                }
            }
            universals.extend(bodies.into_iter().map(|b| UniversalHorn::new(b, h)));
        }
        if let Some(&u) = universals.first() {
            // dominated copy: larger body, same head
            if let Some(v) = non_heads.difference(u.body).first() {
                if rng.random_bool(0.3) {
                    universals.push(UniversalHorn::new(u.body.with(v), u.head));
                }
            }
        }
    }
    let ke = if spec.k > universals.len() { spec.k - universals.len() } else { rng.random_range(0..=1) };
    let mut existentials: Vec<ExistentialConj> = Vec::new();
    if n > 0 {
        for _ in 0..ke {
            let c = random_subset(&mut rng, all, 4);
            existentials.push(ExistentialConj::new(c));
            if c.len() > 1 && rng.random_bool(0.2) {
                existentials.push(ExistentialConj::new(c.without(c.first().expect("non-empty"))));
            }
        }
    }
    QhornQuery::new(n, universals, existentials)
}

/// Unrestricted qhorn: heads may also appear in bodies.
pub fn gen_random_general(spec: &GenSpec) -> Result<QhornQuery, QhornError> {
    check_arity(spec.n)?;
    let n = spec.n;
    let mut rng = rng_for(spec.seed);
    let all = VarSet::full(n);
    if n == 0 {
        return QhornQuery::empty(0);
    }
    let ku = rng.random_range(0..=spec.k);
    let universals: Vec<UniversalHorn> = (0..ku)
        .map(|_| {
            let h = VarId(rng.random_range(0..n) as u8);
            let rest = all.without(h);
            let body = if rest.is_empty() || rng.random_bool(0.2) { VarSet::EMPTY } else { random_subset(&mut rng, rest, 3) };
            UniversalHorn::new(body, h)
        })
        .collect();
    let existentials: Vec<ExistentialConj> =
        (ku..spec.k).map(|_| ExistentialConj::new(random_subset(&mut rng, all, 4))).collect();
    QhornQuery::new(n, universals, existentials)
}
