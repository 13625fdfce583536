//! Brute-force semantics: queries compiled to masks over all `2^n` tuples,
//! so an object is a `u64` subset of the tuple space. Used as an
//! independent check on normalization-based equivalence.

use rand::Rng;

use crate::bits::{Tuple, VarSet};
use crate::error::QhornError;
use crate::query::{Label, QhornQuery};

/// Largest arity the compiled form supports (`2^6 = 64` tuples).
pub const COMPILED_MAX_ARITY: usize = 6;

/// Largest arity for exhaustive object enumeration (`2^(2^4)` objects).
pub const EXHAUSTIVE_MAX_ARITY: usize = 4;

#[derive(Clone, Debug)]
pub struct CompiledQuery {
    n: usize,
    forbidden: u64,
    witnesses: Vec<u64>,
}

impl CompiledQuery {
    pub fn new(q: &QhornQuery) -> Result<CompiledQuery, QhornError> {
        let n = q.arity();
        if n > COMPILED_MAX_ARITY {
            return Err(QhornError::Precondition(format!("compiled evaluation needs n <= 6, got {n}")));
        }
        let mask_where = |pred: &dyn Fn(VarSet) -> bool| -> u64 {
            (0..1u32 << n).filter(|&b| pred(VarSet::from_bits(b))).fold(0u64, |m, b| m | 1 << b)
        };
        let forbidden = mask_where(&|s| q.universals().iter().any(|u| u.body.is_subset(s) && !s.contains(u.head)));
        let witnesses = q
            .universals()
            .iter()
            .map(|u| u.guarantee())
            .chain(q.existentials().iter().map(|e| e.vars))
            .map(|c| mask_where(&|s| c.is_subset(s)))
            .collect();
        Ok(CompiledQuery { n, forbidden, witnesses })
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    /// `obj` has bit `b` set when the tuple with bitmask `b` is present.
    pub fn accepts(&self, obj: u64) -> bool {
        obj & self.forbidden == 0 && self.witnesses.iter().all(|&w| obj & w != 0)
    }

    pub fn accepts_tuples(&self, tuples: &[Tuple]) -> bool {
        self.accepts(object_mask(tuples))
    }

    pub fn label(&self, obj: u64) -> Label {
        Label::from_bool(self.accepts(obj))
    }
}

pub fn object_mask(tuples: &[Tuple]) -> u64 {
    tuples.iter().fold(0u64, |m, t| m | 1 << t.true_set().bits())
}

/// Decides equivalence by evaluating both queries on every object over at
/// most four variables, the empty object included.
pub fn equivalent_bruteforce(q1: &QhornQuery, q2: &QhornQuery) -> Result<bool, QhornError> {
    if q1.arity() != q2.arity() {
        return Err(QhornError::ArityMismatch { expected: q1.arity(), found: q2.arity() });
    }
    let n = q1.arity();
    if n > EXHAUSTIVE_MAX_ARITY {
        return Err(QhornError::BruteforceArity(n));
    }
    let (a, b) = (CompiledQuery::new(q1)?, CompiledQuery::new(q2)?);
    let objects = 1u64 << (1u32 << n);
    Ok((0..objects).all(|o| a.accepts(o) == b.accepts(o)))
}

/// Random-object comparison for larger arities. A `false` is a proof of
/// difference; a `true` is only evidence.
pub fn equivalent_sampled<R: Rng>(
    q1: &QhornQuery,
    q2: &QhornQuery,
    samples: usize,
    rng: &mut R,
) -> Result<bool, QhornError> {
    if q1.arity() != q2.arity() {
        return Err(QhornError::ArityMismatch { expected: q1.arity(), found: q2.arity() });
    }
    let n = q1.arity();
    let top = Tuple::all_true(n)?;
    for _ in 0..samples {
        let size = rng.random_range(0..=8usize);
        let mut tuples = Vec::with_capacity(size + 1);
        for _ in 0..size {
            // clear a few variables so tuples sit near the top, where
            // universal constraints are rarely violated by accident
            let flips = rng.random_range(0..=n);
            let mut cleared = VarSet::EMPTY;
            for _ in 0..flips {
                cleared.insert(crate::bits::VarId(rng.random_range(0..n) as u8));
            }
            tuples.push(top.cleared(cleared));
        }
        if rng.random_bool(0.5) {
            tuples.push(top);
        }
        if q1.evaluate_tuples(&tuples)? != q2.evaluate_tuples(&tuples)? {
            return Ok(false);
        }
    }
    Ok(true)
}
