//! Verification sets: a short list of questions whose labels under a given
//! role-preserving query pin that query down up to equivalence.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{Question, Tuple, VarId, VarSet};
use crate::error::QhornError;
use crate::oracle::{MembershipOracle, Phase};
use crate::query::{head_closure, is_role_preserving, normalize, violates_universal, Label, NormalizedQuery, QhornQuery};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ItemKind {
    A1,
    N1,
    A2,
    N2,
    A3,
    A4,
}

impl ItemKind {
    pub fn discrepancy(self) -> Discrepancy {
        match self {
            ItemKind::A1 | ItemKind::N1 => Discrepancy::ExistentialTupleMismatch,
            ItemKind::A2 => Discrepancy::BodySubset,
            ItemKind::N2 => Discrepancy::BodySuperset,
            ItemKind::A3 => Discrepancy::MissingIncomparableBody,
            ItemKind::A4 => Discrepancy::HeadNonHeadFlip,
        }
    }
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// What kind of difference a disagreeing item points at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discrepancy {
    ExistentialTupleMismatch,
    /// The intended query has a smaller body for some head.
    BodySubset,
    /// The intended query has a larger body for some head.
    BodySuperset,
    MissingIncomparableBody,
    HeadNonHeadFlip,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discrepancy::ExistentialTupleMismatch => "existential-tuple mismatch",
            Discrepancy::BodySubset => "body-subset",
            Discrepancy::BodySuperset => "body-superset",
            Discrepancy::MissingIncomparableBody => "missing incomparable body",
            Discrepancy::HeadNonHeadFlip => "head/non-head flip",
        })
    }
}

/// How A3 roots treat variables outside the dominating conjunction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum A3Mode {
    /// Outside variables false (the root sits below the conjunction).
    #[default]
    OutsideFalse,
    /// Outside variables true.
    OutsideTrue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationItem {
    pub kind: ItemKind,
    #[serde(flatten)]
    pub question: Question,
    pub expected: Label,
    /// Expression or tuple the item was built from.
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemOutcome {
    pub index: usize,
    pub kind: ItemKind,
    pub expected: Label,
    pub observed: Label,
    pub agree: bool,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Refuted { first: usize, kind: ItemKind, discrepancy: Discrepancy },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub items: Vec<ItemOutcome>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &ItemOutcome> {
        self.items.iter().filter(|o| !o.agree)
    }
}

struct Builder<'a> {
    q: &'a QhornQuery,
    n: usize,
    top: Tuple,
    items: Vec<VerificationItem>,
}

impl Builder<'_> {
    fn push(&mut self, kind: ItemKind, tuples: impl IntoIterator<Item = Tuple>, provenance: String) {
        let question = Question::from_tuples_unchecked(self.n, tuples);
        let expected = self.q.eval_iter(question.iter());
        self.items.push(VerificationItem { kind, question, expected, provenance });
    }

    fn tuple(&self, s: VarSet) -> Tuple {
        Tuple::from_set_unchecked(self.n, s)
    }
}

fn cross_flips(bodies: &[VarSet]) -> Vec<VarSet> {
    bodies.iter().fold(vec![VarSet::EMPTY], |acc, b| {
        acc.iter().flat_map(|f| b.iter().map(move |v| f.with(v))).collect()
    })
}

fn a3_roots(nq: &NormalizedQuery, mode: A3Mode) -> Vec<(VarId, VarSet)> {
    let all = VarSet::full(nq.arity());
    let heads = nq.heads();
    let mut roots: Vec<(VarId, VarSet)> = Vec::new();
    for h in heads.iter() {
        let bodies: Vec<VarSet> = nq.bodies_of(h).collect();
        if bodies.iter().any(|b| b.is_empty()) {
            continue;
        }
        for &c in nq.existentials() {
            if !c.contains(h) {
                continue;
            }
            // a conjunction that is exactly a guarantee closure of h needs no roots
            let inside: Vec<VarSet> = bodies.iter().copied().filter(|b| b.is_subset(c)).collect();
            if !inside.is_empty() && inside.iter().all(|&b| head_closure(b.with(h), nq.universals()) == c) {
                continue;
            }
            // with no known body inside, the root is `C` minus `h`; under the
            // outside-true reading that root is the whole top minus `h`
            if inside.is_empty() && mode == A3Mode::OutsideTrue {
                continue;
            }
            for flips in cross_flips(&inside) {
                let base = match mode {
                    A3Mode::OutsideFalse => c,
                    A3Mode::OutsideTrue => all,
                };
                let root = base.difference(flips).without(h).union(heads.without(h));
                roots.push((h, root));
            }
        }
    }
    let mut seen = BTreeSet::new();
    roots.retain(|r| seen.insert(*r));
    let all_roots = roots.clone();
    roots.retain(|&(h, r)| !all_roots.iter().any(|&(g, o)| g == h && r.is_strict_subset(o)));
    roots
}

/// Verification set with the default A3 reading.
pub fn build_verification_set(q: &QhornQuery) -> Result<Vec<VerificationItem>, QhornError> {
    build_verification_set_with(q, A3Mode::default())
}

/// Items in fixed order A1, N1*, A2*, N2*, A3, A4; every expected label is
/// the given query's own label.
pub fn build_verification_set_with(q: &QhornQuery, mode: A3Mode) -> Result<Vec<VerificationItem>, QhornError> {
    if !is_role_preserving(q) {
        return Err(QhornError::ClassViolation("verification needs a role-preserving query"));
    }
    let n = q.arity();
    let nq = normalize(q);
    let all = VarSet::full(n);
    let mut b = Builder { q, n, top: Tuple::all_true(n)?, items: Vec::new() };

    let a1 = nq.existential_tuples();
    if a1.is_empty() {
        b.push(ItemKind::A1, [b.top], "⊤".into());
    } else {
        b.push(ItemKind::A1, a1.iter().copied(), "dominant existential tuples".into());
    }

    for (i, &t) in a1.iter().enumerate() {
        if nq.is_guarantee(i) {
            continue;
        }
        let children = t.children(all).into_iter().filter(|c| !violates_universal(*c, nq.universals()));
        let rest = a1.iter().copied().filter(|&o| o != t);
        b.push(ItemKind::N1, rest.chain(children).collect::<Vec<_>>(), format!("∃{}", t.true_set()));
    }

    for u in nq.universals().iter().filter(|u| !u.is_bodyless()) {
        let ut = nq.universal_tuple(u);
        let flipped: Vec<Tuple> = u.body.iter().map(|v| b.tuple(ut.true_set().without(v))).collect();
        b.push(ItemKind::A2, std::iter::once(b.top).chain(flipped), u.to_string());
    }

    for u in nq.universals() {
        let ut = nq.universal_tuple(u);
        b.push(ItemKind::N2, [b.top, ut], u.to_string());
    }

    let roots = a3_roots(&nq, mode);
    if !roots.is_empty() {
        let tuples: Vec<Tuple> = std::iter::once(b.top).chain(roots.iter().map(|&(_, r)| b.tuple(r))).collect();
        b.push(ItemKind::A3, tuples, "roots below dominated guarantees".into());
    }

    let a4: Vec<Tuple> = nq.non_heads().iter().map(|v| b.tuple(all.without(v))).collect();
    b.push(ItemKind::A4, std::iter::once(b.top).chain(a4), "non-head variables".into());

    Ok(b.items)
}

pub fn verification_set_size(q: &QhornQuery) -> Result<usize, QhornError> {
    Ok(build_verification_set(q)?.len())
}

/// Asks every item once, in order.
pub fn run_verification<O: MembershipOracle + ?Sized>(
    oracle: &mut O,
    items: &[VerificationItem],
) -> Result<VerificationReport, QhornError> {
    let mut outcomes = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let observed = oracle.ask(&item.question, Phase::Verification)?;
        outcomes.push(ItemOutcome {
            index,
            kind: item.kind,
            expected: item.expected,
            observed,
            agree: observed == item.expected,
            provenance: item.provenance.clone(),
        });
    }
    Ok(report(outcomes))
}

pub fn report(items: Vec<ItemOutcome>) -> VerificationReport {
    let verdict = match items.iter().find(|o| !o.agree) {
        None => Verdict::Verified,
        Some(o) => Verdict::Refuted { first: o.index, kind: o.kind, discrepancy: o.kind.discrepancy() },
    };
    VerificationReport { items, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::simulated_oracle;

    fn parse(s: &str, n: usize) -> QhornQuery {
        QhornQuery::parse_shorthand(s, n).unwrap()
    }

    fn example() -> QhornQuery {
        parse("∀x1x4→x5 ∀x3x4→x5 ∀x1x2→x6 ∃x1x2x3 ∃x2x3x4 ∃x1x2x5 ∃x2x3x5x6", 6)
    }

    fn strs(q: &Question) -> BTreeSet<String> {
        q.to_strings().into_iter().collect()
    }

    fn set(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn worked_example_items() {
        let items = build_verification_set(&example()).unwrap();
        let kinds: Vec<ItemKind> = items.iter().map(|i| i.kind).collect();
        use ItemKind::*;
        assert_eq!(kinds, [A1, N1, N1, N1, N1, A2, A2, A2, N2, N2, N2, A3, A4]);
        assert_eq!(strs(&items[0].question), set(&["111001", "011110", "110011", "011011", "100110"]));
        let n2: Vec<_> = items.iter().filter(|i| i.kind == N2).map(|i| strs(&i.question)).collect();
        assert!(n2.contains(&set(&["111111", "100101"])));
        assert!(n2.contains(&set(&["111111", "001101"])));
        assert!(n2.contains(&set(&["111111", "110010"])));
        let a2 = items.iter().find(|i| i.kind == A2 && i.provenance == "∀x1x4→x5").unwrap();
        assert_eq!(strs(&a2.question), set(&["111111", "100001", "000101"]));
        assert_eq!(strs(&items[12].question), set(&["111111", "011111", "101111", "110111", "111011"]));
        // 110001 comes from ∃x1x2x5x6, which holds x5 but no body of x5
        assert_eq!(strs(&items[11].question), set(&["111111", "011001", "010101", "011010", "101010", "110001"]));
        for i in &items {
            let want = if i.kind == N1 || i.kind == N2 { Label::NonAnswer } else { Label::Answer };
            assert_eq!(i.expected, want, "{:?}", i);
        }
    }

    #[test]
    fn a3_alternate_reading_contains_printed_tuple() {
        let items = build_verification_set_with(&example(), A3Mode::OutsideTrue).unwrap();
        let a3 = items.iter().find(|i| i.kind == ItemKind::A3).unwrap();
        assert!(strs(&a3.question).contains("111001"));
    }

    #[test]
    fn small_sizes() {
        assert_eq!(verification_set_size(&example()).unwrap(), 13);
        assert_eq!(verification_set_size(&parse("∃x1x2", 3)).unwrap(), 3);
        let empty = build_verification_set(&QhornQuery::empty(2).unwrap()).unwrap();
        assert_eq!(empty.len(), 2);
        assert_eq!(strs(&empty[0].question), set(&["11"]));
        assert_eq!(empty[0].expected, Label::Answer);
        assert_eq!(empty[1].kind, ItemKind::A4);
    }

    #[test]
    fn rejects_non_rp() {
        assert!(build_verification_set(&parse("∀x1→x2 ∀x2→x3", 3)).is_err());
    }

    #[test]
    fn self_verification() {
        let q = example();
        let items = build_verification_set(&q).unwrap();
        let r = run_verification(&mut simulated_oracle(q), &items).unwrap();
        assert!(r.is_verified());
        assert!(r.items.iter().all(|o| o.agree));
    }

    #[test]
    fn smaller_body_is_caught_by_a2() {
        let q = example();
        let mutant = parse("∀x1x4→x5 ∀x3→x5 ∀x1x2→x6 ∃x1x2x3 ∃x2x3x4 ∃x1x2x5 ∃x2x3x5x6", 6);
        let items = build_verification_set(&q).unwrap();
        let r = run_verification(&mut simulated_oracle(mutant), &items).unwrap();
        let bad: Vec<_> = r.disagreements().map(|o| (o.kind, o.provenance.as_str())).collect();
        assert!(bad.contains(&(ItemKind::A2, "∀x3x4→x5")));
        assert!(!bad.contains(&(ItemKind::N2, "∀x3x4→x5")));
        assert!(!r.is_verified());
    }

    #[test]
    fn dropped_conjunction_is_caught() {
        let q = example();
        let mutant = parse("∀x1x4→x5 ∀x3x4→x5 ∀x1x2→x6 ∃x1x2x3 ∃x2x3x4 ∃x1x2x5", 6);
        let items = build_verification_set(&q).unwrap();
        let r = run_verification(&mut simulated_oracle(mutant), &items).unwrap();
        let first = r.disagreements().next().unwrap();
        assert_eq!(first.kind, ItemKind::N1);
        assert_eq!(first.provenance, "∃x2x3x5x6");
        assert!(matches!(r.verdict, Verdict::Refuted { discrepancy: Discrepancy::ExistentialTupleMismatch, .. }));
    }
}
