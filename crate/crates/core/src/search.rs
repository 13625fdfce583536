//! Binary search over variable sets driven by membership questions.
//!
//! A builder maps a candidate set `V` to a question; a response equal to
//! `eliminate_on` rules out all of `V`. Splits put the lower-indexed half
//! (rounded up) first.

use crate::bits::{Question, VarSet};
use crate::error::QhornError;
use crate::oracle::{MembershipOracle, Phase};
use crate::query::Label;

fn halves(d: VarSet) -> (VarSet, VarSet) {
    d.split_at(d.len().div_ceil(2))
}

/// Returns one variable of `domain` the builder depends on, or `∅`.
pub fn find<O, B>(oracle: &mut O, phase: Phase, build: &B, eliminate_on: Label, domain: VarSet) -> Result<VarSet, QhornError>
where
    O: MembershipOracle + ?Sized,
    B: Fn(VarSet) -> Question + ?Sized,
{
    if domain.is_empty() || oracle.ask(&build(domain), phase)? == eliminate_on {
        return Ok(VarSet::EMPTY);
    }
    if domain.len() == 1 {
        return Ok(domain);
    }
    let (d1, d2) = halves(domain);
    let x = find(oracle, phase, build, eliminate_on, d1)?;
    if x.is_empty() {
        find(oracle, phase, build, eliminate_on, d2)
    } else {
        Ok(x)
    }
}

/// Returns every variable of `domain` the builder depends on.
pub fn find_all<O, B>(oracle: &mut O, phase: Phase, build: &B, eliminate_on: Label, domain: VarSet) -> Result<VarSet, QhornError>
where
    O: MembershipOracle + ?Sized,
    B: Fn(VarSet) -> Question + ?Sized,
{
    if domain.is_empty() || oracle.ask(&build(domain), phase)? == eliminate_on {
        return Ok(VarSet::EMPTY);
    }
    if domain.len() == 1 {
        return Ok(domain);
    }
    let (d1, d2) = halves(domain);
    let a = find_all(oracle, phase, build, eliminate_on, d1)?;
    let b = find_all(oracle, phase, build, eliminate_on, d2)?;
    Ok(a.union(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{counting_wrapper, simulated_oracle};
    use crate::qhorn1::universal_dependence_question;
    use crate::query::QhornQuery;
    use crate::VarId;

    #[test]
    fn find_follows_the_binary_search() {
        let target = QhornQuery::parse_shorthand("∀x4→x1 ∃x2 ∃x3 ∃x4", 4).unwrap();
        let mut o = counting_wrapper(simulated_oracle(target));
        let build = |v: VarSet| universal_dependence_question(VarId(0), v, 4).unwrap();
        let got = find(&mut o, Phase::BodySearch, &build, Label::NonAnswer, VarSet::from_one_based(&[2, 3, 4])).unwrap();
        assert_eq!(got, VarSet::from_one_based(&[4]));
        let asked: Vec<String> = o.transcript().iter().map(|e| e.question.to_string()).collect();
        assert_eq!(asked[0], "{0000, 1111}");
        assert_eq!(asked[1], "{0001, 1111}");
        assert_eq!(o.transcript()[0].label, Label::Answer);
        assert_eq!(o.transcript()[1].label, Label::NonAnswer);
    }

    #[test]
    fn empty_domain_asks_nothing() {
        let mut o = counting_wrapper(simulated_oracle(QhornQuery::empty(3).unwrap()));
        let build = |v: VarSet| universal_dependence_question(VarId(0), v, 3).unwrap();
        assert!(find(&mut o, Phase::BodySearch, &build, Label::NonAnswer, VarSet::EMPTY).unwrap().is_empty());
        assert!(find_all(&mut o, Phase::BodySearch, &build, Label::NonAnswer, VarSet::EMPTY).unwrap().is_empty());
        assert_eq!(o.stats().questions, 0);
    }

    #[test]
    fn find_all_recovers_a_body() {
        let target = QhornQuery::parse_shorthand("∀x3x4→x1 ∃x2", 4).unwrap();
        let mut o = counting_wrapper(simulated_oracle(target));
        let build = |v: VarSet| universal_dependence_question(VarId(0), v, 4).unwrap();
        let d = VarSet::from_one_based(&[2, 3, 4]);
        assert_eq!(find_all(&mut o, Phase::BodySearch, &build, Label::NonAnswer, d).unwrap(), VarSet::from_one_based(&[3, 4]));
        // brute force: exactly the subsets meeting {x3,x4} flip the label
        for bits in 1..16u32 {
            let v = VarSet::from_bits(bits).intersection(d);
            if v.is_empty() {
                continue;
            }
            let label = o.inner().target().evaluate(&build(v)).unwrap();
            assert_eq!(label.is_answer(), !v.is_disjoint(VarSet::from_one_based(&[3, 4])));
        }
    }

    #[test]
    fn find_all_on_independent_head_asks_once() {
        let target = QhornQuery::parse_shorthand("∀x1 ∃x2 ∃x3", 3).unwrap();
        let mut o = counting_wrapper(simulated_oracle(target));
        let build = |v: VarSet| universal_dependence_question(VarId(0), v, 3).unwrap();
        assert!(find_all(&mut o, Phase::BodySearch, &build, Label::NonAnswer, VarSet::from_one_based(&[2, 3])).unwrap().is_empty());
        assert_eq!(o.stats().questions, 1);
    }

    #[test]
    fn singleton_domain() {
        let target = QhornQuery::parse_shorthand("∀x4→x1 ∃x2 ∃x3", 4).unwrap();
        let mut o = simulated_oracle(target);
        let build = |v: VarSet| universal_dependence_question(VarId(0), v, 4).unwrap();
        assert_eq!(
            find_all(&mut o, Phase::BodySearch, &build, Label::NonAnswer, VarSet::from_one_based(&[4])).unwrap(),
            VarSet::from_one_based(&[4])
        );
    }
}
