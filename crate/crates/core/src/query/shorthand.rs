//! Parser for the shorthand notation printed by `Display`.
//!
//! Accepts `∀`/`A`, `∃`/`E`, `→`/`->`, optional `∧`/`&` separators and
//! arbitrary whitespace. `∃B→h` is read as the conjunction `B ∪ {h}`.

use super::{ExistentialConj, QhornQuery, UniversalHorn};
use crate::bits::{VarId, VarSet};
use crate::error::QhornError;

impl QhornQuery {
    pub fn parse_shorthand(s: &str, n: usize) -> Result<QhornQuery, QhornError> {
        let cleaned: String = s
            .replace("->", "→")
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '∧' && *c != '&')
            .collect();
        let mut universals = Vec::new();
        let mut existentials = Vec::new();
        if cleaned.is_empty() || cleaned == "⊤" {
            return QhornQuery::new(n, universals, existentials);
        }
        let mut chunks: Vec<(char, String)> = Vec::new();
        for c in cleaned.chars() {
            match c {
                '∀' | 'A' | '∃' | 'E' => chunks.push((c, String::new())),
                _ => match chunks.last_mut() {
                    Some((_, body)) => body.push(c),
                    None => return Err(QhornError::ParseQuery(format!("expected a quantifier at the start of {s:?}"))),
                },
            }
        }
        for (quant, text) in chunks {
            let (lhs, rhs) = match text.split_once('→') {
                Some((l, r)) => (l, Some(r)),
                None => (text.as_str(), None),
            };
            let lhs_vars = parse_vars(lhs)?;
            let rhs_var = rhs.map(parse_vars).transpose()?;
            match quant {
                '∀' | 'A' => {
                    let u = match rhs_var {
                        Some(head) => {
                            let h = single(head, &text)?;
                            UniversalHorn::new(lhs_vars, h)
                        }
                        None => UniversalHorn::bodyless(single(lhs_vars, &text)?),
                    };
                    universals.push(u);
                }
                _ => {
                    let vars = match rhs_var {
                        Some(head) => lhs_vars.with(single(head, &text)?),
                        None => lhs_vars,
                    };
                    existentials.push(ExistentialConj::new(vars));
                }
            }
        }
        QhornQuery::new(n, universals, existentials)
    }
}

fn single(set: VarSet, ctx: &str) -> Result<VarId, QhornError> {
    match (set.len(), set.first()) {
        (1, Some(v)) => Ok(v),
        _ => Err(QhornError::ParseQuery(format!("expected exactly one variable in {ctx:?}"))),
    }
}

fn parse_vars(s: &str) -> Result<VarSet, QhornError> {
    if s == "T" || s == "⊤" {
        return Ok(VarSet::EMPTY);
    }
    let mut out = VarSet::EMPTY;
    for part in s.split('x').skip(1) {
        let i: usize = part.parse().map_err(|_| QhornError::ParseQuery(format!("bad variable list {s:?}")))?;
        let v = VarId::from_one_based(i).ok_or_else(|| QhornError::ParseQuery(format!("variable x{i} out of range")))?;
        out.insert(v);
    }
    if !s.starts_with('x') && !s.is_empty() {
        return Err(QhornError::ParseQuery(format!("bad variable list {s:?}")));
    }
    Ok(out)
}
