//! Query JSON with 1-based variable numbers:
//! `{"n":6,"universals":[{"body":[1,4],"head":5}],"existentials":[[1,2,3]]}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ExistentialConj, QhornQuery, QueryClass, UniversalHorn};
use crate::bits::{VarId, VarSet};
use crate::error::QhornError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryJson {
    pub n: usize,
    #[serde(default)]
    pub universals: Vec<UniversalJson>,
    #[serde(default)]
    pub existentials: Vec<ExistentialJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propositions: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<QueryClass>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalJson {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub body: Vec<usize>,
    pub head: usize,
}

/// A plain conjunction, or an existential Horn expression that is read as
/// the conjunction `body ∪ {head}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExistentialJson {
    Conj(Vec<usize>),
    Horn {
        #[serde(default)]
        body: Vec<usize>,
        head: usize,
    },
}

fn var(i: usize, n: usize) -> Result<VarId, QhornError> {
    match VarId::from_one_based(i) {
        Some(v) if i <= n => Ok(v),
        _ => Err(QhornError::VarOutOfRange { set: vec![i], n }),
    }
}

fn vars(is: &[usize], n: usize) -> Result<VarSet, QhornError> {
    is.iter().map(|&i| var(i, n)).collect()
}

impl TryFrom<QueryJson> for QhornQuery {
    type Error = QhornError;

    fn try_from(j: QueryJson) -> Result<Self, Self::Error> {
        crate::bits::check_arity(j.n)?;
        let n = j.n;
        let universals = j
            .universals
            .iter()
            .map(|u| Ok(UniversalHorn::new(vars(&u.body, n)?, var(u.head, n)?)))
            .collect::<Result<Vec<_>, QhornError>>()?;
        let existentials = j
            .existentials
            .iter()
            .map(|e| {
                let set = match e {
                    ExistentialJson::Conj(vs) => vars(vs, n)?,
                    ExistentialJson::Horn { body, head } => vars(body, n)?.with(var(*head, n)?),
                };
                Ok(ExistentialConj::new(set))
            })
            .collect::<Result<Vec<_>, QhornError>>()?;
        let mut q = QhornQuery::new(n, universals, existentials)?;
        if let Some(p) = j.propositions {
            q = q.with_vocabulary(p)?;
        }
        if let Some(class) = j.class {
            class.check(&q)?;
        }
        Ok(q)
    }
}

impl From<&QhornQuery> for QueryJson {
    fn from(q: &QhornQuery) -> Self {
        QueryJson {
            n: q.arity(),
            universals: q
                .universals()
                .iter()
                .map(|u| UniversalJson { body: u.body.to_one_based(), head: u.head.one_based() })
                .collect(),
            existentials: q.existentials().iter().map(|e| ExistentialJson::Conj(e.vars.to_one_based())).collect(),
            propositions: q.vocabulary().map(<[String]>::to_vec),
            class: None,
        }
    }
}

impl QhornQuery {
    pub fn from_json_str(s: &str) -> Result<QhornQuery, QhornError> {
        let j: QueryJson = serde_json::from_str(s)?;
        j.try_into()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(QueryJson::from(self)).expect("query JSON serializes")
    }
}

impl Serialize for QhornQuery {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        QueryJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QhornQuery {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        QueryJson::deserialize(deserializer)?.try_into().map_err(serde::de::Error::custom)
    }
}
