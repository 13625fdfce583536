use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen::gen_random, GenSpec};
use crate::error::QhornError;
use crate::oracle::{counting_wrapper, simulated_oracle, OracleStats};
use crate::qhorn1::learn_qhorn1;
use crate::query::{causal_density, equivalent, QhornQuery, QueryClass};
use crate::rp::{learn_rp, RpOptions};

pub const CSV_HEADER: &str = "n,k,theta,questions,tuples,max_tuples,ms,equivalent";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub k: usize,
    pub theta: usize,
    pub questions: usize,
    pub tuples: usize,
    pub max_tuples: usize,
    pub ms: f64,
    pub equivalent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub trials: usize,
    pub all_equivalent: bool,
    pub max_questions: usize,
    pub mean_questions: f64,
}

impl BenchSummary {
    pub fn of(rows: &[BenchRow]) -> BenchSummary {
        let total: usize = rows.iter().map(|r| r.questions).sum();
        BenchSummary {
            trials: rows.len(),
            all_equivalent: rows.iter().all(|r| r.equivalent),
            max_questions: rows.iter().map(|r| r.questions).max().unwrap_or(0),
            mean_questions: if rows.is_empty() { 0.0 } else { total as f64 / rows.len() as f64 },
        }
    }
}

/// Learns `target` against a simulated oracle with the learner for `class`.
pub fn learn_with_stats(
    class: QueryClass,
    target: &QhornQuery,
    options: RpOptions,
) -> Result<(QhornQuery, OracleStats), QhornError> {
    let mut oracle = counting_wrapper(simulated_oracle(target.clone()));
    let learned = match class {
        QueryClass::Qhorn1 => learn_qhorn1(&mut oracle, target.arity())?,
        QueryClass::Rp => learn_rp(&mut oracle, target.arity(), options)?,
    };
    Ok((learned, oracle.stats()))
}

fn run_trial(spec: GenSpec) -> Result<BenchRow, QhornError> {
    let target = gen_random(&spec)?;
    let started = Instant::now();
    let options = RpOptions { theta_cap: spec.theta.max(1), ..RpOptions::default() };
    let (learned, stats) = learn_with_stats(spec.class, &target, options)?;
    let ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(BenchRow {
        n: spec.n,
        k: target.size(),
        theta: causal_density(&target),
        questions: stats.questions,
        tuples: stats.tuples,
        max_tuples: stats.max_tuples,
        ms,
        equivalent: equivalent(&learned, &target)?,
    })
}

/// One row per trial, in trial order. Trials run in parallel.
pub fn bench(spec: &GenSpec, trials: usize) -> Result<(Vec<BenchRow>, BenchSummary), QhornError> {
    let rows = (0..trials).into_par_iter().map(|i| run_trial(spec.trial(i))).collect::<Result<Vec<_>, _>>()?;
    let summary = BenchSummary::of(&rows);
    Ok((rows, summary))
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), QhornError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
