mod prompt;

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qhorn_core::harness::{bench, gen_random, write_csv, GenSpec};
use qhorn_core::verify::build_verification_set_with;
use qhorn_core::{
    counting_wrapper, equivalent, learn_qhorn1, learn_rp, normalize, parse_tuple, run_verification, simulated_oracle,
    A3Mode, QhornQuery, Question, QueryClass, RpOptions, TranscriptEntry, VerificationReport,
};
use qhorn_session::{Mode, OracleKind, SessionManager, SessionRequest, SessionResult, DATA_DIR_ENV};

#[derive(Parser)]
#[command(name = "qhorn", version, about = "Learn and verify quantified Boolean queries from membership questions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Qhorn1,
    Rp,
}

impl From<ClassArg> for QueryClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Qhorn1 => QueryClass::Qhorn1,
            ClassArg::Rp => QueryClass::Rp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Simulated,
    Interactive,
}

#[derive(Clone, Copy, ValueEnum)]
enum A3Arg {
    OutsideFalse,
    OutsideTrue,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a query by asking membership questions.
    Learn {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "simulated")]
        oracle: OracleArg,
        /// Hidden query the simulated oracle answers from (JSON file, or inline JSON).
        #[arg(long)]
        target: Option<String>,
        /// Without --target, generate a random target from this seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Expressions in a generated rp target.
        #[arg(long)]
        k: Option<usize>,
        /// Causal density of a generated rp target.
        #[arg(long, default_value_t = 2)]
        theta: usize,
        /// Give up when a head has more bodies than this (rp only).
        #[arg(long, default_value_t = RpOptions::default().theta_cap)]
        theta_cap: usize,
        /// Include question and tuple counts in the output.
        #[arg(long)]
        stats: bool,
        /// Write the transcript as JSON lines.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Comma-separated proposition names shown in interactive questions.
        #[arg(long, value_delimiter = ',')]
        propositions: Option<Vec<String>>,
    },
    /// Check a query against its verification set.
    Verify {
        #[arg(long)]
        query: String,
        #[arg(long, value_enum, default_value = "simulated")]
        oracle: OracleArg,
        /// Query the simulated oracle answers from; defaults to --query.
        #[arg(long)]
        intended: Option<String>,
        #[arg(long, value_enum, default_value = "outside-false")]
        a3_mode: A3Arg,
        #[arg(long, value_delimiter = ',')]
        propositions: Option<Vec<String>>,
    },
    /// Learn random targets against a simulated oracle and record the cost.
    Bench {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 2)]
        theta: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, env = DATA_DIR_ENV, default_value = "qhorn-data")]
        data: PathBuf,
        /// Directory of static web client files to serve at `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
    /// Label a question with a query.
    Eval {
        #[arg(long)]
        query: String,
        /// Tuples of the question, e.g. 111111 100101.
        tuples: Vec<String>,
    },
    /// Print the normal form of a query.
    Normalize {
        #[arg(long)]
        query: String,
    },
    /// Decide whether two queries are equivalent.
    Equiv { first: String, second: String },
}

/// Reads a query from a JSON file, from stdin (`-`), or inline JSON.
fn load_query(arg: &str) -> anyhow::Result<QhornQuery> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else if arg == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    };
    QhornQuery::from_json_str(&text).with_context(|| format!("parsing query {arg}"))
}

fn print_json(v: &Value) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn write_transcript(path: &Path, transcript: &[TranscriptEntry]) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for e in transcript {
        writeln!(w, "{}", e.to_json_line())?;
    }
    w.flush()?;
    Ok(())
}

fn interactive(request: SessionRequest) -> anyhow::Result<qhorn_session::Session> {
    prompt::run(request, io::stdin().lock(), io::stderr().lock())
}

#[allow(clippy::too_many_arguments)]
fn learn(
    class: ClassArg,
    n: usize,
    oracle: OracleArg,
    target: Option<String>,
    seed: u64,
    k: Option<usize>,
    theta: usize,
    theta_cap: usize,
    stats: bool,
    transcript_path: Option<PathBuf>,
    propositions: Option<Vec<String>>,
) -> anyhow::Result<()> {
    let options = RpOptions { theta_cap, ..RpOptions::default() };
    let mut out = serde_json::Map::new();
    let (learned, transcript, target) = match oracle {
        OracleArg::Simulated => {
            let target = match target {
                Some(t) => load_query(&t)?,
                None => {
                    let spec = match class {
                        ClassArg::Qhorn1 => GenSpec::qhorn1(n, seed),
                        ClassArg::Rp => GenSpec::rp(n, k.unwrap_or(n), theta, seed),
                    };
                    let t = gen_random(&spec)?;
                    out.insert("target".into(), json!({ "query": t, "shorthand": t.to_string() }));
                    t
                }
            };
            if target.arity() != n {
                bail!("--n {n} differs from the target arity {}", target.arity());
            }
            QueryClass::from(class).check(&target)?;
            let mut o = counting_wrapper(simulated_oracle(target.clone()));
            let learned = match class {
                ClassArg::Qhorn1 => learn_qhorn1(&mut o, n)?,
                ClassArg::Rp => learn_rp(&mut o, n, options)?,
            };
            let (_, _, transcript) = o.into_parts();
            (learned, transcript, Some(target))
        }
        OracleArg::Interactive => {
            if target.is_some() {
                bail!("--target only applies to the simulated oracle");
            }
            let mode = match class {
                ClassArg::Qhorn1 => Mode::LearnQhorn1,
                ClassArg::Rp => Mode::LearnRp,
            };
            let mut req = SessionRequest::learn(mode, n, OracleKind::Interactive);
            req.propositions = propositions;
            if matches!(class, ClassArg::Rp) {
                req.theta_cap = Some(theta_cap);
            }
            let s = interactive(req)?;
            let Some(SessionResult::Learned { query, consistency, .. }) = s.result else { bail!("no query learned") };
            if !consistency.is_consistent() {
                out.insert("inconsistencies".into(), serde_json::to_value(&consistency)?);
            }
            (query, s.transcript, None)
        }
    };
    out.insert("query".into(), serde_json::to_value(&learned)?);
    out.insert("shorthand".into(), learned.to_string().into());
    if let Some(t) = &target {
        out.insert("equivalent".into(), equivalent(&learned, t)?.into());
    }
    if stats {
        let mut s = qhorn_core::OracleStats::default();
        transcript.iter().for_each(|e| s.record(&e.question));
        out.insert("stats".into(), serde_json::to_value(s)?);
    }
    if let Some(p) = transcript_path {
        write_transcript(&p, &transcript)?;
    }
    print_json(&Value::Object(out))
}

fn verify(
    query: String,
    oracle: OracleArg,
    intended: Option<String>,
    a3_mode: A3Arg,
    propositions: Option<Vec<String>>,
) -> anyhow::Result<bool> {
    let query = load_query(&query)?;
    let mode = match a3_mode {
        A3Arg::OutsideFalse => A3Mode::OutsideFalse,
        A3Arg::OutsideTrue => A3Mode::OutsideTrue,
    };
    let report: VerificationReport = match oracle {
        OracleArg::Simulated => {
            let intended = match intended {
                Some(i) => load_query(&i)?,
                None => query.clone(),
            };
            if intended.arity() != query.arity() {
                bail!("--intended has arity {}, --query has {}", intended.arity(), query.arity());
            }
            let items = build_verification_set_with(&query, mode)?;
            run_verification(&mut simulated_oracle(intended), &items)?
        }
        OracleArg::Interactive => {
            if intended.is_some() {
                bail!("--intended only applies to the simulated oracle");
            }
            let mut req = SessionRequest::verify(query, OracleKind::Interactive);
            req.a3_mode = Some(mode);
            req.propositions = propositions;
            match interactive(req)?.result {
                Some(SessionResult::Verification { report }) => report,
                _ => bail!("no verification report"),
            }
        }
    };
    print_json(&serde_json::to_value(&report)?)?;
    Ok(report.is_verified())
}

fn run_bench(
    class: ClassArg,
    n: usize,
    k: Option<usize>,
    theta: usize,
    trials: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let spec = match class {
        ClassArg::Qhorn1 => GenSpec::qhorn1(n, seed),
        ClassArg::Rp => GenSpec::rp(n, k.unwrap_or(n), theta, seed),
    };
    let (rows, summary) = bench(&spec, trials)?;
    let summary = serde_json::to_value(&summary)?;
    match out {
        Some(path) => {
            let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, BufWriter::new(f))?;
            print_json(&summary)
        }
        None => {
            write_csv(&rows, io::stdout().lock())?;
            eprintln!("{summary}");
            Ok(())
        }
    }
}

fn serve(host: String, port: u16, data: PathBuf, assets: Option<PathBuf>) -> anyhow::Result<()> {
    let manager = Arc::new(SessionManager::open(&data).with_context(|| format!("opening {}", data.display()))?);
    let app = qhorn_session::router_with_assets(manager, assets);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
        eprintln!("serving on http://{} (data in {})", listener.local_addr()?, data.display());
        qhorn_session::serve(listener, app).await
    })?;
    Ok(())
}

fn eval(query: String, tuples: Vec<String>) -> anyhow::Result<()> {
    let q = load_query(&query)?;
    let tuples = tuples.iter().map(|t| parse_tuple(t)).collect::<Result<Vec<_>, _>>()?;
    let question = Question::new(q.arity(), tuples)?;
    println!("{}", q.evaluate(&question)?);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Learn { class, n, oracle, target, seed, k, theta, theta_cap, stats, transcript, propositions } => {
            learn(class, n, oracle, target, seed, k, theta, theta_cap, stats, transcript, propositions)
        }
        Command::Verify { query, oracle, intended, a3_mode, propositions } => {
            if !verify(query, oracle, intended, a3_mode, propositions)? {
                std::process::exit(1);
            }
            Ok(())
        }
        Command::Bench { class, n, k, theta, trials, seed, out } => run_bench(class, n, k, theta, trials, seed, out),
        Command::Serve { host, port, data, assets } => serve(host, port, data, assets),
        Command::Eval { query, tuples } => eval(query, tuples),
        Command::Normalize { query } => {
            let q = normalize(&load_query(&query)?).to_query();
            print_json(&json!({ "query": q, "shorthand": q.to_string() }))
        }
        Command::Equiv { first, second } => {
            let (a, b) = (load_query(&first)?, load_query(&second)?);
            print_json(&json!({ "equivalent": equivalent(&a, &b)? }))
        }
    }
}
