//! Terminal front end for an interactive session: one question at a time,
//! answered with y/n, with `u` to undo the previous answer.

use std::io::{BufRead, Write};

use anyhow::{bail, Context};

use qhorn_session::{Session, SessionManager, SessionRequest, Status};

fn show(out: &mut impl Write, s: &Session) -> std::io::Result<()> {
    let Some(p) = &s.pending else { return Ok(()) };
    writeln!(out, "\nquestion {} ({}): is this set of examples an answer?", p.index + 1, p.phase)?;
    for (bits, row) in p.tuples.iter().zip(&p.rows) {
        let cells: Vec<String> = row.iter().map(|(k, v)| format!("{k}={}", u8::from(v.as_bool() == Some(true)))).collect();
        writeln!(out, "  {bits}  {}", cells.join(" "))?;
    }
    if p.tuples.is_empty() {
        writeln!(out, "  (no examples)")?;
    }
    write!(out, "[y]es / [n]o / [u]ndo / [q]uit > ")?;
    out.flush()
}

/// Runs `request` (which must use the interactive oracle) until it finishes.
pub fn run(request: SessionRequest, mut input: impl BufRead, mut out: impl Write) -> anyhow::Result<Session> {
    let m = SessionManager::in_memory();
    let mut s = m.create(request)?;
    let mut line = String::new();
    while s.status == Status::AwaitingAnswer {
        show(&mut out, &s)?;
        line.clear();
        if input.read_line(&mut line).context("reading an answer")? == 0 {
            bail!("input ended after {} answers, before the session finished", s.questions_answered);
        }
        s = match line.trim().to_ascii_lowercase().as_str() {
            "y" | "yes" | "1" | "a" | "answer" => m.answer(&s.id, true, None)?,
            "n" | "no" | "0" | "non-answer" => m.answer(&s.id, false, None)?,
            "u" | "undo" if s.questions_answered > 0 => m.rollback(&s.id, s.questions_answered - 1)?,
            "u" | "undo" => {
                writeln!(out, "nothing to undo")?;
                s
            }
            "q" | "quit" => bail!("quit after {} answers", s.questions_answered),
            other => {
                writeln!(out, "unrecognised reply {other:?}")?;
                s
            }
        };
    }
    writeln!(out)?;
    if s.status == Status::Failed {
        bail!("session failed: {}", s.error.as_deref().unwrap_or("unknown error"));
    }
    Ok(s)
}
