//! JSON-lines event log, one file per session.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::SessionError;
use crate::model::SessionRequest;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum Event {
    Created { id: String, request: Box<SessionRequest> },
    Answer { i: usize, answer: bool },
    Rollback { to: usize },
}

pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    pub fn path_for(dir: &Path, id: &str) -> PathBuf {
        dir.join(format!("{id}.jsonl"))
    }

    pub fn create(dir: &Path, id: &str) -> Result<EventLog, SessionError> {
        let path = Self::path_for(dir, id);
        let file = OpenOptions::new().create_new(true).append(true).open(&path)?;
        Ok(EventLog { path, file })
    }

    pub fn open_append(path: &Path) -> Result<EventLog, SessionError> {
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(EventLog { path: path.to_path_buf(), file })
    }

    pub fn append(&mut self, event: &Event) -> Result<(), SessionError> {
        let mut line = serde_json::to_string(event).expect("event serializes");
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

pub fn read_events(path: &Path) -> Result<Vec<Event>, SessionError> {
    let corrupt = |reason: String| SessionError::CorruptLog { path: path.display().to_string(), reason };
    let mut events = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line).map_err(|e| corrupt(format!("line {}: {e}", i + 1)))?;
        events.push(e);
    }
    match events.first() {
        Some(Event::Created { .. }) => Ok(events),
        _ => Err(corrupt("first event is not `created`".into())),
    }
}
