use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{Likert, ObjectClass, Room};

use super::{StimulusPlan, Trial};

/// A subject's answer to one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub subject_id: String,
    pub trial_index: usize,
    pub stimulus_id: String,
    pub objects_marked: BTreeSet<ObjectClass>,
    pub room_choice: Room,
    pub likert: Likert,
    pub response_time_s: f64,
    /// Set when the response arrived after the time limit.
    #[serde(default)]
    pub late: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Pending,
    Running,
    Done,
}

/// First line of a session log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub subject_id: String,
    pub seed: u64,
    pub time_limit_s: f64,
    /// Stimulus ids in presentation order, to check a replay against the catalog.
    pub trial_ids: Vec<String>,
    /// Free-form subject information (age band, vision notes, ...).
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

/// One subject's progress through a plan. Records are append-only and only
/// accepted in plan order.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionState {
    header: SessionHeader,
    plan: StimulusPlan,
    records: Vec<TrialRecord>,
    cursor: usize,
    status: SessionStatus,
}

impl SessionState {
    pub fn new(subject_id: impl Into<String>, plan: StimulusPlan, metadata: BTreeMap<String, String>) -> Self {
        let header = SessionHeader {
            subject_id: subject_id.into(),
            seed: plan.seed,
            time_limit_s: plan.time_limit_s,
            trial_ids: plan.trials.iter().map(|t| t.stimulus_id.clone()).collect(),
            metadata,
        };
        Self {
            header,
            plan,
            records: Vec::new(),
            cursor: 0,
            status: SessionStatus::Pending,
        }
    }

    pub fn start(&mut self) -> Result<()> {
        if self.status != SessionStatus::Pending {
            return Err(Error::Protocol("session already started".into()));
        }
        self.status = if self.plan.trials.is_empty() {
            SessionStatus::Done
        } else {
            SessionStatus::Running
        };
        Ok(())
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn plan(&self) -> &StimulusPlan {
        &self.plan
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn current_trial(&self) -> Option<&Trial> {
        match self.status {
            SessionStatus::Running => self.plan.trials.get(self.cursor),
            _ => None,
        }
    }

    /// Appends `record` for the trial at the cursor and advances. A response
    /// slower than the time limit is kept with `late` set.
    pub fn submit(&mut self, mut record: TrialRecord) -> Result<&TrialRecord> {
        match self.status {
            SessionStatus::Pending => return Err(Error::Protocol("session has not started".into())),
            SessionStatus::Done => return Err(Error::Protocol("session is already complete".into())),
            SessionStatus::Running => {}
        }
        if record.subject_id != self.header.subject_id {
            return Err(Error::Protocol(format!(
                "record for subject `{}` submitted to session of `{}`",
                record.subject_id, self.header.subject_id
            )));
        }
        if record.trial_index < self.cursor {
            return Err(Error::Protocol(format!(
                "trial {} already answered",
                record.trial_index
            )));
        }
        if record.trial_index > self.cursor {
            return Err(Error::Protocol(format!(
                "trial {} submitted out of order; expected {}",
                record.trial_index, self.cursor
            )));
        }
        let expected = &self.plan.trials[self.cursor].stimulus_id;
        if &record.stimulus_id != expected {
            return Err(Error::Protocol(format!(
                "trial {} is `{expected}`, record names `{}`",
                self.cursor, record.stimulus_id
            )));
        }
        if !(record.response_time_s >= 0.0 && record.response_time_s.is_finite()) {
            return Err(Error::Protocol(format!(
                "invalid response time {}",
                record.response_time_s
            )));
        }
        record.late = record.response_time_s > self.plan.time_limit_s;
        self.records.push(record);
        self.cursor += 1;
        if self.cursor == self.plan.trials.len() {
            self.status = SessionStatus::Done;
        }
        Ok(self.records.last().expect("just pushed"))
    }

    /// Rebuilds a session by feeding `records` through [`SessionState::submit`].
    pub fn replay(plan: StimulusPlan, header: &SessionHeader, records: &[TrialRecord]) -> Result<Self> {
        let ids: Vec<&str> = plan.trials.iter().map(|t| t.stimulus_id.as_str()).collect();
        if ids != header.trial_ids.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Consistency(
                "session log trial order does not match the plan rebuilt from its seed".into(),
            ));
        }
        let mut state = Self::new(header.subject_id.clone(), plan, header.metadata.clone());
        state.header.time_limit_s = header.time_limit_s;
        state.plan.time_limit_s = header.time_limit_s;
        state.start()?;
        for r in records {
            state.submit(r.clone())?;
        }
        Ok(state)
    }
}

/// Writer for the JSON-lines session log: a header line, then one record per line.
#[derive(Debug)]
pub struct SessionLog {
    file: File,
}

impl SessionLog {
    pub fn create(path: &Path, header: &SessionHeader) -> Result<Self> {
        let mut file = OpenOptions::new()
            .create_new(true)
            .write(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        writeln!(file, "{}", serde_json::to_string(header)?).map_err(|e| Error::io(path, e))?;
        file.sync_data().map_err(|e| Error::io(path, e))?;
        Ok(Self { file })
    }

    pub fn append(&mut self, record: &TrialRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        writeln!(self.file, "{line}")
            .and_then(|_| self.file.sync_data())
            .map_err(|e| Error::io("<session log>", e))
    }
}

/// Reads a session log back into its header and records.
pub fn read_session_log(path: &Path) -> Result<(SessionHeader, Vec<TrialRecord>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{} is empty", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    let header: SessionHeader = serde_json::from_str(&header_line)?;
    let mut records = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok((header, records))
}
