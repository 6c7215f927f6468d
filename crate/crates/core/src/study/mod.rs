//! The recognition experiment: a stimulus catalog, a seeded presentation
//! plan per subject, and a session state machine that accepts one response per
//! trial in order.
//!
//! Anything sent to a subject goes through [`Trial::descriptor`], which never
//! carries the ground truth.

mod catalog;
mod session;

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::labels::{Likert, Method, ObjectClass, Room};

pub use catalog::{build_plan, stimulus_id, Catalog, CatalogStimulus, Scene, TrialSpec};
pub use session::{
    read_session_log, SessionHeader, SessionLog, SessionState, SessionStatus, TrialRecord,
};

pub const DEFAULT_TIME_LIMIT_S: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusKind {
    Image,
    Video,
}

impl StimulusKind {
    pub fn name(self) -> &'static str {
        match self {
            StimulusKind::Image => "image",
            StimulusKind::Video => "video",
        }
    }
}

/// Framing of a still: the central view of the room, or a random video frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    Cent,
    Rand,
}

impl View {
    pub fn name(self) -> &'static str {
        match self {
            View::Cent => "cent",
            View::Rand => "rand",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub room: Room,
    pub objects: BTreeSet<ObjectClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub stimulus_id: String,
    pub kind: StimulusKind,
    pub method: Method,
    pub view: Option<View>,
    pub media_path: PathBuf,
    pub ground_truth: GroundTruth,
}

impl Trial {
    pub fn descriptor(&self, trial_count: usize, time_limit_s: f64) -> StimulusDescriptor {
        StimulusDescriptor {
            trial_index: self.index,
            trial_count,
            kind: self.kind,
            method: self.method,
            view: self.view,
            time_limit_s,
            form: FormSchema::standard(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusPlan {
    pub trials: Vec<Trial>,
    pub time_limit_s: f64,
    pub seed: u64,
}

/// What a subject's client learns about a trial. Media is addressed by trial
/// index, so file names cannot leak the scene either.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusDescriptor {
    pub trial_index: usize,
    pub trial_count: usize,
    pub kind: StimulusKind,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub view: Option<View>,
    pub time_limit_s: f64,
    pub form: FormSchema,
}

/// Choices offered on the response form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormSchema {
    pub objects: Vec<ObjectClass>,
    pub rooms: Vec<Room>,
    pub likert: Vec<Likert>,
}

impl FormSchema {
    pub fn standard() -> Self {
        Self {
            objects: ObjectClass::ALL.to_vec(),
            rooms: Room::ALL.to_vec(),
            likert: Likert::ALL.to_vec(),
        }
    }
}

/// Keys that identify ground truth and must never reach a subject.
pub const GROUND_TRUTH_KEYS: &[&str] = &[
    "ground_truth",
    "room",
    "objects_present",
    "stimulus_id",
    "scene_id",
    "media_path",
];
