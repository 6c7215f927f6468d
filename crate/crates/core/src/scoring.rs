//! Aggregation of trial records into recognition scores.
//!
//! Object judgments are scored per (trial, class) pair over the eight study
//! classes, split into four buckets:
//!
//! | bucket            | truth   | marked |
//! |-------------------|---------|--------|
//! | present, correct  | present | yes    |
//! | present, incorrect| absent  | yes    |
//! | missing, correct  | absent  | no     |
//! | missing, incorrect| present | no     |
//!
//! Correct identification is the sum of the two "correct" buckets. Room
//! answers feed a row-normalised confusion matrix with per-room recall and
//! precision. Confidence intervals are normal-approximation half-widths over
//! per-subject percentages.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{Method, ObjectClass, Room};
use crate::study::{GroundTruth, StimulusKind, TrialRecord, TrialSpec, View};

const Z_95: f64 = 1.96;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectScore {
    pub opportunities: usize,
    pub hits: usize,
    pub false_alarms: usize,
    pub correct_rejections: usize,
    pub misses: usize,
    pub pct_present_correct: f64,
    pub pct_present_incorrect: f64,
    pub pct_missing_correct: f64,
    pub pct_missing_incorrect: f64,
    pub pct_correct_identification: f64,
}

/// Four-bucket object scoring over all (trial, class) opportunities.
pub fn score_objects<'a, I>(pairs: I) -> Result<ObjectScore>
where
    I: IntoIterator<Item = (&'a TrialRecord, &'a GroundTruth)>,
{
    let mut s = ObjectScore::default();
    for (record, truth) in pairs {
        for class in ObjectClass::ALL {
            let present = truth.objects.contains(&class);
            let marked = record.objects_marked.contains(&class);
            match (present, marked) {
                (true, true) => s.hits += 1,
                (false, true) => s.false_alarms += 1,
                (false, false) => s.correct_rejections += 1,
                (true, false) => s.misses += 1,
            }
            s.opportunities += 1;
        }
    }
    if s.opportunities == 0 {
        return Err(Error::InsufficientData("no trials to score objects".into()));
    }
    let pct = |n: usize| 100.0 * n as f64 / s.opportunities as f64;
    s.pct_present_correct = pct(s.hits);
    s.pct_present_incorrect = pct(s.false_alarms);
    s.pct_missing_correct = pct(s.correct_rejections);
    s.pct_missing_incorrect = pct(s.misses);
    s.pct_correct_identification = pct(s.hits + s.correct_rejections);
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomScore {
    pub trials: usize,
    /// `counts[actual][predicted]`, rooms in [`Room::ALL`] order.
    pub counts: [[usize; 4]; 4],
    /// Row-normalised counts; `None` for rooms that never occurred.
    pub confusion: [Option<[f64; 4]>; 4],
    /// Percent, per actual room.
    pub recall: [Option<f64>; 4],
    /// Percent, per predicted room; `None` if the room was never answered.
    pub precision: [Option<f64>; 4],
    pub pct_room_recognized: f64,
}

pub fn score_rooms<'a, I>(pairs: I) -> Result<RoomScore>
where
    I: IntoIterator<Item = (&'a TrialRecord, &'a GroundTruth)>,
{
    let mut counts = [[0usize; 4]; 4];
    let mut trials = 0;
    for (record, truth) in pairs {
        counts[truth.room.index()][record.room_choice.index()] += 1;
        trials += 1;
    }
    if trials == 0 {
        return Err(Error::InsufficientData("no trials to score rooms".into()));
    }
    Ok(room_score_from_counts(counts))
}

pub fn room_score_from_counts(counts: [[usize; 4]; 4]) -> RoomScore {
    let trials: usize = counts.iter().flatten().sum();
    let mut confusion = [None; 4];
    let mut recall = [None; 4];
    let mut precision = [None; 4];
    for a in 0..4 {
        let row_total: usize = counts[a].iter().sum();
        if row_total > 0 {
            let row = counts[a].map(|c| c as f64 / row_total as f64);
            recall[a] = Some(100.0 * row[a]);
            confusion[a] = Some(row);
        }
        let col_total: usize = (0..4).map(|r| counts[r][a]).sum();
        if col_total > 0 {
            precision[a] = Some(100.0 * counts[a][a] as f64 / col_total as f64);
        }
    }
    let correct: usize = (0..4).map(|i| counts[i][i]).sum();
    RoomScore {
        trials,
        counts,
        confusion,
        recall,
        precision,
        pct_room_recognized: if trials > 0 {
            100.0 * correct as f64 / trials as f64
        } else {
            0.0
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikertDistribution {
    /// In [`Likert::ALL`](crate::labels::Likert::ALL) order (DY, PY, M, PN, DN).
    pub counts: [usize; 5],
    pub percent: [f64; 5],
}

pub fn likert_distribution<'a, I>(records: I) -> Result<LikertDistribution>
where
    I: IntoIterator<Item = &'a TrialRecord>,
{
    let mut counts = [0usize; 5];
    for r in records {
        counts[r.likert.index()] += 1;
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::InsufficientData("no trials for a confidence distribution".into()));
    }
    Ok(LikertDistribution {
        counts,
        percent: counts.map(|c| 100.0 * c as f64 / total as f64),
    })
}

/// Half-width of a normal-approximation 95% interval: `1.96 * s / sqrt(n)`
/// with `s` the sample standard deviation.
pub fn ci95(per_subject: &[f64]) -> Result<f64> {
    let n = per_subject.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "a confidence interval needs at least 2 subjects, got {n}"
        )));
    }
    let mean = per_subject.iter().sum::<f64>() / n as f64;
    let var = per_subject.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Z_95 * var.sqrt() / (n as f64).sqrt())
}

/// Rounds half away from zero to `dp` decimal places.
pub fn round_dp(x: f64, dp: i32) -> f64 {
    let k = 10f64.powi(dp);
    (x * k).round() / k
}

/// A record joined with the facts about its trial.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredResponse {
    pub record: TrialRecord,
    pub method: Method,
    pub kind: StimulusKind,
    pub view: Option<View>,
    pub truth: GroundTruth,
}

/// Looks up each record's trial by stimulus id.
pub fn join_records(
    records: impl IntoIterator<Item = TrialRecord>,
    trials: &BTreeMap<String, TrialSpec>,
) -> Result<Vec<ScoredResponse>> {
    records
        .into_iter()
        .map(|record| {
            let spec = trials.get(&record.stimulus_id).ok_or_else(|| {
                Error::Consistency(format!(
                    "record for subject `{}` trial {} references unknown stimulus `{}`",
                    record.subject_id, record.trial_index, record.stimulus_id
                ))
            })?;
            Ok(ScoredResponse {
                method: spec.method,
                kind: spec.kind,
                view: spec.view,
                truth: spec.ground_truth.clone(),
                record,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupBy {
    /// One group per method, kind and (for images) view: "OM Cent", "SIE-OM Vid", ...
    #[default]
    MethodKindView,
    /// One group per method and kind: "OM Ima", "OM Vid", ...
    MethodKind,
    Method,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub method: Option<Method>,
    pub kind: Option<StimulusKind>,
    pub view: Option<View>,
}

impl GroupKey {
    fn of(r: &ScoredResponse, by: GroupBy) -> Self {
        match by {
            GroupBy::MethodKindView => GroupKey {
                method: Some(r.method),
                kind: Some(r.kind),
                view: r.view,
            },
            GroupBy::MethodKind => GroupKey {
                method: Some(r.method),
                kind: Some(r.kind),
                view: None,
            },
            GroupBy::Method => GroupKey {
                method: Some(r.method),
                kind: None,
                view: None,
            },
            GroupBy::All => GroupKey {
                method: None,
                kind: None,
                view: None,
            },
        }
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(m) = self.method {
            parts.push(m.display_name().to_string());
        }
        match (self.kind, self.view) {
            (Some(StimulusKind::Image), Some(View::Cent)) => parts.push("Cent".into()),
            (Some(StimulusKind::Image), Some(View::Rand)) => parts.push("Rand".into()),
            (Some(StimulusKind::Image), None) => parts.push("Ima".into()),
            (Some(StimulusKind::Video), _) => parts.push("Vid".into()),
            (None, _) => {}
        }
        if parts.is_empty() {
            "All".into()
        } else {
            parts.join(" ")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub label: String,
    pub key: GroupKey,
    pub trials: usize,
    pub subjects: usize,
    pub objects: ObjectScore,
    pub rooms: RoomScore,
    pub likert: LikertDistribution,
    /// Over per-subject correct-identification percentages; `None` with fewer than 2 subjects.
    pub ci95_correct_identification: Option<f64>,
    pub ci95_room_recognized: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub group_by: GroupBy,
    pub include_late: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self {
            group_by: GroupBy::MethodKindView,
            include_late: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub groups: Vec<GroupReport>,
}

fn score_group(key: GroupKey, responses: &[&ScoredResponse]) -> Result<GroupReport> {
    let pairs = || responses.iter().map(|r| (&r.record, &r.truth));
    let objects = score_objects(pairs())?;
    let rooms = score_rooms(pairs())?;
    let likert = likert_distribution(responses.iter().map(|r| &r.record))?;

    let mut by_subject: BTreeMap<&str, Vec<&ScoredResponse>> = BTreeMap::new();
    for r in responses {
        by_subject.entry(r.record.subject_id.as_str()).or_default().push(r);
    }
    let mut ident = Vec::new();
    let mut room = Vec::new();
    for rs in by_subject.values() {
        let p = || rs.iter().map(|r| (&r.record, &r.truth));
        ident.push(score_objects(p())?.pct_correct_identification);
        room.push(score_rooms(p())?.pct_room_recognized);
    }
    Ok(GroupReport {
        label: key.label(),
        key,
        trials: responses.len(),
        subjects: by_subject.len(),
        objects,
        rooms,
        likert,
        ci95_correct_identification: ci95(&ident).ok(),
        ci95_room_recognized: ci95(&room).ok(),
    })
}

/// Scores `responses` in groups. Groups are ordered by method, then kind, then view.
pub fn score(responses: &[ScoredResponse], options: ScoreOptions) -> Result<ScoreReport> {
    let mut groups: BTreeMap<GroupKey, Vec<&ScoredResponse>> = BTreeMap::new();
    for r in responses {
        if r.record.late && !options.include_late {
            continue;
        }
        groups.entry(GroupKey::of(r, options.group_by)).or_default().push(r);
    }
    if groups.is_empty() {
        return Err(Error::InsufficientData("no records to score".into()));
    }
    let groups = groups
        .into_iter()
        .map(|(k, rs)| score_group(k, &rs))
        .collect::<Result<_>>()?;
    Ok(ScoreReport { groups })
}

fn pct_int(x: f64) -> String {
    format!("{}", round_dp(x, 0) as i64)
}

fn fmt2(x: f64) -> String {
    format!("{:.2}", round_dp(x, 2))
}

fn with_ci(x: f64, ci: Option<f64>) -> String {
    match ci {
        Some(c) => format!("{}±{}", pct_int(x), fmt2(c)),
        None => pct_int(x),
    }
}

impl ScoreReport {
    /// Aligned table: object buckets, identification and room scores (with CI
    /// half-widths where available) and the confidence distribution. Percentages
    /// are integers, half-widths two decimals.
    pub fn to_text_table(&self) -> String {
        let header = [
            "Method", "Pres %C", "Pres %I", "Miss %C", "Miss %I", "% Correct id", "% Room",
            "DY", "PY", "M", "PN", "DN",
        ];
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for g in &self.groups {
            let o = &g.objects;
            let mut row = vec![
                g.label.clone(),
                pct_int(o.pct_present_correct),
                pct_int(o.pct_present_incorrect),
                pct_int(o.pct_missing_correct),
                pct_int(o.pct_missing_incorrect),
                with_ci(o.pct_correct_identification, g.ci95_correct_identification),
                with_ci(g.rooms.pct_room_recognized, g.ci95_room_recognized),
            ];
            row.extend(g.likert.percent.iter().map(|&p| pct_int(p)));
            rows.push(row);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, &w))| {
                    if c == 0 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                let _ = writeln!(out, "{}", rule.join("-+-"));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable")
    }
}

/// Confusion matrix as CSV: one row per actual room with a recall column, then
/// a precision row. Cells have two decimals; undefined cells are empty.
pub fn confusion_csv(rooms: &RoomScore) -> String {
    let mut out = String::from("actual\\predicted");
    for r in Room::ALL {
        let _ = write!(out, ",{}", r.display_name());
    }
    out.push_str(",Recall\n");
    for a in Room::ALL {
        out.push_str(a.display_name());
        match &rooms.confusion[a.index()] {
            Some(row) => row.iter().for_each(|&v| {
                let _ = write!(out, ",{}", fmt2(v));
            }),
            None => out.push_str(",,,,"),
        }
        let _ = writeln!(out, ",{}", rooms.recall[a.index()].map(fmt2).unwrap_or_default());
    }
    out.push_str("Precision");
    for p in Room::ALL {
        let _ = write!(out, ",{}", rooms.precision[p.index()].map(fmt2).unwrap_or_default());
    }
    out.push_str(",\n");
    out
}
