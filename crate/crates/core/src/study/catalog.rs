use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{Method, ObjectClass, Room};

use super::{GroundTruth, StimulusKind, StimulusPlan, Trial, View, DEFAULT_TIME_LIMIT_S};

/// Experimenter-authored list of scenes and their pre-rendered stimuli.
///
/// ```json
/// {
///   "time_limit_s": 30,
///   "scenes": [{
///     "id": "bedroom-1",
///     "room": "bedroom",
///     "objects": ["bed", "chair"],
///     "stimuli": [
///       { "kind": "image", "view": "cent",
///         "media": { "om": "img/b1_om.png", "sie-om": "img/b1_sieom.png" } },
///       { "kind": "video",
///         "media": { "om": "vid/b1_om/sequence.json", "sie-om": "vid/b1_sieom/sequence.json" } }
///     ]
///   }]
/// }
/// ```
///
/// Each stimulus must be rendered with both OM and SIE-OM. Media paths are
/// relative to the catalog file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    pub scenes: Vec<Scene>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_time_limit() -> f64 {
    DEFAULT_TIME_LIMIT_S
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub id: String,
    pub room: Room,
    pub objects: BTreeSet<ObjectClass>,
    pub stimuli: Vec<CatalogStimulus>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogStimulus {
    pub kind: StimulusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<View>,
    pub media: BTreeMap<Method, PathBuf>,
}

/// Everything known about one trial, independent of presentation order.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSpec {
    pub stimulus_id: String,
    pub scene_id: String,
    pub kind: StimulusKind,
    pub method: Method,
    pub view: Option<View>,
    pub media_path: PathBuf,
    pub ground_truth: GroundTruth,
}

const STUDY_METHODS: [Method; 2] = [Method::Om, Method::SieOm];

impl Catalog {
    pub fn from_json_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut catalog: Catalog =
            serde_json::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
        catalog.base_dir = base_dir.into();
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json_str(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_limit_s > 0.0 && self.time_limit_s.is_finite()) {
            return Err(Error::Catalog(format!(
                "time limit must be positive, got {}",
                self.time_limit_s
            )));
        }
        let mut ids = HashSet::new();
        for scene in &self.scenes {
            if scene.id.is_empty() {
                return Err(Error::Catalog("scene with empty id".into()));
            }
            if !ids.insert(scene.id.as_str()) {
                return Err(Error::Catalog(format!("duplicate scene id `{}`", scene.id)));
            }
            let mut seen = HashSet::new();
            for stim in &scene.stimuli {
                match (stim.kind, stim.view) {
                    (StimulusKind::Image, None) => {
                        return Err(Error::Catalog(format!(
                            "image stimulus of scene `{}` lacks a view (cent or rand)",
                            scene.id
                        )))
                    }
                    (StimulusKind::Video, Some(_)) => {
                        return Err(Error::Catalog(format!(
                            "video stimulus of scene `{}` must not declare a view",
                            scene.id
                        )))
                    }
                    _ => {}
                }
                if !seen.insert((stim.kind, stim.view)) {
                    return Err(Error::Catalog(format!(
                        "scene `{}` lists the same {} stimulus twice",
                        scene.id,
                        stim.kind.name()
                    )));
                }
                for m in STUDY_METHODS {
                    if !stim.media.contains_key(&m) {
                        return Err(Error::Catalog(format!(
                            "scene `{}` {} stimulus is missing its {} rendering",
                            scene.id,
                            stim.kind.name(),
                            m.display_name()
                        )));
                    }
                }
                if let Some(m) = stim.media.keys().find(|m| !STUDY_METHODS.contains(m)) {
                    return Err(Error::Catalog(format!(
                        "scene `{}` lists a {} rendering; only OM and SIE-OM are studied",
                        scene.id,
                        m.display_name()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Every (scene, kind, view, method) tuple, in catalog order.
    pub fn trial_specs(&self) -> Vec<TrialSpec> {
        let mut out = Vec::new();
        for scene in &self.scenes {
            for stim in &scene.stimuli {
                for method in STUDY_METHODS {
                    out.push(TrialSpec {
                        stimulus_id: stimulus_id(&scene.id, stim.kind, stim.view, method),
                        scene_id: scene.id.clone(),
                        kind: stim.kind,
                        method,
                        view: stim.view,
                        media_path: self.base_dir.join(&stim.media[&method]),
                        ground_truth: GroundTruth {
                            room: scene.room,
                            objects: scene.objects.clone(),
                        },
                    });
                }
            }
        }
        out
    }

    pub fn lookup(&self) -> BTreeMap<String, TrialSpec> {
        self.trial_specs()
            .into_iter()
            .map(|t| (t.stimulus_id.clone(), t))
            .collect()
    }

    /// Seeded presentation order. Image trials come first and video trials
    /// second; each block is shuffled independently.
    pub fn build_plan(&self, seed: u64) -> StimulusPlan {
        let specs = self.trial_specs();
        let (mut images, mut videos): (Vec<_>, Vec<_>) =
            specs.into_iter().partition(|t| t.kind == StimulusKind::Image);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        images.shuffle(&mut rng);
        videos.shuffle(&mut rng);
        let trials = images
            .into_iter()
            .chain(videos)
            .enumerate()
            .map(|(index, t)| Trial {
                index,
                stimulus_id: t.stimulus_id,
                kind: t.kind,
                method: t.method,
                view: t.view,
                media_path: t.media_path,
                ground_truth: t.ground_truth,
            })
            .collect();
        StimulusPlan {
            trials,
            time_limit_s: self.time_limit_s,
            seed,
        }
    }
}

pub fn stimulus_id(scene: &str, kind: StimulusKind, view: Option<View>, method: Method) -> String {
    match view {
        Some(v) => format!("{scene}/{}/{}/{}", kind.name(), v.name(), method.name()),
        None => format!("{scene}/{}/{}", kind.name(), method.name()),
    }
}

/// Loads the catalog at `path` and orders its trials with `seed`.
pub fn build_plan(path: &Path, seed: u64) -> Result<StimulusPlan> {
    Ok(Catalog::load(path)?.build_plan(seed))
}
