//! Iconic scene representations built from externally computed saliency.
//!
//! A segmentation model supplies filled instance masks and a layout model
//! supplies a soft structural-edge map. Both arrive through a per-frame JSON
//! manifest (see [`OverlayManifest`]) and are composed into binary frames:
//! [`compose_om`] keeps object silhouettes only, [`compose_sie_om`] adds the
//! thresholded edges on top.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::LumaFrame;
use crate::io::load_png;
use crate::labels::ObjectClass;

pub const DEFAULT_EDGE_THRESHOLD: f32 = 0.5;
pub const DEFAULT_MIN_SCORE: f32 = 0.7;

#[derive(Clone, Debug, PartialEq)]
pub struct ComposeConfig {
    /// Lower-case detector labels that may contribute silhouettes.
    pub allowed_classes: BTreeSet<String>,
    pub min_score: f32,
    pub edge_threshold: f32,
}

impl Default for ComposeConfig {
    fn default() -> Self {
        let allowed_classes = ObjectClass::ALL
            .iter()
            .flat_map(|c| c.detector_aliases().iter().map(|s| s.to_string()))
            .collect();
        Self {
            allowed_classes,
            min_score: DEFAULT_MIN_SCORE,
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
        }
    }
}

impl ComposeConfig {
    pub fn allows(&self, label: &str) -> bool {
        self.allowed_classes.contains(&label.trim().to_ascii_lowercase())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectInstance {
    pub class_label: String,
    /// Binary silhouette at source resolution.
    pub mask: LumaFrame,
    pub score: f32,
}

impl ObjectInstance {
    pub fn new(class_label: impl Into<String>, mask: LumaFrame, score: f32) -> Result<Self> {
        if !mask.is_binary() {
            return Err(Error::Format("object mask must contain only 0 and 1".into()));
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidValue(format!("detection score {score} outside [0, 1]")));
        }
        Ok(Self {
            class_label: class_label.into(),
            mask,
            score,
        })
    }
}

/// Soft edge-probability map plus the threshold that turns it into strokes.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMap {
    pub values: LumaFrame,
    pub threshold: f32,
}

impl EdgeMap {
    pub fn new(values: LumaFrame, threshold: f32) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidValue(format!(
                "edge threshold {threshold} must lie strictly between 0 and 1"
            )));
        }
        Ok(Self { values, threshold })
    }

    pub fn binarize(&self) -> LumaFrame {
        let t = self.threshold;
        let data = self
            .values
            .data()
            .iter()
            .map(|&v| if v >= t { 1.0 } else { 0.0 })
            .collect();
        LumaFrame::from_raw(self.values.width(), self.values.height(), data)
    }
}

/// Everything the compositor knows about one source frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyOverlay {
    width: usize,
    height: usize,
    frame_index: usize,
    objects: Vec<ObjectInstance>,
    edges: Option<EdgeMap>,
}

impl SaliencyOverlay {
    pub fn new(
        width: usize,
        height: usize,
        frame_index: usize,
        objects: Vec<ObjectInstance>,
        edges: Option<EdgeMap>,
    ) -> Result<Self> {
        for obj in &objects {
            if obj.mask.dimensions() != (width, height) {
                return Err(raster_mismatch("mask", &obj.class_label, obj.mask.dimensions(), (width, height)));
            }
        }
        if let Some(e) = &edges {
            if e.values.dimensions() != (width, height) {
                return Err(raster_mismatch("edge map", "", e.values.dimensions(), (width, height)));
            }
        }
        Ok(Self {
            width,
            height,
            frame_index,
            objects,
            edges,
        })
    }

    pub fn empty(width: usize, height: usize, frame_index: usize) -> Self {
        Self {
            width,
            height,
            frame_index,
            objects: Vec::new(),
            edges: None,
        }
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn objects(&self) -> &[ObjectInstance] {
        &self.objects
    }

    pub fn edges(&self) -> Option<&EdgeMap> {
        self.edges.as_ref()
    }

    /// Keeps only instances whose class is allowed and whose score clears the floor.
    pub fn filtered(mut self, config: &ComposeConfig) -> Self {
        self.objects
            .retain(|o| config.allows(&o.class_label) && o.score >= config.min_score);
        self
    }

    pub fn with_edges(mut self, edges: EdgeMap) -> Result<Self> {
        if edges.values.dimensions() != (self.width, self.height) {
            return Err(raster_mismatch("edge map", "", edges.values.dimensions(), (self.width, self.height)));
        }
        self.edges = Some(edges);
        Ok(self)
    }
}

fn raster_mismatch(what: &str, label: &str, got: (usize, usize), want: (usize, usize)) -> Error {
    let label = if label.is_empty() { String::new() } else { format!(" `{label}`") };
    Error::Format(format!(
        "{what}{label} is {}x{} but the source frame is {}x{}",
        got.0, got.1, want.0, want.1
    ))
}

/// Union of all instance silhouettes; everything else is 0.
pub fn compose_om(overlay: &SaliencyOverlay) -> LumaFrame {
    let mut out = vec![0.0f32; overlay.width * overlay.height];
    for obj in &overlay.objects {
        for (o, &m) in out.iter_mut().zip(obj.mask.data()) {
            if m >= 0.5 {
                *o = 1.0;
            }
        }
    }
    LumaFrame::from_raw(overlay.width, overlay.height, out)
}

/// Object silhouettes OR thresholded structural edges. Requires an edge map.
pub fn compose_sie_om(overlay: &SaliencyOverlay) -> Result<LumaFrame> {
    let edges = overlay.edges.as_ref().ok_or_else(|| {
        Error::Precondition(format!(
            "frame {} has no edge map, which SIE-OM requires",
            overlay.frame_index
        ))
    })?;
    let om = compose_om(overlay);
    let t = edges.threshold;
    let data = om
        .data()
        .iter()
        .zip(edges.values.data())
        .map(|(&o, &e)| if o == 1.0 || e >= t { 1.0 } else { 0.0 })
        .collect();
    Ok(LumaFrame::from_raw(overlay.width, overlay.height, data))
}

/// Gradient-magnitude edge map from central differences, scaled so the
/// strongest response is 1. Borders replicate the nearest pixel.
///
/// This stands in for a learned layout-edge model when none is available; it
/// responds to every intensity edge, not just room structure.
pub fn fallback_edges(frame: &LumaFrame, threshold: f32) -> Result<EdgeMap> {
    let (w, h) = frame.dimensions();
    let mut mag = vec![0.0f32; w * h];
    let mut max = 0.0f32;
    for y in 0..h {
        let up = frame.row(y.saturating_sub(1));
        let down = frame.row((y + 1).min(h - 1));
        let row = frame.row(y);
        for x in 0..w {
            let gx = (row[(x + 1).min(w - 1)] - row[x.saturating_sub(1)]) * 0.5;
            let gy = (down[x] - up[x]) * 0.5;
            let m = (gx * gx + gy * gy).sqrt();
            mag[y * w + x] = m;
            max = max.max(m);
        }
    }
    if max > 0.0 {
        mag.iter_mut().for_each(|m| *m = (*m / max).min(1.0));
    }
    EdgeMap::new(LumaFrame::from_raw(w, h, mag), threshold)
}

/// One entry of an overlay manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestObject {
    pub class: String,
    pub score: f32,
    pub mask_file: PathBuf,
}

/// Per-frame JSON document emitted by the external segmentation/layout models.
///
/// ```json
/// {
///   "width": 640,
///   "height": 480,
///   "objects": [{ "class": "bed", "score": 0.98, "mask_file": "bed_0.png" }],
///   "edge_file": "edges.png"
/// }
/// ```
///
/// `width`/`height` are the source frame resolution every raster must match.
/// Paths are relative to the manifest. Masks are 0/255 PNGs, the edge map an
/// 8-bit soft probability PNG.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayManifest {
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub objects: Vec<ManifestObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_file: Option<PathBuf>,
}

/// Manifest location for a frame: `<dir>/overlay_<index:06>.json`.
pub fn manifest_path(dir: &Path, frame_index: usize) -> PathBuf {
    dir.join(format!("overlay_{frame_index:06}.json"))
}

/// Reads the manifest for `frame_index` in `dir` and loads the rasters of
/// every instance that passes `config`'s class and score filters.
pub fn load_overlay(dir: &Path, frame_index: usize, config: &ComposeConfig) -> Result<SaliencyOverlay> {
    let path = manifest_path(dir, frame_index);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Ingestion {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    let manifest: OverlayManifest = serde_json::from_str(&text).map_err(|e| Error::Ingestion {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    let (w, h) = (manifest.width, manifest.height);

    let mut objects = Vec::new();
    for entry in &manifest.objects {
        if !config.allows(&entry.class) || entry.score < config.min_score {
            continue;
        }
        let raster = load_raster(dir, &entry.mask_file)?;
        if raster.dimensions() != (w, h) {
            return Err(raster_mismatch("mask", &entry.class, raster.dimensions(), (w, h)));
        }
        let data = raster
            .data()
            .iter()
            .map(|&v| if v >= 0.5 { 1.0 } else { 0.0 })
            .collect();
        objects.push(ObjectInstance::new(
            entry.class.clone(),
            LumaFrame::from_raw(w, h, data),
            entry.score.clamp(0.0, 1.0),
        )?);
    }

    let edges = match &manifest.edge_file {
        Some(file) => {
            let raster = load_raster(dir, file)?;
            if raster.dimensions() != (w, h) {
                return Err(raster_mismatch("edge map", "", raster.dimensions(), (w, h)));
            }
            Some(EdgeMap::new(raster, config.edge_threshold)?)
        }
        None => None,
    };
    SaliencyOverlay::new(w, h, frame_index, objects, edges)
}

fn load_raster(dir: &Path, file: &Path) -> Result<LumaFrame> {
    let path = dir.join(file);
    if !path.exists() {
        return Err(Error::Ingestion {
            path,
            reason: "raster listed in manifest does not exist".into(),
        });
    }
    load_png(&path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_mask(w: usize, h: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> LumaFrame {
        LumaFrame::from_fn(w, h, |x, y| ((x0..x1).contains(&x) && (y0..y1).contains(&y)) as u8 as f32)
    }

    #[test]
    fn zero_instances_compose_black() {
        let o = SaliencyOverlay::empty(8, 6, 0);
        assert_eq!(compose_om(&o), LumaFrame::zeros(8, 6));
    }

    #[test]
    fn disjoint_union_area() {
        let a = ObjectInstance::new("bed", rect_mask(40, 40, 0, 0, 10, 10), 0.9).unwrap();
        let b = ObjectInstance::new("chair", rect_mask(40, 40, 20, 20, 40, 30), 0.9).unwrap();
        let o = SaliencyOverlay::new(40, 40, 0, vec![a, b], None).unwrap();
        assert_eq!(compose_om(&o).count_on(), 300);
    }

    #[test]
    fn sie_om_needs_edges() {
        let o = SaliencyOverlay::empty(4, 4, 3);
        assert!(matches!(compose_sie_om(&o), Err(Error::Precondition(_))));
    }

    #[test]
    fn edges_only_equals_thresholded_map() {
        let values = LumaFrame::from_fn(6, 5, |x, y| ((x + y) % 4) as f32 / 3.0);
        let edges = EdgeMap::new(values, 0.5).unwrap();
        let o = SaliencyOverlay::empty(6, 5, 0).with_edges(edges.clone()).unwrap();
        assert_eq!(compose_sie_om(&o).unwrap(), edges.binarize());
    }

    #[test]
    fn filtering_drops_classes_and_low_scores() {
        let m = rect_mask(4, 4, 0, 0, 2, 2);
        let objs = vec![
            ObjectInstance::new("bed", m.clone(), 0.98).unwrap(),
            ObjectInstance::new("book", m.clone(), 0.99).unwrap(),
            ObjectInstance::new("chair", m, 0.3).unwrap(),
        ];
        let o = SaliencyOverlay::new(4, 4, 0, objs, None)
            .unwrap()
            .filtered(&ComposeConfig::default());
        assert_eq!(o.objects().len(), 1);
    }

    #[test]
    fn mismatched_mask_is_rejected() {
        let m = ObjectInstance::new("bed", LumaFrame::zeros(4, 3), 0.9).unwrap();
        assert!(matches!(
            SaliencyOverlay::new(4, 4, 0, vec![m], None),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn fallback_edges_constant_and_step() {
        let e = fallback_edges(&LumaFrame::filled(9, 9, 0.4), 0.5).unwrap();
        assert!(e.values.data().iter().all(|&v| v == 0.0));

        let step = LumaFrame::from_fn(10, 4, |x, _| if x < 5 { 0.0 } else { 1.0 });
        let e = fallback_edges(&step, 0.5).unwrap();
        for y in 0..4 {
            assert_eq!(e.values.get(4, y), 1.0);
            assert_eq!(e.values.get(5, y), 1.0);
            assert_eq!(e.values.get(0, y), 0.0);
            assert_eq!(e.values.get(9, y), 0.0);
        }
    }

    #[test]
    fn edge_threshold_bounds() {
        assert!(EdgeMap::new(LumaFrame::zeros(2, 2), 0.0).is_err());
        assert!(EdgeMap::new(LumaFrame::zeros(2, 2), 1.0).is_err());
    }
}
