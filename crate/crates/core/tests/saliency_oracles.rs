use std::path::Path;

use proptest::prelude::*;
use spv_core::io::save_png;
use spv_core::saliency::{
    compose_om, compose_sie_om, fallback_edges, load_overlay, manifest_path, ComposeConfig,
    ManifestObject, OverlayManifest,
};
use spv_core::{EdgeMap, Error, LumaFrame, ObjectInstance, SaliencyOverlay};

const W: usize = 24;
const H: usize = 16;

fn mask_from_bits(bits: &[bool]) -> LumaFrame {
    LumaFrame::new(W, H, bits.iter().map(|&b| b as u8 as f32).collect()).unwrap()
}

fn bits() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), W * H)
}

fn soft() -> impl Strategy<Value = Vec<f32>> {
    prop::collection::vec(0.0f32..=1.0, W * H)
}

fn overlay(masks: &[Vec<bool>], edges: Option<Vec<f32>>, threshold: f32) -> SaliencyOverlay {
    let objects = masks
        .iter()
        .enumerate()
        .map(|(i, m)| ObjectInstance::new(["bed", "chair", "sink"][i % 3], mask_from_bits(m), 0.9).unwrap())
        .collect();
    let edges = edges.map(|e| EdgeMap::new(LumaFrame::new(W, H, e).unwrap(), threshold).unwrap());
    SaliencyOverlay::new(W, H, 0, objects, edges).unwrap()
}

/// Central-difference gradient magnitude with clamped borders, normalised by its maximum.
fn gradient_oracle(f: &LumaFrame) -> Vec<f64> {
    let (w, h) = f.dimensions();
    let at = |x: i64, y: i64| {
        let x = x.clamp(0, w as i64 - 1) as usize;
        let y = y.clamp(0, h as i64 - 1) as usize;
        f.get(x, y) as f64
    };
    let mut m = Vec::with_capacity(w * h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = (at(x + 1, y) - at(x - 1, y)) / 2.0;
            let gy = (at(x, y + 1) - at(x, y - 1)) / 2.0;
            m.push((gx * gx + gy * gy).sqrt());
        }
    }
    let max = m.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        m.iter_mut().for_each(|v| *v /= max);
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_area_is_inclusion_exclusion(a in bits(), b in bits()) {
        let o = overlay(&[a.clone(), b.clone()], None, 0.5);
        let count = |v: &[bool]| v.iter().filter(|&&x| x).count();
        let both = a.iter().zip(&b).filter(|(x, y)| **x && **y).count();
        prop_assert_eq!(compose_om(&o).count_on(), count(&a) + count(&b) - both);
    }

    #[test]
    fn sie_om_is_elementwise_max(a in bits(), b in bits(), e in soft(), t in 0.05f32..0.95) {
        let o = overlay(&[a, b], Some(e.clone()), t);
        let om = compose_om(&o);
        let sie = compose_sie_om(&o).unwrap();
        for i in 0..W * H {
            let edge = if e[i] >= t { 1.0f32 } else { 0.0 };
            prop_assert_eq!(sie.data()[i], om.data()[i].max(edge));
        }
        prop_assert!(om.is_binary() && sie.is_binary());
    }

    #[test]
    fn fallback_edges_match_finite_difference_oracle(v in soft()) {
        let f = LumaFrame::new(W, H, v).unwrap();
        let got = fallback_edges(&f, 0.5).unwrap();
        for (g, w) in got.values.data().iter().zip(gradient_oracle(&f)) {
            prop_assert!((*g as f64 - w).abs() <= 1e-6);
        }
    }
}

#[test]
fn empty_edges_leave_om_unchanged() {
    let a: Vec<bool> = (0..W * H).map(|i| i % 5 == 0).collect();
    let o = overlay(&[a], Some(vec![0.2; W * H]), 0.5);
    assert_eq!(compose_sie_om(&o).unwrap(), compose_om(&o));
}

fn write_mask(dir: &Path, name: &str, w: usize, h: usize) {
    let m = LumaFrame::from_fn(w, h, |x, y| ((x + y) % 3 == 0) as u8 as f32);
    save_png(&m, &dir.join(name)).unwrap();
}

fn write_manifest(dir: &Path, index: usize, m: &OverlayManifest) {
    std::fs::write(manifest_path(dir, index), serde_json::to_string(m).unwrap()).unwrap();
}

fn entry(class: &str, score: f32, file: &str) -> ManifestObject {
    ManifestObject {
        class: class.into(),
        score,
        mask_file: file.into(),
    }
}

#[test]
fn load_filters_disallowed_classes() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["bed.png", "chair.png", "book.png"] {
        write_mask(dir.path(), f, 32, 20);
    }
    write_manifest(
        dir.path(),
        3,
        &OverlayManifest {
            width: 32,
            height: 20,
            objects: vec![
                entry("bed", 0.98, "bed.png"),
                entry("chair", 0.91, "chair.png"),
                entry("book", 0.99, "book.png"),
            ],
            edge_file: None,
        },
    );
    let o = load_overlay(dir.path(), 3, &ComposeConfig::default()).unwrap();
    assert_eq!(o.objects().len(), 2);
    assert_eq!(o.frame_index(), 3);
    assert!(o.edges().is_none());
    assert!(o.objects().iter().all(|i| i.mask.is_binary()));
}

#[test]
fn load_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_manifest(
        dir.path(),
        0,
        &OverlayManifest {
            width: 8,
            height: 8,
            objects: vec![],
            edge_file: None,
        },
    );
    let o = load_overlay(dir.path(), 0, &ComposeConfig::default()).unwrap();
    assert!(o.objects().is_empty());
    assert!(o.edges().is_none());
}

#[test]
fn load_rejects_mask_of_wrong_size() {
    let dir = tempfile::tempdir().unwrap();
    write_mask(dir.path(), "bed.png", 640, 480);
    write_manifest(
        dir.path(),
        0,
        &OverlayManifest {
            width: 1280,
            height: 720,
            objects: vec![entry("bed", 0.95, "bed.png")],
            edge_file: None,
        },
    );
    assert!(matches!(
        load_overlay(dir.path(), 0, &ComposeConfig::default()),
        Err(Error::Format(_))
    ));
}

#[test]
fn load_reports_missing_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_overlay(dir.path(), 12, &ComposeConfig::default()),
        Err(Error::Ingestion { .. })
    ));
}

#[test]
fn load_reads_soft_edges_with_configured_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let edges = LumaFrame::from_fn(10, 10, |x, _| x as f32 / 9.0);
    save_png(&edges, &dir.path().join("e.png")).unwrap();
    write_manifest(
        dir.path(),
        1,
        &OverlayManifest {
            width: 10,
            height: 10,
            objects: vec![],
            edge_file: Some("e.png".into()),
        },
    );
    let cfg = ComposeConfig {
        edge_threshold: 0.6,
        ..ComposeConfig::default()
    };
    let o = load_overlay(dir.path(), 1, &cfg).unwrap();
    let sie = compose_sie_om(&o).unwrap();
    for x in 0..10 {
        assert_eq!(sie.get(x, 0), if x as f32 / 9.0 >= 0.6 { 1.0 } else { 0.0 });
    }
}
