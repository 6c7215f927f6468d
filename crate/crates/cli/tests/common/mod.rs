#![allow(dead_code)]

use std::path::{Path, PathBuf};

use spv_cli::args::{RenderArgs, RenderOptions, VideoArgs};
use spv_cli::video::{frame_file_name, VideoManifest, MANIFEST};
use spv_core::io::save_png;
use spv_core::saliency::{manifest_path, ManifestObject, OverlayManifest};
use spv_core::{GridConfig, LumaFrame, Method};

/// Moving gradient with a bright bar, `n` frames of `w`x`h`.
pub fn write_frames(dir: &Path, n: usize, w: usize, h: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        let f = LumaFrame::from_fn(w, h, |x, y| {
            let bar = ((x + 3 * i) % w) < w / 8;
            if bar {
                1.0
            } else {
                ((x + y + i) % 97) as f32 / 96.0 * 0.6
            }
        });
        save_png(&f, &dir.join(format!("frame_{i:04}.png"))).unwrap();
    }
}

/// One object mask and one soft edge map per frame, shifting with the index.
pub fn write_overlays(dir: &Path, frames: std::ops::Range<usize>, w: usize, h: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for i in frames {
        let mask = LumaFrame::from_fn(w, h, |x, y| {
            let x = (x + 2 * i) % w;
            (x > w / 4 && x < w / 2 && y > h / 3 && y < 5 * h / 6) as u8 as f32
        });
        let edges = LumaFrame::from_fn(w, h, |x, y| {
            if (x + y + i) % 23 == 0 || y == h / 2 {
                0.8
            } else {
                0.2
            }
        });
        let mask_name = format!("mask_{i:06}.png");
        let edge_name = format!("edges_{i:06}.png");
        save_png(&mask, &dir.join(&mask_name)).unwrap();
        save_png(&edges, &dir.join(&edge_name)).unwrap();
        let m = OverlayManifest {
            width: w,
            height: h,
            objects: vec![ManifestObject {
                class: "bed".into(),
                score: 0.93,
                mask_file: mask_name.into(),
            }],
            edge_file: Some(edge_name.into()),
        };
        std::fs::write(manifest_path(dir, i), serde_json::to_string(&m).unwrap()).unwrap();
    }
}

pub fn options(method: Method, seed: u64) -> RenderOptions {
    RenderOptions {
        method: Some(method),
        seed: Some(seed),
        ..RenderOptions::default()
    }
}

pub fn render_args(image: &Path, overlays: Option<&Path>, output: &Path, opts: RenderOptions) -> RenderArgs {
    RenderArgs {
        image: image.to_path_buf(),
        overlays: overlays.map(Path::to_path_buf),
        overlay_index: 0,
        output: output.to_path_buf(),
        debug: false,
        options: opts,
    }
}

pub fn video_args(frames: &Path, overlays: Option<&Path>, output: &Path, opts: RenderOptions) -> VideoArgs {
    VideoArgs {
        frames: frames.to_path_buf(),
        overlays: overlays.map(Path::to_path_buf),
        output: output.to_path_buf(),
        src_fps: 20.0,
        fps: None,
        median_window: None,
        force: false,
        options: opts,
    }
}

/// Catalog with four scenes, each with one image view and one video, and
/// tiny placeholder media for both methods. Returns the catalog path.
pub fn write_study(root: &Path) -> PathBuf {
    let scenes = [
        ("bed-1", "bedroom", r#"["bed","chair"]"#, "cent"),
        ("kit-1", "kitchen", r#"["sink","refrigerator"]"#, "rand"),
        ("din-1", "dining_room", r#"["table","chair"]"#, "cent"),
        ("liv-1", "living_room", r#"["couch","tv/laptop"]"#, "rand"),
    ];
    let mut entries = Vec::new();
    for (id, room, objects, view) in scenes {
        for m in ["om", "sieom"] {
            let img = LumaFrame::filled(8, 8, 0.5);
            save_png(&img, &root.join(format!("{id}_{m}.png"))).unwrap();
            let vdir = root.join(format!("{id}_{m}_vid"));
            std::fs::create_dir_all(&vdir).unwrap();
            let frames: Vec<String> = (0..3).map(frame_file_name).collect();
            for (k, f) in frames.iter().enumerate() {
                save_png(&LumaFrame::filled(8, 8, k as f32 / 2.0), &vdir.join(f)).unwrap();
            }
            let manifest = VideoManifest {
                fps: 20.0,
                frame_count: 3,
                frames,
                method: if m == "om" { Method::Om } else { Method::SieOm },
                levels: 8,
                median_window: 5,
                grid: GridConfig::default(),
                fov: None,
                source_fps: 20.0,
                source_frames: 7,
            };
            std::fs::write(vdir.join(MANIFEST), serde_json::to_string(&manifest).unwrap()).unwrap();
        }
        entries.push(format!(
            r#"{{ "id": "{id}", "room": "{room}", "objects": {objects}, "stimuli": [
                {{ "kind": "image", "view": "{view}", "media": {{ "om": "{id}_om.png", "sie-om": "{id}_sieom.png" }} }},
                {{ "kind": "video", "media": {{ "om": "{id}_om_vid", "sie-om": "{id}_sieom_vid" }} }} ] }}"#
        ));
    }
    let path = root.join("catalog.json");
    std::fs::write(
        &path,
        format!(r#"{{ "time_limit_s": 30, "scenes": [{}] }}"#, entries.join(",")),
    )
    .unwrap();
    path
}
