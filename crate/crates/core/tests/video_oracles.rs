use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spv_core::video::{
    process_sequence, render_still, temporal_median, PipelineConfig, DEFAULT_MEDIAN_WINDOW,
};
use spv_core::{EdgeMap, LumaFrame, Method, ObjectInstance, PhospheneGrid, SaliencyOverlay};
use spv_core::{FrameSequence, GridConfig};

/// Sorts the window's values for each pixel and takes the middle one.
fn sort_median_oracle(frames: &[LumaFrame]) -> Vec<f32> {
    let n = frames[0].data().len();
    (0..n)
        .map(|i| {
            let mut v: Vec<f32> = frames.iter().map(|f| f.data()[i]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v[v.len() / 2]
        })
        .collect()
}

fn random_frames(rng: &mut ChaCha8Rng, n: usize, w: usize, h: usize) -> Vec<LumaFrame> {
    (0..n)
        .map(|_| LumaFrame::new(w, h, (0..w * h).map(|_| rng.random::<f32>()).collect()).unwrap())
        .collect()
}

#[test]
fn median_agrees_with_sort_oracle_on_random_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let frames = random_frames(&mut rng, 54, 13, 9);
    let seq = FrameSequence::new(frames.clone(), 20.0).unwrap();
    let out = temporal_median(&seq, 5).unwrap();
    assert_eq!(out.len(), 50);
    for (t, f) in out.frames().iter().enumerate() {
        assert_eq!(f.data(), sort_median_oracle(&frames[t..t + 5]).as_slice(), "window {t}");
    }
}

#[test]
fn two_hundred_frames_give_one_hundred_ninety_six() {
    let seq = FrameSequence::new(vec![LumaFrame::zeros(4, 4); 200], 20.0).unwrap();
    assert_eq!(temporal_median(&seq, DEFAULT_MEDIAN_WINDOW).unwrap().len(), 196);
}

fn blob_overlay(w: usize, h: usize, index: usize, shift: usize) -> SaliencyOverlay {
    let mask = LumaFrame::from_fn(w, h, |x, y| {
        ((x + shift) % w > w / 4 && (x + shift) % w < w / 2 && y > h / 3) as u8 as f32
    });
    let edges = LumaFrame::from_fn(w, h, |x, y| if x == y || x == w / 2 { 0.9 } else { 0.1 });
    SaliencyOverlay::new(
        w,
        h,
        index,
        vec![ObjectInstance::new("bed", mask, 0.95).unwrap()],
        Some(EdgeMap::new(edges, 0.5).unwrap()),
    )
    .unwrap()
}

#[test]
fn black_input_stays_black_direct() {
    let grid = GridConfig::default().build().unwrap();
    let seq = FrameSequence::new(vec![LumaFrame::zeros(128, 96); 12], 20.0).unwrap();
    let out = process_sequence(&seq, &[], &PipelineConfig::with_method(Method::Direct), &grid).unwrap();
    assert_eq!(out.len(), 8);
    assert_eq!(out.fps(), 20.0);
    assert!(out.frames().iter().all(|f| f.data().iter().all(|&v| v == 0.0)));
}

#[test]
fn replicated_still_equals_static_rendering() {
    let grid = GridConfig::default().build().unwrap();
    let frame = LumaFrame::zeros(160, 120);
    let overlay = blob_overlay(160, 120, 0, 0);
    let cfg = PipelineConfig::with_method(Method::Om);
    let still = render_still(&frame, Some(&overlay), &cfg, &grid).unwrap();
    let seq = FrameSequence::new(vec![frame; 5], 20.0).unwrap();
    let out = process_sequence(&seq, &vec![overlay; 5], &cfg, &grid).unwrap();
    assert_eq!(out.frames(), &[still]);
}

#[test]
fn dropout_mask_holds_for_every_frame() {
    let grid = GridConfig {
        seed: 99,
        ..GridConfig::default()
    }
    .build()
    .unwrap();
    let seq = FrameSequence::new(vec![LumaFrame::filled(256, 256, 1.0); 30], 20.0).unwrap();
    let out = process_sequence(&seq, &[], &PipelineConfig::with_method(Method::Direct), &grid).unwrap();
    for f in out.frames() {
        for (&(cx, cy), &alive) in grid.centers().iter().zip(grid.alive()) {
            let v = f.get(cx as usize, cy as usize);
            assert_eq!(v, if alive { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn median_output_values_come_from_the_rendered_inputs() {
    let grid = GridConfig::default().build().unwrap();
    let (w, h) = (128, 96);
    let frames = vec![LumaFrame::zeros(w, h); 9];
    let overlays: Vec<_> = (0..9).map(|i| blob_overlay(w, h, i, i * 7)).collect();
    let cfg = PipelineConfig::with_method(Method::SieOm);
    let rendered: Vec<LumaFrame> = frames
        .iter()
        .zip(&overlays)
        .map(|(f, o)| render_still(f, Some(o), &cfg, &grid).unwrap())
        .collect();
    let seq = FrameSequence::new(frames, 20.0).unwrap();
    let out = process_sequence(&seq, &overlays, &cfg, &grid).unwrap();
    assert_eq!(out.len(), 5);
    let lattice: Vec<f32> = (0..8).map(|k| (k as f64 / 7.0) as f32).collect();
    for (t, f) in out.frames().iter().enumerate() {
        for i in 0..f.data().len() {
            assert!(rendered[t..t + 5].iter().any(|r| r.data()[i] == f.data()[i]));
        }
        for &(cx, cy) in grid.centers() {
            assert!(lattice.contains(&f.get(cx as usize, cy as usize)));
        }
    }
}

#[test]
fn input_rate_is_retimed_to_twenty_hz() {
    let grid = PhospheneGrid::build(8, 8, 64, 64).unwrap();
    let seq = FrameSequence::new(vec![LumaFrame::zeros(32, 32); 300], 30.0).unwrap();
    let out = process_sequence(&seq, &[], &PipelineConfig::with_method(Method::Direct), &grid).unwrap();
    assert_eq!(out.len(), 200 - 4);
    assert_eq!(out.fps(), 20.0);
}
