//! PNG import/export and small filesystem helpers.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::ImageEncoder;

use crate::error::{Error, Result};
use crate::frame::LumaFrame;

/// Loads any PNG as luminance in `[0, 1]`; colour images are converted to luma.
pub fn load_png(path: &Path) -> Result<LumaFrame> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(LumaFrame::from_gray_image(&img.to_luma8()))
}

/// Writes an 8-bit grayscale PNG.
pub fn save_png(frame: &LumaFrame, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let img = frame.to_gray_image();
    PngEncoder::new_with_quality(BufWriter::new(file), CompressionType::Fast, FilterType::Sub)
        .write_image(
            img.as_raw(),
            img.width(),
            img.height(),
            image::ExtendedColorType::L8,
        )
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Trailing decimal number in a file stem, e.g. `frame_0012.png` -> 12.
pub fn frame_number(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let digits: String = stem
        .chars()
        .rev()
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    digits.parse().ok()
}

/// PNG files in `dir` that carry a frame number, sorted by that number.
pub fn numbered_pngs(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png {
            if let Some(n) = frame_number(&path) {
                frames.push((n, path));
            }
        }
    }
    frames.sort();
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_numbers() {
        assert_eq!(frame_number(Path::new("a/frame_0012.png")), Some(12));
        assert_eq!(frame_number(Path::new("7.png")), Some(7));
        assert_eq!(frame_number(Path::new("cover.png")), None);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = LumaFrame::from_fn(7, 5, |x, y| ((x * 31 + y * 7) % 256) as f32 / 255.0);
        let p = dir.path().join("f.png");
        save_png(&f, &p).unwrap();
        assert_eq!(load_png(&p).unwrap(), f);
    }

    #[test]
    fn numbered_pngs_sort_numerically() {
        let dir = tempfile::tempdir().unwrap();
        for n in [10, 2, 1] {
            save_png(&LumaFrame::zeros(2, 2), &dir.path().join(format!("f{n}.png"))).unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let names: Vec<_> = numbered_pngs(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_owned())
            .collect();
        assert_eq!(names, ["f1.png", "f2.png", "f10.png"]);
    }
}
