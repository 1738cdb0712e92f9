//! PNG and binary PGM/PPM reading and writing. The encoder is picked from
//! the file extension.

use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

use super::{BinaryImage, GrayImage, Grid, RgbFrame};
use crate::error::{Error, Result};

const FRAME_EXTENSIONS: [&str; 4] = ["png", "ppm", "pgm", "pnm"];

pub fn is_frame_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Frame files directly inside `dir`, sorted by file name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && is_frame_file(&path) {
            frames.push(path);
        }
    }
    frames.sort();
    Ok(frames)
}

pub fn read_frame(path: &Path, frame_index: usize) -> Result<RgbFrame> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = img.pixels().map(|p| p.0).collect();
    Ok(RgbFrame::new(Grid::from_vec(w, h, pixels)?, frame_index))
}

pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Grid::from_vec(w, h, img.into_raw())
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(())
}

fn write_raw(path: &Path, raw: &[u8], width: usize, height: usize, color: ExtendedColorType) -> Result<()> {
    create_parent(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let subtype = match (ext.as_deref(), color) {
        (Some("pgm"), _) => Some(PnmSubtype::Graymap(SampleEncoding::Binary)),
        (Some("ppm"), _) => Some(PnmSubtype::Pixmap(SampleEncoding::Binary)),
        (Some("pnm"), ExtendedColorType::L8) => Some(PnmSubtype::Graymap(SampleEncoding::Binary)),
        (Some("pnm"), _) => Some(PnmSubtype::Pixmap(SampleEncoding::Binary)),
        _ => None,
    };
    match subtype {
        Some(subtype) => {
            // P5/P6 need a matching sample layout
            let (data, color) = match (subtype, color) {
                (PnmSubtype::Graymap(_), ExtendedColorType::Rgb8) => {
                    (raw.chunks(3).map(|p| super::gray_value([p[0], p[1], p[2]])).collect(), ExtendedColorType::L8)
                }
                (PnmSubtype::Pixmap(_), ExtendedColorType::L8) => {
                    (raw.iter().flat_map(|&v| [v, v, v]).collect(), ExtendedColorType::Rgb8)
                }
                _ => (raw.to_vec(), color),
            };
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let writer = std::io::BufWriter::new(file);
            PnmEncoder::new(writer)
                .with_subtype(subtype)
                .write_image(&data, width as u32, height as u32, color)?;
        }
        None => image::save_buffer(path, raw, width as u32, height as u32, color)?,
    }
    Ok(())
}

pub fn write_rgb(path: &Path, pixels: &Grid<[u8; 3]>) -> Result<()> {
    let raw: Vec<u8> = pixels.data().iter().flatten().copied().collect();
    write_raw(path, &raw, pixels.width(), pixels.height(), ExtendedColorType::Rgb8)
}

pub fn write_gray(path: &Path, img: &GrayImage) -> Result<()> {
    write_raw(path, img.data(), img.width(), img.height(), ExtendedColorType::L8)
}

/// Text pixels are written black.
pub fn write_binary(path: &Path, img: &BinaryImage) -> Result<()> {
    write_gray(path, &img.to_gray())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_and_ppm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pixels = Grid::from_fn(5, 3, |x, y| [x as u8 * 40, y as u8 * 70, 200]);
        for name in ["a.png", "a.ppm"] {
            let path = dir.path().join(name);
            write_rgb(&path, &pixels).unwrap();
            let back = read_frame(&path, 7).unwrap();
            assert_eq!(back.pixels, pixels);
            assert_eq!(back.frame_index, 7);
        }
        let gray = Grid::from_fn(4, 4, |x, y| (x * 16 + y) as u8);
        let path = dir.path().join("g.pgm");
        write_gray(&path, &gray).unwrap();
        assert_eq!(read_gray(&path).unwrap(), gray);
        assert_eq!(&std::fs::read(&path).unwrap()[..2], b"P5");
        write_rgb(&dir.path().join("c.ppm"), &pixels).unwrap();
        assert_eq!(&std::fs::read(dir.path().join("c.ppm")).unwrap()[..2], b"P6");
    }

    #[test]
    fn frames_listed_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        let px = Grid::new(2, 2, [0u8; 3]);
        for name in ["frame_000002.png", "frame_000001.png", "notes.txt"] {
            if name.ends_with(".txt") {
                std::fs::write(dir.path().join(name), "x").unwrap();
            } else {
                write_rgb(&dir.path().join(name), &px).unwrap();
            }
        }
        let frames = list_frames(dir.path()).unwrap();
        let names: Vec<_> = frames.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
        assert_eq!(names, vec!["frame_000001.png", "frame_000002.png"]);
    }
}
