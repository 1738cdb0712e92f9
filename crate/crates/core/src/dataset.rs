//! Synthetic datasets on disk: frames, ground truth, band and glyph tables.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evalkit::{write_annotations, AnnotatedBox, FrameAnnotation};
use crate::glyphfeat::{write_feature_csv, LabeledFeatures};
use crate::localizer::{write_band_csv, BandAxis, BandSample, FramePlanes};
use crate::mfi::{column_bands, integrate_frames, Band, FrameWindow};
use crate::pipeline::{candidate_bands_for, glyph_rows, windows};
use crate::pixelcore::io::write_rgb;
use crate::pixelcore::Rect;
use crate::synth::{generate_clip, render_region, Clip, LineStyle, RecognitionSpec, SyntheticSpec};

/// Intensities and border of the clean glyph renders.
const GLYPH_FG: f64 = 235.0;
const GLYPH_BG: f64 = 45.0;
const GLYPH_PAD: usize = 3;

/// A band is text when at least half its thickness lies inside some
/// truth box along its axis.
pub fn band_is_text(axis: BandAxis, band: Band, truth: &[Rect]) -> bool {
    truth.iter().any(|r| {
        let (lo, hi) = match axis {
            BandAxis::Row => (r.y, r.bottom()),
            BandAxis::Column => (r.x, r.right()),
        };
        let inside = (band.end + 1).min(hi).saturating_sub(band.start.max(lo));
        2 * inside >= band.thickness()
    })
}

/// Labeled band features of one window, following the detection cascade:
/// row bands first, then column bands found over the text rows (labeled by
/// overlap) and over the other rows (all non-text).
pub fn band_samples(window: &FrameWindow, truth: &[Rect], cfg: &PipelineConfig) -> Result<Vec<BandSample>> {
    let integrated = integrate_frames(window);
    let (profile, bands) = candidate_bands_for(&integrated, cfg)?;
    let planes = FramePlanes::new(&integrated)?;
    let params = cfg.mfi.band_params();
    let (text_rows, other_rows): (Vec<Band>, Vec<Band>) =
        bands.row_bands.iter().partition(|&&b| band_is_text(BandAxis::Row, b, truth));
    let mut out = Vec::new();
    for &b in &bands.row_bands {
        out.push((planes.band_features_within(BandAxis::Row, b, &bands.col_bands)?.to_array(), band_is_text(BandAxis::Row, b, truth)));
    }
    for (rows, may_be_text) in [(&text_rows, true), (&other_rows, false)] {
        for b in column_bands(&profile, rows, &params) {
            let f = planes.band_features_within(BandAxis::Column, b, rows)?.to_array();
            out.push((f, may_be_text && band_is_text(BandAxis::Column, b, truth)));
        }
    }
    Ok(out)
}

/// A generated clip cut into detection windows.
#[derive(Clone, Debug)]
pub struct ClipWindows {
    pub clip: Clip,
    pub windows: Vec<FrameWindow>,
}

pub fn clip_windows(spec: &SyntheticSpec, index: usize, cfg: &PipelineConfig) -> Result<ClipWindows> {
    let clip = generate_clip(spec, index)?;
    let windows = windows(clip.frames.clone(), cfg.mfi.window_length)?;
    Ok(ClipWindows { clip, windows })
}

/// Band samples of every window of every clip of `spec`.
pub fn band_dataset(spec: &SyntheticSpec, cfg: &PipelineConfig) -> Result<Vec<BandSample>> {
    let mut out = Vec::new();
    for i in 0..spec.clips {
        let cw = clip_windows(spec, i, cfg)?;
        for w in &cw.windows {
            out.extend(band_samples(w, &[cw.clip.truth], cfg)?);
        }
    }
    Ok(out)
}

/// Glyph rows for the captions of `clips` followed by random-style
/// renders of the drill and lexicon lines.
pub fn glyph_dataset(spec: &SyntheticSpec, clips: &[Clip], cfg: &PipelineConfig) -> Result<Vec<LabeledFeatures>> {
    let mut lines = Vec::new();
    for c in clips {
        lines.push(render_region(&c.caption.text, &c.style, GLYPH_FG, GLYPH_BG, GLYPH_PAD)?);
    }
    let rs = RecognitionSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(0);
    for text in rs.line_texts() {
        for _ in 0..spec.glyph_renders {
            let style = LineStyle {
                font_px: rng.gen_range(rs.font_px.0..rs.font_px.1),
                pen: rng.gen_range(rs.pen.0..rs.pen.1),
            };
            lines.push(render_region(&text, &style, GLYPH_FG, GLYPH_BG, GLYPH_PAD)?);
        }
    }
    glyph_rows(&lines, cfg)
}

/// Counts reported after writing a dataset.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub clips: usize,
    pub frames: usize,
    pub truth_records: usize,
    pub band_rows: usize,
    pub text_bands: usize,
    pub glyph_rows: usize,
}

pub fn frame_name(clip: usize, frame: usize) -> PathBuf {
    PathBuf::from(format!("clip_{:04}", clip + 1)).join(format!("frame_{:06}.png", frame + 1))
}

fn key(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `clip_NNNN/frame_NNNNNN.png`, `truth.jsonl` (one record per
/// window, against its representative frame), `bands.csv`, `glyphs.csv`,
/// `lexicon.txt` and `spec.json` under `out`.
pub fn write_dataset(spec: &SyntheticSpec, cfg: &PipelineConfig, out: &Path) -> Result<DatasetSummary> {
    spec.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut summary = DatasetSummary {
        clips: spec.clips,
        ..Default::default()
    };
    let mut truth = Vec::new();
    let mut bands = Vec::new();
    let mut clips = Vec::with_capacity(spec.clips);
    for i in 0..spec.clips {
        let cw = clip_windows(spec, i, cfg)?;
        let dir = out.join(format!("clip_{:04}", i + 1));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (t, f) in cw.clip.frames.iter().enumerate() {
            write_rgb(&out.join(frame_name(i, t)), &f.pixels)?;
        }
        summary.frames += cw.clip.frames.len();
        for w in &cw.windows {
            let rep = w.representative().frame_index;
            truth.push(FrameAnnotation {
                frame: key(&frame_name(i, rep)),
                boxes: vec![AnnotatedBox::new(cw.clip.truth, cw.clip.caption.text.clone())],
            });
            bands.extend(band_samples(w, &[cw.clip.truth], cfg)?);
        }
        clips.push(cw.clip);
    }
    let glyphs = glyph_dataset(spec, &clips, cfg)?;

    write_annotations(&out.join("truth.jsonl"), &truth)?;
    write_band_csv(&out.join("bands.csv"), &bands)?;
    write_feature_csv(&out.join("glyphs.csv"), &glyphs)?;
    let mut lexicon: Vec<&str> = crate::synth::WORDS.to_vec();
    lexicon.sort_unstable();
    write_text(&out.join("lexicon.txt"), &(lexicon.join("\n") + "\n"))?;
    write_text(&out.join("spec.json"), &serde_json::to_string_pretty(spec)?)?;

    summary.truth_records = truth.len();
    summary.band_rows = bands.len();
    summary.text_bands = bands.iter().filter(|b| b.1).count();
    summary.glyph_rows = glyphs.len();
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_labels_follow_half_thickness_rule() {
        let truth = [Rect::new(10, 20, 30, 10)];
        assert!(band_is_text(BandAxis::Row, Band::new(18, 25), &truth));
        assert!(!band_is_text(BandAxis::Row, Band::new(10, 23), &truth));
        assert!(band_is_text(BandAxis::Column, Band::new(35, 44), &truth));
        assert!(!band_is_text(BandAxis::Column, Band::new(0, 9), &truth));
        assert!(!band_is_text(BandAxis::Row, Band::new(0, 5), &[]));
    }

    #[test]
    fn frame_names_are_one_based() {
        assert_eq!(key(&frame_name(0, 2)), "clip_0001/frame_000003.png");
    }
}
