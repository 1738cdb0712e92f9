//! End-to-end chains: frame window to caption boxes, and caption region to
//! recognized text.

use std::path::{Path, PathBuf};

use crate::binarizer::{binarize_region_detailed, Binarization};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evalkit::GlyphRecord;
use crate::glyphfeat::{extract_features, FeatureVector160, LabeledFeatures};
use crate::localizer::{score_bands, zones_from_scores, BandAxis, FramePlanes, MlpModel, ScoredBand, TextBox};
use crate::mfi::{bands_from_profile, column_bands, integrate_frames, refine_zone, Band, CandidateBands, EdgeProfile, FrameWindow};
use crate::pixelcore::io::{write_binary, write_gray, write_rgb};
use crate::pixelcore::{remove_small_components, rgb_to_gray, BinaryImage, GrayImage, Grid, Rect, RgbFrame};
use crate::recognizer::{lexicon_correct_line, recognize_line_with_words, train_prototypes, PrototypeSet};
use crate::synth::{GlyphLine, PlacedGlyph};
use crate::textline::{bank_for, debug_overlay, gabor_enhance, normalize_height, segment_glyphs, GlyphSegment, TextLine};

/// Output of the detection chain for one window.
#[derive(Clone, Debug)]
pub struct WindowDetection {
    pub integrated: RgbFrame,
    pub bands: CandidateBands,
    pub scored: Vec<ScoredBand>,
    pub boxes: Vec<TextBox>,
}

pub fn candidate_bands_for(integrated: &RgbFrame, cfg: &PipelineConfig) -> Result<(EdgeProfile, CandidateBands)> {
    let profile = EdgeProfile::new(integrated)?;
    let bands = bands_from_profile(&profile, &cfg.mfi.band_params());
    Ok((profile, bands))
}

/// Integrates the window, scores its row bands, then finds and scores
/// column bands over the accepted rows, and keeps the zones where accepted
/// bands cross.
pub fn detect_window(window: &FrameWindow, model: &MlpModel, cfg: &PipelineConfig) -> Result<WindowDetection> {
    let integrated = integrate_frames(window);
    let (profile, candidates) = candidate_bands_for(&integrated, cfg)?;
    let planes = FramePlanes::new(&integrated)?;
    let threshold = cfg.localizer.threshold;
    let mut scored = score_bands(&planes, BandAxis::Row, &candidates.row_bands, &candidates.col_bands, model)?;
    let accepted: Vec<Band> = scored.iter().filter(|s| s.score >= threshold).map(|s| s.band).collect();
    let col_bands = column_bands(&profile, &accepted, &cfg.mfi.band_params());
    scored.extend(score_bands(&planes, BandAxis::Column, &col_bands, &accepted, model)?);
    let bands = CandidateBands {
        row_bands: candidates.row_bands,
        col_bands,
    };
    let mut boxes = zones_from_scores(&scored, &cfg.localizer.params());
    if cfg.localizer.refine_zones {
        let p = cfg.localizer.params();
        let mut refined: Vec<TextBox> = Vec::with_capacity(boxes.len());
        for b in boxes {
            let Some(r) = refine_until_stable(&profile, b.rect(), cfg) else { continue };
            if r.width >= p.min_zone_width && r.height >= p.min_zone_height && !refined.iter().any(|o| o.rect() == r) {
                refined.push(TextBox::new(r, b.score));
            }
        }
        boxes = refined;
    }
    Ok(WindowDetection {
        integrated,
        bands,
        scored,
        boxes,
    })
}

/// Repeats [`refine_zone`] until the zone stops shrinking, at most a few
/// rounds.
fn refine_until_stable(profile: &EdgeProfile, zone: Rect, cfg: &PipelineConfig) -> Option<Rect> {
    let params = cfg.mfi.band_params();
    let mut r = zone;
    for _ in 0..4 {
        let next = refine_zone(profile, r, &params, cfg.localizer.refine_peak_ratio)?;
        if next == r {
            break;
        }
        r = next;
    }
    Some(r)
}

/// Splits a frame sequence into consecutive windows of `length` frames;
/// the last window may be shorter.
pub fn windows(frames: Vec<RgbFrame>, length: usize) -> Result<Vec<FrameWindow>> {
    if length == 0 {
        return Err(Error::argument("window length must be positive"));
    }
    let mut out = Vec::new();
    let mut it = frames.into_iter().peekable();
    while it.peek().is_some() {
        out.push(FrameWindow::new(it.by_ref().take(length).collect())?);
    }
    Ok(out)
}

/// Intermediate images of the line chain.
#[derive(Clone, Debug)]
pub struct LineAnalysis {
    pub enhanced: GrayImage,
    pub binarization: Binarization,
    /// Despeckled binarization cropped to its inked rows.
    pub cleaned: BinaryImage,
    /// Offset of `cleaned` within the region.
    pub top: usize,
    pub line: TextLine,
    pub segments: Vec<GlyphSegment>,
    /// Normalized height over region height.
    pub scale: f64,
}

/// Gabor enhancement, binarization, despeckling, height normalization,
/// baseline and diacritic analysis, then glyph segmentation.
pub fn analyze_line(region: &GrayImage, cfg: &PipelineConfig) -> Result<LineAnalysis> {
    let enhanced = if cfg.gabor.enabled {
        gabor_enhance(region, &bank_for(region, &cfg.gabor.bank_params()))?
    } else {
        region.clone()
    };
    let binarization = binarize_region_detailed(&enhanced, &cfg.binarizer)?;
    let cleaned = remove_small_components(&binarization.image, cfg.textline.despeckle_area);
    // normalize the inked rows, not the crop margins
    let rows = cleaned.bounding_box().ok_or(Error::NoText)?;
    let cleaned = cleaned.crop(Rect::new(0, rows.y, cleaned.width(), rows.height))?;
    let target = cfg.textline.normalized_height;
    let normalized = normalize_height(&cleaned, target);
    let scale = target as f64 / cleaned.height() as f64;
    let line = TextLine::from_image(normalized, cfg.textline.band_halfwidth)?;
    let segments = segment_glyphs(&line, &cfg.textline.segment_params());
    Ok(LineAnalysis {
        enhanced,
        binarization,
        cleaned,
        top: rows.y,
        line,
        segments,
        scale,
    })
}

/// Word-break gap in normalized pixels: the configured multiple of the
/// median gap between consecutive segments. 0 when disabled or when the
/// line has no gaps.
pub fn word_gap_px(analysis: &LineAnalysis, cfg: &PipelineConfig) -> usize {
    let f = cfg.textline.word_gap_factor;
    let mut gaps: Vec<usize> = analysis
        .segments
        .windows(2)
        .map(|w| w[0].column_span.0.saturating_sub(w[1].column_span.1 + 1))
        .collect();
    if f == 0.0 || gaps.is_empty() {
        return 0;
    }
    gaps.sort_unstable();
    let n = gaps.len();
    let median = (gaps[(n - 1) / 2] + gaps[n / 2]) as f64 / 2.0;
    ((f * median).ceil() as usize).max(1)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LineRecognition {
    pub text: String,
    pub corrected: Option<String>,
    pub glyphs: Vec<GlyphRecord>,
}

/// Recognizes one caption region. A region without text pixels yields
/// empty text.
pub fn recognize_region(
    region: &GrayImage,
    base: &PrototypeSet,
    cfg: &PipelineConfig,
    lexicon: Option<&[String]>,
) -> Result<(LineRecognition, Option<LineAnalysis>)> {
    let analysis = match analyze_line(region, cfg) {
        Ok(a) => a,
        Err(Error::NoText) => return Ok((LineRecognition::default(), None)),
        Err(e) => return Err(e),
    };
    let (text, memberships) =
        recognize_line_with_words(&analysis.segments, base, &cfg.recognizer.knn(), word_gap_px(&analysis, cfg))?;
    let glyphs = memberships
        .into_iter()
        .map(|m| GlyphRecord {
            label: base.classes[m.predicted].clone(),
            margin: m.runner_up_margin,
            membership: m.u[m.predicted],
        })
        .collect();
    let corrected = lexicon.map(|lex| lexicon_correct_line(&text, lex, cfg.recognizer.max_edit_distance));
    Ok((
        LineRecognition {
            text,
            corrected,
            glyphs,
        },
        Some(analysis),
    ))
}

/// Gray crop of a detected box grown by the configured margin.
pub fn crop_box(frame: &RgbFrame, rect: Rect, cfg: &PipelineConfig) -> Result<GrayImage> {
    let grown = rect.expand(cfg.localizer.crop_margin, frame.width(), frame.height());
    rgb_to_gray(frame).crop(grown)
}

/// Feature rows for the glyphs of a rendered line, one per glyph.
///
/// `to_line` maps a column of the rendering to a column of the region the
/// line was analyzed from. A glyph takes the features of the segment it
/// overlaps most when that segment overlaps no other glyph more; otherwise
/// the glyph's own columns are cut out of the line.
pub fn label_glyph_segments(
    analysis: &LineAnalysis,
    glyphs: &[PlacedGlyph],
    to_line: impl Fn(usize) -> f64,
) -> Result<Vec<LabeledFeatures>> {
    let width = analysis.line.body.width();
    let s = analysis.scale;
    let spans: Vec<(usize, usize)> = glyphs
        .iter()
        .map(|g| {
            let a = ((to_line(g.columns.0) * s).floor().max(0.0) as usize).min(width - 1);
            let b = ((to_line(g.columns.1 + 1) * s).ceil() as usize).clamp(a + 1, width) - 1;
            (a, b)
        })
        .collect();
    let overlap = |p: (usize, usize), q: (usize, usize)| (p.1.min(q.1) + 1).saturating_sub(p.0.max(q.0));
    let best_glyph = |seg: (usize, usize)| {
        (0..spans.len())
            .max_by_key(|&i| (overlap(seg, spans[i]), std::cmp::Reverse(i)))
            .filter(|&i| overlap(seg, spans[i]) > 0)
    };
    let mut rows = Vec::with_capacity(glyphs.len());
    for (gi, (g, &span)) in glyphs.iter().zip(&spans).enumerate() {
        let seg = analysis
            .segments
            .iter()
            .max_by_key(|seg| (overlap(seg.column_span, span), std::cmp::Reverse(seg.column_span.0)))
            .filter(|seg| overlap(seg.column_span, span) > 0 && best_glyph(seg.column_span) == Some(gi));
        let features = match seg {
            Some(seg) => extract_features(seg)?,
            None => extract_features(&GlyphSegment::from_columns(&analysis.line, span.0, span.1)?)?,
        };
        rows.push(LabeledFeatures {
            features,
            label: Some(g.label.clone()),
        });
    }
    Ok(rows)
}

/// Labeled feature rows for rendered lines, one row per glyph.
pub fn glyph_rows(lines: &[GlyphLine], cfg: &PipelineConfig) -> Result<Vec<LabeledFeatures>> {
    let mut rows = Vec::new();
    for line in lines {
        let analysis = analyze_line(&line.image, cfg)?;
        let pad = line.pad as f64;
        rows.extend(label_glyph_segments(&analysis, &line.rendered.glyphs, |c| c as f64 + pad)?);
    }
    Ok(rows)
}

/// Builds a prototype base from labeled rows using the configured
/// membership mode.
pub fn train_recognizer(rows: &[LabeledFeatures], cfg: &PipelineConfig) -> Result<PrototypeSet> {
    let labeled: Vec<(FeatureVector160, String)> = rows
        .iter()
        .map(|r| {
            r.label
                .clone()
                .map(|l| (r.features, l))
                .ok_or_else(|| Error::argument("training row without label"))
        })
        .collect::<Result<_>>()?;
    train_prototypes(&labeled, cfg.recognizer.membership_mode, cfg.recognizer.k_init, cfg.recognizer.knn())
}

/// Raw recognized text of each region.
pub fn recognize_lines(lines: &[GlyphLine], base: &PrototypeSet, cfg: &PipelineConfig) -> Result<Vec<String>> {
    lines
        .iter()
        .map(|l| recognize_region(&l.image, base, cfg, None).map(|(r, _)| r.text))
        .collect()
}

fn draw_rect(img: &mut Grid<[u8; 3]>, r: Rect, color: [u8; 3]) {
    if r.width == 0 || r.height == 0 {
        return;
    }
    for x in r.x..r.right() {
        img.set(x, r.y, color);
        img.set(x, r.bottom() - 1, color);
    }
    for y in r.y..r.bottom() {
        img.set(r.x, y, color);
        img.set(r.right() - 1, y, color);
    }
}

/// Writes per-stage PNGs of a detection under `dir`, named after `stem`.
pub fn dump_detection(dir: &Path, stem: &str, det: &WindowDetection) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (profile, _) = candidate_bands_for(&det.integrated, &PipelineConfig::default())?;
    let (w, h) = (det.integrated.width(), det.integrated.height());
    let mut bands = det.integrated.pixels.clone();
    for s in &det.scored {
        let color = if s.score >= 0.5 { [0, 200, 0] } else { [200, 0, 0] };
        let r = match s.axis {
            BandAxis::Row => Rect::new(0, s.band.start, w, s.band.thickness()),
            BandAxis::Column => Rect::new(s.band.start, 0, s.band.thickness(), h),
        };
        draw_rect(&mut bands, r, color);
    }
    let mut boxes = det.integrated.pixels.clone();
    for b in &det.boxes {
        draw_rect(&mut boxes, b.rect(), [255, 0, 255]);
    }
    let paths: Vec<PathBuf> = ["integrated", "edges", "bands", "boxes"]
        .iter()
        .map(|s| dir.join(format!("{stem}_{s}.png")))
        .collect();
    write_rgb(&paths[0], &det.integrated.pixels)?;
    write_gray(&paths[1], &profile.edges)?;
    write_rgb(&paths[2], &bands)?;
    write_rgb(&paths[3], &boxes)?;
    Ok(paths)
}

/// Writes per-stage images of a line analysis under `dir`.
pub fn dump_line(dir: &Path, stem: &str, a: &LineAnalysis) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = vec![
        dir.join(format!("{stem}_enhanced.png")),
        dir.join(format!("{stem}_binary.png")),
        dir.join(format!("{stem}_line.png")),
    ];
    write_gray(&paths[0], &a.enhanced)?;
    write_binary(&paths[1], &a.cleaned)?;
    write_rgb(&paths[2], &debug_overlay(&a.line, &a.segments))?;
    if let Some(u) = &a.binarization.text_membership {
        let p = dir.join(format!("{stem}_membership.pgm"));
        write_gray(&p, &u.map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8))?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(i: usize) -> RgbFrame {
        RgbFrame::new(Grid::new(4, 4, [i as u8; 3]), i)
    }

    #[test]
    fn windows_cover_all_frames() {
        let w = windows((0..12).map(frame).collect(), 5).unwrap();
        let lens: Vec<usize> = w.iter().map(FrameWindow::window_length).collect();
        assert_eq!(lens, vec![5, 5, 2]);
        assert_eq!(w[1].representative().frame_index, 7);
        assert!(windows(vec![frame(0)], 0).is_err());
    }

    #[test]
    fn blank_region_recognizes_nothing() {
        use crate::glyphfeat::FeatureVector160;
        use crate::recognizer::{train_prototypes, MembershipMode};
        let base = train_prototypes(
            &[(FeatureVector160::zeros(), "ب.iso".to_string())],
            MembershipMode::Crisp,
            1,
            Default::default(),
        )
        .unwrap();
        let (r, a) = recognize_region(&Grid::new(40, 20, 7u8), &base, &PipelineConfig::default(), None).unwrap();
        assert!(r.text.is_empty() && a.is_none());
    }
}
