//! Preparation of a binarized caption for recognition: height
//! normalization, baseline detection, diacritic separation and
//! vertical-projection glyph segmentation.

mod gabor;

pub use gabor::{
    bank_for, default_bank, estimate_stroke_width, filter, gabor_enhance, gabor_kernel, BankParams, GaborParams,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixelcore::{
    connected_components, projection, BinaryImage, Connectivity, Direction, GrayImage, Grid, RealImage, Rect,
};

/// Height every text line is scaled to before segmentation.
pub const NORMALIZED_HEIGHT: usize = 26;

/// Rasters that can be resampled through a real-valued intermediate.
pub trait Resample: Sized {
    fn to_real(&self) -> RealImage;
    fn from_real(img: &RealImage) -> Self;
}

impl Resample for GrayImage {
    fn to_real(&self) -> RealImage {
        self.map(|&v| v as f64)
    }

    fn from_real(img: &RealImage) -> Self {
        img.map(|&v| v.round().clamp(0.0, 255.0) as u8)
    }
}

impl Resample for BinaryImage {
    fn to_real(&self) -> RealImage {
        self.map(|&b| if b { 1.0 } else { 0.0 })
    }

    fn from_real(img: &RealImage) -> Self {
        img.map(|&v| v >= 0.5)
    }
}

/// Bilinear resampling with pixel-center alignment.
pub fn resize_bilinear(img: &RealImage, width: usize, height: usize) -> RealImage {
    let sx = img.width() as f64 / width as f64;
    let sy = img.height() as f64 / height as f64;
    let max_x = (img.width() - 1) as f64;
    let max_y = (img.height() - 1) as f64;
    Grid::from_fn(width, height, |ox, oy| {
        let fx = ((ox as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
        let fy = ((oy as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(img.width() - 1), (y0 + 1).min(img.height() - 1));
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let top = img.get(x0, y0) * (1.0 - tx) + img.get(x1, y0) * tx;
        let bottom = img.get(x0, y1) * (1.0 - tx) + img.get(x1, y1) * tx;
        top * (1.0 - ty) + bottom * ty
    })
}

/// Scales both axes by `target_height / height`, keeping the aspect ratio.
pub fn normalize_height<T: Resample>(region: &T, target_height: usize) -> T {
    let real = region.to_real();
    let factor = target_height as f64 / real.height() as f64;
    let width = ((real.width() as f64 * factor).round() as usize).max(1);
    if width == real.width() && target_height == real.height() {
        return T::from_real(&real);
    }
    T::from_real(&resize_bilinear(&real, width, target_height))
}

/// Row with the largest horizontal projection; ties go to the lower row
/// on the image (larger index).
pub fn detect_baseline(line: &BinaryImage) -> Result<usize> {
    let profile = projection(line, Direction::Horizontal);
    let (row, &count) = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("images have at least one row");
    if count == 0 {
        return Err(Error::NoText);
    }
    Ok(row)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiacriticPosition {
    Above,
    Below,
}

/// A secondary mark separated from the letter bodies.
#[derive(Clone, Debug, PartialEq)]
pub struct Diacritic {
    /// `(x, y)` in line coordinates.
    pub pixels: Vec<(usize, usize)>,
    pub bbox: Rect,
    pub position: DiacriticPosition,
}

impl Diacritic {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.pixels.len() as f64;
        let (sx, sy) = self
            .pixels
            .iter()
            .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x as f64, b + y as f64));
        (sx / n, sy / n)
    }
}

/// Removes every 8-connected component that has no pixel within
/// `band_halfwidth` rows of the baseline. Removed components are returned
/// as diacritics, flagged by whether their centroid lies above the baseline.
pub fn split_diacritics(line: &BinaryImage, baseline_row: usize, band_halfwidth: usize) -> (BinaryImage, Vec<Diacritic>) {
    let lo = baseline_row.saturating_sub(band_halfwidth);
    let hi = baseline_row + band_halfwidth;
    let mut body = line.clone();
    let mut diacritics = Vec::new();
    for c in connected_components(line, Connectivity::Eight).components {
        if c.pixels.iter().any(|&(_, y)| (lo..=hi).contains(&y)) {
            continue;
        }
        for &(x, y) in &c.pixels {
            body.set(x, y, false);
        }
        let (_, cy) = c.centroid();
        diacritics.push(Diacritic {
            bbox: c.bbox,
            position: if cy < baseline_row as f64 {
                DiacriticPosition::Above
            } else {
                DiacriticPosition::Below
            },
            pixels: c.pixels,
        });
    }
    (body, diacritics)
}

/// A normalized line split into letter bodies and diacritics.
#[derive(Clone, Debug, PartialEq)]
pub struct TextLine {
    pub image: BinaryImage,
    pub baseline_row: usize,
    pub diacritics: Vec<Diacritic>,
    pub body: BinaryImage,
}

impl TextLine {
    /// Detects the baseline of an already normalized line and separates
    /// its diacritics.
    pub fn from_image(image: BinaryImage, band_halfwidth: usize) -> Result<Self> {
        let baseline_row = detect_baseline(&image)?;
        Ok(TextLine::with_baseline(image, baseline_row, band_halfwidth))
    }

    /// Uses a baseline known from elsewhere (e.g. rendering geometry).
    pub fn with_baseline(image: BinaryImage, baseline_row: usize, band_halfwidth: usize) -> Self {
        let (body, diacritics) = split_diacritics(&image, baseline_row, band_halfwidth);
        TextLine {
            image,
            baseline_row,
            diacritics,
            body,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentParams {
    /// Columns whose body projection does not exceed this separate segments.
    pub gap_threshold: usize,
    pub min_segment_width: usize,
    pub min_segment_area: usize,
}

impl Default for SegmentParams {
    fn default() -> Self {
        SegmentParams {
            gap_threshold: 0,
            min_segment_width: 2,
            min_segment_area: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlyphSegment {
    /// Columns `column_span.0..=column_span.1` of the line body, full line height.
    pub image: BinaryImage,
    pub column_span: (usize, usize),
    pub baseline_row: usize,
    pub attached_diacritics: Vec<Diacritic>,
}

impl GlyphSegment {
    /// A segment covering the whole line, with every diacritic attached.
    pub fn whole_line(line: &TextLine) -> Self {
        GlyphSegment {
            image: line.body.clone(),
            column_span: (0, line.body.width() - 1),
            baseline_row: line.baseline_row,
            attached_diacritics: line.diacritics.clone(),
        }
    }

    /// Columns `start..=end` of the body with every diacritic overlapping
    /// them attached.
    pub fn from_columns(line: &TextLine, start: usize, end: usize) -> Result<Self> {
        let w = line.body.width();
        if start > end || end >= w {
            return Err(Error::argument(format!("columns {start}..={end} outside line of width {w}")));
        }
        let attached = line
            .diacritics
            .iter()
            .filter(|d| d.bbox.x <= end && d.bbox.right() > start)
            .cloned()
            .collect();
        Ok(GlyphSegment {
            image: Grid::from_fn(end - start + 1, line.body.height(), |x, y| *line.body.get(start + x, y)),
            column_span: (start, end),
            baseline_row: line.baseline_row,
            attached_diacritics: attached,
        })
    }
}

#[derive(Clone, Copy, Debug)]
struct Span {
    start: usize,
    end: usize,
    area: usize,
}

fn span_area(column_counts: &[usize], start: usize, end: usize) -> usize {
    column_counts[start..=end].iter().sum()
}

/// Splits the body at columns whose projection is at most `gap_threshold`.
/// Segments that are too narrow or too sparse merge into the nearer
/// neighbour (left on a tie) or are dropped when alone. Returned in
/// right-to-left reading order.
pub fn segment_glyphs(line: &TextLine, params: &SegmentParams) -> Vec<GlyphSegment> {
    let counts = projection(&line.body, Direction::Vertical);
    let mut spans: Vec<Span> = Vec::new();
    let mut x = 0;
    while x < counts.len() {
        if counts[x] <= params.gap_threshold {
            x += 1;
            continue;
        }
        let start = x;
        while x < counts.len() && counts[x] > params.gap_threshold {
            x += 1;
        }
        spans.push(Span {
            start,
            end: x - 1,
            area: span_area(&counts, start, x - 1),
        });
    }

    let too_small = |s: &Span| s.end - s.start + 1 < params.min_segment_width || s.area < params.min_segment_area;
    while let Some(i) = spans.iter().position(too_small) {
        let left_gap = (i > 0).then(|| spans[i].start - spans[i - 1].end);
        let right_gap = (i + 1 < spans.len()).then(|| spans[i + 1].start - spans[i].end);
        let target = match (left_gap, right_gap) {
            (None, None) => {
                spans.remove(i);
                continue;
            }
            (Some(_), None) => i - 1,
            (None, Some(_)) => i + 1,
            (Some(l), Some(r)) => {
                if l <= r {
                    i - 1
                } else {
                    i + 1
                }
            }
        };
        let (a, b) = (i.min(target), i.max(target));
        let merged = Span {
            start: spans[a].start,
            end: spans[b].end,
            area: span_area(&counts, spans[a].start, spans[b].end),
        };
        spans[a] = merged;
        spans.remove(b);
    }

    let mut attached: Vec<Vec<Diacritic>> = vec![Vec::new(); spans.len()];
    if !spans.is_empty() {
        for d in &line.diacritics {
            let (d0, d1) = (d.bbox.x, d.bbox.right() - 1);
            let overlap = |s: &Span| (s.end.min(d1) + 1).saturating_sub(s.start.max(d0));
            let distance = |s: &Span| s.start.saturating_sub(d1).max(d0.saturating_sub(s.end));
            let best = (0..spans.len())
                .min_by_key(|&i| (std::cmp::Reverse(overlap(&spans[i])), distance(&spans[i]), i))
                .expect("non-empty");
            attached[best].push(d.clone());
        }
    }

    let h = line.body.height();
    let mut segments: Vec<GlyphSegment> = spans
        .iter()
        .zip(attached)
        .map(|(s, diacritics)| GlyphSegment {
            image: Grid::from_fn(s.end - s.start + 1, h, |x, y| *line.body.get(s.start + x, y)),
            column_span: (s.start, s.end),
            baseline_row: line.baseline_row,
            attached_diacritics: diacritics,
        })
        .collect();
    segments.reverse();
    segments
}

/// Line image with the baseline drawn red and segment boundaries green.
pub fn debug_overlay(line: &TextLine, segments: &[GlyphSegment]) -> Grid<[u8; 3]> {
    let mut img = line.image.map(|&b| if b { [0u8, 0, 0] } else { [255, 255, 255] });
    for x in 0..img.width() {
        img.set(x, line.baseline_row, [220, 0, 0]);
    }
    for s in segments {
        for y in 0..img.height() {
            for x in [s.column_span.0, s.column_span.1] {
                if !line.image.get(x, y) {
                    img.set(x, y, [0, 180, 0]);
                }
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&str]) -> BinaryImage {
        Grid::from_fn(rows[0].len(), rows.len(), |x, y| rows[y].as_bytes()[x] == b'#')
    }

    #[test]
    fn height_identity_and_halving() {
        let img = Grid::from_fn(40, 26, |x, y| (x * 3 + y) as u8);
        assert_eq!(normalize_height(&img, 26), img);
        let big = Grid::new(100, 52, 200u8);
        let out = normalize_height(&big, 26);
        assert_eq!((out.width(), out.height()), (50, 26));
    }

    #[test]
    fn upsampled_solid_block_has_no_holes() {
        let block = Grid::new(7, 13, true);
        let out = normalize_height(&block, 26);
        assert_eq!((out.width(), out.height()), (14, 26));
        assert!(out.data().iter().all(|&b| b));
    }

    #[test]
    fn baseline_tie_prefers_lower_row() {
        let img = from_rows(&["....", "####", "....", "####", "#..."]);
        assert_eq!(detect_baseline(&img).unwrap(), 3);
        let single = from_rows(&["...", "###", "..."]);
        assert_eq!(detect_baseline(&single).unwrap(), 1);
        assert!(matches!(detect_baseline(&Grid::new(3, 3, false)), Err(Error::NoText)));
    }

    #[test]
    fn dots_above_and_below() {
        let img = from_rows(&[
            "..#....#..", // 0
            "..........", // 1
            "..........", // 2
            "..........", // 3
            "##########", // 4 baseline
            "..........", // 5
            "..........", // 6
            "..........", // 7
            "....#.....", // 8
        ]);
        let line = TextLine::from_image(img.clone(), 2).unwrap();
        assert_eq!(line.baseline_row, 4);
        let above = line.diacritics.iter().filter(|d| d.position == DiacriticPosition::Above).count();
        let below = line.diacritics.iter().filter(|d| d.position == DiacriticPosition::Below).count();
        assert_eq!((above, below), (2, 1));
        assert_eq!(line.body.count_true(), 10);
    }

    #[test]
    fn nothing_split_when_all_touch_band() {
        let img = from_rows(&["#...#", "#...#", "#####", "..#.."]);
        let line = TextLine::from_image(img.clone(), 2).unwrap();
        assert!(line.diacritics.is_empty());
        assert_eq!(line.body, img);
    }

    #[test]
    fn two_blobs_two_segments_right_to_left() {
        let img = from_rows(&["##...###", "##...###", "##...###"]);
        let line = TextLine::from_image(img, 2).unwrap();
        let segs = segment_glyphs(&line, &SegmentParams::default());
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].column_span, (5, 7));
        assert_eq!(segs[1].column_span, (0, 1));
    }

    #[test]
    fn empty_body_has_no_segments() {
        let img = from_rows(&["#..", "...", "...", "...", "...", "###"]);
        let line = TextLine::with_baseline(img, 5, 0);
        let mut empty = line.clone();
        empty.body = Grid::new(3, 6, false);
        empty.diacritics.clear();
        assert!(segment_glyphs(&empty, &SegmentParams::default()).is_empty());
    }

    #[test]
    fn satellite_merges_into_blob() {
        // 1-px wide satellite at column 6, two columns right of the blob
        let img = from_rows(&["####....", "####..#.", "####..#."]);
        let line = TextLine::from_image(img.clone(), 2).unwrap();
        let segs = segment_glyphs(&line, &SegmentParams::default());
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].column_span, (0, 6));
        assert_eq!(segs[0].image.count_true(), img.count_true());
    }

    #[test]
    fn lone_fragment_dropped() {
        let img = from_rows(&["#", "#"]);
        let line = TextLine::from_image(img, 2).unwrap();
        assert!(segment_glyphs(&line, &SegmentParams::default()).is_empty());
    }

    #[test]
    fn diacritic_attaches_by_overlap() {
        let img = from_rows(&[
            ".......##", // dot over the right blob
            ".........",
            ".........",
            ".........",
            "###...###",
            "###...###",
        ]);
        let line = TextLine::from_image(img, 1).unwrap();
        assert_eq!(line.diacritics.len(), 1);
        let segs = segment_glyphs(&line, &SegmentParams::default());
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].attached_diacritics.len(), 1);
        assert!(segs[1].attached_diacritics.is_empty());
    }
}
