//! Anti-aliased rasterisation of stroke templates into coverage maps.

use serde::{Deserialize, Serialize};

use super::font::{glyph_template, shape_word, GlyphTemplate, BASELINE, DOT_RADIUS, LINE_UNITS};
use crate::error::{Error, Result};
use crate::pixelcore::{Grid, RealImage};

/// Visible gap between letters of a word, in line units.
pub const LETTER_GAP: f64 = 2.8;
pub const WORD_GAP: f64 = 6.0;
const MARGIN: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineStyle {
    /// Pixel height of the full 26-unit line.
    pub font_px: f64,
    /// Pen width in line units.
    pub pen: f64,
}

impl Default for LineStyle {
    fn default() -> Self {
        LineStyle {
            font_px: 26.0,
            pen: 2.2,
        }
    }
}

/// Placement of one glyph in a rendered line.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedGlyph {
    pub label: String,
    pub code: char,
    /// Pixel columns covered by the glyph's ink, inclusive.
    pub columns: (usize, usize),
    /// Index of the word the glyph belongs to.
    pub word: usize,
}

#[derive(Clone, Debug)]
pub struct RenderedLine {
    pub text: String,
    /// Ink coverage in `[0, 1]`.
    pub coverage: RealImage,
    pub baseline_px: f64,
    /// Glyphs in reading order (right to left).
    pub glyphs: Vec<PlacedGlyph>,
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// Raises coverage to `clamp(radius + 0.5 - d)` around a segment, with
/// distances in pixels.
fn stamp_segment(cov: &mut RealImage, a: (f64, f64), b: (f64, f64), radius: f64) {
    let reach = radius + 1.0;
    let x0 = (a.0.min(b.0) - reach).floor().max(0.0) as usize;
    let y0 = (a.1.min(b.1) - reach).floor().max(0.0) as usize;
    let x1 = ((a.0.max(b.0) + reach).ceil().max(0.0) as usize).min(cov.width());
    let y1 = ((a.1.max(b.1) + reach).ceil().max(0.0) as usize).min(cov.height());
    for y in y0..y1 {
        for x in x0..x1 {
            let d = segment_distance((x as f64 + 0.5, y as f64 + 0.5), a, b);
            let c = (radius + 0.5 - d).clamp(0.0, 1.0);
            if c > *cov.get(x, y) {
                cov.set(x, y, c);
            }
        }
    }
}

/// Draws `template` with its box's left edge at pixel `left`.
pub fn draw_glyph(cov: &mut RealImage, template: &GlyphTemplate, left: f64, top: f64, scale: f64, pen: f64) {
    let map = |(x, y): (f64, f64)| (left + x * scale, top + y * scale);
    for stroke in &template.strokes {
        for w in stroke.windows(2) {
            stamp_segment(cov, map(w[0]), map(w[1]), pen * scale / 2.0);
        }
    }
    for &d in &template.dots {
        let c = map(d);
        stamp_segment(cov, c, c, DOT_RADIUS * scale);
    }
}

/// Renders words separated by single spaces, right to left.
pub fn render_line(text: &str, style: &LineStyle) -> Result<RenderedLine> {
    if !(style.font_px >= 8.0 && style.pen > 0.0) {
        return Err(Error::argument("font must be at least 8 px with a positive pen"));
    }
    let words: Vec<Vec<GlyphTemplate>> = text
        .split_whitespace()
        .map(|w| {
            shape_word(w)?
                .into_iter()
                .map(|(c, f)| glyph_template(c, f, style.pen))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if words.is_empty() {
        return Err(Error::argument("empty caption text"));
    }
    let scale = style.font_px / LINE_UNITS;
    let ink = |t: &GlyphTemplate| t.width + style.pen;
    let mut units = 2.0 * MARGIN;
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            units += WORD_GAP;
        }
        units += w.iter().map(ink).sum::<f64>() + LETTER_GAP * (w.len() - 1) as f64;
    }
    let width = (units * scale).ceil() as usize;
    let height = style.font_px.round() as usize;
    let mut cov = Grid::new(width, height, 0.0);
    let mut glyphs = Vec::new();
    // right edge of the next glyph's ink, in units
    let mut cursor = units - MARGIN;
    for (wi, word) in words.iter().enumerate() {
        if wi > 0 {
            cursor -= WORD_GAP;
        }
        for (gi, t) in word.iter().enumerate() {
            if gi > 0 {
                cursor -= LETTER_GAP;
            }
            let left_ink = cursor - ink(t);
            let box_left = left_ink + style.pen / 2.0;
            draw_glyph(&mut cov, t, box_left * scale, 0.0, scale, style.pen);
            let c0 = (left_ink * scale).floor().max(0.0) as usize;
            let c1 = ((cursor * scale).ceil() as usize).min(width).saturating_sub(1);
            glyphs.push(PlacedGlyph {
                label: t.label(),
                code: t.code,
                columns: (c0, c1),
                word: wi,
            });
            cursor = left_ink;
        }
    }
    Ok(RenderedLine {
        text: words
            .iter()
            .map(|w| w.iter().map(|t| t.code).collect::<String>())
            .collect::<Vec<_>>()
            .join(" "),
        coverage: cov,
        baseline_px: BASELINE * scale,
        glyphs,
    })
}

/// Blends text of intensity `fg` over `bg` by coverage.
pub fn coverage_to_gray(cov: &RealImage, fg: f64, bg: f64) -> crate::pixelcore::GrayImage {
    cov.map(|&c| (bg + (fg - bg) * c).round().clamp(0.0, 255.0) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glyph_columns_disjoint_and_ordered() {
        let line = render_line("كتب الباب", &LineStyle::default()).unwrap();
        assert_eq!(line.text, "كتب الباب");
        assert_eq!(line.glyphs.len(), 8);
        for w in line.glyphs.windows(2) {
            assert!(w[1].columns.1 < w[0].columns.0);
        }
        assert_eq!(line.coverage.height(), 26);
    }

    #[test]
    fn letters_separated_by_empty_columns() {
        let line = render_line("سلام", &LineStyle { font_px: 30.0, pen: 2.4 }).unwrap();
        let ink = line.coverage.map(|&c| c >= 0.5);
        let cols = crate::pixelcore::projection(&ink, crate::pixelcore::Direction::Vertical);
        for w in line.glyphs.windows(2) {
            let gap = w[1].columns.1 + 1..w[0].columns.0;
            assert!(gap.clone().any(|x| cols[x] == 0), "{gap:?}");
        }
    }

    #[test]
    fn rejects_unknown_letters() {
        assert!(render_line("abc", &LineStyle::default()).is_err());
        assert!(render_line("   ", &LineStyle::default()).is_err());
    }
}
