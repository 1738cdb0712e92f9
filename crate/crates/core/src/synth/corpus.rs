//! Word lists and rendered, optionally degraded, caption lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::font::{alphabet, forms_of, Form};
use super::noise::{blur_gray, salt_pepper};
use super::render::{coverage_to_gray, render_line, LineStyle, RenderedLine};
use crate::error::{Error, Result};
use crate::pixelcore::{GrayImage, Grid};

/// Lexicon of caption words used by the generators.
pub const WORDS: &[&str] = &[
    "كتب", "الباب", "سلام", "قلم", "شمس", "بحر", "جبل", "نور", "ورد", "عين", "خبز", "ذهب", "زيت", "طريق", "ظل",
    "غرب", "فجر", "مصر", "تونس", "وطن", "صوت", "نهر", "ثلج", "ليل", "يوم", "قمر", "ضيف", "حلم", "طفل", "ظهر",
    "غيم", "فيل", "شجر", "ثمر", "صبح", "عمل", "بيت", "جديد", "كبير", "صغير", "العالم", "الطقس", "وزير", "مجلس",
    "شعب", "سوق", "نفط", "غاز", "مطر",
];

/// Short words that together show every glyph class: a joining letter
/// tripled gives its initial, medial and final forms and alone its
/// isolated form; a non-joining letter appears alone and after ب.
pub fn drill_words() -> Vec<String> {
    alphabet()
        .into_iter()
        .flat_map(|c| {
            if forms_of(c).contains(&Form::Medial) {
                vec![c.to_string().repeat(3), c.to_string()]
            } else {
                vec![c.to_string(), format!("ب{c}")]
            }
        })
        .collect()
}

/// A rendered line on a flat background with a border of `pad` pixels.
#[derive(Clone, Debug)]
pub struct GlyphLine {
    pub rendered: RenderedLine,
    pub image: GrayImage,
    pub pad: usize,
}

pub fn render_region(text: &str, style: &LineStyle, fg: f64, bg: f64, pad: usize) -> Result<GlyphLine> {
    let rendered = render_line(text, style)?;
    let core = coverage_to_gray(&rendered.coverage, fg, bg);
    let bgv = bg.round().clamp(0.0, 255.0) as u8;
    let image = Grid::from_fn(core.width() + 2 * pad, core.height() + 2 * pad, |x, y| {
        if x < pad || y < pad || x >= core.width() + pad || y >= core.height() + pad {
            bgv
        } else {
            *core.get(x - pad, y - pad)
        }
    });
    Ok(GlyphLine { rendered, image, pad })
}

/// Salt-and-pepper noise on a `fraction` of pixels, then Gaussian blur.
pub fn degrade(img: &GrayImage, fraction: f64, blur_sigma: f64, rng: &mut impl Rng) -> GrayImage {
    let mut out = img.clone();
    salt_pepper(&mut out, fraction, 0, 255, rng);
    blur_gray(&out, blur_sigma)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecognitionSpec {
    /// Clean renders of every line, each in a random style.
    pub train_renders: usize,
    /// Degraded renders of every line, each in a random style.
    pub test_renders: usize,
    /// Font sizes are drawn uniformly from `[font_px.0, font_px.1)`.
    pub font_px: (f64, f64),
    /// Pen widths in line units, drawn uniformly.
    pub pen: (f64, f64),
    pub words_per_line: usize,
    pub salt_pepper: f64,
    pub blur_sigma: f64,
    pub foreground: f64,
    pub background: f64,
    pub pad: usize,
    pub seed: u64,
}

impl Default for RecognitionSpec {
    fn default() -> Self {
        RecognitionSpec {
            train_renders: 54,
            test_renders: 3,
            font_px: (24.0, 40.0),
            pen: (1.9, 2.7),
            words_per_line: 2,
            salt_pepper: 0.02,
            blur_sigma: 0.5,
            foreground: 235.0,
            background: 45.0,
            pad: 3,
            seed: 1,
        }
    }
}

impl RecognitionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.salt_pepper) {
            return Err(Error::argument(format!("noise fraction {} outside [0, 1)", self.salt_pepper)));
        }
        if self.train_renders == 0 || self.test_renders == 0 || self.words_per_line == 0 {
            return Err(Error::argument("need training and test renders and at least one word per line"));
        }
        if !(self.font_px.0 >= 8.0 && self.font_px.0 < self.font_px.1 && self.pen.0 > 0.0 && self.pen.0 < self.pen.1) {
            return Err(Error::argument("font and pen ranges must be non-empty, fonts at least 8 px"));
        }
        Ok(())
    }

    /// Line texts: each drill word on its own line, then the lexicon
    /// grouped `words_per_line` at a time.
    pub fn line_texts(&self) -> Vec<String> {
        let mut lines = drill_words();
        lines.extend(WORDS.chunks(self.words_per_line).map(|c| c.join(" ")));
        lines
    }

    fn style(&self, rng: &mut impl Rng) -> LineStyle {
        LineStyle {
            font_px: rng.gen_range(self.font_px.0..self.font_px.1),
            pen: rng.gen_range(self.pen.0..self.pen.1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecognitionCorpus {
    pub train: Vec<GlyphLine>,
    pub test: Vec<GlyphLine>,
}

pub fn recognition_corpus(spec: &RecognitionSpec) -> Result<RecognitionCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let texts = spec.line_texts();
    let mut train = Vec::with_capacity(texts.len() * spec.train_renders);
    for text in &texts {
        for _ in 0..spec.train_renders {
            let style = spec.style(&mut rng);
            train.push(render_region(text, &style, spec.foreground, spec.background, spec.pad)?);
        }
    }
    let mut test = Vec::with_capacity(texts.len() * spec.test_renders);
    for _ in 0..spec.test_renders {
        for text in &texts {
            let style = spec.style(&mut rng);
            let mut line = render_region(text, &style, spec.foreground, spec.background, spec.pad)?;
            line.image = degrade(&line.image, spec.salt_pepper, spec.blur_sigma, &mut rng);
            test.push(line);
        }
    }
    Ok(RecognitionCorpus { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{all_classes, shape_word};
    use std::collections::BTreeSet;

    #[test]
    fn drills_cover_every_class() {
        let mut seen = BTreeSet::new();
        for w in drill_words() {
            for (c, f) in shape_word(&w).unwrap() {
                seen.insert(crate::synth::class_label(c, f));
            }
        }
        assert_eq!(seen, all_classes().into_iter().collect());
    }

    #[test]
    fn lexicon_renders() {
        for w in WORDS {
            render_line(w, &LineStyle::default()).unwrap();
        }
    }

    #[test]
    fn region_has_flat_border() {
        let line = render_region("قلم", &LineStyle::default(), 230.0, 40.0, 3).unwrap();
        assert_eq!(line.image.height(), 32);
        assert!((0..line.image.width()).all(|x| *line.image.get(x, 0) == 40));
    }

    #[test]
    fn corpus_is_deterministic() {
        let spec = RecognitionSpec {
            train_renders: 1,
            ..Default::default()
        };
        let a = recognition_corpus(&spec).unwrap();
        let b = recognition_corpus(&spec).unwrap();
        assert_eq!(a.test.len(), spec.line_texts().len() * spec.test_renders);
        assert!(a.test.iter().zip(&b.test).all(|(x, y)| x.image == y.image));
    }
}
