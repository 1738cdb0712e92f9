//! Synthetic caption clips and glyph lines with exact ground truth.

pub mod corpus;
pub mod font;
pub mod noise;
pub mod render;
pub mod scene;

pub use font::{all_classes, alphabet, class_label, forms_of, glyph_template, shape_word, Form, GlyphTemplate};
pub use render::{coverage_to_gray, render_line, LineStyle, PlacedGlyph, RenderedLine};
pub use corpus::{drill_words, recognition_corpus, render_region, GlyphLine, RecognitionCorpus, RecognitionSpec, WORDS};
pub use scene::{generate_clip, Clip, SyntheticSpec};
