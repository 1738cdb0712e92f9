//! Builds a prototype base from clean renders and reads degraded lines
//! with the fuzzy k-NN classifier.

use vtext::config::PipelineConfig;
use vtext::evalkit::{char_word_rates, score_recognition, to_f64};
use vtext::pipeline::{glyph_rows, recognize_lines, train_recognizer};
use vtext::synth::{recognition_corpus, RecognitionSpec};

fn main() -> vtext::Result<()> {
    let cfg = PipelineConfig::default();
    let spec = RecognitionSpec { train_renders: 8, test_renders: 1, ..Default::default() };
    let corpus = recognition_corpus(&spec)?;
    let base = train_recognizer(&glyph_rows(&corpus.train, &cfg)?, &cfg)?;
    println!("{} prototypes over {} classes", base.len(), base.classes.len());

    let predicted = recognize_lines(&corpus.test, &base, &cfg)?;
    let truth: Vec<String> = corpus.test.iter().map(|l| l.rendered.text.clone()).collect();
    for (p, t) in predicted.iter().zip(&truth).rev().take(5) {
        println!("{t} -> {p}");
    }
    let (cr, wr) = char_word_rates(&score_recognition(&predicted, &truth)?);
    println!("CR {:.2}%  WR {:.2}%", cr.map_or(0.0, to_f64), wr.map_or(0.0, to_f64));
    Ok(())
}
