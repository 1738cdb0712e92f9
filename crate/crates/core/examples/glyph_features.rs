//! Segments a caption line into glyphs and prints their feature vectors.

use vtext::config::PipelineConfig;
use vtext::glyphfeat::extract_features;
use vtext::pipeline::analyze_line;
use vtext::synth::{render_region, LineStyle};

fn main() -> vtext::Result<()> {
    let cfg = PipelineConfig::default();
    let line = render_region("نهر", &LineStyle::default(), 235.0, 45.0, 3)?;
    let a = analyze_line(&line.image, &cfg)?;
    println!("baseline row {}, {} diacritics, {} segments", a.line.baseline_row, a.line.diacritics.len(), a.segments.len());
    for (i, seg) in a.segments.iter().enumerate() {
        let f = extract_features(seg)?;
        let head: Vec<String> = f.0[..6].iter().map(|v| format!("{v:.2}")).collect();
        println!(
            "segment {i}: columns {:?}, {} diacritics, features [{} ...]",
            seg.column_span,
            seg.attached_diacritics.len(),
            head.join(", ")
        );
    }
    Ok(())
}
