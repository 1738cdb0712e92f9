//! Trains the band classifier on synthetic clips and scores detection on
//! held-out clips.

use vtext::config::PipelineConfig;
use vtext::dataset::{band_dataset, clip_windows, frame_name};
use vtext::evalkit::{evaluate, AnnotatedBox, FrameAnnotation};
use vtext::localizer::mlp_train_with_report;
use vtext::pipeline::detect_window;
use vtext::synth::SyntheticSpec;

fn main() -> vtext::Result<()> {
    let cfg = PipelineConfig::default();
    let train = SyntheticSpec { clips: 40, seed: 2, ..Default::default() };
    let test = SyntheticSpec { clips: 15, seed: 1, ..Default::default() };

    let rows = band_dataset(&train, &cfg)?;
    let (model, report) = mlp_train_with_report(&rows, &cfg.localizer.train_params(7))?;
    println!("{} band rows, training accuracy {:.3}", rows.len(), report.accuracy);

    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    for i in 0..test.clips {
        let cw = clip_windows(&test, i, &cfg)?;
        for w in &cw.windows {
            let key = frame_name(i, w.representative().frame_index).to_string_lossy().replace('\\', "/");
            let det = detect_window(w, &model, &cfg)?;
            pred.push(FrameAnnotation {
                frame: key.clone(),
                boxes: det.boxes.iter().map(|b| AnnotatedBox::new(b.rect(), "")).collect(),
            });
            truth.push(FrameAnnotation {
                frame: key,
                boxes: vec![AnnotatedBox::new(cw.clip.truth, "")],
            });
        }
    }
    let r = evaluate(&pred, &truth, 0.5);
    println!("recall {:?} precision {:?}", r.recall, r.precision);
    Ok(())
}
