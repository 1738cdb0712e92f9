//! Detects and reads the caption of a synthetic clip.

use vtext::config::PipelineConfig;
use vtext::dataset::{band_dataset, clip_windows, glyph_dataset};
use vtext::localizer::mlp_train;
use vtext::mfi::integrate_frames;
use vtext::pipeline::{crop_box, detect_window, recognize_region, train_recognizer};
use vtext::synth::SyntheticSpec;

fn main() -> vtext::Result<()> {
    let cfg = PipelineConfig::default();
    let train = SyntheticSpec { clips: 30, seed: 2, glyph_renders: 3, ..Default::default() };
    let model = mlp_train(&band_dataset(&train, &cfg)?, &cfg.localizer.train_params(7))?;
    let base = train_recognizer(&glyph_dataset(&train, &[], &cfg)?, &cfg)?;

    let test = SyntheticSpec { clips: 3, seed: 9, ..Default::default() };
    for i in 0..test.clips {
        let cw = clip_windows(&test, i, &cfg)?;
        let w = &cw.windows[0];
        let det = detect_window(w, &model, &cfg)?;
        let integrated = integrate_frames(w);
        println!("clip {i}: truth {:?} {:?}", cw.clip.truth, cw.clip.caption.text);
        for b in &det.boxes {
            let (r, _) = recognize_region(&crop_box(&integrated, b.rect(), &cfg)?, &base, &cfg, None)?;
            println!("  box {:?} score {:.2}: {:?}", b.rect(), b.score, r.text);
        }
    }
    Ok(())
}
