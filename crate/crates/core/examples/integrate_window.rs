//! Median-integrates a window of frames and lists the candidate bands
//! found in its edge profile.

use vtext::config::PipelineConfig;
use vtext::mfi::{candidate_bands, integrate_frames, FrameWindow};
use vtext::pixelcore::{rgb_to_gray, sobel_magnitude};
use vtext::synth::{generate_clip, SyntheticSpec};

fn mean(img: &vtext::pixelcore::GrayImage) -> f64 {
    img.data().iter().map(|&v| v as f64).sum::<f64>() / img.data().len() as f64
}

fn main() -> vtext::Result<()> {
    let cfg = PipelineConfig::default();
    let clip = generate_clip(&SyntheticSpec::default(), 3)?;
    let window = FrameWindow::new(clip.frames.clone())?;
    let integrated = integrate_frames(&window);

    // moving background edges fade in the integrated frame
    let single = mean(&sobel_magnitude(&rgb_to_gray(&clip.frames[0]))?);
    let merged = mean(&sobel_magnitude(&rgb_to_gray(&integrated))?);
    println!("mean edge strength: single frame {single:.2}, integrated {merged:.2}");

    let bands = candidate_bands(&integrated, &cfg.mfi.band_params())?;
    println!("truth box {:?}", clip.truth);
    for b in &bands.row_bands {
        println!("row band {}..={}", b.start, b.end);
    }
    for b in &bands.col_bands {
        println!("column band {}..={}", b.start, b.end);
    }
    Ok(())
}
