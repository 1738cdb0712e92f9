//! Generates one caption clip and writes its frames as PNG files.
//!
//! cargo run --example synthesize_clip -- [OUT_DIR]

use std::path::PathBuf;

use vtext::pixelcore::io::write_rgb;
use vtext::synth::{generate_clip, SyntheticSpec};

fn main() -> vtext::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("vtext_clip"));
    std::fs::create_dir_all(&out).expect("create output directory");
    let spec = SyntheticSpec {
        clips: 1,
        caption: Some("سلام العالم".into()),
        ..Default::default()
    };
    let clip = generate_clip(&spec, 0)?;
    for (i, f) in clip.frames.iter().enumerate() {
        write_rgb(&out.join(format!("frame_{:06}.png", i + 1)), &f.pixels)?;
    }
    println!("caption {:?} at {:?}, font {:.1}px", clip.caption.text, clip.truth, clip.style.font_px);
    println!("{} frames written to {}", clip.frames.len(), out.display());
    Ok(())
}
