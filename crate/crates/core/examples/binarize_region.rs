//! Fuzzy C-means binarization of a noisy caption region.
//!
//! cargo run --example binarize_region -- [OUT_DIR]

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vtext::binarizer::{binarize_region_detailed, otsu_threshold, FcmParams};
use vtext::pixelcore::io::{write_binary, write_gray};
use vtext::synth::corpus::degrade;
use vtext::synth::{render_region, LineStyle};

fn main() -> vtext::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let line = render_region("بحر ونور", &LineStyle::default(), 230.0, 60.0, 4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noisy = degrade(&line.image, 0.03, 0.6, &mut rng);

    let b = binarize_region_detailed(&noisy, &FcmParams::default())?;
    println!("method {:?}, {} text pixels of {}", b.method, b.image.count_true(), b.image.data().len());
    println!("global Otsu threshold for comparison: {:?}", otsu_threshold(&noisy));
    write_gray(&out.join("region.png"), &noisy)?;
    write_binary(&out.join("region_binary.png"), &b.image)?;
    println!("images written to {}", out.display());
    Ok(())
}
