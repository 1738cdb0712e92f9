//! Builds a Gabor bank matched to the stroke width of a region and
//! enhances it.

use vtext::pixelcore::GrayImage;
use vtext::synth::{render_region, LineStyle};
use vtext::textline::{default_bank, estimate_stroke_width, gabor_enhance, gabor_kernel};

fn contrast(img: &GrayImage) -> f64 {
    let n = img.data().len() as f64;
    let m = img.data().iter().map(|&v| v as f64).sum::<f64>() / n;
    (img.data().iter().map(|&v| (v as f64 - m).powi(2)).sum::<f64>() / n).sqrt()
}

fn main() -> vtext::Result<()> {
    let line = render_region("شمس", &LineStyle { font_px: 36.0, pen: 2.4 }, 220.0, 80.0, 3)?;
    let stroke = estimate_stroke_width(&line.image);
    let bank = default_bank(&line.image);
    println!("stroke width {stroke}px, {} filters", bank.len());
    for p in &bank {
        let k = gabor_kernel(p)?;
        let sum: f64 = k.data().iter().sum();
        println!("theta {:.2} lambda {:.1}: {}x{} kernel, sum {sum:.2e}", p.theta, p.lambda, k.width(), k.height());
    }
    let enhanced = gabor_enhance(&line.image, &bank)?;
    println!("contrast {:.1} -> {:.1}", contrast(&line.image), contrast(&enhanced));
    Ok(())
}
