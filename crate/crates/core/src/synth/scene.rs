//! Caption clips: a static caption over a procedurally moving background.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corpus::WORDS;
use super::noise::{blur_rgb, salt_pepper};
use super::render::{render_line, LineStyle, RenderedLine};
use crate::error::{Error, Result};
use crate::pixelcore::{Grid, Rect, RealImage, RgbFrame};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    /// Letters captions may use; empty means the whole alphabet, i.e. the
    /// built-in word list unfiltered.
    pub alphabet: String,
    pub clips: usize,
    pub frames_per_clip: usize,
    pub width: usize,
    pub height: usize,
    /// Caption font sizes are drawn uniformly from this range.
    pub font_px: (f64, f64),
    pub pen: (f64, f64),
    /// Caption word count range, inclusive.
    pub words: (usize, usize),
    /// Fixed caption text; when set, replaces the random words.
    pub caption: Option<String>,
    /// Fixed caption position (left, top); random when unset.
    pub caption_at: Option<(usize, usize)>,
    pub salt_pepper: f64,
    pub blur_sigma: f64,
    /// Background blob speed in pixels per frame.
    pub motion: f64,
    pub blobs: usize,
    /// Static non-text rectangles per clip, at most.
    pub clutter: usize,
    /// Random-style renders of every drill and lexicon line added to the
    /// glyph dataset next to the clean captions.
    pub glyph_renders: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            alphabet: String::new(),
            clips: 50,
            frames_per_clip: 5,
            width: 320,
            height: 240,
            font_px: (22.0, 30.0),
            pen: (2.0, 2.6),
            words: (1, 3),
            caption: None,
            caption_at: None,
            salt_pepper: 0.02,
            blur_sigma: 0.5,
            motion: 10.0,
            blobs: 6,
            clutter: 2,
            glyph_renders: 6,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::argument(m.to_string()));
        if !(0.0..1.0).contains(&self.salt_pepper) {
            return bad("noise fraction must lie in [0, 1)");
        }
        if self.blur_sigma < 0.0 || self.motion < 0.0 {
            return bad("blur sigma and motion must be non-negative");
        }
        if self.frames_per_clip == 0 || self.width < 32 || self.height < 32 {
            return bad("need at least one frame of at least 32x32");
        }
        if !(self.font_px.0 >= 8.0 && self.font_px.0 <= self.font_px.1 && self.pen.0 > 0.0 && self.pen.0 <= self.pen.1) {
            return bad("font and pen ranges must be ordered, fonts at least 8 px");
        }
        if self.words.0 == 0 || self.words.0 > self.words.1 {
            return bad("word count range must be ordered and start at 1");
        }
        if self.caption.is_none() && self.vocabulary().is_empty() {
            return bad("no word of the list can be written with the given alphabet");
        }
        Ok(())
    }

    /// Words of the built-in list writable with `alphabet`.
    pub fn vocabulary(&self) -> Vec<&'static str> {
        WORDS
            .iter()
            .copied()
            .filter(|w| self.alphabet.is_empty() || w.chars().all(|c| self.alphabet.contains(c)))
            .collect()
    }
}

/// One generated clip with its exact caption geometry.
#[derive(Clone, Debug)]
pub struct Clip {
    pub frames: Vec<RgbFrame>,
    pub caption: RenderedLine,
    pub style: LineStyle,
    /// Tight box of the caption ink in frame coordinates.
    pub truth: Rect,
    /// Where the caption rendering's top-left corner sits in the frame.
    pub origin: (usize, usize),
}

#[derive(Clone, Copy, Debug)]
struct Blob {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    radius: f64,
    color: [f64; 3],
}

fn random_color(rng: &mut impl Rng, lo: f64, hi: f64) -> [f64; 3] {
    [0; 3].map(|_| rng.gen_range(lo..hi))
}

fn mix(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i] + (b[i] - a[i]) * t)
}

/// Generates clip `index` of the dataset described by `spec`. Each clip
/// draws from its own stream seeded by `(seed, index)`.
pub fn generate_clip(spec: &SyntheticSpec, index: usize) -> Result<Clip> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64 + 1);
    let (w, h) = (spec.width, spec.height);

    let vocab = spec.vocabulary();
    let text = match &spec.caption {
        Some(t) => t.clone(),
        None => {
            let n = rng.gen_range(spec.words.0..=spec.words.1);
            (0..n).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect::<Vec<_>>().join(" ")
        }
    };
    let mut style = LineStyle {
        font_px: rng.gen_range(spec.font_px.0..=spec.font_px.1),
        pen: rng.gen_range(spec.pen.0..=spec.pen.1),
    };
    let mut caption = render_line(&text, &style)?;
    // shrink until the caption fits with a margin
    while caption.coverage.width() + 8 > w || caption.coverage.height() + 8 > h {
        style.font_px *= 0.9;
        if style.font_px < 8.0 {
            return Err(Error::argument(format!("caption {text:?} does not fit a {w}x{h} frame")));
        }
        caption = render_line(&text, &style)?;
    }
    let ink = caption
        .coverage
        .map(|&c| c >= 0.5)
        .bounding_box()
        .ok_or_else(|| Error::argument("caption rendered without ink"))?;
    let (cw, ch) = (caption.coverage.width(), caption.coverage.height());
    let origin = match spec.caption_at {
        Some((x, y)) if x + cw <= w && y + ch <= h => (x, y),
        Some(_) => return Err(Error::argument("caption position puts it outside the frame")),
        None => (rng.gen_range(4..=w - cw - 4), rng.gen_range(4..=h - ch - 4)),
    };
    let truth = Rect::new(origin.0 + ink.x, origin.1 + ink.y, ink.width, ink.height);

    let top = random_color(&mut rng, 20.0, 200.0);
    let bottom = random_color(&mut rng, 20.0, 200.0);
    let tilt = rng.gen_range(-0.3..0.3);
    let blobs: Vec<Blob> = (0..spec.blobs)
        .map(|_| {
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let speed = spec.motion * rng.gen_range(0.7..1.3);
            Blob {
                x: rng.gen_range(0.0..w as f64),
                y: rng.gen_range(0.0..h as f64),
                vx: speed * angle.cos(),
                vy: speed * angle.sin(),
                radius: rng.gen_range(6.0..16.0),
                color: random_color(&mut rng, 0.0, 255.0),
            }
        })
        .collect();
    let clutter: Vec<(Rect, [f64; 3])> = (0..rng.gen_range(0..=spec.clutter))
        .map(|_| {
            let (rw, rh) = (rng.gen_range(16..60), rng.gen_range(10..40));
            let r = Rect::new(rng.gen_range(0..w - rw), rng.gen_range(0..h - rh), rw, rh);
            (r, random_color(&mut rng, 0.0, 255.0))
        })
        .collect();
    let text_color = random_color(&mut rng, 225.0, 255.0);
    let shadow = random_color(&mut rng, 0.0, 30.0);
    let cov: &RealImage = &caption.coverage;

    let mut frames = Vec::with_capacity(spec.frames_per_clip);
    for t in 0..spec.frames_per_clip {
        let mut px = Grid::from_fn(w, h, |x, y| {
            let s = (y as f64 / h as f64 + tilt * x as f64 / w as f64).clamp(0.0, 1.0);
            let mut c = mix(top, bottom, s);
            for b in &blobs {
                let (bx, by) = (b.x + b.vx * t as f64, b.y + b.vy * t as f64);
                let d = ((x as f64 - bx).powi(2) + (y as f64 - by).powi(2)).sqrt();
                let a = ((b.radius - d) / 4.0).clamp(0.0, 1.0) * 0.85;
                c = mix(c, b.color, a);
            }
            for (r, color) in &clutter {
                let inside = x >= r.x && x < r.right() && y >= r.y && y < r.bottom();
                let edge = x == r.x || x + 1 == r.right() || y == r.y || y + 1 == r.bottom();
                if inside {
                    c = if edge { mix(*color, [255.0 - color[0]; 3], 0.8) } else { *color };
                }
            }
            c
        });
        for y in 0..ch {
            for x in 0..cw {
                let (fx, fy) = (origin.0 + x, origin.1 + y);
                // drop shadow one pixel down and right
                let sh = if x > 0 && y > 0 { *cov.get(x - 1, y - 1) } else { 0.0 };
                if sh > 0.0 {
                    let c = *px.get(fx, fy);
                    px.set(fx, fy, mix(c, shadow, sh));
                }
            }
        }
        for y in 0..ch {
            for x in 0..cw {
                let a = *cov.get(x, y);
                if a > 0.0 {
                    let (fx, fy) = (origin.0 + x, origin.1 + y);
                    let c = *px.get(fx, fy);
                    px.set(fx, fy, mix(c, text_color, a));
                }
            }
        }
        let mut pixels = px.map(|c| c.map(|v| v.round().clamp(0.0, 255.0) as u8));
        salt_pepper(&mut pixels, spec.salt_pepper, [0u8; 3], [255u8; 3], &mut rng);
        let pixels = blur_rgb(&pixels, spec.blur_sigma);
        frames.push(RgbFrame::new(pixels, t));
    }
    Ok(Clip {
        frames,
        caption,
        style,
        truth,
        origin,
    })
}
