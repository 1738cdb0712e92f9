//! Degradations applied to rendered frames and lines.

use rand::Rng;

use crate::pixelcore::{GrayImage, Grid};

/// Sets a `fraction` of pixels to 0 or 255 with equal probability.
pub fn salt_pepper<T: Clone>(img: &mut Grid<T>, fraction: f64, black: T, white: T, rng: &mut impl Rng) {
    if fraction <= 0.0 {
        return;
    }
    for v in img.data_mut() {
        if rng.gen::<f64>() < fraction {
            *v = if rng.gen::<bool>() { white.clone() } else { black.clone() };
        }
    }
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Separable Gaussian blur on one channel, edge-replicated.
pub fn blur_channel(img: &Grid<f64>, sigma: f64) -> Grid<f64> {
    if sigma <= 0.0 {
        return img.clone();
    }
    let taps = gaussian_taps(sigma);
    let r = (taps.len() / 2) as isize;
    let pass = |src: &Grid<f64>, horizontal: bool| {
        Grid::from_fn(src.width(), src.height(), |x, y| {
            taps.iter()
                .enumerate()
                .map(|(i, t)| {
                    let o = i as isize - r;
                    let (sx, sy) = if horizontal {
                        (x as isize + o, y as isize)
                    } else {
                        (x as isize, y as isize + o)
                    };
                    t * src.get_clamped(sx, sy)
                })
                .sum()
        })
    };
    pass(&pass(img, true), false)
}

pub fn blur_gray(img: &GrayImage, sigma: f64) -> GrayImage {
    let out = blur_channel(&img.map(|&v| v as f64), sigma);
    out.map(|&v| v.round().clamp(0.0, 255.0) as u8)
}

pub fn blur_rgb(img: &Grid<[u8; 3]>, sigma: f64) -> Grid<[u8; 3]> {
    if sigma <= 0.0 {
        return img.clone();
    }
    let channels: Vec<Grid<f64>> = (0..3).map(|c| blur_channel(&img.map(|p| p[c] as f64), sigma)).collect();
    Grid::from_fn(img.width(), img.height(), |x, y| {
        [0, 1, 2].map(|c| channels[c].get(x, y).round().clamp(0.0, 255.0) as u8)
    })
}
