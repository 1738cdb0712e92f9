use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::binarizer::otsu_threshold;
use crate::error::{Error, Result};
use crate::pixelcore::{GrayImage, Grid, RealImage};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaborParams {
    /// Wavelength of the carrier, pixels.
    pub lambda: f64,
    /// Orientation, radians.
    pub theta: f64,
    /// Phase offset, radians.
    pub phi: f64,
    /// Spatial aspect ratio.
    pub gamma: f64,
    /// Standard deviation of the Gaussian envelope, pixels.
    pub sigma: f64,
    pub kernel_radius: usize,
}

impl GaborParams {
    /// Conventional bank member for strokes about `lambda / 2` pixels wide.
    pub fn for_wavelength(lambda: f64, theta: f64) -> Self {
        let sigma = 0.56 * lambda;
        GaborParams {
            lambda,
            theta,
            phi: 0.0,
            gamma: 0.5,
            sigma,
            kernel_radius: (2.0 * sigma).ceil() as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("sigma", self.sigma), ("gamma", self.gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::argument(format!("gabor {name} = {v} must be positive")));
            }
        }
        if !self.theta.is_finite() || !self.phi.is_finite() {
            return Err(Error::argument("gabor angles must be finite"));
        }
        Ok(())
    }

    /// Filter value at offset `(x, y)` from the kernel center.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (sin, cos) = self.theta.sin_cos();
        let xr = x * cos + y * sin;
        let yr = -x * sin + y * cos;
        let envelope = (-(xr * xr + self.gamma * self.gamma * yr * yr) / (2.0 * self.sigma * self.sigma)).exp();
        envelope * (2.0 * PI * xr / self.lambda + self.phi).cos()
    }
}

/// Square kernel of side `2 * kernel_radius + 1`; element `(i, j)` holds
/// the filter at offset `(i - r, j - r)`.
pub fn gabor_kernel(params: &GaborParams) -> Result<RealImage> {
    params.validate()?;
    let r = params.kernel_radius as isize;
    let side = 2 * params.kernel_radius + 1;
    Ok(Grid::from_fn(side, side, |i, j| {
        params.value((i as isize - r) as f64, (j as isize - r) as f64)
    }))
}

/// Correlates `img` with `kernel` using edge replication.
pub fn filter(img: &GrayImage, kernel: &RealImage) -> RealImage {
    let r = (kernel.width() / 2) as isize;
    Grid::from_fn(img.width(), img.height(), |x, y| {
        let mut acc = 0.0;
        for j in 0..kernel.height() {
            for i in 0..kernel.width() {
                let v = *img.get_clamped(x as isize + i as isize - r, y as isize + j as isize - r);
                acc += kernel.get(i, j) * v as f64;
            }
        }
        acc
    })
}

/// Maximum response across the bank, rescaled affinely to `[0, 255]`.
/// A flat response maps to all zeros.
pub fn gabor_enhance(region: &GrayImage, bank: &[GaborParams]) -> Result<GrayImage> {
    if bank.is_empty() {
        return Err(Error::argument("empty gabor bank"));
    }
    let mut best: Option<RealImage> = None;
    for params in bank {
        let response = filter(region, &gabor_kernel(params)?);
        best = Some(match best {
            None => response,
            Some(mut b) => {
                for (acc, v) in b.data_mut().iter_mut().zip(response.data()) {
                    *acc = acc.max(*v);
                }
                b
            }
        });
    }
    let best = best.expect("non-empty bank");
    let lo = best.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = best.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // float noise on a flat input must not be stretched to full range
    if hi - lo <= 1e-9 * (1.0 + hi.abs().max(lo.abs())) {
        return Ok(Grid::new(region.width(), region.height(), 0));
    }
    Ok(best.map(|&v| ((v - lo) / (hi - lo) * 255.0).round() as u8))
}

/// Most frequent horizontal run length of the minority Otsu class,
/// at least 2.
pub fn estimate_stroke_width(region: &GrayImage) -> usize {
    let Some(t) = otsu_threshold(region) else {
        return 2;
    };
    let dark = region.data().iter().filter(|&&v| v <= t).count();
    let stroke_is_dark = dark * 2 <= region.data().len();
    let mut hist = vec![0usize; region.width() + 1];
    for y in 0..region.height() {
        let mut run = 0;
        for x in 0..=region.width() {
            let on = x < region.width() && ((*region.get(x, y) <= t) == stroke_is_dark);
            if on {
                run += 1;
            } else if run > 0 {
                hist[run] += 1;
                run = 0;
            }
        }
    }
    let mode = hist
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(len, &count)| if count > 0 { len } else { 0 })
        .unwrap_or(0);
    mode.max(2)
}

/// How a filter bank is derived from a region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BankParams {
    /// `lambda = wavelength_factor * stroke width`.
    pub wavelength_factor: f64,
    /// `sigma = sigma_ratio * lambda`; the radius is `ceil(2 sigma)`.
    pub sigma_ratio: f64,
    pub gamma: f64,
    pub orientations: usize,
}

impl Default for BankParams {
    fn default() -> Self {
        BankParams {
            wavelength_factor: 2.0,
            sigma_ratio: 0.2,
            gamma: 1.0,
            orientations: 4,
        }
    }
}

/// Evenly spaced orientations in `[0, pi)` at a wavelength tied to the
/// estimated stroke width.
pub fn bank_for(region: &GrayImage, params: &BankParams) -> Vec<GaborParams> {
    let lambda = params.wavelength_factor * estimate_stroke_width(region) as f64;
    let sigma = params.sigma_ratio * lambda;
    (0..params.orientations)
        .map(|i| GaborParams {
            lambda,
            theta: PI * i as f64 / params.orientations as f64,
            phi: 0.0,
            gamma: params.gamma,
            sigma,
            kernel_radius: (2.0 * sigma).ceil() as usize,
        })
        .collect()
}

/// [`bank_for`] with default parameters.
pub fn default_bank(region: &GrayImage) -> Vec<GaborParams> {
    bank_for(region, &BankParams::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(theta: f64, phi: f64) -> GaborParams {
        GaborParams {
            phi,
            ..GaborParams::for_wavelength(4.0, theta)
        }
    }

    #[test]
    fn kernel_center() {
        let k = gabor_kernel(&params(0.3, 0.0)).unwrap();
        let r = k.width() / 2;
        assert_eq!(*k.get(r, r), 1.0);
        let k = gabor_kernel(&params(1.1, PI / 2.0)).unwrap();
        assert!(k.get(r, r).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        for bad in [
            GaborParams { lambda: 0.0, ..params(0.0, 0.0) },
            GaborParams { sigma: -1.0, ..params(0.0, 0.0) },
            GaborParams { gamma: 0.0, ..params(0.0, 0.0) },
        ] {
            assert!(gabor_kernel(&bad).is_err());
        }
    }

    #[test]
    fn radius_follows_sigma() {
        let p = GaborParams::for_wavelength(4.0, 0.0);
        assert!((p.sigma - 2.24).abs() < 1e-12);
        assert_eq!(p.kernel_radius, 5);
        assert_eq!(gabor_kernel(&p).unwrap().width(), 11);
    }

    #[test]
    fn constant_input_enhances_to_zero() {
        let out = gabor_enhance(&Grid::new(9, 7, 140u8), &[params(0.0, 0.0), params(PI / 2.0, 0.0)]).unwrap();
        assert!(out.data().iter().all(|&v| v == 0));
        assert!(gabor_enhance(&Grid::new(9, 7, 140u8), &[]).is_err());
    }

    #[test]
    fn duplicate_bank_entries_change_nothing() {
        let img = Grid::from_fn(16, 12, |x, y| ((x * 37 + y * 91) % 256) as u8);
        let p = params(PI / 4.0, 0.0);
        assert_eq!(gabor_enhance(&img, &[p]).unwrap(), gabor_enhance(&img, &[p, p]).unwrap());
    }

    #[test]
    fn stroke_width_of_vertical_bars() {
        // 3-px white bars every 9 px on black
        let img = Grid::from_fn(36, 10, |x, _| if x % 9 < 3 { 250u8 } else { 10 });
        assert_eq!(estimate_stroke_width(&img), 3);
        assert_eq!(estimate_stroke_width(&Grid::new(5, 5, 9u8)), 2);
        let bank = default_bank(&img);
        assert_eq!(bank.len(), 4);
        assert!(bank.iter().all(|p| p.lambda == 6.0 && p.kernel_radius == 3));
        assert_eq!(bank[2].theta, PI / 2.0);
    }
}
