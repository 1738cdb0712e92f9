//! Text/background separation of a localized region by fuzzy C-means over
//! per-pixel neighbourhood texture (standard deviation and entropy of the
//! 3x3 window).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixelcore::{BinaryImage, GrayImage, Grid, RealImage};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PixelFeature {
    pub stddev: f64,
    /// Bits; at most `log2(9)`.
    pub entropy: f64,
}

/// Population standard deviation and distinct-value Shannon entropy of the
/// 9 values in each pixel's edge-replicated 3x3 window.
pub fn pixel_features(img: &GrayImage) -> Result<Grid<PixelFeature>> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::Size {
            width: w,
            height: h,
            min_width: 3,
            min_height: 3,
        });
    }
    Ok(Grid::from_fn(w, h, |x, y| {
        let mut window = [0u8; 9];
        let mut k = 0;
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                window[k] = *img.get_clamped(x as isize + dx, y as isize + dy);
                k += 1;
            }
        }
        window_feature(&mut window)
    }))
}

fn window_feature(window: &mut [u8; 9]) -> PixelFeature {
    let mean = window.iter().map(|&v| v as f64).sum::<f64>() / 9.0;
    let var = window.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / 9.0;
    window.sort_unstable();
    let mut entropy = 0.0;
    let mut run = 1;
    for i in 1..=9 {
        if i < 9 && window[i] == window[i - 1] {
            run += 1;
        } else {
            let p = run as f64 / 9.0;
            entropy -= p * p.log2();
            run = 1;
        }
    }
    PixelFeature {
        stddev: var.sqrt(),
        // -0.0 for a single-valued window
        entropy: entropy.max(0.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FcmParams {
    pub clusters: usize,
    /// Fuzzifier, > 1.
    pub m: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FcmParams {
    fn default() -> Self {
        FcmParams {
            clusters: 2,
            m: 2.0,
            epsilon: 1e-4,
            max_iter: 100,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FcmResult {
    pub centroids: Vec<[f64; 2]>,
    /// `memberships[k][i]`: degree of point `k` in cluster `i`.
    pub memberships: Vec<Vec<f64>>,
    pub iterations_used: usize,
    /// Objective of the returned memberships and centroids.
    pub objective: f64,
    /// Objective after each alternation step (membership update followed
    /// by centroid update).
    pub objective_history: Vec<f64>,
}

impl FcmResult {
    /// Index of the cluster with the highest membership for each point;
    /// ties go to the lower cluster index.
    pub fn hard_assignment(&self) -> Vec<usize> {
        self.memberships
            .iter()
            .map(|u| {
                u.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                    .0
            })
            .collect()
    }
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else {
        x.powf(e)
    }
}

/// Membership row of one point. A point lying on one or more centroids
/// belongs to them alone, shared equally.
pub fn memberships_for(point: &[f64; 2], centroids: &[[f64; 2]], m: f64, out: &mut [f64]) {
    let zeros = centroids.iter().filter(|c| dist2(point, c) == 0.0).count();
    if zeros > 0 {
        for (u, c) in out.iter_mut().zip(centroids) {
            *u = if dist2(point, c) == 0.0 { 1.0 / zeros as f64 } else { 0.0 };
        }
        return;
    }
    // (d_i / d_j)^(2/(m-1)) == (d2_i / d2_j)^(1/(m-1))
    let exponent = 1.0 / (m - 1.0);
    for (u, ci) in out.iter_mut().zip(centroids) {
        let di = dist2(point, ci);
        let s: f64 = centroids.iter().map(|cj| pow(di / dist2(point, cj), exponent)).sum();
        *u = 1.0 / s;
    }
}

/// `sum_k sum_i u_ki^m * ||x_k - v_i||^2`
pub fn fcm_objective(points: &[[f64; 2]], memberships: &[Vec<f64>], centroids: &[[f64; 2]], m: f64) -> f64 {
    points
        .iter()
        .zip(memberships)
        .map(|(p, u)| {
            u.iter()
                .zip(centroids)
                .map(|(&uk, c)| pow(uk, m) * dist2(p, c))
                .sum::<f64>()
        })
        .sum()
}

fn distinct_seeds(points: &[[f64; 2]], count: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut chosen: Vec<[f64; 2]> = Vec::with_capacity(count);
    for i in order {
        if !chosen.contains(&points[i]) {
            chosen.push(points[i]);
            if chosen.len() == count {
                return Ok(chosen);
            }
        }
    }
    Err(Error::Degenerate(format!(
        "fuzzy C-means needs {count} distinct points, found {}",
        chosen.len()
    )))
}

/// Bezdek alternation from centroids seeded on distinct random data points.
/// Stops once no centroid moves by `epsilon` or more, or after `max_iter`
/// alternations.
pub fn fcm(points: &[[f64; 2]], params: &FcmParams) -> Result<FcmResult> {
    if !(params.m > 1.0) {
        return Err(Error::argument(format!("fuzzifier m = {} must exceed 1", params.m)));
    }
    if params.clusters < 2 {
        return Err(Error::argument("fuzzy C-means needs at least 2 clusters"));
    }
    let c = params.clusters;
    let mut centroids = distinct_seeds(points, c, params.seed)?;
    let mut memberships = vec![vec![0.0; c]; points.len()];
    let mut history = Vec::new();
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        for (p, u) in points.iter().zip(memberships.iter_mut()) {
            memberships_for(p, &centroids, params.m, u);
        }
        let mut next = vec![[0.0; 2]; c];
        for (i, v) in next.iter_mut().enumerate() {
            let (mut wsum, mut sx, mut sy) = (0.0, 0.0, 0.0);
            for (p, u) in points.iter().zip(&memberships) {
                let w = pow(u[i], params.m);
                wsum += w;
                sx += w * p[0];
                sy += w * p[1];
            }
            *v = if wsum > 0.0 { [sx / wsum, sy / wsum] } else { centroids[i] };
        }
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| dist2(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        history.push(fcm_objective(points, &memberships, &centroids, params.m));
        if shift < params.epsilon {
            break;
        }
    }

    for (p, u) in points.iter().zip(memberships.iter_mut()) {
        memberships_for(p, &centroids, params.m, u);
    }
    let objective = fcm_objective(points, &memberships, &centroids, params.m);
    Ok(FcmResult {
        centroids,
        memberships,
        iterations_used: iterations,
        objective,
        objective_history: history,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BinarizeMethod {
    /// Fuzzy C-means on z-scored features; `mean`/`std` are the
    /// normalization of `(stddev, entropy)` and `text_cluster` the cluster
    /// labeled text. Within the text zone, pixels on the `text_bright` side
    /// of `threshold` are kept.
    Fcm {
        mean: [f64; 2],
        std: [f64; 2],
        text_cluster: usize,
        threshold: Option<u8>,
        text_bright: bool,
    },
    /// Clustering was degenerate; a global Otsu threshold was applied with
    /// the less populated side as text.
    OtsuFallback { threshold: Option<u8> },
}

#[derive(Clone, Debug)]
pub struct Binarization {
    pub image: BinaryImage,
    /// Pixels assigned to the text cluster, before polarity refinement.
    pub zone: BinaryImage,
    pub method: BinarizeMethod,
    /// Membership of each pixel in the text cluster, when FCM ran.
    pub text_membership: Option<RealImage>,
}

pub fn binarize_region(region: &GrayImage, params: &FcmParams) -> Result<BinaryImage> {
    binarize_region_detailed(region, params).map(|b| b.image)
}

/// The text cluster is the one whose centroid has the larger entropy;
/// on a tie, the one covering fewer pixels. That cluster covers strokes
/// together with their immediate surroundings, so the final mask keeps the
/// pixels of the (one-pixel dilated) zone lying on the text side of an
/// Otsu threshold taken over the zone. The text side is the one opposite
/// the mean intensity outside the zone.
pub fn binarize_region_detailed(region: &GrayImage, params: &FcmParams) -> Result<Binarization> {
    let features = pixel_features(region)?;
    let raw: Vec<[f64; 2]> = features.data().iter().map(|f| [f.stddev, f.entropy]).collect();
    let (mean, std) = zscore_stats(&raw);
    let points: Vec<[f64; 2]> = raw
        .iter()
        .map(|p| [(p[0] - mean[0]) / std[0], (p[1] - mean[1]) / std[1]])
        .collect();

    let result = match fcm(&points, params) {
        Ok(r) => r,
        Err(Error::Degenerate(_)) => return Ok(otsu_fallback(region)),
        Err(e) => return Err(e),
    };

    let assignment = result.hard_assignment();
    let mut counts = vec![0usize; result.centroids.len()];
    assignment.iter().for_each(|&a| counts[a] += 1);
    let text_cluster = (0..result.centroids.len())
        .max_by(|&a, &b| {
            result.centroids[a][1]
                .total_cmp(&result.centroids[b][1])
                .then(counts[b].cmp(&counts[a]))
                .then(b.cmp(&a))
        })
        .expect("at least two clusters");

    let (w, h) = (region.width(), region.height());
    let zone = Grid::from_vec(w, h, assignment.iter().map(|&a| a == text_cluster).collect())?;
    let text_membership = Grid::from_vec(w, h, result.memberships.iter().map(|u| u[text_cluster]).collect())?;
    let (image, threshold, text_bright) = refine_polarity(region, &zone);
    Ok(Binarization {
        image,
        zone,
        method: BinarizeMethod::Fcm {
            mean,
            std,
            text_cluster,
            threshold,
            text_bright,
        },
        text_membership: Some(text_membership),
    })
}

fn refine_polarity(region: &GrayImage, zone: &BinaryImage) -> (BinaryImage, Option<u8>, bool) {
    let inside: Vec<u8> = region.data().iter().zip(zone.data()).filter(|(_, &z)| z).map(|(&v, _)| v).collect();
    let outside: Vec<u8> = region.data().iter().zip(zone.data()).filter(|(_, &z)| !z).map(|(&v, _)| v).collect();
    let threshold = Grid::from_vec(inside.len().max(1), 1, if inside.is_empty() { vec![0] } else { inside })
        .ok()
        .and_then(|g| otsu_threshold(&g));
    let Some(t) = threshold else {
        return (zone.clone(), None, true);
    };
    let reference = if outside.is_empty() { region.data() } else { &outside[..] };
    let mean = reference.iter().map(|&v| v as f64).sum::<f64>() / reference.len() as f64;
    let text_bright = mean <= t as f64;
    let image = Grid::from_fn(region.width(), region.height(), |x, y| {
        let near_zone = (-1..=1).any(|dy| (-1..=1).any(|dx| *zone.get_clamped(x as isize + dx, y as isize + dy)));
        let v = *region.get(x, y);
        near_zone && ((v > t) == text_bright)
    });
    (image, threshold, text_bright)
}

fn zscore_stats(points: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let n = points.len() as f64;
    let mut mean = [0.0; 2];
    let mut std = [0.0; 2];
    for d in 0..2 {
        mean[d] = points.iter().map(|p| p[d]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p[d] - mean[d]).powi(2)).sum::<f64>() / n;
        std[d] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    (mean, std)
}

/// Otsu's threshold: the level maximizing between-class variance, with
/// pixels `<= threshold` forming the dark class. `None` for a single-level
/// image.
pub fn otsu_threshold(img: &GrayImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    img.data().iter().for_each(|&v| hist[v as usize] += 1);
    let total = img.data().len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let (mut w_dark, mut sum_dark) = (0.0, 0.0);
    let mut best: Option<(u8, f64)> = None;
    for t in 0..255usize {
        w_dark += hist[t] as f64;
        sum_dark += t as f64 * hist[t] as f64;
        let w_light = total - w_dark;
        if w_dark == 0.0 || w_light == 0.0 {
            continue;
        }
        let mu_d = sum_dark / w_dark;
        let mu_l = (sum_all - sum_dark) / w_light;
        let between = w_dark * w_light * (mu_d - mu_l).powi(2);
        if best.is_none_or(|(_, b)| between > b) {
            best = Some((t as u8, between));
        }
    }
    best.map(|(t, _)| t)
}

fn otsu_fallback(region: &GrayImage) -> Binarization {
    let threshold = otsu_threshold(region);
    let image = match threshold {
        Some(t) => {
            let dark = region.data().iter().filter(|&&v| v <= t).count();
            let dark_is_text = dark * 2 <= region.data().len();
            region.map(|&v| (v <= t) == dark_is_text)
        }
        None => region.map(|_| false),
    };
    Binarization {
        zone: image.clone(),
        image,
        method: BinarizeMethod::OtsuFallback { threshold },
        text_membership: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_features_are_zero() {
        let f = pixel_features(&Grid::new(4, 5, 77u8)).unwrap();
        assert!(f.data().iter().all(|p| p.stddev == 0.0 && p.entropy == 0.0));
    }

    #[test]
    fn undersized_image_rejected() {
        assert!(matches!(pixel_features(&Grid::new(3, 2, 0u8)), Err(Error::Size { .. })));
    }

    #[test]
    fn nine_distinct_values() {
        let img = Grid::from_fn(3, 3, |x, y| (y * 3 + x) as u8 * 10);
        let f = *pixel_features(&img).unwrap().get(1, 1);
        assert!((f.entropy - 9f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn five_four_window() {
        let mut w = [0, 0, 0, 0, 0, 255, 255, 255, 255];
        let f = window_feature(&mut w);
        // mean = 1020/9; variance = 5*4/81 * 255^2
        let expected_std = (20.0f64 / 81.0).sqrt() * 255.0;
        assert!((f.stddev - expected_std).abs() < 1e-9);
        assert!((f.stddev - 126.7105).abs() < 1e-3);
        let p: f64 = 5.0 / 9.0;
        let q: f64 = 4.0 / 9.0;
        let expected_h = -(p * p.log2()) - q * q.log2();
        assert!((f.entropy - expected_h).abs() < 1e-12);
        assert!((f.entropy - 0.9911).abs() < 1e-4);
    }

    #[test]
    fn equidistant_point_splits_evenly() {
        let mut u = [0.0; 2];
        memberships_for(&[0.0, 0.0], &[[-1.0, 0.0], [1.0, 0.0]], 2.0, &mut u);
        assert_eq!(u, [0.5, 0.5]);
    }

    #[test]
    fn point_on_centroid_is_crisp() {
        let mut u = [0.0; 2];
        memberships_for(&[1.0, 2.0], &[[5.0, 5.0], [1.0, 2.0]], 2.0, &mut u);
        assert_eq!(u, [0.0, 1.0]);
    }

    #[test]
    fn hand_computed_membership() {
        // d = 1 and 3, m = 2: u0 = 1 / (1 + 1/9) = 0.9
        let mut u = [0.0; 2];
        memberships_for(&[0.0, 0.0], &[[1.0, 0.0], [0.0, 3.0]], 2.0, &mut u);
        assert!((u[0] - 0.9).abs() < 1e-12 && (u[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn too_few_distinct_points() {
        let pts = vec![[1.0, 1.0]; 10];
        assert!(matches!(fcm(&pts, &FcmParams::default()), Err(Error::Degenerate(_))));
        assert!(fcm(&[[0.0, 0.0], [1.0, 1.0]], &FcmParams { m: 1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn constant_region_falls_back_to_background() {
        let b = binarize_region_detailed(&Grid::new(8, 8, 120u8), &FcmParams::default()).unwrap();
        assert_eq!(b.method, BinarizeMethod::OtsuFallback { threshold: None });
        assert_eq!(b.image.count_true(), 0);
    }

    #[test]
    fn otsu_splits_two_levels() {
        let img = Grid::from_fn(4, 4, |x, _| if x < 2 { 30u8 } else { 200 });
        let t = otsu_threshold(&img).unwrap();
        assert!((30..200).contains(&t));
    }
}
