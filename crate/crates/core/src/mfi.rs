//! Multiple-frame integration and elimination of rows/columns that carry
//! too little edge energy to contain caption text.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixelcore::{rgb_to_gray, sobel_magnitude, GrayImage, Grid, Rect, RgbFrame};

/// Consecutive frames of identical size.
#[derive(Clone, Debug)]
pub struct FrameWindow {
    frames: Vec<RgbFrame>,
}

impl FrameWindow {
    pub fn new(frames: Vec<RgbFrame>) -> Result<Self> {
        let first = frames.first().ok_or_else(|| Error::argument("empty frame window"))?;
        let (w, h) = (first.width(), first.height());
        if let Some(bad) = frames.iter().find(|f| f.width() != w || f.height() != h) {
            return Err(Error::argument(format!(
                "frame {} is {}x{}, window frames are {w}x{h}",
                bad.frame_index,
                bad.width(),
                bad.height()
            )));
        }
        Ok(FrameWindow { frames })
    }

    pub fn frames(&self) -> &[RgbFrame] {
        &self.frames
    }

    pub fn window_length(&self) -> usize {
        self.frames.len()
    }

    /// The frame a window's detections are reported against.
    pub fn representative(&self) -> &RgbFrame {
        &self.frames[(self.frames.len() - 1) / 2]
    }
}

/// Per-pixel, per-channel temporal median. Even-length windows take the
/// lower median. The result carries the representative frame's index.
pub fn integrate_frames(window: &FrameWindow) -> RgbFrame {
    let frames = window.frames();
    let first = &frames[0];
    if frames.len() == 1 {
        return first.clone();
    }
    let mid = (frames.len() - 1) / 2;
    let mut samples = vec![0u8; frames.len()];
    let n = first.width() * first.height();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut px = [0u8; 3];
        for (c, slot) in px.iter_mut().enumerate() {
            for (s, f) in samples.iter_mut().zip(frames) {
                *s = f.pixels.data()[i][c];
            }
            samples.sort_unstable();
            *slot = samples[mid];
        }
        out.push(px);
    }
    let pixels = Grid::from_vec(first.width(), first.height(), out).expect("window frames share dimensions");
    RgbFrame::new(pixels, window.representative().frame_index)
}

/// Inclusive index range of rows or columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    pub start: usize,
    pub end: usize,
}

impl Band {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Band { start, end }
    }

    pub fn thickness(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.start..=self.end).contains(&i)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateBands {
    pub row_bands: Vec<Band>,
    pub col_bands: Vec<Band>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandParams {
    /// A line survives when its mean edge magnitude reaches this multiple
    /// of the frame's global mean edge magnitude.
    pub edge_density_threshold: f64,
    pub min_band_thickness: usize,
    /// Runs of surviving rows separated by at most this many failing rows
    /// are joined into one band.
    pub max_row_gap: usize,
    /// The same for columns; word spacing needs a wider gap than the space
    /// between a letter and its dots.
    pub max_col_gap: usize,
}

impl Default for BandParams {
    fn default() -> Self {
        BandParams {
            edge_density_threshold: 1.5,
            min_band_thickness: 4,
            max_row_gap: 2,
            max_col_gap: 8,
        }
    }
}

/// Per-row and per-column mean edge magnitudes used by [`candidate_bands`].
#[derive(Clone, Debug)]
pub struct EdgeProfile {
    pub edges: GrayImage,
    pub global_mean: f64,
    pub row_means: Vec<f64>,
}

impl EdgeProfile {
    pub fn new(frame: &RgbFrame) -> Result<Self> {
        let edges = sobel_magnitude(&rgb_to_gray(frame))?;
        let (w, h) = (edges.width(), edges.height());
        let total: u64 = edges.data().iter().map(|&v| v as u64).sum();
        let global_mean = total as f64 / (w * h) as f64;
        let row_means = (0..h)
            .map(|y| edges.row(y).iter().map(|&v| v as f64).sum::<f64>() / w as f64)
            .collect();
        Ok(EdgeProfile {
            edges,
            global_mean,
            row_means,
        })
    }

    /// Column means taken over the rows covered by `rows`.
    pub fn col_means(&self, rows: &[Band]) -> Vec<f64> {
        let n: usize = rows.iter().map(Band::thickness).sum();
        (0..self.edges.width())
            .map(|x| {
                let s: u64 = rows
                    .iter()
                    .flat_map(|b| b.start..=b.end)
                    .map(|y| *self.edges.get(x, y) as u64)
                    .sum();
                s as f64 / n.max(1) as f64
            })
            .collect()
    }
}

/// Groups surviving lines into bands: runs are joined across gaps of at
/// most `max_gap` failing lines, then runs thinner than `min_thickness`
/// are dropped.
pub fn group_bands(survives: &[bool], max_gap: usize, min_thickness: usize) -> Vec<Band> {
    let mut runs: Vec<Band> = Vec::new();
    let mut i = 0;
    while i < survives.len() {
        if !survives[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < survives.len() && survives[i] {
            i += 1;
        }
        let run = Band::new(start, i - 1);
        match runs.last_mut() {
            Some(last) if run.start - last.end - 1 <= max_gap => last.end = run.end,
            _ => runs.push(run),
        }
    }
    runs.retain(|b| b.thickness() >= min_thickness);
    runs
}

/// Row bands come from row means over the whole frame. Column bands come
/// from column means over the rows of the surviving row bands, so a
/// caption that spans a small fraction of the frame height still stands
/// out column-wise. A frame without edges yields no bands.
pub fn candidate_bands(integrated: &RgbFrame, params: &BandParams) -> Result<CandidateBands> {
    if !(params.edge_density_threshold >= 0.0) {
        return Err(Error::argument("edge_density_threshold must be non-negative"));
    }
    let profile = EdgeProfile::new(integrated)?;
    Ok(bands_from_profile(&profile, params))
}

pub fn bands_from_profile(profile: &EdgeProfile, params: &BandParams) -> CandidateBands {
    if profile.global_mean == 0.0 {
        return CandidateBands::default();
    }
    let cut = params.edge_density_threshold * profile.global_mean;
    let rows: Vec<bool> = profile.row_means.iter().map(|&m| m >= cut).collect();
    let row_bands = group_bands(&rows, params.max_row_gap, params.min_band_thickness);
    if row_bands.is_empty() {
        return CandidateBands::default();
    }
    let col_bands = column_bands(profile, &row_bands, params);
    CandidateBands { row_bands, col_bands }
}

/// Column bands judged over the rows of `rows` only.
pub fn column_bands(profile: &EdgeProfile, rows: &[Band], params: &BandParams) -> Vec<Band> {
    if rows.is_empty() || profile.global_mean == 0.0 {
        return Vec::new();
    }
    let cut = params.edge_density_threshold * profile.global_mean;
    let cols: Vec<bool> = profile.col_means(rows).iter().map(|&m| m >= cut).collect();
    group_bands(&cols, params.max_col_gap, params.min_band_thickness)
}

/// Repeats the elimination inside `zone`. Rows are judged by their mean
/// edge over the zone's columns and the band holding the most edge energy
/// is kept; columns are then judged over those rows alone. Inside the zone
/// a line must also reach `peak_ratio` of the zone's densest line. Returns
/// the span of the surviving columns over the kept rows, or `None` when
/// nothing survives.
pub fn refine_zone(profile: &EdgeProfile, zone: Rect, params: &BandParams, peak_ratio: f64) -> Option<Rect> {
    let edges = &profile.edges;
    if zone.width == 0 || zone.height == 0 || zone.right() > edges.width() || zone.bottom() > edges.height() {
        return None;
    }
    let cut = params.edge_density_threshold * profile.global_mean;
    let row_sums: Vec<f64> = (zone.y..zone.bottom())
        .map(|y| edges.row(y)[zone.x..zone.right()].iter().map(|&v| v as f64).sum())
        .collect();
    let peak = row_sums.iter().copied().fold(0.0, f64::max) / zone.width as f64;
    let row_cut = cut.max(peak_ratio * peak);
    let rows: Vec<bool> = row_sums.iter().map(|&s| s / zone.width as f64 >= row_cut).collect();
    let energy = |b: &Band| row_sums[b.start..=b.end].iter().sum::<f64>();
    let best = group_bands(&rows, params.max_row_gap, params.min_band_thickness)
        .into_iter()
        .max_by(|a, b| energy(a).total_cmp(&energy(b)))?;
    let (top, bottom) = (zone.y + best.start, zone.y + best.end);
    let col_means: Vec<f64> = (zone.x..zone.right())
        .map(|x| (top..=bottom).map(|y| *edges.get(x, y) as f64).sum::<f64>() / best.thickness() as f64)
        .collect();
    let col_peak = col_means.iter().copied().fold(0.0, f64::max);
    let col_cut = cut.max(peak_ratio * col_peak);
    let cols: Vec<bool> = col_means.iter().map(|&m| m >= col_cut).collect();
    let col_bands = group_bands(&cols, params.max_col_gap, params.min_band_thickness);
    let (first, last) = (col_bands.first()?, col_bands.last()?);
    Some(Rect::new(zone.x + first.start, top, last.end - first.start + 1, best.thickness()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid(w: usize, h: usize, px: [u8; 3], index: usize) -> RgbFrame {
        RgbFrame::new(Grid::new(w, h, px), index)
    }

    #[test]
    fn empty_window_rejected() {
        assert!(FrameWindow::new(vec![]).is_err());
        let mixed = vec![solid(4, 4, [0; 3], 0), solid(5, 4, [0; 3], 1)];
        assert!(FrameWindow::new(mixed).is_err());
    }

    #[test]
    fn single_frame_is_identity() {
        let f = RgbFrame::new(Grid::from_fn(4, 3, |x, y| [x as u8, y as u8, 9]), 3);
        let out = integrate_frames(&FrameWindow::new(vec![f.clone()]).unwrap());
        assert_eq!(out, f);
    }

    #[test]
    fn identical_frames_integrate_to_themselves() {
        let f = RgbFrame::new(Grid::from_fn(4, 3, |x, y| [x as u8 * 9, y as u8, 200]), 0);
        let frames: Vec<_> = (0..5).map(|i| RgbFrame { frame_index: i, ..f.clone() }).collect();
        let out = integrate_frames(&FrameWindow::new(frames).unwrap());
        assert_eq!(out.pixels, f.pixels);
        assert_eq!(out.frame_index, 2);
    }

    #[test]
    fn transient_outlier_removed() {
        let mut frames: Vec<_> = (0..3).map(|i| solid(3, 3, [10; 3], i)).collect();
        frames[1].pixels.set(1, 1, [255; 3]);
        let out = integrate_frames(&FrameWindow::new(frames).unwrap());
        assert_eq!(*out.pixels.get(1, 1), [10, 10, 10]);
    }

    #[test]
    fn even_window_takes_lower_median() {
        let frames: Vec<_> = [10u8, 20, 30, 40].iter().enumerate().map(|(i, &v)| solid(1, 1, [v; 3], i)).collect();
        let out = integrate_frames(&FrameWindow::new(frames).unwrap());
        assert_eq!(*out.pixels.get(0, 0), [20; 3]);
    }

    #[test]
    fn uniform_frame_has_no_bands() {
        let bands = candidate_bands(&solid(20, 20, [90; 3], 0), &BandParams::default()).unwrap();
        assert!(bands.row_bands.is_empty() && bands.col_bands.is_empty());
    }

    #[test]
    fn grouping_bridges_and_filters() {
        let s: Vec<bool> = "##..###.#.....#".chars().map(|c| c == '#').collect();
        assert_eq!(group_bands(&s, 0, 1).len(), 4);
        assert_eq!(group_bands(&s, 2, 1), vec![Band::new(0, 8), Band::new(14, 14)]);
        assert_eq!(group_bands(&s, 2, 2), vec![Band::new(0, 8)]);
        assert_eq!(group_bands(&s, 0, 3), vec![Band::new(4, 6)]);
    }

    fn profile_of(edges: GrayImage) -> EdgeProfile {
        let (w, h) = (edges.width(), edges.height());
        let global_mean = edges.data().iter().map(|&v| v as f64).sum::<f64>() / (w * h) as f64;
        let row_means = (0..h).map(|y| edges.row(y).iter().map(|&v| v as f64).sum::<f64>() / w as f64).collect();
        EdgeProfile { edges, global_mean, row_means }
    }

    fn block(w: usize, h: usize, r: Rect, v: u8) -> GrayImage {
        Grid::from_fn(w, h, |x, y| if x >= r.x && x < r.right() && y >= r.y && y < r.bottom() { v } else { 0 })
    }

    #[test]
    fn column_bands_follow_given_rows() {
        // two blocks at different heights and columns
        let mut edges = block(80, 60, Rect::new(10, 5, 20, 10), 200);
        for y in 40..50 {
            for x in 50..70 {
                edges.set(x, y, 200);
            }
        }
        let p = profile_of(edges);
        let params = BandParams::default();
        assert_eq!(column_bands(&p, &[Band::new(5, 14)], &params), vec![Band::new(10, 29)]);
        assert_eq!(column_bands(&p, &[Band::new(40, 49)], &params), vec![Band::new(50, 69)]);
        assert!(column_bands(&p, &[], &params).is_empty());
        assert!(column_bands(&profile_of(Grid::new(8, 8, 0)), &[Band::new(0, 7)], &params).is_empty());
    }

    #[test]
    fn refine_zone_shrinks_to_dense_block() {
        let mut edges = block(100, 80, Rect::new(30, 20, 40, 12), 200);
        // faint texture inside the zone but outside the block
        for x in 10..90 {
            edges.set(x, 50, 20);
        }
        let p = profile_of(edges);
        let zone = Rect::new(10, 10, 80, 50);
        let got = refine_zone(&p, zone, &BandParams::default(), 0.2).unwrap();
        assert_eq!(got, Rect::new(30, 20, 40, 12));
        // refining the result again changes nothing
        assert_eq!(refine_zone(&p, got, &BandParams::default(), 0.2), Some(got));
    }

    #[test]
    fn refine_zone_rejects_empty_or_outside() {
        let p = profile_of(block(40, 40, Rect::new(5, 5, 10, 10), 100));
        let params = BandParams::default();
        assert_eq!(refine_zone(&p, Rect::new(20, 20, 15, 15), &params, 0.2), None);
        assert_eq!(refine_zone(&p, Rect::new(30, 30, 15, 15), &params, 0.2), None);
        assert_eq!(refine_zone(&p, Rect::new(0, 0, 0, 10), &params, 0.2), None);
    }

}
