//! The fixed 160-dimensional glyph descriptor: four projection profiles,
//! four transition profiles, occlusion (hole) descriptors and diacritic
//! descriptors.

use std::path::Path;

use crate::error::{Error, Result};
use crate::pixelcore::{connected_components, projection, transitions, BinaryImage, Connectivity, Direction, Grid, Rect};
use crate::textline::{DiacriticPosition, GlyphSegment};

pub const PROFILE_BINS: usize = 18;
pub const FEATURE_DIM: usize = 160;
/// Recorded in prototype files so that queries and prototypes agree.
pub const FEATURE_LAYOUT_ID: &str = "glyphfeat-160-v1";

const PROJ_OFFSET: usize = 0;
const TRANS_OFFSET: usize = 4 * PROFILE_BINS;
const OCCLUSION_OFFSET: usize = 8 * PROFILE_BINS;
const DIACRITIC_OFFSET: usize = OCCLUSION_OFFSET + 8;

/// Layout: `[proj 4x18 | trans 4x18 | occlusion 8 | diacritic 8]`, with
/// directions in [`Direction::ALL`] order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector160(pub [f64; FEATURE_DIM]);

impl FeatureVector160 {
    pub fn zeros() -> Self {
        FeatureVector160([0.0; FEATURE_DIM])
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; FEATURE_DIM] = values
            .try_into()
            .map_err(|_| Error::argument(format!("feature vector needs {FEATURE_DIM} values, got {}", values.len())))?;
        Ok(FeatureVector160(arr))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn projection(&self) -> &[f64] {
        &self.0[PROJ_OFFSET..TRANS_OFFSET]
    }

    pub fn transitions(&self) -> &[f64] {
        &self.0[TRANS_OFFSET..OCCLUSION_OFFSET]
    }

    pub fn occlusion(&self) -> &[f64] {
        &self.0[OCCLUSION_OFFSET..DIACRITIC_OFFSET]
    }

    pub fn diacritic(&self) -> &[f64] {
        &self.0[DIACRITIC_OFFSET..]
    }

    pub fn distance(&self, other: &FeatureVector160) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Resamples a profile to `PROFILE_BINS` bins by linear interpolation of
/// its cumulative sum, then divides by the total. An all-zero profile
/// yields zeros.
pub fn resample_profile(profile: &[usize]) -> [f64; PROFILE_BINS] {
    let total: usize = profile.iter().sum();
    let mut out = [0.0; PROFILE_BINS];
    if total == 0 {
        return out;
    }
    let n = profile.len() as f64;
    let cumulative = |t: f64| -> f64 {
        let i = (t.floor() as usize).min(profile.len());
        let done: usize = profile[..i].iter().sum();
        let partial = if i < profile.len() { (t - i as f64) * profile[i] as f64 } else { 0.0 };
        done as f64 + partial
    };
    let mut prev = 0.0;
    for (k, slot) in out.iter_mut().enumerate() {
        let next = if k + 1 == PROFILE_BINS {
            total as f64
        } else {
            cumulative((k + 1) as f64 * n / PROFILE_BINS as f64)
        };
        *slot = (next - prev) / total as f64;
        prev = next;
    }
    out
}

/// The segment body cropped to its tight bounding box, with that box in
/// line coordinates.
fn tight_glyph(seg: &GlyphSegment) -> Result<(BinaryImage, Rect)> {
    let bbox = seg
        .image
        .bounding_box()
        .ok_or_else(|| Error::argument("empty glyph segment"))?;
    let glyph = seg.image.crop(bbox)?;
    Ok((glyph, Rect::new(bbox.x + seg.column_span.0, bbox.y, bbox.width, bbox.height)))
}

fn pad(img: &BinaryImage) -> BinaryImage {
    Grid::from_fn(img.width() + 2, img.height() + 2, |x, y| {
        x >= 1 && y >= 1 && x <= img.width() && y <= img.height() && *img.get(x - 1, y - 1)
    })
}

pub fn projection_features(seg: &GlyphSegment) -> Result<[f64; 4 * PROFILE_BINS]> {
    let (glyph, _) = tight_glyph(seg)?;
    let mut out = [0.0; 4 * PROFILE_BINS];
    for (i, dir) in Direction::ALL.into_iter().enumerate() {
        out[i * PROFILE_BINS..(i + 1) * PROFILE_BINS].copy_from_slice(&resample_profile(&projection(&glyph, dir)));
    }
    Ok(out)
}

/// Transition profiles of the glyph padded with a one-pixel background
/// border, so every stroke run contributes one rising edge.
pub fn transition_features(seg: &GlyphSegment) -> Result<[f64; 4 * PROFILE_BINS]> {
    let (glyph, _) = tight_glyph(seg)?;
    let padded = pad(&glyph);
    let mut out = [0.0; 4 * PROFILE_BINS];
    for (i, dir) in Direction::ALL.into_iter().enumerate() {
        out[i * PROFILE_BINS..(i + 1) * PROFILE_BINS].copy_from_slice(&resample_profile(&transitions(&padded, dir)));
    }
    Ok(out)
}

/// Holes are 4-connected background components that do not reach the
/// border of the padded glyph box.
///
/// Output: hole count, hole area / (glyph + hole area), largest hole
/// centroid x and y relative to the glyph box, largest hole width and
/// height relative to the glyph box, second-largest / largest hole area,
/// fraction of holes whose centroid lies above the baseline.
pub fn occlusion_features(seg: &GlyphSegment) -> Result<[f64; 8]> {
    let (glyph, bbox) = tight_glyph(seg)?;
    let padded = pad(&glyph);
    let background = padded.map(|&b| !b);
    let (pw, ph) = (padded.width(), padded.height());
    let mut holes: Vec<_> = connected_components(&background, Connectivity::Four)
        .components
        .into_iter()
        .filter(|c| c.bbox.x > 0 && c.bbox.y > 0 && c.bbox.right() < pw && c.bbox.bottom() < ph)
        .collect();
    let mut out = [0.0; 8];
    if holes.is_empty() {
        return Ok(out);
    }
    // stable: equal areas keep raster order
    holes.sort_by(|a, b| b.area().cmp(&a.area()));
    let hole_area: usize = holes.iter().map(|c| c.area()).sum();
    let glyph_area = glyph.count_true();
    let (w, h) = (bbox.width as f64, bbox.height as f64);
    let largest = &holes[0];
    let (cx, cy) = largest.centroid();
    out[0] = holes.len() as f64;
    out[1] = hole_area as f64 / (glyph_area + hole_area) as f64;
    out[2] = (cx - 1.0 + 0.5) / w;
    out[3] = (cy - 1.0 + 0.5) / h;
    out[4] = largest.bbox.width as f64 / w;
    out[5] = largest.bbox.height as f64 / h;
    out[6] = holes.get(1).map_or(0.0, |c| c.area() as f64 / largest.area() as f64);
    let above = holes
        .iter()
        .filter(|c| c.centroid().1 - 1.0 + (bbox.y as f64) < seg.baseline_row as f64)
        .count();
    out[7] = above as f64 / holes.len() as f64;
    Ok(out)
}

/// Output: count above, count below, diacritic area / (body + diacritic
/// area), mean diacritic centroid x and y, largest diacritic width and
/// height, presence flag. Positions and sizes are relative to the union
/// of the body box and all attached diacritic boxes.
pub fn diacritic_features(seg: &GlyphSegment) -> [f64; 8] {
    let mut out = [0.0; 8];
    let ds = &seg.attached_diacritics;
    if ds.is_empty() {
        return out;
    }
    let body_area = seg.image.count_true();
    let body_box = tight_glyph(seg).ok().map(|(_, b)| b);
    let frame = ds
        .iter()
        .map(|d| d.bbox)
        .chain(body_box)
        .reduce(|a, b| a.union(&b))
        .expect("non-empty");
    let (fw, fh) = (frame.width as f64, frame.height as f64);
    let area: usize = ds.iter().map(|d| d.area()).sum();
    let (mut sx, mut sy) = (0.0, 0.0);
    for d in ds {
        let (cx, cy) = d.centroid();
        sx += (cx - frame.x as f64 + 0.5) / fw;
        sy += (cy - frame.y as f64 + 0.5) / fh;
    }
    let n = ds.len() as f64;
    let largest = ds.iter().fold(&ds[0], |best, d| if d.area() > best.area() { d } else { best });
    out[0] = ds.iter().filter(|d| d.position == DiacriticPosition::Above).count() as f64;
    out[1] = ds.iter().filter(|d| d.position == DiacriticPosition::Below).count() as f64;
    out[2] = area as f64 / (area + body_area) as f64;
    out[3] = sx / n;
    out[4] = sy / n;
    out[5] = largest.bbox.width as f64 / fw;
    out[6] = largest.bbox.height as f64 / fh;
    out[7] = 1.0;
    out
}

pub fn extract_features(seg: &GlyphSegment) -> Result<FeatureVector160> {
    let mut v = [0.0; FEATURE_DIM];
    v[PROJ_OFFSET..TRANS_OFFSET].copy_from_slice(&projection_features(seg)?);
    v[TRANS_OFFSET..OCCLUSION_OFFSET].copy_from_slice(&transition_features(seg)?);
    v[OCCLUSION_OFFSET..DIACRITIC_OFFSET].copy_from_slice(&occlusion_features(seg)?);
    v[DIACRITIC_OFFSET..].copy_from_slice(&diacritic_features(seg));
    Ok(FeatureVector160(v))
}

/// A feature row with an optional class label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledFeatures {
    pub features: FeatureVector160,
    pub label: Option<String>,
}

fn csv_header() -> Vec<String> {
    (0..FEATURE_DIM).map(|i| format!("f{i}")).chain(["label".to_string()]).collect()
}

/// Writes rows as `f0..f159,label`; unlabeled rows leave the label empty.
pub fn write_feature_csv(path: &Path, rows: &[LabeledFeatures]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(csv_header()).map_err(|e| csv_error(path, e))?;
    for row in rows {
        let record = row
            .features
            .0
            .iter()
            .map(|v| v.to_string())
            .chain([row.label.clone().unwrap_or_default()]);
        w.write_record(record).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    Error::Data {
        path: path.to_path_buf(),
        line: line.unwrap_or(0),
        message: e.to_string(),
    }
}

/// Reads rows written by [`write_feature_csv`]. The label column is
/// optional; malformed rows are reported with their line number.
pub fn read_feature_csv(path: &Path) -> Result<Vec<LabeledFeatures>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Data {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() != FEATURE_DIM && record.len() != FEATURE_DIM + 1 {
            return Err(bad(format!("expected {} or {} fields, found {}", FEATURE_DIM, FEATURE_DIM + 1, record.len())));
        }
        let mut values = [0.0; FEATURE_DIM];
        for (i, slot) in values.iter_mut().enumerate() {
            let field = &record[i];
            *slot = field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("field {i}: invalid number {field:?}")))?;
        }
        let label = record.get(FEATURE_DIM).map(str::trim).filter(|s| !s.is_empty()).map(String::from);
        rows.push(LabeledFeatures {
            features: FeatureVector160(values),
            label,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textline::Diacritic;

    fn segment(rows: &[&str]) -> GlyphSegment {
        let image = Grid::from_fn(rows[0].len(), rows.len(), |x, y| rows[y].as_bytes()[x] == b'#');
        GlyphSegment {
            column_span: (0, image.width() - 1),
            baseline_row: rows.len() - 1,
            image,
            attached_diacritics: Vec::new(),
        }
    }

    #[test]
    fn resample_identity_for_18_bins() {
        let p: Vec<usize> = (1..=18).collect();
        let total: usize = p.iter().sum();
        let r = resample_profile(&p);
        for (i, v) in r.iter().enumerate() {
            assert!((v - p[i] as f64 / total as f64).abs() < 1e-15);
        }
        assert_eq!(resample_profile(&[0, 0, 0]), [0.0; PROFILE_BINS]);
    }

    #[test]
    fn resample_spreads_single_column() {
        let r = resample_profile(&[4]);
        for v in r {
            assert!((v - 1.0 / 18.0).abs() < 1e-15);
        }
    }

    #[test]
    fn solid_square() {
        let seg = segment(&["####"; 4]);
        let f = extract_features(&seg).unwrap();
        assert_eq!(f.occlusion(), &[0.0; 8]);
        assert_eq!(f.diacritic(), &[0.0; 8]);
        assert_eq!(f.projection()[..18], f.projection()[18..36]);
        for d in 0..4 {
            let s: f64 = f.projection()[d * 18..(d + 1) * 18].iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_hole_centered() {
        let seg = segment(&["#####", "#...#", "#...#", "#...#", "#####"]);
        let o = occlusion_features(&seg).unwrap();
        assert_eq!(o[0], 1.0);
        assert!((o[1] - 9.0 / 25.0).abs() < 1e-15);
        assert_eq!((o[2], o[3]), (0.5, 0.5));
        assert_eq!((o[4], o[5]), (0.6, 0.6));
        assert_eq!(o[6], 0.0);
        assert_eq!(o[7], 1.0);
    }

    #[test]
    fn figure_eight_two_holes() {
        let seg = segment(&["###", "#.#", "###", "#.#", "###"]);
        let o = occlusion_features(&seg).unwrap();
        assert_eq!(o[0], 2.0);
        assert_eq!(o[6], 1.0);
    }

    #[test]
    fn diagonal_gap_is_not_a_hole() {
        // background touches the outside through a diagonal only
        let seg = segment(&["###", "#.#", "##."]);
        assert_eq!(occlusion_features(&seg).unwrap()[0], 1.0);
        let seg = segment(&["###", "#..", "##."]);
        assert_eq!(occlusion_features(&seg).unwrap()[0], 0.0);
    }

    #[test]
    fn empty_segment_rejected() {
        let seg = segment(&["...", "..."]);
        assert!(extract_features(&seg).is_err());
    }

    #[test]
    fn one_dot_above() {
        let mut seg = segment(&["....", "....", "####"]);
        seg.attached_diacritics.push(Diacritic {
            pixels: vec![(1, 0)],
            bbox: Rect::new(1, 0, 1, 1),
            position: DiacriticPosition::Above,
        });
        let d = diacritic_features(&seg);
        assert_eq!((d[0], d[1], d[7]), (1.0, 0.0, 1.0));
        assert_eq!(d[2], 0.2);
        assert_eq!((d[3], d[4]), (1.5 / 4.0, 0.5 / 3.0));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let mut v = FeatureVector160::zeros();
        v.0[3] = 0.125;
        v.0[159] = 1.0 / 3.0;
        let rows = vec![
            LabeledFeatures {
                features: v,
                label: Some("ب.ini".into()),
            },
            LabeledFeatures {
                features: FeatureVector160::zeros(),
                label: None,
            },
        ];
        write_feature_csv(&path, &rows).unwrap();
        assert_eq!(read_feature_csv(&path).unwrap(), rows);
    }

    #[test]
    fn csv_bad_number_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let mut text = csv_header().join(",") + "\n";
        text += &(vec!["0"; FEATURE_DIM].join(",") + ",a\n");
        text += &(vec!["x"; FEATURE_DIM].join(",") + ",a\n");
        std::fs::write(&path, text).unwrap();
        match read_feature_csv(&path) {
            Err(Error::Data { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
