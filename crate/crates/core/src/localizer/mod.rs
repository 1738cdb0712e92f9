//! Text/non-text classification of candidate bands and merging of the
//! accepted row and column bands into rectangular text zones.

mod features;
mod mlp;

pub use features::{band_features, BandAxis, BandFeatures, FramePlanes, SampleStats};
pub use mlp::{
    mlp_forward, mlp_train, mlp_train_with_report, sigmoid, Activations, MlpModel, Standardization, TrainParams,
    TrainReport, HIDDEN_DIM, INPUT_DIM, MODEL_VERSION, PARAM_COUNT,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mfi::{Band, CandidateBands};
use crate::pixelcore::{Rect, RgbFrame};

/// A localized caption rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextBox {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub score: f64,
}

impl TextBox {
    pub fn new(rect: Rect, score: f64) -> Self {
        TextBox {
            x: rect.x,
            y: rect.y,
            width: rect.width,
            height: rect.height,
            score,
        }
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.width, self.height)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizerParams {
    /// Bands scoring at or above this are accepted as text.
    pub threshold: f64,
    pub min_zone_width: usize,
    pub min_zone_height: usize,
}

impl Default for LocalizerParams {
    fn default() -> Self {
        LocalizerParams {
            threshold: 0.5,
            min_zone_width: 8,
            min_zone_height: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredBand {
    pub axis: BandAxis,
    pub band: Band,
    pub features: [f64; INPUT_DIM],
    pub score: f64,
}

/// Features of every row band, then every column band. Each band is
/// described over the crossing bands of the other axis only, i.e. over
/// what is left of the frame once both eliminations ran.
pub fn candidate_features(planes: &FramePlanes, bands: &CandidateBands) -> Result<Vec<(BandAxis, Band, [f64; INPUT_DIM])>> {
    let rows = bands.row_bands.iter().map(|&b| (BandAxis::Row, b));
    let cols = bands.col_bands.iter().map(|&b| (BandAxis::Column, b));
    rows.chain(cols)
        .map(|(axis, band)| {
            let across = match axis {
                BandAxis::Row => &bands.col_bands,
                BandAxis::Column => &bands.row_bands,
            };
            let f = planes.band_features_within(axis, band, across)?;
            Ok((axis, band, f.to_array()))
        })
        .collect()
}

/// Scores bands of one axis, each described over the `across` bands of
/// the other axis (the whole extent when empty).
pub fn score_bands(
    planes: &FramePlanes,
    axis: BandAxis,
    bands: &[Band],
    across: &[Band],
    model: &MlpModel,
) -> Result<Vec<ScoredBand>> {
    bands
        .iter()
        .map(|&band| {
            let features = planes.band_features_within(axis, band, across)?.to_array();
            let score = mlp_forward(model, &features)?;
            Ok(ScoredBand {
                axis,
                band,
                features,
                score,
            })
        })
        .collect()
}

/// Scores every row and column band of `bands`.
pub fn classify_bands(frame: &RgbFrame, bands: &CandidateBands, model: &MlpModel) -> Result<Vec<ScoredBand>> {
    let planes = FramePlanes::new(frame)?;
    let mut scored = score_bands(&planes, BandAxis::Row, &bands.row_bands, &bands.col_bands, model)?;
    scored.extend(score_bands(&planes, BandAxis::Column, &bands.col_bands, &bands.row_bands, model)?);
    Ok(scored)
}

/// Text zones are the rectangles where an accepted row band crosses an
/// accepted column band, scored by the lower of the two band scores.
pub fn localize_text_boxes(
    frame: &RgbFrame,
    bands: &CandidateBands,
    model: &MlpModel,
    params: &LocalizerParams,
) -> Result<Vec<TextBox>> {
    if !(params.threshold > 0.0 && params.threshold < 1.0) {
        return Err(Error::argument(format!("threshold {} outside (0, 1)", params.threshold)));
    }
    let scored = classify_bands(frame, bands, model)?;
    Ok(zones_from_scores(&scored, params))
}

pub fn zones_from_scores(scored: &[ScoredBand], params: &LocalizerParams) -> Vec<TextBox> {
    let accepted = |axis| {
        scored
            .iter()
            .filter(move |s| s.axis == axis && s.score >= params.threshold)
    };
    let mut boxes = Vec::new();
    for row in accepted(BandAxis::Row) {
        for col in accepted(BandAxis::Column) {
            let rect = Rect::new(
                col.band.start,
                row.band.start,
                col.band.thickness(),
                row.band.thickness(),
            );
            if rect.width >= params.min_zone_width && rect.height >= params.min_zone_height {
                boxes.push(TextBox::new(rect, row.score.min(col.score)));
            }
        }
    }
    boxes
}

/// One labeled band for localizer training.
pub type BandSample = ([f64; INPUT_DIM], bool);

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Data {
        path: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

/// Writes the band dataset: ten feature columns `f0..f9` and a `label`
/// column holding 1 for text, 0 for non-text.
pub fn write_band_csv(path: &Path, rows: &[BandSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = (0..INPUT_DIM).map(|i| format!("f{i}")).chain(["label".to_string()]);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for (x, label) in rows {
        let record = x.iter().map(|v| v.to_string()).chain([u8::from(*label).to_string()]);
        w.write_record(record).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_band_csv(path: &Path) -> Result<Vec<BandSample>> {
    let mut r = csv::ReaderBuilder::new()
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
        if record.len() != INPUT_DIM + 1 {
            return Err(bad(format!("expected {} fields, found {}", INPUT_DIM + 1, record.len())));
        }
        let mut x = [0.0; INPUT_DIM];
        for (i, slot) in x.iter_mut().enumerate() {
            *slot = record[i]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("field {i}: invalid number {:?}", &record[i])))?;
        }
        let label = match record[INPUT_DIM].trim() {
            "1" | "text" | "true" => true,
            "0" | "nontext" | "false" => false,
            other => return Err(bad(format!("invalid label {other:?}"))),
        };
        rows.push((x, label));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(axis: BandAxis, start: usize, end: usize, score: f64) -> ScoredBand {
        ScoredBand {
            axis,
            band: Band::new(start, end),
            features: [0.0; INPUT_DIM],
            score,
        }
    }

    #[test]
    fn no_accepted_bands_no_boxes() {
        let s = vec![scored(BandAxis::Row, 0, 20, 0.2), scored(BandAxis::Column, 0, 20, 0.9)];
        assert!(zones_from_scores(&s, &LocalizerParams::default()).is_empty());
        assert!(zones_from_scores(&[], &LocalizerParams::default()).is_empty());
    }

    #[test]
    fn single_intersection() {
        let s = vec![scored(BandAxis::Row, 10, 29, 0.8), scored(BandAxis::Column, 40, 99, 0.7)];
        let boxes = zones_from_scores(&s, &LocalizerParams::default());
        assert_eq!(boxes.len(), 1);
        assert_eq!(boxes[0].rect(), Rect::new(40, 10, 60, 20));
        assert_eq!(boxes[0].score, 0.7);
    }

    #[test]
    fn product_of_accepted_bands() {
        let s = vec![
            scored(BandAxis::Row, 0, 9, 0.9),
            scored(BandAxis::Row, 30, 39, 0.9),
            scored(BandAxis::Row, 50, 59, 0.1),
            scored(BandAxis::Column, 0, 9, 0.6),
            scored(BandAxis::Column, 20, 29, 0.6),
            scored(BandAxis::Column, 40, 49, 0.6),
        ];
        assert_eq!(zones_from_scores(&s, &LocalizerParams::default()).len(), 6);
    }

    #[test]
    fn small_zones_discarded() {
        let s = vec![scored(BandAxis::Row, 0, 6, 0.9), scored(BandAxis::Column, 0, 30, 0.9)];
        assert!(zones_from_scores(&s, &LocalizerParams::default()).is_empty());
    }

    #[test]
    fn threshold_must_be_open_unit_interval() {
        let frame = RgbFrame::new(crate::pixelcore::Grid::new(8, 8, [0u8; 3]), 0);
        let p = LocalizerParams {
            threshold: 1.0,
            ..Default::default()
        };
        assert!(localize_text_boxes(&frame, &CandidateBands::default(), &MlpModel::zeros(), &p).is_err());
    }

    #[test]
    fn band_csv_round_trip_and_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bands.csv");
        let rows = vec![([0.25; INPUT_DIM], true), ([-1.5; INPUT_DIM], false)];
        write_band_csv(&path, &rows).unwrap();
        assert_eq!(read_band_csv(&path).unwrap(), rows);

        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("1,2,3\n");
        std::fs::write(&path, text).unwrap();
        match read_band_csv(&path) {
            Err(Error::Data { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
