//! Detection and recognition scoring against ground-truth annotations,
//! and the JSON Lines annotation format shared by all commands.

use std::collections::BTreeMap;
use std::io::{BufRead, BufWriter, Write};
use std::ops::AddAssign;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixelcore::Rect;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

pub fn iou(a: &Rect, b: &Rect) -> f64 {
    let inter = a.intersection(b).map_or(0, |r| r.area());
    let union = a.area() + b.area() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionTally {
    pub a_find: u64,
    pub a_false: u64,
    pub a_miss: u64,
}

impl AddAssign for DetectionTally {
    fn add_assign(&mut self, o: Self) {
        self.a_find += o.a_find;
        self.a_false += o.a_false;
        self.a_miss += o.a_miss;
    }
}

/// Greedy one-to-one matching in descending IoU order (ties by detection,
/// then truth index). Returns the `(detected, truth)` index pairs.
pub fn match_pairs(detected: &[Rect], truth: &[Rect], iou_threshold: f64) -> Vec<(usize, usize)> {
    let mut candidates = Vec::new();
    for (i, d) in detected.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let v = iou(d, t);
            if v >= iou_threshold && v > 0.0 {
                candidates.push((v, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_d = vec![false; detected.len()];
    let mut used_t = vec![false; truth.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !used_d[i] && !used_t[j] {
            used_d[i] = true;
            used_t[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

pub fn match_detections(detected: &[Rect], truth: &[Rect], iou_threshold: f64) -> DetectionTally {
    let found = match_pairs(detected, truth, iou_threshold).len() as u64;
    DetectionTally {
        a_find: found,
        a_false: detected.len() as u64 - found,
        a_miss: truth.len() as u64 - found,
    }
}

fn ratio(num: u64, den: u64) -> Option<Ratio<u64>> {
    (den > 0).then(|| Ratio::new(num, den))
}

/// `(recall, precision)`; `None` where the denominator is zero.
pub fn recall_precision(t: &DetectionTally) -> (Option<Ratio<u64>>, Option<Ratio<u64>>) {
    (ratio(t.a_find, t.a_find + t.a_miss), ratio(t.a_find, t.a_find + t.a_false))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecognitionTally {
    pub correct_chars: u64,
    pub total_chars: u64,
    pub correct_words: u64,
    pub total_words: u64,
}

impl AddAssign for RecognitionTally {
    fn add_assign(&mut self, o: Self) {
        self.correct_chars += o.correct_chars;
        self.total_chars += o.total_chars;
        self.correct_words += o.correct_words;
        self.total_words += o.total_words;
    }
}

/// `(CR, WR)` as percentages.
pub fn char_word_rates(t: &RecognitionTally) -> (Option<Ratio<u64>>, Option<Ratio<u64>>) {
    (
        ratio(100 * t.correct_chars, t.total_chars),
        ratio(100 * t.correct_words, t.total_words),
    )
}

pub fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Number of aligned identical positions in a minimum-edit alignment of
/// `pred` against `truth`. Among minimum-cost alignments the one with the
/// most matches is taken.
pub fn aligned_matches<T: PartialEq>(pred: &[T], truth: &[T]) -> usize {
    // (cost, -matches) compared lexicographically
    let (n, m) = (pred.len(), truth.len());
    let mut dp = vec![vec![(0usize, 0isize); m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = (i, 0);
    }
    for j in 0..=m {
        dp[0][j] = (j, 0);
    }
    for i in 1..=n {
        for j in 1..=m {
            let same = pred[i - 1] == truth[j - 1];
            let (c, k) = dp[i - 1][j - 1];
            let diag = (c + usize::from(!same), k - isize::from(same));
            let (c, k) = dp[i - 1][j];
            let up = (c + 1, k);
            let (c, k) = dp[i][j - 1];
            let left = (c + 1, k);
            dp[i][j] = diag.min(up).min(left);
        }
    }
    (-dp[n][m].1) as usize
}

/// Characters exclude whitespace; words are split on Unicode whitespace.
pub fn score_line(pred: &str, truth: &str) -> RecognitionTally {
    let pc: Vec<char> = pred.chars().filter(|c| !c.is_whitespace()).collect();
    let tc: Vec<char> = truth.chars().filter(|c| !c.is_whitespace()).collect();
    let pw: Vec<&str> = pred.split_whitespace().collect();
    let tw: Vec<&str> = truth.split_whitespace().collect();
    RecognitionTally {
        correct_chars: aligned_matches(&pc, &tc) as u64,
        total_chars: tc.len() as u64,
        correct_words: aligned_matches(&pw, &tw) as u64,
        total_words: tw.len() as u64,
    }
}

pub fn score_recognition(predicted: &[String], truth: &[String]) -> Result<RecognitionTally> {
    if predicted.len() != truth.len() {
        return Err(Error::argument(format!(
            "{} predicted lines for {} truth lines",
            predicted.len(),
            truth.len()
        )));
    }
    let mut tally = RecognitionTally::default();
    for (p, t) in predicted.iter().zip(truth) {
        tally += score_line(p, t);
    }
    Ok(tally)
}

/// Per-glyph classification detail in recognition output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlyphRecord {
    pub label: String,
    pub membership: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glyphs: Option<Vec<GlyphRecord>>,
}

impl AnnotatedBox {
    pub fn new(rect: Rect, text: impl Into<String>) -> Self {
        AnnotatedBox {
            x: rect.x,
            y: rect.y,
            w: rect.width,
            h: rect.height,
            text: text.into(),
            score: None,
            corrected: None,
            glyphs: None,
        }
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.w, self.h)
    }

    /// The corrected text when present, else the raw text.
    pub fn final_text(&self) -> &str {
        self.corrected.as_deref().unwrap_or(&self.text)
    }
}

/// One JSON Lines record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameAnnotation {
    pub frame: String,
    pub boxes: Vec<AnnotatedBox>,
}

pub fn read_annotations(path: &Path) -> Result<Vec<FrameAnnotation>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Data {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_annotations(path: &Path, records: &[FrameAnnotation]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tallies {
    pub detection: DetectionTally,
    pub recognition: RecognitionTally,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub cr: Option<f64>,
    pub wr: Option<f64>,
    pub tallies: Tallies,
}

impl EvaluationReport {
    pub fn from_tallies(detection: DetectionTally, recognition: RecognitionTally) -> Self {
        let (recall, precision) = recall_precision(&detection);
        let (cr, wr) = char_word_rates(&recognition);
        EvaluationReport {
            recall: recall.map(to_f64),
            precision: precision.map(to_f64),
            cr: cr.map(to_f64),
            wr: wr.map(to_f64),
            tallies: Tallies { detection, recognition },
        }
    }

    pub fn table(&self) -> String {
        let fmt = |v: Option<f64>, pct: bool| match v {
            None => "undefined".to_string(),
            Some(v) if pct => format!("{v:.2}%"),
            Some(v) => format!("{v:.4}"),
        };
        let d = &self.tallies.detection;
        let r = &self.tallies.recognition;
        let mut s = String::new();
        s += &format!("{:<10} {:>12}\n", "metric", "value");
        s += &format!("{:<10} {:>12}\n", "recall", fmt(self.recall, false));
        s += &format!("{:<10} {:>12}\n", "precision", fmt(self.precision, false));
        s += &format!("{:<10} {:>12}\n", "CR", fmt(self.cr, true));
        s += &format!("{:<10} {:>12}\n", "WR", fmt(self.wr, true));
        s += &format!("find={} false={} miss={}\n", d.a_find, d.a_false, d.a_miss);
        s += &format!(
            "chars {}/{}  words {}/{}\n",
            r.correct_chars, r.total_chars, r.correct_words, r.total_words
        );
        s
    }
}

/// Frames are paired by their `frame` key. Predicted frames absent from
/// the truth contribute false detections. Recognition is scored over
/// truth boxes with a non-empty transcription; a missed box scores as an
/// empty prediction.
pub fn evaluate(predicted: &[FrameAnnotation], truth: &[FrameAnnotation], iou_threshold: f64) -> EvaluationReport {
    let mut by_frame: BTreeMap<&str, Vec<&AnnotatedBox>> = BTreeMap::new();
    for p in predicted {
        by_frame.entry(p.frame.as_str()).or_default().extend(&p.boxes);
    }
    let mut det = DetectionTally::default();
    let mut rec = RecognitionTally::default();
    for t in truth {
        let preds = by_frame.remove(t.frame.as_str()).unwrap_or_default();
        let d_rects: Vec<Rect> = preds.iter().map(|b| b.rect()).collect();
        let t_rects: Vec<Rect> = t.boxes.iter().map(|b| b.rect()).collect();
        let pairs = match_pairs(&d_rects, &t_rects, iou_threshold);
        det += DetectionTally {
            a_find: pairs.len() as u64,
            a_false: (d_rects.len() - pairs.len()) as u64,
            a_miss: (t_rects.len() - pairs.len()) as u64,
        };
        for (j, tb) in t.boxes.iter().enumerate() {
            if tb.text.trim().is_empty() {
                continue;
            }
            let pred = pairs
                .iter()
                .find(|&&(_, tj)| tj == j)
                .map_or("", |&(i, _)| preds[i].final_text());
            rec += score_line(pred, &tb.text);
        }
    }
    for leftover in by_frame.values() {
        det.a_false += leftover.len() as u64;
    }
    EvaluationReport::from_tallies(det, rec)
}
