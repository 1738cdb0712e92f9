//! Fuzzy k-nearest-neighbour glyph classification against a labelled
//! prototype base, line assembly, and lexicon correction.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glyphfeat::{extract_features, FeatureVector160, FEATURE_DIM, FEATURE_LAYOUT_ID};
use crate::textline::GlyphSegment;

pub const MODEL_VERSION: u32 = 1;
const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuzzyKnnParams {
    pub k: usize,
    /// Fuzzifier; neighbour weights are `d^(-2/(m-1))`.
    pub m: f64,
}

impl Default for FuzzyKnnParams {
    fn default() -> Self {
        FuzzyKnnParams { k: 10, m: 2.0 }
    }
}

impl FuzzyKnnParams {
    pub fn validate(&self, base_size: usize) -> Result<()> {
        if self.k == 0 || self.k > base_size {
            return Err(Error::argument(format!("k = {} must be in 1..={base_size}", self.k)));
        }
        if !(self.m > 1.0 && self.m.is_finite()) {
            return Err(Error::argument(format!("fuzzifier m = {} must exceed 1", self.m)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prototype {
    pub vector: FeatureVector160,
    /// One entry per class, summing to 1.
    pub memberships: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeSet {
    pub classes: Vec<String>,
    pub prototypes: Vec<Prototype>,
    pub feature_layout_id: String,
    /// Classification parameters stored with the model.
    pub params: FuzzyKnnParams,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    feature_layout_id: String,
    classes: Vec<String>,
    prototypes: Vec<PrototypeRecord>,
    params: FuzzyKnnParams,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrototypeRecord {
    vector: Vec<f64>,
    memberships: Vec<f64>,
}

impl PrototypeSet {
    pub fn new(classes: Vec<String>, prototypes: Vec<Prototype>, params: FuzzyKnnParams) -> Result<Self> {
        let set = PrototypeSet {
            classes,
            prototypes,
            feature_layout_id: FEATURE_LAYOUT_ID.to_string(),
            params,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::argument("prototype set has no classes"));
        }
        let unique: BTreeSet<&String> = self.classes.iter().collect();
        if unique.len() != self.classes.len() {
            return Err(Error::argument("duplicate class labels"));
        }
        for (i, p) in self.prototypes.iter().enumerate() {
            if p.memberships.len() != self.classes.len() {
                return Err(Error::argument(format!("prototype {i} has {} memberships", p.memberships.len())));
            }
            let sum: f64 = p.memberships.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE || p.memberships.iter().any(|u| !(0.0..=1.0).contains(u)) {
                return Err(Error::argument(format!("prototype {i} memberships invalid (sum {sum})")));
            }
            if p.vector.0.iter().any(|v| !v.is_finite()) {
                return Err(Error::argument(format!("prototype {i} has a non-finite feature")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.prototypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prototypes.is_empty()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            version: MODEL_VERSION,
            feature_layout_id: self.feature_layout_id.clone(),
            classes: self.classes.clone(),
            prototypes: self
                .prototypes
                .iter()
                .map(|p| PrototypeRecord {
                    vector: p.vector.0.to_vec(),
                    memberships: p.memberships.clone(),
                })
                .collect(),
            params: self.params,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_VERSION {
            return Err(Error::Config(format!("unsupported prototype model version {}", file.version)));
        }
        let prototypes = file
            .prototypes
            .into_iter()
            .map(|r| {
                Ok(Prototype {
                    vector: FeatureVector160::from_slice(&r.vector)?,
                    memberships: r.memberships,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let set = PrototypeSet {
            classes: file.classes,
            prototypes,
            feature_layout_id: file.feature_layout_id,
            params: file.params,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Format {
                path: path.to_path_buf(),
                message: j.to_string(),
            },
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassMembership {
    pub u: Vec<f64>,
    /// Index into the class alphabet.
    pub predicted: usize,
    pub runner_up_margin: f64,
}

impl ClassMembership {
    pub fn from_memberships(u: Vec<f64>) -> Self {
        let mut predicted = 0;
        for (j, &v) in u.iter().enumerate() {
            if v > u[predicted] {
                predicted = j;
            }
        }
        let runner_up = u
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != predicted)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let runner_up_margin = if runner_up.is_finite() { u[predicted] - runner_up } else { u[predicted] };
        ClassMembership {
            u,
            predicted,
            runner_up_margin,
        }
    }
}

/// Indices of the `k` nearest rows to `query`; ties go to the lower index.
pub fn nearest_neighbors<'a>(query: &[f64], rows: impl Iterator<Item = &'a [f64]>, k: usize) -> Vec<(usize, f64)> {
    let mut d: Vec<(usize, f64)> = rows
        .enumerate()
        .map(|(i, r)| (i, r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()))
        .collect();
    d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    d.truncate(k);
    d
}

/// Class memberships of `query` given its neighbours and their membership
/// rows. If any prototype coincides with the query, the coincident rows
/// are averaged instead.
pub fn weighted_memberships(neighbors: &[(usize, f64)], rows: &[&[f64]], coincident: &[usize], m: f64) -> Vec<f64> {
    let classes = rows.first().map_or(0, |r| r.len());
    let mut u = vec![0.0; classes];
    if !coincident.is_empty() {
        for &i in coincident {
            for (acc, v) in u.iter_mut().zip(rows[i]) {
                *acc += v;
            }
        }
        let n = coincident.len() as f64;
        u.iter_mut().for_each(|v| *v /= n);
        return u;
    }
    let exponent = 2.0 / (m - 1.0);
    let mut total = 0.0;
    for &(i, d) in neighbors {
        let w = d.powf(-exponent);
        total += w;
        for (acc, v) in u.iter_mut().zip(rows[i]) {
            *acc += w * v;
        }
    }
    u.iter_mut().for_each(|v| *v /= total);
    u
}

pub fn fuzzy_knn_membership(query: &FeatureVector160, base: &PrototypeSet, params: &FuzzyKnnParams) -> Result<ClassMembership> {
    if base.feature_layout_id != FEATURE_LAYOUT_ID {
        return Err(Error::Config(format!(
            "prototype layout {} does not match feature layout {FEATURE_LAYOUT_ID}",
            base.feature_layout_id
        )));
    }
    params.validate(base.len())?;
    let vectors = base.prototypes.iter().map(|p| p.vector.as_slice());
    let neighbors = nearest_neighbors(query.as_slice(), vectors, params.k);
    let coincident: Vec<usize> = base
        .prototypes
        .iter()
        .enumerate()
        .filter(|(_, p)| p.vector == *query)
        .map(|(i, _)| i)
        .collect();
    let rows: Vec<&[f64]> = base.prototypes.iter().map(|p| p.memberships.as_slice()).collect();
    Ok(ClassMembership::from_memberships(weighted_memberships(
        &neighbors,
        &rows,
        &coincident,
        params.m,
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipMode {
    Crisp,
    KnnSoft,
}

/// Builds a prototype base with one prototype per example. Classes are
/// the sorted distinct labels. In soft mode each row follows the Keller
/// initialisation over the `k_init` nearest other examples.
pub fn train_prototypes(
    labeled: &[(FeatureVector160, String)],
    mode: MembershipMode,
    k_init: usize,
    params: FuzzyKnnParams,
) -> Result<PrototypeSet> {
    if labeled.is_empty() {
        return Err(Error::argument("no labelled examples"));
    }
    let classes: Vec<String> = labeled
        .iter()
        .map(|(_, l)| l.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index_of = |label: &str| classes.binary_search_by(|c| c.as_str().cmp(label)).expect("label present");
    let labels: Vec<usize> = labeled.iter().map(|(_, l)| index_of(l)).collect();
    let prototypes = match mode {
        MembershipMode::Crisp => labeled
            .iter()
            .zip(&labels)
            .map(|((v, _), &c)| {
                let mut row = vec![0.0; classes.len()];
                row[c] = 1.0;
                Prototype {
                    vector: *v,
                    memberships: row,
                }
            })
            .collect(),
        MembershipMode::KnnSoft => {
            if k_init == 0 {
                return Err(Error::argument("k_init must be positive"));
            }
            let k = k_init.min(labeled.len() - 1);
            (0..labeled.len())
                .map(|i| {
                    let mut row = vec![0.0; classes.len()];
                    if k == 0 {
                        row[labels[i]] = 1.0;
                    } else {
                        let others = labeled
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, (v, _))| v.as_slice());
                        let skip_self = |j: usize| if j >= i { j + 1 } else { j };
                        for (j, _) in nearest_neighbors(labeled[i].0.as_slice(), others, k) {
                            row[labels[skip_self(j)]] += 0.49 / k as f64;
                        }
                        row[labels[i]] += 0.51;
                    }
                    Prototype {
                        vector: labeled[i].0,
                        memberships: row,
                    }
                })
                .collect()
        }
    };
    PrototypeSet::new(classes, prototypes, params)
}

/// The glyph code of a class label, i.e. the part before the first `.`
/// (`"ب.ini"` gives `"ب"`).
pub fn glyph_code(label: &str) -> &str {
    label.split('.').next().unwrap_or(label)
}

/// Classifies segments in the given (reading) order and concatenates their
/// glyph codes.
pub fn recognize_line(
    segments: &[GlyphSegment],
    base: &PrototypeSet,
    params: &FuzzyKnnParams,
) -> Result<(String, Vec<ClassMembership>)> {
    recognize_line_with_words(segments, base, params, 0)
}

/// Like [`recognize_line`], but inserts a space wherever the column gap
/// between consecutive segments is at least `word_gap` (0 disables).
pub fn recognize_line_with_words(
    segments: &[GlyphSegment],
    base: &PrototypeSet,
    params: &FuzzyKnnParams,
    word_gap: usize,
) -> Result<(String, Vec<ClassMembership>)> {
    let mut text = String::new();
    let mut memberships = Vec::with_capacity(segments.len());
    for (i, seg) in segments.iter().enumerate() {
        if word_gap > 0 && i > 0 {
            // reading order is right to left
            let gap = segments[i - 1].column_span.0.saturating_sub(seg.column_span.1 + 1);
            if gap >= word_gap {
                text.push(' ');
            }
        }
        let m = fuzzy_knn_membership(&extract_features(seg)?, base, params)?;
        text.push_str(glyph_code(&base.classes[m.predicted]));
        memberships.push(m);
    }
    Ok((text, memberships))
}

/// Edit distance over arbitrary sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Replaces `text` by the unique closest lexicon word within
/// `max_edit_distance`; otherwise returns it unchanged.
pub fn lexicon_correct(text: &str, lexicon: &[String], max_edit_distance: usize) -> String {
    if lexicon.is_empty() || lexicon.iter().any(|w| w == text) {
        return text.to_string();
    }
    let chars: Vec<char> = text.chars().collect();
    let mut best: Option<(usize, &String)> = None;
    let mut tied = false;
    for word in lexicon {
        let d = levenshtein(&chars, &word.chars().collect::<Vec<_>>());
        match best {
            Some((bd, _)) if d > bd => {}
            Some((bd, bw)) if d == bd => tied |= bw != word,
            _ => {
                best = Some((d, word));
                tied = false;
            }
        }
    }
    match best {
        Some((d, word)) if d <= max_edit_distance && !tied => word.clone(),
        _ => text.to_string(),
    }
}

/// Applies [`lexicon_correct`] to each whitespace-separated word.
pub fn lexicon_correct_line(text: &str, lexicon: &[String], max_edit_distance: usize) -> String {
    text.split_whitespace()
        .map(|w| lexicon_correct(w, lexicon, max_edit_distance))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One word per line; blank lines are skipped.
pub fn load_lexicon(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// Rows of a plain feature matrix, for callers that build prototype sets
/// without glyph segments.
pub fn prototype_from_values(values: &[f64], memberships: Vec<f64>) -> Result<Prototype> {
    if values.len() != FEATURE_DIM {
        return Err(Error::argument(format!("expected {FEATURE_DIM} features")));
    }
    Ok(Prototype {
        vector: FeatureVector160::from_slice(values)?,
        memberships,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_at(x: f64) -> FeatureVector160 {
        let mut v = FeatureVector160::zeros();
        v.0[0] = x;
        v
    }

    fn crisp(classes: usize, c: usize) -> Vec<f64> {
        let mut r = vec![0.0; classes];
        r[c] = 1.0;
        r
    }

    fn two_class_base(points: &[(f64, usize)]) -> PrototypeSet {
        PrototypeSet::new(
            vec!["A".into(), "B".into()],
            points
                .iter()
                .map(|&(x, c)| Prototype {
                    vector: vec_at(x),
                    memberships: crisp(2, c),
                })
                .collect(),
            FuzzyKnnParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn weights_one_and_quarter() {
        let base = two_class_base(&[(1.0, 0), (-2.0, 1)]);
        let m = fuzzy_knn_membership(&vec_at(0.0), &base, &FuzzyKnnParams { k: 2, m: 2.0 }).unwrap();
        assert!((m.u[0] - 0.8).abs() < 1e-15);
        assert!((m.u[1] - 0.2).abs() < 1e-15);
        assert_eq!(m.predicted, 0);
    }

    #[test]
    fn equidistant_split() {
        let base = two_class_base(&[(1.0, 0), (-1.0, 1)]);
        let m = fuzzy_knn_membership(&vec_at(0.0), &base, &FuzzyKnnParams { k: 2, m: 2.0 }).unwrap();
        assert_eq!(m.u, vec![0.5, 0.5]);
        assert_eq!(m.predicted, 0);
        assert_eq!(m.runner_up_margin, 0.0);
    }

    #[test]
    fn coincident_prototypes_averaged() {
        let base = two_class_base(&[(0.0, 0), (0.0, 1), (5.0, 1)]);
        let m = fuzzy_knn_membership(&vec_at(0.0), &base, &FuzzyKnnParams { k: 1, m: 2.0 }).unwrap();
        assert_eq!(m.u, vec![0.5, 0.5]);
    }

    #[test]
    fn k_bounds_and_layout() {
        let mut base = two_class_base(&[(1.0, 0)]);
        assert!(fuzzy_knn_membership(&vec_at(0.0), &base, &FuzzyKnnParams { k: 2, m: 2.0 }).is_err());
        base.feature_layout_id = "other".into();
        assert!(matches!(
            fuzzy_knn_membership(&vec_at(0.0), &base, &FuzzyKnnParams { k: 1, m: 2.0 }),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn crisp_training_one_hot() {
        let data = vec![(vec_at(0.0), "B".to_string()), (vec_at(1.0), "A".to_string())];
        let set = train_prototypes(&data, MembershipMode::Crisp, 3, FuzzyKnnParams::default()).unwrap();
        assert_eq!(set.classes, vec!["A", "B"]);
        assert_eq!(set.prototypes[0].memberships, vec![0.0, 1.0]);
        assert_eq!(set.prototypes[1].memberships, vec![1.0, 0.0]);
        assert!(train_prototypes(&[], MembershipMode::Crisp, 3, FuzzyKnnParams::default()).is_err());
    }

    #[test]
    fn keller_rows() {
        // A at 0, 1, 2; B at 10, 11, 12. k_init = 2.
        let data: Vec<_> = [(0.0, "A"), (1.0, "A"), (2.0, "A"), (10.0, "B"), (11.0, "B"), (2.6, "B")]
            .iter()
            .map(|&(x, l)| (vec_at(x), l.to_string()))
            .collect();
        let set = train_prototypes(&data, MembershipMode::KnnSoft, 2, FuzzyKnnParams::default()).unwrap();
        // point 0: neighbours 1 (A), 2 (A)
        assert_eq!(set.prototypes[0].memberships, vec![1.0, 0.0]);
        // point 2 (x=2, A): neighbours 2.6 (B), 1 (A)
        let r = &set.prototypes[2].memberships;
        assert!((r[0] - (0.51 + 0.245)).abs() < 1e-15 && (r[1] - 0.245).abs() < 1e-15);
        // point 5 (x=2.6, B): neighbours 2 (A), 1 (A)
        let r = &set.prototypes[5].memberships;
        assert!((r[0] - 0.49).abs() < 1e-15 && (r[1] - 0.51).abs() < 1e-15);
    }

    #[test]
    fn model_json_round_trip() {
        let base = two_class_base(&[(1.0, 0), (0.25, 1)]);
        let back = PrototypeSet::from_json(&base.to_json().unwrap()).unwrap();
        assert_eq!(back, base);
        let bad = base.to_json().unwrap().replace("\"version\":1", "\"version\":9");
        assert!(PrototypeSet::from_json(&bad).is_err());
    }

    #[test]
    fn levenshtein_basics() {
        let c = |s: &str| s.chars().collect::<Vec<_>>();
        assert_eq!(levenshtein(&c("kitten"), &c("sitting")), 3);
        assert_eq!(levenshtein(&c(""), &c("abc")), 3);
        assert_eq!(levenshtein(&c("كتت"), &c("كتب")), 1);
    }

    #[test]
    fn lexicon_rules() {
        let lex = vec!["كتب".to_string()];
        assert_eq!(lexicon_correct("كتت", &lex, 1), "كتب");
        assert_eq!(lexicon_correct("كتب", &lex, 1), "كتب");
        assert_eq!(lexicon_correct("كتت", &[], 1), "كتت");
        assert_eq!(lexicon_correct("xyz", &lex, 1), "xyz");
        let tie = vec!["ab".to_string(), "ba".to_string()];
        assert_eq!(lexicon_correct("aa", &tie, 1), "aa");
    }

    #[test]
    fn glyph_codes() {
        assert_eq!(glyph_code("ب.ini"), "ب");
        assert_eq!(glyph_code("ا"), "ا");
    }
}
