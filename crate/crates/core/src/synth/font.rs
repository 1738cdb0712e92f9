//! Packaged stroke templates for the 28 Arabic letters in their contextual
//! forms. Coordinates are in line units: a line is 26 units tall with the
//! baseline at `BASELINE`, y grows downward, and x grows to the right
//! within a glyph box whose right edge joins the previous letter.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LINE_UNITS: f64 = 26.0;
pub const BASELINE: f64 = 16.0;
pub const DOT_RADIUS: f64 = 1.2;
const DOT_SPACING: f64 = 3.4;
const STUB: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Isolated,
    Initial,
    Medial,
    Final,
}

impl Form {
    pub const ALL: [Form; 4] = [Form::Isolated, Form::Initial, Form::Medial, Form::Final];

    pub fn suffix(self) -> &'static str {
        match self {
            Form::Isolated => "iso",
            Form::Initial => "ini",
            Form::Medial => "med",
            Form::Final => "fin",
        }
    }

    fn joins_previous(self) -> bool {
        matches!(self, Form::Medial | Form::Final)
    }

    fn joins_next(self) -> bool {
        matches!(self, Form::Initial | Form::Medial)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Above,
    Below,
}

type Polyline = Vec<(f64, f64)>;

struct Shape {
    width: f64,
    strokes: Vec<Polyline>,
    /// Horizontal anchor of the dots.
    dot_x: f64,
}

struct Letter {
    code: char,
    joins_next: bool,
    dots: Option<(usize, Side)>,
    iso: fn() -> Shape,
    join: fn() -> Shape,
}

const B: f64 = BASELINE;

fn ellipse(cx: f64, cy: f64, rx: f64, ry: f64) -> Polyline {
    (0..=24)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / 24.0;
            (cx + rx * a.cos(), cy + ry * a.sin())
        })
        .collect()
}

fn shape(width: f64, dot_x: f64, strokes: Vec<Polyline>) -> Shape {
    Shape { width, strokes, dot_x }
}

fn alif() -> Shape {
    shape(2.0, 1.0, vec![vec![(1.0, 4.0), (1.0, B)]])
}

fn beh_iso() -> Shape {
    shape(11.0, 5.5, vec![vec![(0.0, 12.0), (0.8, B), (10.2, B), (11.0, 12.0)]])
}

fn tooth() -> Shape {
    shape(2.4, 1.2, vec![vec![(1.2, 11.0), (1.2, B)], vec![(0.0, B), (2.4, B)]])
}

fn noon_iso() -> Shape {
    shape(
        10.0,
        5.0,
        vec![vec![
            (0.0, 11.5),
            (0.4, B + 1.5),
            (2.0, 19.5),
            (5.0, 20.0),
            (8.0, 19.5),
            (9.6, B + 1.5),
            (10.0, 11.5),
        ]],
    )
}

fn yeh_iso() -> Shape {
    shape(
        10.0,
        4.5,
        vec![vec![
            (10.0, 11.0),
            (7.5, 11.0),
            (6.5, 13.0),
            (8.0, B),
            (9.5, 17.8),
            (8.5, 19.6),
            (4.0, 19.8),
            (1.0, 19.0),
            (0.0, 17.0),
        ]],
    )
}

fn hah_iso() -> Shape {
    shape(9.0, 4.5, vec![vec![(2.0, 10.5), (9.0, 10.5), (1.0, B), (8.0, B)]])
}

fn hah_join() -> Shape {
    shape(7.0, 3.5, vec![vec![(2.0, 10.5), (7.0, 10.5), (1.0, B), (5.0, B)]])
}

fn dal() -> Shape {
    shape(4.5, 2.5, vec![vec![(1.5, 10.0), (4.0, 13.5), (4.0, B), (0.0, B)]])
}

fn reh() -> Shape {
    shape(4.0, 3.5, vec![vec![(3.5, 12.5), (3.5, B), (2.0, 19.0), (0.0, 20.5)]])
}

fn teeth(x0: f64) -> Vec<Polyline> {
    [0.0, 3.0, 6.0]
        .iter()
        .map(|dx| vec![(x0 + dx, 12.5), (x0 + dx, B)])
        .collect()
}

fn seen_iso() -> Shape {
    let mut strokes = teeth(9.0);
    strokes.push(vec![(15.0, B), (6.0, B), (5.0, 18.5), (3.0, 19.8), (1.0, 19.3), (0.0, 17.5), (0.0, 13.5)]);
    shape(15.0, 12.0, strokes)
}

fn seen_join() -> Shape {
    let mut strokes = teeth(1.5);
    strokes.push(vec![(0.0, B), (9.0, B)]);
    shape(9.0, 4.5, strokes)
}

fn sad_loop(x0: f64) -> Polyline {
    vec![
        (x0, B),
        (x0, 12.5),
        (x0 + 3.0, 11.5),
        (x0 + 7.0, 12.0),
        (x0 + 8.0, 14.0),
        (x0 + 7.0, B),
        (x0, B),
    ]
}

fn sad_iso() -> Shape {
    shape(
        14.0,
        10.0,
        vec![
            sad_loop(6.0),
            vec![(6.0, B), (5.0, 18.5), (3.0, 19.8), (1.0, 19.3), (0.0, 17.5), (0.0, 13.5)],
        ],
    )
}

fn sad_join() -> Shape {
    shape(9.0, 5.0, vec![sad_loop(1.0)])
}

fn tah() -> Shape {
    shape(9.0, 6.5, vec![sad_loop(1.0), vec![(3.0, 4.0), (3.0, 12.0)]])
}

fn ain_iso() -> Shape {
    shape(
        8.0,
        5.0,
        vec![vec![
            (7.5, 10.5),
            (5.0, 9.5),
            (3.0, 10.5),
            (3.5, 13.0),
            (6.0, 14.0),
            (2.0, B),
            (0.5, 19.0),
            (1.5, 21.5),
            (7.0, 22.0),
        ]],
    )
}

fn ain_join() -> Shape {
    shape(7.0, 3.5, vec![vec![(6.0, 10.0), (2.0, 10.0), (1.0, 13.0), (2.5, B), (6.0, B), (6.0, 10.0)]])
}

fn feh_head(x0: f64) -> Polyline {
    vec![(x0, B), (x0, 12.5), (x0 + 2.5, 12.0), (x0 + 3.5, 13.5), (x0 + 3.0, B), (x0, B)]
}

fn feh_iso() -> Shape {
    shape(11.5, 9.8, vec![feh_head(8.0), vec![(8.0, B), (0.0, B), (0.0, 13.0)]])
}

fn qaf_iso() -> Shape {
    shape(
        10.0,
        7.8,
        vec![
            feh_head(6.0),
            vec![(9.0, B), (9.5, 18.5), (7.0, 20.0), (3.0, 20.0), (0.5, 18.5), (0.0, 14.0)],
        ],
    )
}

fn feh_join() -> Shape {
    shape(4.5, 2.2, vec![feh_head(0.5)])
}

fn kaf_iso() -> Shape {
    shape(
        11.0,
        6.0,
        vec![
            vec![(11.0, 4.0), (11.0, B), (0.5, B), (0.0, 13.0)],
            vec![(11.0, 8.0), (7.0, 10.0), (11.0, 12.0)],
        ],
    )
}

fn kaf_join() -> Shape {
    shape(5.0, 3.0, vec![vec![(5.0, 4.0), (5.0, B), (0.0, B)], vec![(5.0, 4.0), (2.0, 6.5)]])
}

fn lam_iso() -> Shape {
    shape(
        9.0,
        5.0,
        vec![vec![(9.0, 4.0), (9.0, B), (8.0, 18.5), (5.0, 20.0), (2.0, 19.5), (0.5, 17.5), (0.0, 13.5)]],
    )
}

fn lam_join() -> Shape {
    shape(3.0, 1.5, vec![vec![(2.0, 4.0), (2.0, B)], vec![(0.0, B), (3.0, B)]])
}

fn meem_iso() -> Shape {
    shape(9.0, 6.0, vec![ellipse(6.0, 13.6, 3.0, 2.4), vec![(3.0, 14.0), (2.5, 23.0)]])
}

fn meem_join() -> Shape {
    shape(7.0, 3.5, vec![ellipse(3.5, 13.6, 3.0, 2.4), vec![(0.0, B), (7.0, B)]])
}

fn heh_iso() -> Shape {
    shape(8.0, 4.0, vec![ellipse(4.0, 12.5, 3.5, 3.5)])
}

fn heh_join() -> Shape {
    shape(7.0, 3.5, vec![ellipse(3.5, 12.4, 3.0, 3.6), vec![(3.5, 8.8), (3.5, B)]])
}

fn waw() -> Shape {
    shape(
        9.0,
        6.0,
        vec![ellipse(6.0, 12.5, 2.6, 2.6), vec![(8.6, 12.5), (8.2, 17.0), (6.0, 19.5), (1.0, 20.5)]],
    )
}

const LETTERS: [Letter; 28] = [
    Letter { code: 'ا', joins_next: false, dots: None, iso: alif, join: alif },
    Letter { code: 'ب', joins_next: true, dots: Some((1, Side::Below)), iso: beh_iso, join: tooth },
    Letter { code: 'ت', joins_next: true, dots: Some((2, Side::Above)), iso: beh_iso, join: tooth },
    Letter { code: 'ث', joins_next: true, dots: Some((3, Side::Above)), iso: beh_iso, join: tooth },
    Letter { code: 'ج', joins_next: true, dots: Some((1, Side::Below)), iso: hah_iso, join: hah_join },
    Letter { code: 'ح', joins_next: true, dots: None, iso: hah_iso, join: hah_join },
    Letter { code: 'خ', joins_next: true, dots: Some((1, Side::Above)), iso: hah_iso, join: hah_join },
    Letter { code: 'د', joins_next: false, dots: None, iso: dal, join: dal },
    Letter { code: 'ذ', joins_next: false, dots: Some((1, Side::Above)), iso: dal, join: dal },
    Letter { code: 'ر', joins_next: false, dots: None, iso: reh, join: reh },
    Letter { code: 'ز', joins_next: false, dots: Some((1, Side::Above)), iso: reh, join: reh },
    Letter { code: 'س', joins_next: true, dots: None, iso: seen_iso, join: seen_join },
    Letter { code: 'ش', joins_next: true, dots: Some((3, Side::Above)), iso: seen_iso, join: seen_join },
    Letter { code: 'ص', joins_next: true, dots: None, iso: sad_iso, join: sad_join },
    Letter { code: 'ض', joins_next: true, dots: Some((1, Side::Above)), iso: sad_iso, join: sad_join },
    Letter { code: 'ط', joins_next: true, dots: None, iso: tah, join: tah },
    Letter { code: 'ظ', joins_next: true, dots: Some((1, Side::Above)), iso: tah, join: tah },
    Letter { code: 'ع', joins_next: true, dots: None, iso: ain_iso, join: ain_join },
    Letter { code: 'غ', joins_next: true, dots: Some((1, Side::Above)), iso: ain_iso, join: ain_join },
    Letter { code: 'ف', joins_next: true, dots: Some((1, Side::Above)), iso: feh_iso, join: feh_join },
    Letter { code: 'ق', joins_next: true, dots: Some((2, Side::Above)), iso: qaf_iso, join: feh_join },
    Letter { code: 'ك', joins_next: true, dots: None, iso: kaf_iso, join: kaf_join },
    Letter { code: 'ل', joins_next: true, dots: None, iso: lam_iso, join: lam_join },
    Letter { code: 'م', joins_next: true, dots: None, iso: meem_iso, join: meem_join },
    Letter { code: 'ن', joins_next: true, dots: Some((1, Side::Above)), iso: noon_iso, join: tooth },
    Letter { code: 'ه', joins_next: true, dots: None, iso: heh_iso, join: heh_join },
    Letter { code: 'و', joins_next: false, dots: None, iso: waw, join: waw },
    Letter { code: 'ي', joins_next: true, dots: Some((2, Side::Below)), iso: yeh_iso, join: tooth },
];

/// The 28 letters in alphabetical order.
pub fn alphabet() -> Vec<char> {
    LETTERS.iter().map(|l| l.code).collect()
}

fn letter(code: char) -> Option<&'static Letter> {
    LETTERS.iter().find(|l| l.code == code)
}

pub fn class_label(code: char, form: Form) -> String {
    format!("{code}.{}", form.suffix())
}

/// Forms a letter can take: all four for joining letters, isolated and
/// final for the six that never join the next letter.
pub fn forms_of(code: char) -> Vec<Form> {
    match letter(code) {
        Some(l) if l.joins_next => Form::ALL.to_vec(),
        Some(_) => vec![Form::Isolated, Form::Final],
        None => Vec::new(),
    }
}

/// Every class label the renderer can produce.
pub fn all_classes() -> Vec<String> {
    LETTERS
        .iter()
        .flat_map(|l| forms_of(l.code).into_iter().map(move |f| class_label(l.code, f)))
        .collect()
}

/// A glyph ready to draw, in line units relative to its box.
#[derive(Clone, Debug, PartialEq)]
pub struct GlyphTemplate {
    pub code: char,
    pub form: Form,
    /// Horizontal extent of stroke centres.
    pub width: f64,
    pub strokes: Vec<Vec<(f64, f64)>>,
    pub dots: Vec<(f64, f64)>,
}

impl GlyphTemplate {
    pub fn label(&self) -> String {
        class_label(self.code, self.form)
    }
}

/// Vertical extent of the strokes within `reach` units of column `x`.
fn local_extent(strokes: &[Polyline], x: f64, reach: f64) -> (f64, f64) {
    let mut extent = (f64::INFINITY, f64::NEG_INFINITY);
    for s in strokes {
        for w in s.windows(2) {
            for i in 0..=20 {
                let t = i as f64 / 20.0;
                let (px, py) = (w[0].0 + t * (w[1].0 - w[0].0), w[0].1 + t * (w[1].1 - w[0].1));
                if (px - x).abs() <= reach {
                    extent = (extent.0.min(py), extent.1.max(py));
                }
            }
        }
    }
    extent
}

fn place_dots(count: usize, side: Side, x: f64, strokes: &[Polyline], pen: f64) -> Vec<(f64, f64)> {
    let (top, bottom) = local_extent(strokes, x, 2.5);
    let clearance = pen / 2.0 + DOT_RADIUS + 1.3;
    let (row, apex) = match side {
        Side::Above => {
            let y = top.min(B - 5.0) - clearance;
            (y, y - 2.9)
        }
        Side::Below => {
            let y = bottom.max(B) + clearance;
            (y, y + 2.9)
        }
    };
    let h = DOT_SPACING / 2.0;
    match count {
        1 => vec![(x, row)],
        2 => vec![(x - h, row), (x + h, row)],
        _ => vec![(x - h, row), (x + h, row), (x, apex)],
    }
}

/// Template for `code` in `form`, with dots placed for pen width `pen`.
pub fn glyph_template(code: char, form: Form, pen: f64) -> Result<GlyphTemplate> {
    let l = letter(code).ok_or_else(|| Error::argument(format!("no template for {code:?}")))?;
    if !forms_of(code).contains(&form) {
        return Err(Error::argument(format!("{code} has no {} form", form.suffix())));
    }
    let base = if form.joins_next() { (l.join)() } else { (l.iso)() };
    let left = if form.joins_next() { STUB } else { 0.0 };
    let mut strokes: Vec<Polyline> = base
        .strokes
        .iter()
        .map(|s| s.iter().map(|&(x, y)| (x + left, y)).collect())
        .collect();
    let mut width = base.width + left;
    if form.joins_next() {
        strokes.push(vec![(0.0, B), (left + 0.5, B)]);
    }
    if form.joins_previous() {
        strokes.push(vec![(width - 0.5, B), (width + STUB, B)]);
        width += STUB;
    }
    let dots = l
        .dots
        .map(|(n, side)| place_dots(n, side, base.dot_x + left, &strokes, pen))
        .unwrap_or_default();
    Ok(GlyphTemplate {
        code,
        form,
        width,
        strokes,
        dots,
    })
}

/// Contextual forms of the letters of one word, in logical order.
pub fn shape_word(word: &str) -> Result<Vec<(char, Form)>> {
    let letters: Vec<&Letter> = word
        .chars()
        .map(|c| letter(c).ok_or_else(|| Error::argument(format!("no template for {c:?}"))))
        .collect::<Result<_>>()?;
    Ok(letters
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let prev = i > 0 && letters[i - 1].joins_next;
            let next = l.joins_next && i + 1 < letters.len();
            let form = match (prev, next) {
                (false, false) => Form::Isolated,
                (false, true) => Form::Initial,
                (true, true) => Form::Medial,
                (true, false) => Form::Final,
            };
            (l.code, form)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundred_classes() {
        let classes = all_classes();
        assert_eq!(classes.len(), 6 * 2 + 22 * 4);
        let unique: std::collections::BTreeSet<_> = classes.iter().collect();
        assert_eq!(unique.len(), classes.len());
    }

    #[test]
    fn contextual_forms() {
        let forms: Vec<Form> = shape_word("كتب").unwrap().into_iter().map(|(_, f)| f).collect();
        assert_eq!(forms, vec![Form::Initial, Form::Medial, Form::Final]);
        // alef never joins the next letter
        let forms: Vec<Form> = shape_word("باب").unwrap().into_iter().map(|(_, f)| f).collect();
        assert_eq!(forms, vec![Form::Initial, Form::Final, Form::Isolated]);
        assert!(shape_word("abc").is_err());
    }

    #[test]
    fn non_joining_letters_lack_initial_form() {
        assert!(glyph_template('ر', Form::Initial, 2.2).is_err());
        assert!(glyph_template('ر', Form::Final, 2.2).is_ok());
    }

    #[test]
    fn dots_clear_the_baseline_band() {
        for code in alphabet() {
            for form in forms_of(code) {
                let t = glyph_template(code, form, 2.6).unwrap();
                for &(_, y) in &t.dots {
                    let (lo, hi) = (y - DOT_RADIUS, y + DOT_RADIUS);
                    assert!(hi < B - 2.5 || lo > B + 2.5, "{} dot at {y}", t.label());
                    assert!(lo >= 0.0 && hi <= LINE_UNITS, "{} dot at {y}", t.label());
                }
            }
        }
    }
}
