//! Raster types shared by every pipeline stage, plus the handful of
//! pixel operations (color conversion, Sobel edges, projection profiles,
//! connected components) the later stages are built from.
//!
//! Images are addressed `(x, y)` with `x` the column and `y` the row,
//! origin top-left, stored row-major.

mod components;
pub mod io;
mod profile;

pub use components::{connected_components, remove_small_components, Component, ComponentLabeling, Connectivity};
pub use profile::{projection, scanline, transitions, Direction};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 2-D raster.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

pub type GrayImage = Grid<u8>;
pub type BinaryImage = Grid<bool>;
pub type HsvImage = Grid<Hsv>;
pub type RealImage = Grid<f64>;

impl<T: Clone> Grid<T> {
    /// # Panics
    /// Panics if either dimension is zero.
    pub fn new(width: usize, height: usize, fill: T) -> Self {
        assert!(width >= 1 && height >= 1, "grid dimensions must be positive");
        Grid {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::argument(format!("grid dimensions {width}x{height} must be positive")));
        }
        if data.len() != width * height {
            return Err(Error::argument(format!(
                "{} values do not fill a {width}x{height} grid",
                data.len()
            )));
        }
        Ok(Grid { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width >= 1 && height >= 1, "grid dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    /// Edge-replicating access: out-of-range coordinates clamp to the border.
    pub fn get_clamped(&self, x: isize, y: isize) -> &T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn crop(&self, rect: Rect) -> Result<Grid<T>> {
        if rect.width == 0 || rect.height == 0 || rect.right() > self.width || rect.bottom() > self.height {
            return Err(Error::argument(format!(
                "crop {rect:?} outside {}x{} image",
                self.width, self.height
            )));
        }
        Ok(Grid::from_fn(rect.width, rect.height, |x, y| {
            self.get(rect.x + x, rect.y + y).clone()
        }))
    }
}

impl BinaryImage {
    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Tight bounding box of the true pixels.
    pub fn bounding_box(&self) -> Option<Rect> {
        let mut bounds: Option<(usize, usize, usize, usize)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if *self.get(x, y) {
                    bounds = Some(match bounds {
                        None => (x, y, x, y),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                    });
                }
            }
        }
        bounds.map(|(x0, y0, x1, y1)| Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }

    /// Text pixels rendered black (0), background white (255).
    pub fn to_gray(&self) -> GrayImage {
        self.map(|&b| if b { 0 } else { 255 })
    }
}

/// Axis-aligned pixel rectangle; covers columns `x..x+width` and rows `y..y+height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Rect { x, y, width, height }
    }

    pub fn right(&self) -> usize {
        self.x + self.width
    }

    pub fn bottom(&self) -> usize {
        self.y + self.height
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }

    pub fn union(&self, other: &Rect) -> Rect {
        let x0 = self.x.min(other.x);
        let y0 = self.y.min(other.y);
        let x1 = self.right().max(other.right());
        let y1 = self.bottom().max(other.bottom());
        Rect::new(x0, y0, x1 - x0, y1 - y0)
    }

    /// Grows the rectangle by `margin` on every side, clipped to `width`x`height`.
    pub fn expand(&self, margin: usize, width: usize, height: usize) -> Rect {
        let x0 = self.x.saturating_sub(margin);
        let y0 = self.y.saturating_sub(margin);
        let x1 = (self.right() + margin).min(width);
        let y1 = (self.bottom() + margin).min(height);
        Rect::new(x0, y0, x1 - x0, y1 - y0)
    }
}

/// One video frame.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbFrame {
    pub pixels: Grid<[u8; 3]>,
    /// Ordinal within the source sequence.
    pub frame_index: usize,
}

impl RgbFrame {
    pub fn new(pixels: Grid<[u8; 3]>, frame_index: usize) -> Self {
        RgbFrame { pixels, frame_index }
    }

    pub fn width(&self) -> usize {
        self.pixels.width()
    }

    pub fn height(&self) -> usize {
        self.pixels.height()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Hsv {
    /// Degrees in `[0, 360)`.
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// BT.601 luma, rounded.
pub fn gray_value([r, g, b]: [u8; 3]) -> u8 {
    let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    y.round().clamp(0.0, 255.0) as u8
}

pub fn rgb_to_gray(frame: &RgbFrame) -> GrayImage {
    frame.pixels.map(|&p| gray_value(p))
}

/// Hexcone HSV of one pixel.
pub fn hsv_value([r, g, b]: [u8; 3]) -> Hsv {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    // rem_euclid can land exactly on 360 through rounding
    let h = if h >= 360.0 { h - 360.0 } else { h };
    Hsv { h, s, v: max }
}

pub fn rgb_to_hsv(frame: &RgbFrame) -> HsvImage {
    frame.pixels.map(|&p| hsv_value(p))
}

/// `|Gx| + |Gy|` with the 3x3 Sobel kernels, edge-replicated borders,
/// clamped to 8 bits.
pub fn sobel_magnitude(img: &GrayImage) -> Result<GrayImage> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::Size {
            width: w,
            height: h,
            min_width: 3,
            min_height: 3,
        });
    }
    let at = |x: isize, y: isize| *img.get_clamped(x, y) as i32;
    Ok(Grid::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let gx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
        let gy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1))
            - (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
        (gx.abs() + gy.abs()).min(255) as u8
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_of(pixels: Vec<[u8; 3]>, w: usize, h: usize) -> RgbFrame {
        RgbFrame::new(Grid::from_vec(w, h, pixels).unwrap(), 0)
    }

    #[test]
    fn gray_reference_values() {
        assert_eq!(gray_value([255, 255, 255]), 255);
        assert_eq!(gray_value([0, 0, 0]), 0);
        // 0.299 * 255 = 76.245
        assert_eq!(gray_value([255, 0, 0]), 76);
        let f = frame_of(vec![[255, 0, 0], [0, 0, 0]], 2, 1);
        assert_eq!(rgb_to_gray(&f).data(), &[76, 0]);
    }

    #[test]
    fn hsv_reference_values() {
        assert_eq!(hsv_value([0, 0, 0]), Hsv { h: 0.0, s: 0.0, v: 0.0 });
        let white = hsv_value([255, 255, 255]);
        assert_eq!((white.s, white.v), (0.0, 1.0));
        assert_eq!(hsv_value([255, 0, 0]), Hsv { h: 0.0, s: 1.0, v: 1.0 });
        assert!((hsv_value([0, 255, 0]).h - 120.0).abs() < 1e-12);
        assert!((hsv_value([0, 0, 255]).h - 240.0).abs() < 1e-12);
        // just below red on the wheel
        let magenta_red = hsv_value([255, 0, 1]);
        assert!(magenta_red.h > 359.0 && magenta_red.h < 360.0);
    }

    #[test]
    fn sobel_constant_is_zero() {
        for c in [0u8, 17, 255] {
            let img = Grid::new(5, 4, c);
            assert!(sobel_magnitude(&img).unwrap().data().iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn sobel_rejects_small_images() {
        assert!(matches!(sobel_magnitude(&Grid::new(2, 5, 0u8)), Err(Error::Size { .. })));
    }

    /// Plain 3x3 convolution with explicit padding, used as the oracle.
    fn sobel_oracle(img: &GrayImage) -> Vec<u8> {
        let kx = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
        let ky = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];
        let (w, h) = (img.width() as isize, img.height() as isize);
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let (mut gx, mut gy) = (0i32, 0i32);
                for dy in -1..=1isize {
                    for dx in -1..=1isize {
                        let px = (x + dx).clamp(0, w - 1) as usize;
                        let py = (y + dy).clamp(0, h - 1) as usize;
                        let v = *img.get(px, py) as i32;
                        gx += kx[(dy + 1) as usize][(dx + 1) as usize] * v;
                        gy += ky[(dy + 1) as usize][(dx + 1) as usize] * v;
                    }
                }
                out.push((gx.abs() + gy.abs()).min(255) as u8);
            }
        }
        out
    }

    #[test]
    fn sobel_vertical_step() {
        // step between columns 2 and 3
        let img = Grid::from_fn(6, 4, |x, _| if x <= 2 { 0u8 } else { 255 });
        let edges = sobel_magnitude(&img).unwrap();
        for y in 0..4 {
            assert_eq!(edges.row(y), &[0, 0, 255, 255, 0, 0]);
        }
        assert_eq!(edges.data(), sobel_oracle(&img).as_slice());
    }

    #[test]
    fn sobel_single_pixel_is_symmetric() {
        let mut img = Grid::new(7, 7, 0u8);
        img.set(3, 3, 40);
        let edges = sobel_magnitude(&img).unwrap();
        assert_eq!(edges.data(), sobel_oracle(&img).as_slice());
        // |Gx| + |Gy| of the 8 neighbours: corners 40+40, edges 80+0
        for (dx, dy, expected) in [(-1, -1, 80), (0, -1, 80), (1, 0, 80), (1, 1, 80), (0, 0, 0)] {
            let v = *edges.get((3 + dx) as usize, (3 + dy) as usize);
            assert_eq!(v, expected, "offset ({dx},{dy})");
        }
        for y in 0..7 {
            for x in 0..7 {
                assert_eq!(edges.get(x, y), edges.get(6 - x, y));
                assert_eq!(edges.get(x, y), edges.get(y, x));
            }
        }
    }

    #[test]
    fn rect_geometry() {
        let a = Rect::new(0, 0, 4, 4);
        let b = Rect::new(2, 2, 4, 4);
        assert_eq!(a.intersection(&b), Some(Rect::new(2, 2, 2, 2)));
        assert_eq!(a.union(&b), Rect::new(0, 0, 6, 6));
        assert_eq!(a.intersection(&Rect::new(4, 0, 1, 1)), None);
        assert_eq!(b.expand(3, 7, 100), Rect::new(0, 0, 7, 9));
    }

    #[test]
    fn bounding_box_of_binary() {
        let mut img = Grid::new(6, 5, false);
        assert_eq!(img.bounding_box(), None);
        img.set(1, 3, true);
        img.set(4, 1, true);
        assert_eq!(img.bounding_box(), Some(Rect::new(1, 1, 4, 3)));
    }
}
