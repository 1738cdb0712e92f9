use serde::{Deserialize, Serialize};

use super::BinaryImage;

/// Scan direction for projection and transition profiles.
///
/// Bin indexing: horizontal bins are rows, vertical bins are columns,
/// diagonal bins are `x - y + height - 1` and anti-diagonal bins `x + y`.
/// Within a diagonal or anti-diagonal scanline pixels are visited in
/// increasing `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Horizontal,
    Vertical,
    Diagonal,
    AntiDiagonal,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Horizontal,
        Direction::Vertical,
        Direction::Diagonal,
        Direction::AntiDiagonal,
    ];

    pub fn bin_count(self, width: usize, height: usize) -> usize {
        match self {
            Direction::Horizontal => height,
            Direction::Vertical => width,
            Direction::Diagonal | Direction::AntiDiagonal => width + height - 1,
        }
    }
}

/// Pixel coordinates of scanline `index`, in scan order.
pub fn scanline(direction: Direction, width: usize, height: usize, index: usize) -> impl Iterator<Item = (usize, usize)> {
    let (start, step, len): ((usize, usize), (isize, isize), usize) = match direction {
        Direction::Horizontal => ((0, index), (1, 0), width),
        Direction::Vertical => ((index, 0), (0, 1), height),
        Direction::Diagonal => {
            let k = index as isize - (height as isize - 1);
            let start = if k >= 0 { (k as usize, 0) } else { (0, (-k) as usize) };
            let len = (width - start.0).min(height - start.1);
            (start, (1, 1), len)
        }
        Direction::AntiDiagonal => {
            let x0 = index.saturating_sub(height - 1);
            let start = (x0, index - x0);
            let len = (width - x0).min(start.1 + 1);
            (start, (1, -1), len)
        }
    };
    (0..len).map(move |i| {
        let i = i as isize;
        (
            (start.0 as isize + step.0 * i) as usize,
            (start.1 as isize + step.1 * i) as usize,
        )
    })
}

/// True-pixel count per scanline.
pub fn projection(img: &BinaryImage, direction: Direction) -> Vec<usize> {
    let (w, h) = (img.width(), img.height());
    (0..direction.bin_count(w, h))
        .map(|i| scanline(direction, w, h, i).filter(|&(x, y)| *img.get(x, y)).count())
        .collect()
}

/// Count of adjacent `(false, true)` pairs per scanline.
pub fn transitions(img: &BinaryImage, direction: Direction) -> Vec<usize> {
    let (w, h) = (img.width(), img.height());
    (0..direction.bin_count(w, h))
        .map(|i| {
            let mut prev: Option<bool> = None;
            let mut rising = 0;
            for (x, y) in scanline(direction, w, h, i) {
                let cur = *img.get(x, y);
                if prev == Some(false) && cur {
                    rising += 1;
                }
                prev = Some(cur);
            }
            rising
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pixelcore::Grid;

    fn from_rows(rows: &[&str]) -> BinaryImage {
        let h = rows.len();
        let w = rows[0].len();
        Grid::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'#')
    }

    #[test]
    fn full_square_rows() {
        let img = Grid::new(3, 3, true);
        assert_eq!(projection(&img, Direction::Horizontal), vec![3, 3, 3]);
        assert_eq!(projection(&img, Direction::Diagonal), vec![1, 2, 3, 2, 1]);
        assert_eq!(projection(&img, Direction::AntiDiagonal), vec![1, 2, 3, 2, 1]);
    }

    #[test]
    fn empty_image_profiles_are_zero() {
        let img = Grid::new(4, 2, false);
        for d in Direction::ALL {
            let p = projection(&img, d);
            assert_eq!(p.len(), d.bin_count(4, 2));
            assert!(p.iter().all(|&c| c == 0));
            assert!(transitions(&img, d).iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn identity_diagonal() {
        let img = from_rows(&["#..", ".#.", "..#"]);
        // x - y + 2 == 2 for all three pixels
        assert_eq!(projection(&img, Direction::Diagonal), vec![0, 0, 3, 0, 0]);
        assert_eq!(projection(&img, Direction::AntiDiagonal), vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn row_transition_patterns() {
        assert_eq!(transitions(&from_rows(&[".#.#"]), Direction::Horizontal), vec![2]);
        assert_eq!(transitions(&from_rows(&["####"]), Direction::Horizontal), vec![0]);
        assert_eq!(transitions(&from_rows(&["#.##.#"]), Direction::Horizontal), vec![2]);
    }

    #[test]
    fn anti_diagonal_scans_with_increasing_x() {
        // anti-diagonal 2 of a 3x3 visits (0,2), (1,1), (2,0)
        let line: Vec<_> = scanline(Direction::AntiDiagonal, 3, 3, 2).collect();
        assert_eq!(line, vec![(0, 2), (1, 1), (2, 0)]);
        let img = from_rows(&["..#", "...", "..."]);
        assert_eq!(transitions(&img, Direction::AntiDiagonal), vec![0, 0, 1, 0, 0]);
    }

    #[test]
    fn scanlines_cover_rectangular_images_once() {
        for (w, h) in [(1, 1), (1, 5), (5, 1), (4, 7), (7, 4)] {
            for d in Direction::ALL {
                let mut seen = vec![0; w * h];
                for i in 0..d.bin_count(w, h) {
                    for (x, y) in scanline(d, w, h, i) {
                        seen[y * w + x] += 1;
                    }
                }
                assert!(seen.iter().all(|&c| c == 1), "{d:?} {w}x{h}");
            }
        }
    }
}
