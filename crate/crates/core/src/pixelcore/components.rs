//! Two-pass connected component labeling with a union-find equivalence table.

use super::{BinaryImage, Grid, Rect};

#[derive(Debug, PartialEq, Eq, Copy, Clone)]
pub enum Connectivity {
    /// N, S, E and W neighbours.
    Four,
    /// All eight neighbours.
    Eight,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub label: u32,
    pub bbox: Rect,
    /// `(x, y)` in raster order.
    pub pixels: Vec<(usize, usize)>,
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.pixels.len() as f64;
        let (sx, sy) = self
            .pixels
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
        (sx / n, sy / n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentLabeling {
    /// 0 is background, components are labeled `1..=count`.
    pub labels: Grid<u32>,
    /// `components[i]` carries label `i + 1`.
    pub components: Vec<Component>,
}

impl ComponentLabeling {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        DisjointSet { parent: vec![0] }
    }

    fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Labels the true pixels of `img`. Labels are assigned in raster order of
/// each component's first pixel.
pub fn connected_components(img: &BinaryImage, connectivity: Connectivity) -> ComponentLabeling {
    let (w, h) = (img.width(), img.height());
    let mut provisional = Grid::new(w, h, 0u32);
    let mut sets = DisjointSet::new();

    let back: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (-1, -1), (0, -1), (1, -1)],
    };

    for y in 0..h {
        for x in 0..w {
            if !*img.get(x, y) {
                continue;
            }
            let mut label = 0u32;
            for &(dx, dy) in back {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize {
                    continue;
                }
                let n = *provisional.get(nx as usize, ny as usize);
                if n == 0 {
                    continue;
                }
                if label == 0 {
                    label = n;
                } else if n != label {
                    sets.union(label, n);
                }
            }
            if label == 0 {
                label = sets.make_set();
            }
            provisional.set(x, y, label);
        }
    }

    let mut remap = vec![0u32; sets.parent.len()];
    let mut components: Vec<Component> = Vec::new();
    let mut labels = Grid::new(w, h, 0u32);
    for y in 0..h {
        for x in 0..w {
            let p = *provisional.get(x, y);
            if p == 0 {
                continue;
            }
            let root = sets.find(p) as usize;
            if remap[root] == 0 {
                components.push(Component {
                    label: components.len() as u32 + 1,
                    bbox: Rect::new(x, y, 1, 1),
                    pixels: Vec::new(),
                });
                remap[root] = components.len() as u32;
            }
            let label = remap[root];
            labels.set(x, y, label);
            let c = &mut components[label as usize - 1];
            c.pixels.push((x, y));
            c.bbox = c.bbox.union(&Rect::new(x, y, 1, 1));
        }
    }

    ComponentLabeling { labels, components }
}

/// Clears 8-connected components with fewer than `min_area` pixels.
pub fn remove_small_components(img: &BinaryImage, min_area: usize) -> BinaryImage {
    let mut out = img.clone();
    for c in connected_components(img, Connectivity::Eight).components {
        if c.area() < min_area {
            for &(x, y) in &c.pixels {
                out.set(x, y, false);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&str]) -> BinaryImage {
        Grid::from_fn(rows[0].len(), rows.len(), |x, y| rows[y].as_bytes()[x] == b'#')
    }

    #[test]
    fn empty_has_no_components() {
        let l = connected_components(&Grid::new(4, 3, false), Connectivity::Eight);
        assert_eq!(l.component_count(), 0);
        assert!(l.labels.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn diagonal_touch_depends_on_connectivity() {
        let img = from_rows(&["#.", ".#"]);
        assert_eq!(connected_components(&img, Connectivity::Eight).component_count(), 1);
        assert_eq!(connected_components(&img, Connectivity::Four).component_count(), 2);
    }

    #[test]
    fn blobs_split_by_blank_column() {
        let img = from_rows(&["##.##", "##.#.", "#..##"]);
        let l = connected_components(&img, Connectivity::Eight);
        assert_eq!(l.component_count(), 2);
        assert_eq!(l.components[0].bbox, Rect::new(0, 0, 2, 3));
        assert_eq!(l.components[1].bbox, Rect::new(3, 0, 2, 3));
        assert_eq!(l.components[0].area() + l.components[1].area(), img.count_true());
    }

    #[test]
    fn u_shape_merges_in_second_pass() {
        // both arms get provisional labels before the bottom row joins them
        let img = from_rows(&["#...#", "#...#", "#####"]);
        let l = connected_components(&img, Connectivity::Four);
        assert_eq!(l.component_count(), 1);
        assert_eq!(l.components[0].area(), 9);
    }

    #[test]
    fn labels_follow_raster_order() {
        let img = from_rows(&["...#", "#...", "#..#"]);
        let l = connected_components(&img, Connectivity::Eight);
        assert_eq!(l.component_count(), 3);
        assert_eq!(*l.labels.get(3, 0), 1);
        assert_eq!(*l.labels.get(0, 1), 2);
        assert_eq!(*l.labels.get(3, 2), 3);
    }

    #[test]
    fn small_components_removed() {
        let img = from_rows(&["#..##", "...##"]);
        let cleaned = remove_small_components(&img, 2);
        assert!(!*cleaned.get(0, 0));
        assert_eq!(cleaned.count_true(), 4);
    }
}
