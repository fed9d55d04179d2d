//! Superlevel-set filtered cubical complexes on a pixel grid.
//!
//! Pixels are the vertices of the complex (V-construction). Edges join
//! 4-adjacent pixels and squares span 2x2 pixel blocks. A cell enters the
//! filtration at the minimum probability over its vertices, so the cells
//! present at threshold `p` are exactly the complex of `binarise(map, p)`.

use crate::grid::{LabelMask, ProbMap};

/// Edge direction. Vertices and squares have none.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// One cell, identified by its dimension and top-left vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub dim: u8,
    pub row: usize,
    pub col: usize,
    pub orientation: Option<Orientation>,
}

/// Dense cell identifier inside one [`FilteredComplex`].
pub type CellId = u32;

/// A cubical complex with its cells sorted into superlevel filtration order.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    height: usize,
    width: usize,
    order: Vec<CellId>,
    position: Vec<u32>,
    value: Vec<f64>,
    critical: Vec<u32>,
}

impl FilteredComplex {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_cells(&self) -> usize {
        self.order.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.height * self.width
    }

    pub fn num_horizontal_edges(&self) -> usize {
        self.height * (self.width - 1)
    }

    pub fn num_vertical_edges(&self) -> usize {
        (self.height - 1) * self.width
    }

    pub fn num_edges(&self) -> usize {
        self.num_horizontal_edges() + self.num_vertical_edges()
    }

    pub fn num_squares(&self) -> usize {
        (self.height - 1) * (self.width - 1)
    }

    fn edge_start(&self) -> usize {
        self.num_vertices()
    }

    fn vertical_start(&self) -> usize {
        self.edge_start() + self.num_horizontal_edges()
    }

    fn square_start(&self) -> usize {
        self.vertical_start() + self.num_vertical_edges()
    }

    /// Cell ids in filtration order.
    pub fn order(&self) -> &[CellId] {
        &self.order
    }

    /// Filtration index of a cell.
    pub fn position(&self, id: CellId) -> usize {
        self.position[id as usize] as usize
    }

    /// Threshold at which the cell enters.
    pub fn value(&self, id: CellId) -> f64 {
        self.value[id as usize]
    }

    /// Pixel index (row-major) of the vertex whose value the cell takes.
    pub fn critical_vertex(&self, id: CellId) -> usize {
        self.critical[id as usize] as usize
    }

    pub fn dim(&self, id: CellId) -> u8 {
        let id = id as usize;
        if id < self.edge_start() {
            0
        } else if id < self.square_start() {
            1
        } else {
            2
        }
    }

    pub fn cell(&self, id: CellId) -> Cell {
        let w = self.width;
        let id = id as usize;
        if id < self.edge_start() {
            Cell {
                dim: 0,
                row: id / w,
                col: id % w,
                orientation: None,
            }
        } else if id < self.vertical_start() {
            let k = id - self.edge_start();
            Cell {
                dim: 1,
                row: k / (w - 1),
                col: k % (w - 1),
                orientation: Some(Orientation::Horizontal),
            }
        } else if id < self.square_start() {
            let k = id - self.vertical_start();
            Cell {
                dim: 1,
                row: k / w,
                col: k % w,
                orientation: Some(Orientation::Vertical),
            }
        } else {
            let k = id - self.square_start();
            Cell {
                dim: 2,
                row: k / (w - 1),
                col: k % (w - 1),
                orientation: None,
            }
        }
    }

    pub fn vertex_id(&self, row: usize, col: usize) -> CellId {
        (row * self.width + col) as CellId
    }

    pub fn horizontal_edge_id(&self, row: usize, col: usize) -> CellId {
        (self.edge_start() + row * (self.width - 1) + col) as CellId
    }

    pub fn vertical_edge_id(&self, row: usize, col: usize) -> CellId {
        (self.vertical_start() + row * self.width + col) as CellId
    }

    pub fn square_id(&self, row: usize, col: usize) -> CellId {
        (self.square_start() + row * (self.width - 1) + col) as CellId
    }

    /// Vertices of a cell as pixel indices, in row-major order.
    pub fn vertices(&self, id: CellId) -> Vec<usize> {
        let w = self.width;
        let c = self.cell(id);
        let base = c.row * w + c.col;
        match (c.dim, c.orientation) {
            (0, _) => vec![base],
            (1, Some(Orientation::Horizontal)) => vec![base, base + 1],
            (1, _) => vec![base, base + w],
            _ => vec![base, base + 1, base + w, base + w + 1],
        }
    }

    /// Codimension-one faces of a cell.
    pub fn boundary(&self, id: CellId) -> Vec<CellId> {
        let c = self.cell(id);
        let (r, col) = (c.row, c.col);
        match (c.dim, c.orientation) {
            (0, _) => Vec::new(),
            (1, Some(Orientation::Horizontal)) => {
                vec![self.vertex_id(r, col), self.vertex_id(r, col + 1)]
            }
            (1, _) => vec![self.vertex_id(r, col), self.vertex_id(r + 1, col)],
            _ => vec![
                self.horizontal_edge_id(r, col),
                self.vertical_edge_id(r, col),
                self.vertical_edge_id(r, col + 1),
                self.horizontal_edge_id(r + 1, col),
            ],
        }
    }

    /// The (at most two) squares having `edge` as a face. `None` stands for
    /// the unbounded region outside the grid.
    pub(crate) fn edge_cofaces(&self, edge: CellId) -> [Option<CellId>; 2] {
        let c = self.cell(edge);
        let (h, w) = (self.height, self.width);
        match c.orientation {
            Some(Orientation::Horizontal) => [
                (c.row > 0).then(|| self.square_id(c.row - 1, c.col)),
                (c.row + 1 < h).then(|| self.square_id(c.row, c.col)),
            ],
            _ => [
                (c.col > 0).then(|| self.square_id(c.row, c.col - 1)),
                (c.col + 1 < w).then(|| self.square_id(c.row, c.col)),
            ],
        }
    }
}

/// Builds the superlevel filtration of `map`.
pub fn build_complex(map: &ProbMap) -> FilteredComplex {
    let (h, w) = (map.height(), map.width());
    let values = map.values();
    let n = h * w;

    // Dense rank of each pixel value, 0 for the largest.
    let mut by_value: Vec<u32> = (0..n as u32).collect();
    by_value.sort_by(|&a, &b| {
        values[b as usize]
            .partial_cmp(&values[a as usize])
            .expect("probabilities are never NaN")
            .then(a.cmp(&b))
    });
    let mut rank = vec![0u64; n];
    let mut current = 0u64;
    for (k, &p) in by_value.iter().enumerate() {
        if k > 0 && values[p as usize] != values[by_value[k - 1] as usize] {
            current += 1;
        }
        rank[p as usize] = current;
    }

    let n_h = h * (w - 1);
    let n_v = (h - 1) * w;
    let n_sq = (h - 1) * (w - 1);
    let total = n + n_h + n_v + n_sq;
    let mut critical = Vec::with_capacity(total);
    let mut keys = Vec::with_capacity(total);

    // Sort key: value rank, then dimension, then row-major anchor, then
    // horizontal before vertical.
    let key = |rank: u64, dim: u64, anchor: usize, orient: u64| -> u64 {
        (rank << 40) | (dim << 38) | ((anchor as u64) << 1) | orient
    };
    // The critical vertex is the lowest-valued one, first in row-major order on ties.
    let pick = |verts: &[usize]| -> usize {
        let mut best = verts[0];
        for &v in &verts[1..] {
            if rank[v] > rank[best] {
                best = v;
            }
        }
        best
    };

    for p in 0..n {
        critical.push(p as u32);
        keys.push(key(rank[p], 0, p, 0));
    }
    for r in 0..h {
        for c in 0..w - 1 {
            let a = r * w + c;
            let v = pick(&[a, a + 1]);
            critical.push(v as u32);
            keys.push(key(rank[v], 1, a, 0));
        }
    }
    for r in 0..h - 1 {
        for c in 0..w {
            let a = r * w + c;
            let v = pick(&[a, a + w]);
            critical.push(v as u32);
            keys.push(key(rank[v], 1, a, 1));
        }
    }
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            let a = r * w + c;
            let v = pick(&[a, a + 1, a + w, a + w + 1]);
            critical.push(v as u32);
            keys.push(key(rank[v], 2, a, 0));
        }
    }

    // Keys are unique per cell, so the cell id can be read back from each one.
    keys.sort_unstable();
    let order: Vec<CellId> = keys
        .iter()
        .map(|&k| {
            let anchor = ((k >> 1) & ((1 << 37) - 1)) as usize;
            let (r, c) = (anchor / w, anchor % w);
            let id = match ((k >> 38) & 3, k & 1) {
                (0, _) => anchor,
                (1, 0) => n + r * (w - 1) + c,
                (1, _) => n + n_h + anchor,
                _ => n + n_h + n_v + r * (w - 1) + c,
            };
            id as CellId
        })
        .collect();
    let mut position = vec![0u32; total];
    for (k, &id) in order.iter().enumerate() {
        position[id as usize] = k as u32;
    }
    let value = critical.iter().map(|&v| values[v as usize]).collect();

    FilteredComplex {
        height: h,
        width: w,
        order,
        position,
        value,
        critical,
    }
}

/// Foreground (label 1) wherever the probability is at least `p`.
pub fn binarise(map: &ProbMap, p: f64) -> LabelMask {
    LabelMask::new(
        map.height(),
        map.width(),
        map.values().iter().map(|&v| u8::from(v >= p)).collect(),
    )
    .expect("binary labels are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(cx: &FilteredComplex) -> [usize; 3] {
        let mut n = [0; 3];
        for &id in cx.order() {
            n[cx.dim(id) as usize] += 1;
        }
        n
    }

    #[test]
    fn single_pixel() {
        let cx = build_complex(&ProbMap::new(1, 1, vec![0.7]).unwrap());
        assert_eq!(counts(&cx), [1, 0, 0]);
        assert_eq!(cx.value(0), 0.7);
    }

    #[test]
    fn constant_two_by_two() {
        let cx = build_complex(&ProbMap::constant(2, 2, 1.0).unwrap());
        assert_eq!(counts(&cx), [4, 4, 1]);
        assert!(cx.order().iter().all(|&id| cx.value(id) == 1.0));
        // Ties: vertices, then edges, then the square.
        let dims: Vec<u8> = cx.order().iter().map(|&id| cx.dim(id)).collect();
        assert_eq!(dims, vec![0, 0, 0, 0, 1, 1, 1, 1, 2]);
        // Edge tie-break: row-major anchor, horizontal first.
        let edges: Vec<Cell> = cx.order()[4..8].iter().map(|&id| cx.cell(id)).collect();
        assert_eq!(
            edges
                .iter()
                .map(|c| (c.row, c.col, c.orientation.unwrap()))
                .collect::<Vec<_>>(),
            vec![
                (0, 0, Orientation::Horizontal),
                (0, 0, Orientation::Vertical),
                (0, 1, Orientation::Vertical),
                (1, 0, Orientation::Horizontal),
            ]
        );
    }

    #[test]
    fn square_takes_min_vertex() {
        let cx = build_complex(&ProbMap::new(2, 2, vec![0.9, 0.4, 0.8, 0.6]).unwrap());
        let sq = cx.square_id(0, 0);
        assert_eq!(cx.value(sq), 0.4);
        assert_eq!(cx.critical_vertex(sq), 1);
    }

    #[test]
    fn critical_vertex_ties_are_row_major() {
        let cx = build_complex(&ProbMap::new(2, 2, vec![0.9, 0.3, 0.3, 0.3]).unwrap());
        assert_eq!(cx.critical_vertex(cx.square_id(0, 0)), 1);
        assert_eq!(cx.critical_vertex(cx.vertical_edge_id(0, 1)), 1);
        assert_eq!(cx.critical_vertex(cx.horizontal_edge_id(1, 0)), 2);
    }

    #[test]
    fn cell_counts_and_face_order() {
        let map = ProbMap::from_fn(4, 7, |r, c| ((r * 7 + c * 3) % 5) as f64 / 4.0).unwrap();
        let cx = build_complex(&map);
        assert_eq!(counts(&cx), [28, 4 * 6 + 3 * 7, 3 * 6]);
        for &id in cx.order() {
            for f in cx.boundary(id) {
                assert!(cx.position(f) < cx.position(id));
                assert!(cx.value(f) >= cx.value(id));
            }
            let min = cx
                .vertices(id)
                .iter()
                .map(|&v| map.values()[v])
                .fold(f64::INFINITY, f64::min);
            assert_eq!(cx.value(id), min);
        }
        for w in cx.order().windows(2) {
            assert!(cx.value(w[0]) >= cx.value(w[1]));
        }
    }

    #[test]
    fn binarise_is_inclusive() {
        let m = ProbMap::constant(3, 3, 0.7).unwrap();
        assert_eq!(binarise(&m, 0.7).count(1), 9);
        assert_eq!(binarise(&m, 0.71).count(1), 0);
        let z = ProbMap::from_fn(3, 3, |r, c| (r * 3 + c) as f64 / 8.0).unwrap();
        assert_eq!(binarise(&z, 0.0).count(1), 9);
    }

    #[test]
    fn edge_cofaces_on_border() {
        let cx = build_complex(&ProbMap::constant(3, 3, 0.5).unwrap());
        assert_eq!(
            cx.edge_cofaces(cx.horizontal_edge_id(0, 0)),
            [None, Some(cx.square_id(0, 0))]
        );
        assert_eq!(
            cx.edge_cofaces(cx.vertical_edge_id(1, 2)),
            [Some(cx.square_id(1, 1)), None]
        );
    }
}
