//! Persistence barcodes of superlevel cubical filtrations.
//!
//! [`compute_barcode`] pairs cells with two union-find sweeps: a forward
//! sweep over vertices and edges for connected components, and a backward
//! sweep over squares and cycle-creating edges (the dual graph, with the
//! outside of the grid as one extra node) for loops. The pairing equals the
//! one produced by reducing the boundary matrix, which is kept available as
//! [`compute_barcode_by_reduction`].

use std::cmp::Ordering;
use std::io::Write;

use crate::cubical::{CellId, FilteredComplex};
use crate::error::Result;

/// One bar of a barcode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePair {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
    pub birth_vertex: (usize, usize),
    /// `None` for the essential component.
    pub death_vertex: Option<(usize, usize)>,
}

impl PersistencePair {
    pub fn lifetime(&self) -> f64 {
        self.birth - self.death
    }

    pub fn is_essential(&self) -> bool {
        self.death_vertex.is_none()
    }
}

fn rank_order(a: &PersistencePair, b: &PersistencePair) -> Ordering {
    a.dim
        .cmp(&b.dim)
        .then_with(|| b.lifetime().partial_cmp(&a.lifetime()).unwrap_or(Ordering::Equal))
        .then_with(|| b.birth.partial_cmp(&a.birth).unwrap_or(Ordering::Equal))
        .then_with(|| a.birth_vertex.cmp(&b.birth_vertex))
        .then_with(|| a.death_vertex.cmp(&b.death_vertex))
}

/// Persistence pairs of one probability map.
///
/// `pairs` holds the bars with positive lifetime, grouped by dimension and
/// ranked by descending lifetime (ties: higher birth first, then row-major
/// birth vertex, then death vertex). Zero-lifetime pairs are kept apart in `diagonal`.
#[derive(Clone, Debug, PartialEq)]
pub struct Barcode {
    pairs: Vec<PersistencePair>,
    diagonal: Vec<PersistencePair>,
}

impl Barcode {
    fn from_raw(raw: Vec<PersistencePair>) -> Barcode {
        let (mut pairs, diagonal): (Vec<_>, Vec<_>) =
            raw.into_iter().partition(|p| p.lifetime() > 0.0);
        pairs.sort_by(rank_order);
        Barcode { pairs, diagonal }
    }

    /// Ranked bars of every dimension.
    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    /// Ranked bars of one dimension.
    pub fn dim_pairs(&self, dim: u8) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Zero-lifetime pairs in the order they were found; excluded from ranking.
    pub fn diagonal(&self) -> &[PersistencePair] {
        &self.diagonal
    }

    /// Number of dimension-`dim` features alive at threshold `p`.
    pub fn betti_at(&self, p: f64, dim: u8) -> usize {
        self.dim_pairs(dim)
            .filter(|b| b.death < p && p <= b.birth)
            .count()
    }

    /// Lifetime of the `rank`-th most persistent feature (1-based), or 0.
    pub fn lifetime(&self, dim: u8, rank: usize) -> f64 {
        assert!(rank >= 1, "feature ranks start at 1");
        self.dim_pairs(dim)
            .nth(rank - 1)
            .map_or(0.0, PersistencePair::lifetime)
    }

    /// Writes the ranked bars as CSV
    /// (`dim,birth,death,birth_row,birth_col,death_row,death_col`).
    /// The essential bar leaves its death coordinates empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "dim,birth,death,birth_row,birth_col,death_row,death_col")?;
        for p in &self.pairs {
            let (br, bc) = p.birth_vertex;
            let death = p
                .death_vertex
                .map_or(",".to_string(), |(r, c)| format!("{r},{c}"));
            writeln!(out, "{},{},{},{br},{bc},{death}", p.dim, p.birth, p.death)?;
        }
        out.flush()?;
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }
}

fn pixel(cx: &FilteredComplex, id: CellId) -> (usize, usize) {
    let v = cx.critical_vertex(id);
    (v / cx.width(), v % cx.width())
}

fn make_pair(cx: &FilteredComplex, dim: u8, birth: CellId, death: Option<CellId>) -> PersistencePair {
    PersistencePair {
        dim,
        birth: cx.value(birth),
        death: death.map_or(0.0, |d| cx.value(d)),
        birth_vertex: pixel(cx, birth),
        death_vertex: death.map(|d| pixel(cx, d)),
    }
}

/// Computes the barcode of a filtered complex.
pub fn compute_barcode(cx: &FilteredComplex) -> Barcode {
    let n_vert = cx.num_vertices();
    let mut raw = Vec::new();

    // Components: root -> its oldest vertex (the one earliest in the filtration).
    let mut uf = UnionFind::new(n_vert);
    let oldest: Vec<CellId> = (0..n_vert as CellId).collect();
    let mut creates_cycle = vec![false; cx.num_cells()];
    for &id in cx.order() {
        if cx.dim(id) != 1 {
            continue;
        }
        let b = cx.boundary(id);
        let (ra, rb) = (uf.find(b[0]), uf.find(b[1]));
        if ra == rb {
            creates_cycle[id as usize] = true;
            continue;
        }
        let (elder, younger) = if cx.position(oldest[ra as usize]) < cx.position(oldest[rb as usize]) {
            (ra, rb)
        } else {
            (rb, ra)
        };
        raw.push(make_pair(cx, 0, oldest[younger as usize], Some(id)));
        uf.parent[younger as usize] = elder;
    }
    let roots: Vec<u32> = (0..n_vert as u32).filter(|&v| uf.find(v) == v).collect();
    debug_assert_eq!(roots.len(), 1, "the full grid is connected");
    for r in roots {
        raw.push(make_pair(cx, 0, oldest[r as usize], None));
    }

    // Loops, via components of the dual graph swept in reverse. Node
    // `n_sq` is the region outside the grid, older than every square.
    let n_sq = cx.num_squares();
    if n_sq > 0 {
        let sq0 = cx.square_id(0, 0);
        let outside = n_sq as u32;
        let mut dual = UnionFind::new(n_sq + 1);
        // Representative square of each dual root: the latest one in the
        // forward filtration, i.e. the first to appear in the reverse sweep.
        let mut rep: Vec<Option<CellId>> = (0..n_sq as CellId).map(|k| Some(sq0 + k)).collect();
        rep.push(None);
        let node = |sq: Option<CellId>| sq.map_or(outside, |s| s - sq0);
        for &id in cx.order().iter().rev() {
            if !creates_cycle[id as usize] {
                continue;
            }
            let [a, b] = cx.edge_cofaces(id);
            let (ra, rb) = (dual.find(node(a)), dual.find(node(b)));
            debug_assert_ne!(ra, rb, "cycle-creating edges separate dual components");
            let later = |r: u32| rep[r as usize].map_or(usize::MAX, |s| cx.position(s));
            let (elder, younger) = if later(ra) > later(rb) { (ra, rb) } else { (rb, ra) };
            let dying = rep[younger as usize].expect("the outside never dies");
            raw.push(make_pair(cx, 1, id, Some(dying)));
            dual.parent[younger as usize] = elder;
        }
    }

    Barcode::from_raw(raw)
}

fn add_columns(target: &mut Vec<u32>, source: &[u32]) {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            Ordering::Less => {
                out.push(target[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(source[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&target[i..]);
    out.extend_from_slice(&source[j..]);
    *target = out;
}

/// Reference barcode by Z/2 boundary-matrix reduction with clearing.
///
/// Quadratic in the worst case; meant for checking [`compute_barcode`].
pub fn compute_barcode_by_reduction(cx: &FilteredComplex) -> Barcode {
    let order = cx.order();
    let n = order.len();
    let mut columns: Vec<Vec<u32>> = order
        .iter()
        .map(|&id| {
            let mut col: Vec<u32> = cx.boundary(id).iter().map(|&f| cx.position(f) as u32).collect();
            col.sort_unstable();
            col
        })
        .collect();
    let mut pivot_of: Vec<Option<u32>> = vec![None; n];
    let mut paired = vec![false; n];
    let mut raw = Vec::new();

    for dim in [2u8, 1] {
        for j in 0..n {
            if cx.dim(order[j]) != dim || paired[j] {
                continue;
            }
            while let Some(&low) = columns[j].last() {
                match pivot_of[low as usize] {
                    Some(k) => {
                        let src = std::mem::take(&mut columns[k as usize]);
                        add_columns(&mut columns[j], &src);
                        columns[k as usize] = src;
                    }
                    None => break,
                }
            }
            if let Some(&low) = columns[j].last() {
                pivot_of[low as usize] = Some(j as u32);
                paired[low as usize] = true;
                paired[j] = true;
                // Clearing: a pivot's own column reduces to zero.
                columns[low as usize].clear();
                raw.push(make_pair(cx, dim - 1, order[low as usize], Some(order[j])));
            }
        }
    }
    for (j, &id) in order.iter().enumerate() {
        if cx.dim(id) == 0 && !paired[j] {
            raw.push(make_pair(cx, 0, id, None));
        }
    }
    Barcode::from_raw(raw)
}
