//! Connected-component analysis on discrete masks.
//!
//! Holds the `+CCA` post-processing baseline (keep the largest component of
//! each foreground class) and the Betti numbers of binary masks used as the
//! topology check throughout the crate.

use crate::grid::{Class, LabelMask};

/// Union-find over pixel indices.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Joins two sets, keeping the smaller root as representative.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Maximal 4-connected sets of equally labelled pixels.
#[derive(Clone, Debug)]
pub struct ComponentLabeling {
    /// Component id per pixel, numbered in row-major order of first pixel.
    pub component: Vec<usize>,
    /// Pixel count per component.
    pub sizes: Vec<usize>,
    /// Label of each component.
    pub labels: Vec<u8>,
}

impl ComponentLabeling {
    /// Component ids carrying `label`, in row-major order of first pixel.
    pub fn components_of(&self, label: u8) -> Vec<usize> {
        (0..self.sizes.len())
            .filter(|&k| self.labels[k] == label)
            .collect()
    }
}

pub fn label_components(mask: &LabelMask) -> ComponentLabeling {
    let (h, w) = (mask.height(), mask.width());
    let labels = mask.labels();
    let mut ds = DisjointSet::new(h * w);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if c + 1 < w && labels[i] == labels[i + 1] {
                ds.union(i, i + 1);
            }
            if r + 1 < h && labels[i] == labels[i + w] {
                ds.union(i, i + w);
            }
        }
    }
    let mut id_of_root = vec![usize::MAX; h * w];
    let mut component = vec![0; h * w];
    let mut sizes = Vec::new();
    let mut comp_labels = Vec::new();
    for i in 0..h * w {
        let root = ds.find(i);
        if id_of_root[root] == usize::MAX {
            id_of_root[root] = sizes.len();
            sizes.push(0);
            comp_labels.push(labels[i]);
        }
        let k = id_of_root[root];
        component[i] = k;
        sizes[k] += 1;
    }
    ComponentLabeling {
        component,
        sizes,
        labels: comp_labels,
    }
}

/// Keeps the largest 4-connected component of each foreground class and
/// relabels every other pixel of that class as background. Ties go to the
/// component whose first pixel comes first in row-major order.
pub fn cca_clean(mask: &LabelMask) -> LabelMask {
    let cl = label_components(mask);
    let mut keep = vec![true; cl.sizes.len()];
    for class in Class::FOREGROUND {
        let comps = cl.components_of(class as u8);
        // Components are numbered row-major, so the first maximum wins ties.
        let best = comps
            .iter()
            .copied()
            .reduce(|a, b| if cl.sizes[b] > cl.sizes[a] { b } else { a });
        for k in comps {
            keep[k] = Some(k) == best;
        }
    }
    let labels = mask
        .labels()
        .iter()
        .zip(&cl.component)
        .map(|(&l, &k)| if keep[k] { l } else { 0 })
        .collect();
    LabelMask::new(mask.height(), mask.width(), labels).expect("labels unchanged or zero")
}

/// Betti numbers `(b0, b1)` of a binary mask (nonzero = foreground) with
/// 4-connected foreground. `b1` comes from the Euler characteristic of the
/// pixel-vertex cubical complex.
pub fn betti_mask(mask: &LabelMask) -> (usize, usize) {
    let (h, w) = (mask.height(), mask.width());
    let fg: Vec<bool> = mask.labels().iter().map(|&l| l != 0).collect();
    let mut ds = DisjointSet::new(h * w);
    let (mut v, mut e, mut f) = (0i64, 0i64, 0i64);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if !fg[i] {
                continue;
            }
            v += 1;
            if c + 1 < w && fg[i + 1] {
                e += 1;
                ds.union(i, i + 1);
            }
            if r + 1 < h && fg[i + w] {
                e += 1;
                ds.union(i, i + w);
            }
            if r + 1 < h && c + 1 < w && fg[i + 1] && fg[i + w] && fg[i + w + 1] {
                f += 1;
            }
        }
    }
    let b0 = (0..h * w).filter(|&i| fg[i] && ds.find(i) == i).count();
    let euler = v - e + f;
    let b1 = b0 as i64 - euler;
    debug_assert!(b1 >= 0);
    (b0, b1 as usize)
}
