//! Brute-force barcodes from explicit thresholding.
//!
//! Every distinct pixel value is used as a threshold. For each pair of
//! thresholds the persistent Betti number (how many features of the smaller
//! superlevel set survive into the larger one) is counted directly from
//! pixel labelings: foreground components under 4-connectivity, holes as
//! background components under 8-connectivity that do not touch the border.
//! Bar multiplicities then follow by inclusion-exclusion.
//!
//! Shares no code with [`crate::persistence`]; intended for tests.

use crate::baseline::DisjointSet;
use crate::cubical::binarise;
use crate::grid::{LabelMask, ProbMap};

/// A bar as `(dim, birth, death)`.
pub type Bar = (u8, f64, f64);

struct Labels {
    /// Foreground component per pixel (4-connected), or `usize::MAX`.
    fg: Vec<usize>,
    /// Background component per pixel (8-connected), or `usize::MAX`.
    bg: Vec<usize>,
    /// Whether each background component touches the grid border.
    bg_unbounded: Vec<bool>,
}

fn label(mask: &LabelMask) -> Labels {
    let (h, w) = (mask.height(), mask.width());
    let fg_px: Vec<bool> = mask.labels().iter().map(|&l| l != 0).collect();
    let mut fg_set = DisjointSet::new(h * w);
    let mut bg_set = DisjointSet::new(h * w);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let mut link = |j: usize| {
                if fg_px[i] && fg_px[j] {
                    fg_set.union(i, j);
                } else if !fg_px[i] && !fg_px[j] {
                    bg_set.union(i, j);
                }
            };
            if c + 1 < w {
                link(i + 1);
            }
            if r + 1 < h {
                link(i + w);
            }
            if !fg_px[i] {
                if r + 1 < h && c + 1 < w && !fg_px[i + w + 1] {
                    bg_set.union(i, i + w + 1);
                }
                if r + 1 < h && c > 0 && !fg_px[i + w - 1] {
                    bg_set.union(i, i + w - 1);
                }
            }
        }
    }
    let mut fg = vec![usize::MAX; h * w];
    let mut bg = vec![usize::MAX; h * w];
    let mut fg_ids = vec![usize::MAX; h * w];
    let mut bg_ids = vec![usize::MAX; h * w];
    let mut bg_unbounded = Vec::new();
    let mut n_fg = 0;
    for i in 0..h * w {
        if fg_px[i] {
            let root = fg_set.find(i);
            if fg_ids[root] == usize::MAX {
                fg_ids[root] = n_fg;
                n_fg += 1;
            }
            fg[i] = fg_ids[root];
        } else {
            let root = bg_set.find(i);
            if bg_ids[root] == usize::MAX {
                bg_ids[root] = bg_unbounded.len();
                bg_unbounded.push(false);
            }
            let k = bg_ids[root];
            bg[i] = k;
            let (r, c) = (i / w, i % w);
            if r == 0 || c == 0 || r + 1 == h || c + 1 == w {
                bg_unbounded[k] = true;
            }
        }
    }
    Labels { fg, bg, bg_unbounded }
}

/// Rank of the map from dimension-`dim` homology of `small` into `large`
/// (`small` ⊆ `large`).
fn persistent_betti(small: &Labels, large: &Labels, dim: u8) -> usize {
    let n = small.fg.len();
    if dim == 0 {
        let mut hit = std::collections::BTreeSet::new();
        for p in 0..n {
            if small.fg[p] != usize::MAX {
                hit.insert(large.fg[p]);
            }
        }
        hit.len()
    } else {
        // A hole of `small` survives if it still contains a hole of `large`.
        let mut hit = std::collections::BTreeSet::new();
        for p in 0..n {
            let k = large.bg[p];
            if k != usize::MAX && !large.bg_unbounded[k] {
                let outer = small.bg[p];
                if !small.bg_unbounded[outer] {
                    hit.insert(outer);
                }
            }
        }
        hit.len()
    }
}

/// Bars of `map` with positive lifetime, sorted by `(dim, birth desc, death desc)`.
/// The component alive at threshold 0 gets death 0.
pub fn brute_barcode(map: &ProbMap) -> Vec<Bar> {
    let mut thresholds: Vec<f64> = map.values().to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
    thresholds.dedup();
    let m = thresholds.len();
    let labels: Vec<Labels> = thresholds.iter().map(|&t| label(&binarise(map, t))).collect();

    let mut bars = Vec::new();
    for dim in 0..2u8 {
        // beta[a][b] for 1-based a ≤ b; row and column 0 are zero.
        let mut beta = vec![vec![0i64; m + 1]; m + 1];
        for a in 1..=m {
            for b in a..=m {
                beta[a][b] = persistent_betti(&labels[a - 1], &labels[b - 1], dim) as i64;
            }
        }
        for i in 1..=m {
            for j in i + 1..=m {
                let count =
                    beta[i][j - 1] - beta[i][j] - beta[i - 1][j - 1] + beta[i - 1][j];
                debug_assert!(count >= 0);
                for _ in 0..count {
                    bars.push((dim, thresholds[i - 1], thresholds[j - 1]));
                }
            }
            let essential = beta[i][m] - beta[i - 1][m];
            for _ in 0..essential {
                bars.push((dim, thresholds[i - 1], 0.0));
            }
        }
    }
    bars.retain(|b| b.1 > b.2);
    sort_bars(&mut bars);
    bars
}

/// Sorts bars by `(dim, birth desc, death desc)` for multiset comparison.
pub fn sort_bars(bars: &mut [Bar]) {
    bars.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(b.1.partial_cmp(&a.1).expect("no NaN"))
            .then(b.2.partial_cmp(&a.2).expect("no NaN"))
    });
}

/// Number of dimension-`dim` bars alive at `p`.
pub fn bars_alive(bars: &[Bar], p: f64, dim: u8) -> usize {
    bars.iter()
        .filter(|b| b.0 == dim && b.2 < p && p <= b.1)
        .count()
}
