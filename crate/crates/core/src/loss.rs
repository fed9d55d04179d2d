//! Multi-class topological loss.
//!
//! For every foreground class and class pair `(i, j ≥ i)` the barcode of the
//! union probability `Ŷ_{i∪j}` is compared with the prior `B^{ij}_d`: the
//! `B^{ij}_d` most persistent bars of dimension `d` should live for the whole
//! range `[0, 1]`, every other bar should vanish.
//!
//! ```text
//! L = Σ_{d, i, j≥i}  B^{ij}_d − A^{ij}_d + Z^{ij}_d
//! A^{ij}_d = Σ_{l ≤ B^{ij}_d} Δp_{d,l}        Z^{ij}_d = Σ_{l > B^{ij}_d} Δp_{d,l}
//! ```
//!
//! The loss is piecewise linear in the pixel probabilities. Each bar's
//! lifetime depends only on the probabilities at its birth and death
//! vertices, which gives the exact (sub)gradient returned in [`GradField`].

use std::fmt;

use crate::cubical::build_complex;
use crate::grid::{Class, MultiClassProb, ProbMap, NUM_CLASSES};
use crate::persistence::{compute_barcode, Barcode};
use crate::priors::{BettiPrior, PAIRS};

/// Which label sets the loss sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairMode {
    /// Individual classes and all class pairs (`j ≥ i`).
    All,
    /// Individual classes only (`j = i`).
    Single,
}

impl PairMode {
    fn includes(self, i: Class, j: Class) -> bool {
        self == PairMode::All || i == j
    }
}

/// One `(i, j, d)` term of the loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossTerm {
    pub i: Class,
    pub j: Class,
    pub dim: u8,
    /// Prior Betti number `B^{ij}_d`.
    pub prior: u32,
    /// Summed lifetime of the `prior` most persistent bars, `A^{ij}_d`.
    pub matched: f64,
    /// Summed lifetime of the remaining bars, `Z^{ij}_d`.
    pub spurious: f64,
}

impl LossTerm {
    pub fn value(&self) -> f64 {
        self.prior as f64 - self.matched + self.spurious
    }
}

/// The loss split into its `(i, j, d)` terms.
#[derive(Clone, Debug, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub terms: Vec<LossTerm>,
}

impl LossBreakdown {
    pub fn term(&self, i: Class, j: Class, dim: u8) -> Option<&LossTerm> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.terms
            .iter()
            .find(|t| t.i == i && t.j == j && t.dim == dim)
    }
}

impl fmt::Display for LossBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>2} {:>2} {:>1} {:>3} {:>10} {:>10}", "i", "j", "d", "B", "A", "Z")?;
        for t in &self.terms {
            writeln!(
                f,
                "{:>2} {:>2} {:>1} {:>3} {:>10.6} {:>10.6}",
                t.i.name(),
                t.j.name(),
                t.dim,
                t.prior,
                t.matched,
                t.spurious
            )?;
        }
        write!(f, "total {:.6}", self.total)
    }
}

/// Gradient of the loss with respect to each class probability channel.
#[derive(Clone, Debug, PartialEq)]
pub struct GradField {
    height: usize,
    width: usize,
    channels: [Vec<f64>; NUM_CLASSES],
}

impl GradField {
    pub fn zeros(height: usize, width: usize) -> Self {
        GradField {
            height,
            width,
            channels: std::array::from_fn(|_| vec![0.0; height * width]),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channel(&self, class: Class) -> &[f64] {
        &self.channels[class.index()]
    }

    pub fn get(&self, class: Class, row: usize, col: usize) -> f64 {
        self.channels[class.index()][row * self.width + col]
    }

    /// Number of nonzero entries over all channels.
    pub fn nonzeros(&self) -> usize {
        self.channels.iter().flatten().filter(|g| **g != 0.0).count()
    }
}

/// Pixel-wise probability of class `i` or class `j`. A class united with
/// itself is just that class.
pub fn union_prob(y: &MultiClassProb, i: Class, j: Class) -> ProbMap {
    union_prob_channels(y.channels(), i, j)
}

/// [`union_prob`] on raw channels that need not sum to one.
pub fn union_prob_channels(channels: &[ProbMap; NUM_CLASSES], i: Class, j: Class) -> ProbMap {
    let a = &channels[i.index()];
    if i == j {
        return a.clone();
    }
    let b = &channels[j.index()];
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| (x + y).clamp(0.0, 1.0))
        .collect();
    ProbMap::new(a.height(), a.width(), values).expect("clamped to [0, 1]")
}

/// Barcode of `Ŷ_{i∪j}`.
pub fn union_barcode(y: &MultiClassProb, i: Class, j: Class) -> Barcode {
    compute_barcode(&build_complex(&union_prob(y, i, j)))
}

/// Loss over all classes and class pairs.
pub fn topo_loss(y: &MultiClassProb, prior: &BettiPrior) -> (LossBreakdown, GradField) {
    topo_loss_channels(y.channels(), prior, PairMode::All)
}

/// Loss over individual classes only.
pub fn topo_loss_single(y: &MultiClassProb, prior: &BettiPrior) -> (LossBreakdown, GradField) {
    topo_loss_channels(y.channels(), prior, PairMode::Single)
}

/// The loss evaluated on four probability channels. The channels do not have
/// to sum to one, which makes finite-difference checks possible.
pub fn topo_loss_channels(
    channels: &[ProbMap; NUM_CLASSES],
    prior: &BettiPrior,
    mode: PairMode,
) -> (LossBreakdown, GradField) {
    let (h, w) = (channels[0].height(), channels[0].width());
    let mut grad = GradField::zeros(h, w);
    let mut terms = Vec::with_capacity(12);
    let mut union_grad = vec![0.0; h * w];

    for (i, j) in PAIRS {
        if !mode.includes(i, j) {
            continue;
        }
        let barcode = compute_barcode(&build_complex(&union_prob_channels(channels, i, j)));
        union_grad.iter_mut().for_each(|g| *g = 0.0);
        let betti = prior.get(i, j);
        for dim in 0..2u8 {
            let wanted = betti[dim as usize] as usize;
            let (mut matched, mut spurious) = (0.0, 0.0);
            for (rank, bar) in barcode.dim_pairs(dim).enumerate() {
                // Matched bars are pushed to full length, the rest to zero.
                let sign = if rank < wanted {
                    matched += bar.lifetime();
                    -1.0
                } else {
                    spurious += bar.lifetime();
                    1.0
                };
                let (r, c) = bar.birth_vertex;
                union_grad[r * w + c] += sign;
                if let Some((r, c)) = bar.death_vertex {
                    union_grad[r * w + c] -= sign;
                }
            }
            terms.push(LossTerm {
                i,
                j,
                dim,
                prior: betti[dim as usize],
                matched,
                spurious,
            });
        }
        for class in if i == j { vec![i] } else { vec![i, j] } {
            for (g, u) in grad.channels[class.index()].iter_mut().zip(&union_grad) {
                *g += u;
            }
        }
    }

    let total = terms.iter().map(LossTerm::value).sum();
    (LossBreakdown { total, terms }, grad)
}
