//! Similarity-constrained topological refinement.
//!
//! The optimisation variable is a per-pixel logit field `θ` whose softmax is
//! the refined segmentation. Starting from `θ = log(y0)`, Adam minimises
//!
//! ```text
//! L_TP(θ) = L_topo(softmax θ) + (λ / V) · Σ_{pixels, classes} (y0 − softmax θ)²
//! ```
//!
//! where `V` is the number of pixels. The iterate with the lowest `L_TP` is
//! returned.

use crate::error::{Error, Result};
use crate::grid::{Class, LabelMask, MultiClassProb, ProbMap, NUM_CLASSES};
use crate::loss::{topo_loss_channels, LossBreakdown, PairMode};
use crate::metrics::topo_correct;
use crate::priors::BettiPrior;

/// Smallest probability admitted before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct RefineConfig {
    /// Weight of the similarity term.
    pub lambda: f64,
    /// Number of optimiser steps.
    pub iterations: usize,
    pub step_size: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub mode: PairMode,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            lambda: 1000.0,
            iterations: 100,
            step_size: 1e-2,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            mode: PairMode::All,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be finite and nonnegative");
        }
        if self.iterations < 1 {
            return bad("iterations must be at least 1");
        }
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return bad("step size must be positive");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.adam_epsilon > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }
}

/// Four-channel logit field, row-major per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct LogitField {
    height: usize,
    width: usize,
    logits: [Vec<f64>; NUM_CLASSES],
}

impl LogitField {
    /// `log(max(y, PROB_FLOOR))` channel by channel.
    pub fn from_probs(y: &MultiClassProb) -> Self {
        LogitField {
            height: y.height(),
            width: y.width(),
            logits: std::array::from_fn(|c| {
                y.channels()[c]
                    .values()
                    .iter()
                    .map(|&p| p.max(PROB_FLOOR).ln())
                    .collect()
            }),
        }
    }

    pub fn logits(&self, class: Class) -> &[f64] {
        &self.logits[class.index()]
    }

    /// Per-pixel softmax over the channels.
    pub fn probs(&self) -> MultiClassProb {
        let n = self.height * self.width;
        let mut out: [Vec<f64>; NUM_CLASSES] = std::array::from_fn(|_| vec![0.0; n]);
        for k in 0..n {
            let max = (0..NUM_CLASSES)
                .map(|c| self.logits[c][k])
                .fold(f64::NEG_INFINITY, f64::max);
            let mut e = [0.0; NUM_CLASSES];
            for c in 0..NUM_CLASSES {
                e[c] = (self.logits[c][k] - max).exp();
            }
            let z: f64 = e.iter().sum();
            for c in 0..NUM_CLASSES {
                out[c][k] = e[c] / z;
            }
        }
        let channels = out.map(|v| ProbMap::new(self.height, self.width, v).expect("softmax in [0, 1]"));
        MultiClassProb::new(channels).expect("softmax sums to one")
    }
}

/// Adam with bias correction over a flat parameter vector.
#[derive(Clone, Debug)]
struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(cfg: &RefineConfig, n: usize) -> Self {
        Adam {
            lr: cfg.step_size,
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            epsilon: cfg.adam_epsilon,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for k in 0..params.len() {
            let g = grads[k];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            params[k] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Losses of one evaluated iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationLoss {
    pub topo: f64,
    pub similarity: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct RefineReport {
    /// Losses of iterates `0..=iterations`; iterate 0 is the input.
    pub history: Vec<IterationLoss>,
    /// Index into `history` of the returned iterate.
    pub best_iteration: usize,
    pub probs: MultiClassProb,
    pub mask: LabelMask,
    pub breakdown: LossBreakdown,
    pub topology_correct: bool,
}

impl RefineReport {
    pub fn best(&self) -> IterationLoss {
        self.history[self.best_iteration]
    }

    /// Per-iteration losses as CSV.
    pub fn history_csv(&self) -> String {
        let mut s = String::from("iteration,l_topo,similarity,l_tp\n");
        for (t, h) in self.history.iter().enumerate() {
            s.push_str(&format!("{t},{},{},{}\n", h.topo, h.similarity, h.total));
        }
        s
    }
}

/// `(λ / V) · Σ (y0 − y)²` over all pixels and channels.
pub fn similarity(y0: &MultiClassProb, y: &MultiClassProb, lambda: f64) -> f64 {
    let v = (y0.height() * y0.width()) as f64;
    let sq: f64 = y0
        .channels()
        .iter()
        .zip(y.channels())
        .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, z)| (x - z).powi(2)))
        .sum();
    lambda / v * sq
}

fn check_finite(iteration: usize, breakdown: &LossBreakdown, grads: &[f64]) -> Result<()> {
    if let Some(t) = breakdown
        .terms
        .iter()
        .find(|t| !t.matched.is_finite() || !t.spurious.is_finite())
    {
        return Err(Error::NonFinite {
            iteration,
            term: format!("{},{},{}", t.i, t.j, t.dim),
            quantity: "loss",
        });
    }
    if !breakdown.total.is_finite() {
        return Err(Error::NonFinite {
            iteration,
            term: "total".into(),
            quantity: "loss",
        });
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            iteration,
            term: "similarity".into(),
            quantity: "gradient",
        });
    }
    Ok(())
}

/// Refines `y0` towards `prior` by gradient descent on its logits.
pub fn refine(y0: &MultiClassProb, prior: &BettiPrior, cfg: &RefineConfig) -> Result<RefineReport> {
    cfg.validate()?;
    let (h, w) = (y0.height(), y0.width());
    let n = h * w;
    let scale = cfg.lambda / n as f64;

    let mut theta = LogitField::from_probs(y0);
    let mut adam = Adam::new(cfg, NUM_CLASSES * n);
    let mut params: Vec<f64> = theta.logits.concat();
    let mut grads = vec![0.0; NUM_CLASSES * n];
    let mut history = Vec::with_capacity(cfg.iterations + 1);
    let mut best: Option<(usize, f64, MultiClassProb, LossBreakdown)> = None;

    for t in 0..=cfg.iterations {
        let y = theta.probs();
        let (breakdown, topo_grad) = topo_loss_channels(y.channels(), prior, cfg.mode);
        let sim = similarity(y0, &y, cfg.lambda);
        let total = breakdown.total + sim;
        history.push(IterationLoss {
            topo: breakdown.total,
            similarity: sim,
            total,
        });

        // dL/dy, then through the softmax: dL/dθ_c = y_c (g_c − Σ_k y_k g_k).
        for k in 0..n {
            let mut g = [0.0; NUM_CLASSES];
            let mut p = [0.0; NUM_CLASSES];
            for c in 0..NUM_CLASSES {
                let class = Class::ALL[c];
                p[c] = y.channel(class).values()[k];
                let q0 = y0.channel(class).values()[k];
                g[c] = topo_grad.channel(class)[k] + 2.0 * scale * (p[c] - q0);
            }
            let mean: f64 = (0..NUM_CLASSES).map(|c| p[c] * g[c]).sum();
            for c in 0..NUM_CLASSES {
                grads[c * n + k] = p[c] * (g[c] - mean);
            }
        }
        check_finite(t, &breakdown, &grads)?;

        if best.as_ref().is_none_or(|b| total < b.1) {
            best = Some((t, total, y, breakdown));
        }
        if t == cfg.iterations {
            break;
        }
        adam.step(&mut params, &grads);
        for c in 0..NUM_CLASSES {
            theta.logits[c].copy_from_slice(&params[c * n..(c + 1) * n]);
        }
    }

    let (best_iteration, _, probs, breakdown) = best.expect("at least one iterate");
    let mask = argmax_mask(&probs);
    let topology_correct = topo_correct(&mask, prior);
    Ok(RefineReport {
        history,
        best_iteration,
        probs,
        mask,
        breakdown,
        topology_correct,
    })
}

/// Per-pixel most probable class; ties go to the lowest class index.
pub fn argmax_mask(y: &MultiClassProb) -> LabelMask {
    let n = y.height() * y.width();
    let labels = (0..n)
        .map(|k| {
            let p = y.pixel(k);
            let mut best = 0;
            for c in 1..NUM_CLASSES {
                if p[c] > p[best] {
                    best = c;
                }
            }
            best as u8
        })
        .collect();
    LabelMask::new(y.height(), y.width(), labels).expect("class indices")
}
