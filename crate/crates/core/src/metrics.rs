//! Overlap and topology metrics for discrete segmentations.

use crate::error::{Error, Result};
use crate::grid::{Class, LabelMask};
use crate::priors::{prior_from_mask, BettiPrior};

/// Dice similarity coefficient of one class. Two empty masks score 1.
pub fn dsc(pred: &LabelMask, gt: &LabelMask, class: Class) -> Result<f64> {
    if pred.height() != gt.height() || pred.width() != gt.width() {
        return Err(Error::ShapeMismatch(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.height(),
            pred.width(),
            gt.height(),
            gt.width()
        )));
    }
    let c = class as u8;
    let (mut both, mut p, mut g) = (0usize, 0usize, 0usize);
    for (&a, &b) in pred.labels().iter().zip(gt.labels()) {
        let (ia, ib) = (a == c, b == c);
        both += usize::from(ia && ib);
        p += usize::from(ia);
        g += usize::from(ib);
    }
    if p + g == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (p + g) as f64)
}

/// Mean foreground DSC over rv, my and lv.
pub fn mean_dsc(pred: &LabelMask, gt: &LabelMask) -> Result<f64> {
    let mut sum = 0.0;
    for class in Class::FOREGROUND {
        sum += dsc(pred, gt, class)?;
    }
    Ok(sum / 3.0)
}

/// Whether all twelve Betti numbers of `pred` match the prior.
pub fn topo_correct(pred: &LabelMask, prior: &BettiPrior) -> bool {
    prior_from_mask(pred) == *prior
}

/// One evaluated case: a method's output, the unprocessed input it started
/// from, and the ground truth.
#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub output: LabelMask,
    pub input: LabelMask,
    pub ground_truth: LabelMask,
}

/// Mean and standard deviation of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation (0 for a single value).
    pub sd: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, sd }
    }
}

/// Summary of one method over a case set.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub cases: usize,
    /// DSC per foreground class (rv, my, lv).
    pub class_dsc: [Stat; 3],
    /// Class-mean DSC.
    pub mu: Stat,
    /// Change in class-mean DSC relative to the unprocessed input.
    pub delta_mu: Stat,
    /// Fraction of outputs with correct multi-class topology.
    pub topo_accuracy: f64,
    pub topo_correct_count: usize,
}

impl SuiteReport {
    pub const CSV_HEADER: &'static str =
        "method,rv,rv_sd,my,my_sd,lv,lv_sd,mu,mu_sd,delta_mu,delta_mu_sd,t";

    pub fn csv_row(&self, method: &str) -> String {
        let [rv, my, lv] = self.class_dsc;
        format!(
            "{method},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            rv.mean,
            rv.sd,
            my.mean,
            my.sd,
            lv.mean,
            lv.sd,
            self.mu.mean,
            self.mu.sd,
            self.delta_mu.mean,
            self.delta_mu.sd,
            self.topo_accuracy
        )
    }
}

pub fn evaluate_suite(cases: &[SuiteCase], prior: &BettiPrior) -> Result<SuiteReport> {
    if cases.is_empty() {
        return Err(Error::InvalidConfig("evaluate_suite needs at least one case".into()));
    }
    let mut per_class: [Vec<f64>; 3] = Default::default();
    let mut mu = Vec::with_capacity(cases.len());
    let mut delta = Vec::with_capacity(cases.len());
    let mut correct = 0;
    for case in cases {
        for (k, class) in Class::FOREGROUND.into_iter().enumerate() {
            per_class[k].push(dsc(&case.output, &case.ground_truth, class)?);
        }
        let m = mean_dsc(&case.output, &case.ground_truth)?;
        mu.push(m);
        delta.push(m - mean_dsc(&case.input, &case.ground_truth)?);
        correct += usize::from(topo_correct(&case.output, prior));
    }
    Ok(SuiteReport {
        cases: cases.len(),
        class_dsc: [Stat::of(&per_class[0]), Stat::of(&per_class[1]), Stat::of(&per_class[2])],
        mu: Stat::of(&mu),
        delta_mu: Stat::of(&delta),
        topo_accuracy: correct as f64 / cases.len() as f64,
        topo_correct_count: correct,
    })
}
