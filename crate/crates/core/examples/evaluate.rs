//! Table of DSC and topological accuracy for a few post-processing methods
//! over a small batch of corrupted phantoms.
//!
//! cargo run --release --example evaluate

use mctopo::baseline::cca_clean;
use mctopo::loss::PairMode;
use mctopo::metrics::{evaluate_suite, SuiteCase, SuiteReport};
use mctopo::phantom::{apply_corruption, generate, CorruptionKind, CorruptionSpec, PhantomSpec};
use mctopo::refine::argmax_mask;
use mctopo::{refine, short_axis_prior, Class, RefineConfig};

fn main() -> mctopo::Result<()> {
    let prior = short_axis_prior();
    let kinds = [
        CorruptionKind::SpuriousComponent { class: Class::Lv, size: 8, confidence: 0.6 },
        CorruptionKind::PunchedHole { class: Class::My, size: 4 },
        CorruptionKind::AdjacencyBreak { gap: 2 },
    ];
    let mut inputs = Vec::new();
    for (seed, kind) in kinds.into_iter().enumerate() {
        let seed = seed as u64 + 10;
        let (gt, probs) = generate(&PhantomSpec { seed, ..Default::default() })?;
        let c = apply_corruption(&gt, &probs, &CorruptionSpec { kind, seed })?;
        inputs.push((gt, c.probs));
    }

    let refine_with = |mode| {
        let cfg = RefineConfig { step_size: 0.1, mode, ..Default::default() };
        move |y: &mctopo::MultiClassProb| refine(y, &short_axis_prior(), &cfg).map(|r| r.mask)
    };
    let methods: [(&str, Box<dyn Fn(&mctopo::MultiClassProb) -> mctopo::Result<mctopo::LabelMask>>); 4] = [
        ("none", Box::new(|y| Ok(argmax_mask(y)))),
        ("cca", Box::new(|y| Ok(cca_clean(&argmax_mask(y))))),
        ("tp_single", Box::new(refine_with(PairMode::Single))),
        ("tp_pairs", Box::new(refine_with(PairMode::All))),
    ];

    println!("{}", SuiteReport::CSV_HEADER);
    for (name, method) in &methods {
        let mut cases = Vec::new();
        for (gt, y) in &inputs {
            cases.push(SuiteCase { output: method(y)?, input: argmax_mask(y), ground_truth: gt.clone() });
        }
        println!("{}", evaluate_suite(&cases, &prior)?.csv_row(name));
    }
    Ok(())
}
