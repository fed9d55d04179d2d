//! Refines corrupted phantoms towards the short-axis prior and reports
//! topology and overlap before and after.
//!
//! cargo run --release --example refine_phantom [step_size]

use mctopo::metrics::{mean_dsc, topo_correct};
use mctopo::phantom::{apply_corruption, generate, CorruptionKind, CorruptionSpec, PhantomSpec};
use mctopo::refine::argmax_mask;
use mctopo::{refine, short_axis_prior, Class, RefineConfig};

fn main() -> mctopo::Result<()> {
    let step_size = std::env::args().nth(1).map_or(0.1, |s| s.parse().expect("step size"));
    let prior = short_axis_prior();
    let cfg = RefineConfig { step_size, ..Default::default() };
    let kinds = [
        CorruptionKind::SpuriousComponent { class: Class::Rv, size: 9, confidence: 0.6 },
        CorruptionKind::PunchedHole { class: Class::Lv, size: 6 },
        CorruptionKind::BrokenRing { gap_width: 2 },
        CorruptionKind::AdjacencyBreak { gap: 1 },
        CorruptionKind::Soften { temperature: 2.0 },
    ];
    for (seed, kind) in kinds.into_iter().enumerate() {
        let seed = seed as u64;
        let (gt, probs) = generate(&PhantomSpec { seed, ..Default::default() })?;
        let c = apply_corruption(&gt, &probs, &CorruptionSpec { kind, seed })?;
        let before = argmax_mask(&c.probs);
        let report = refine(&c.probs, &prior, &cfg)?;
        let best = report.best();
        println!(
            "{:<24} topo {} -> {}  dsc {:.4} -> {:.4}  L_topo {:.3} -> {:.3} (best iterate {})",
            kind.name(),
            topo_correct(&before, &prior),
            report.topology_correct,
            mean_dsc(&before, &gt)?,
            mean_dsc(&report.mask, &gt)?,
            report.history[0].topo,
            best.topo,
            report.best_iteration
        );
    }
    Ok(())
}
