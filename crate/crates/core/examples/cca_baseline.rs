//! The connected-component baseline fixes extra components but not holes.
//!
//! cargo run --example cca_baseline

use mctopo::baseline::{betti_mask, cca_clean};
use mctopo::metrics::topo_correct;
use mctopo::phantom::{apply_corruption, generate, CorruptionKind, CorruptionSpec, PhantomSpec};
use mctopo::priors::union_mask;
use mctopo::refine::argmax_mask;
use mctopo::{short_axis_prior, Class};

fn main() -> mctopo::Result<()> {
    let prior = short_axis_prior();
    let (gt, probs) = generate(&PhantomSpec { seed: 2, ..Default::default() })?;
    for kind in [
        CorruptionKind::SpuriousComponent { class: Class::My, size: 10, confidence: 0.7 },
        CorruptionKind::PunchedHole { class: Class::Lv, size: 6 },
    ] {
        let c = apply_corruption(&gt, &probs, &CorruptionSpec { kind, seed: 2 })?;
        let mask = argmax_mask(&c.probs);
        let cleaned = cca_clean(&mask);
        let class = match kind {
            CorruptionKind::SpuriousComponent { class, .. } | CorruptionKind::PunchedHole { class, .. } => class,
            _ => unreachable!(),
        };
        println!(
            "{}: (b0, b1) of {class} {:?} -> {:?}, correct {} -> {}",
            kind.name(),
            betti_mask(&union_mask(&mask, class, class)),
            betti_mask(&union_mask(&cleaned, class, class)),
            topo_correct(&mask, &prior),
            topo_correct(&cleaned, &prior)
        );
    }
    Ok(())
}
