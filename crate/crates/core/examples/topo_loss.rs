//! Loss breakdown and gradient of a phantom with a spurious rv blob.
//!
//! cargo run --release --example topo_loss

use mctopo::loss::{topo_loss, topo_loss_single};
use mctopo::phantom::{apply_corruption, generate, CorruptionKind, CorruptionSpec, PhantomSpec};
use mctopo::{short_axis_prior, Class};

fn main() -> mctopo::Result<()> {
    let (mask, probs) = generate(&PhantomSpec { seed: 7, ..Default::default() })?;
    let kind = CorruptionKind::SpuriousComponent { class: Class::Rv, size: 12, confidence: 0.7 };
    let corrupted = apply_corruption(&mask, &probs, &CorruptionSpec { kind, seed: 7 })?;
    let prior = short_axis_prior();

    let (clean, _) = topo_loss(&probs, &prior);
    let (loss, grad) = topo_loss(&corrupted.probs, &prior);
    println!("clean phantom: total {:.4}", clean.total);
    println!("{loss}");

    let rv = loss.term(Class::Rv, Class::Rv, 0).expect("rv term");
    println!("rv components: matched {:.3}, spurious {:.3}", rv.matched, rv.spurious);
    println!("nonzero gradient entries: {}", grad.nonzeros());
    for class in Class::FOREGROUND {
        let g = grad.channel(class);
        let (k, v) = g
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("nonempty");
        println!("{class}: largest |dL/dp| = {v} at ({}, {})", k / grad.width(), k % grad.width());
    }

    let (single, _) = topo_loss_single(&corrupted.probs, &prior);
    println!("single labels only: total {:.4}", single.total);
    Ok(())
}
