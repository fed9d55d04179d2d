use mctopo::grid::{Class, MultiClassProb};
use mctopo::loss::{topo_loss, topo_loss_single, PairMode};
use mctopo::metrics::topo_correct;
use mctopo::phantom::{apply_corruption, generate, CorruptionKind, CorruptionSpec, PhantomSpec};
use mctopo::priors::{prior_from_mask, short_axis_prior};
use mctopo::refine::{argmax_mask, refine, similarity, RefineConfig};

fn small_phantom(seed: u64) -> PhantomSpec {
    PhantomSpec {
        height: 48,
        width: 48,
        lv_radius: 7.0,
        my_thickness: 4.0,
        rv_extent: 8.0,
        jitter: 1.5,
        seed,
        ..Default::default()
    }
}

fn corrupted(seed: u64, kind: CorruptionKind) -> (mctopo::LabelMask, MultiClassProb) {
    let (gt, probs) = generate(&small_phantom(seed)).unwrap();
    let c = apply_corruption(&gt, &probs, &CorruptionSpec { kind, seed }).unwrap();
    (gt, c.probs)
}

fn max_abs_diff(a: &MultiClassProb, b: &MultiClassProb) -> f64 {
    Class::ALL
        .iter()
        .flat_map(|&c| a.channel(c).values().iter().zip(b.channel(c).values()).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn correct_one_hot_phantom_is_left_alone() {
    let (gt, _) = generate(&PhantomSpec { temperature: 0.0, ..small_phantom(3) }).unwrap();
    let y0 = MultiClassProb::one_hot(&gt);
    let r = refine(&y0, &short_axis_prior(), &RefineConfig { iterations: 5, ..Default::default() }).unwrap();
    // Flooring at 1e-7 before taking logits shortens each bar by a few 1e-7.
    assert!(r.history[0].topo < 1e-5, "{}", r.history[0].topo);
    assert!(r.topology_correct);
    assert_eq!(r.mask, gt);
    assert!(max_abs_diff(&r.probs, &y0) < 1e-3);
}

#[test]
fn spurious_rv_blob_is_removed() {
    let kind = CorruptionKind::SpuriousComponent { class: Class::Rv, size: 9, confidence: 0.6 };
    let (gt, y0) = corrupted(1, kind);
    let prior = short_axis_prior();
    assert!(!topo_correct(&argmax_mask(&y0), &prior));
    let cfg = RefineConfig { step_size: 0.1, ..Default::default() };
    let r = refine(&y0, &prior, &cfg).unwrap();
    assert!(r.topology_correct);
    assert_eq!(prior_from_mask(&r.mask), prior);
    // Relabelled pixels are the blob, nothing else.
    let changed: Vec<usize> = (0..gt.labels().len())
        .filter(|&k| r.mask.labels()[k] != argmax_mask(&y0).labels()[k])
        .collect();
    assert!(!changed.is_empty() && changed.len() <= 9, "{changed:?}");
    assert!(changed.iter().all(|&k| gt.labels()[k] == 0));
}

#[test]
fn huge_lambda_keeps_the_input() {
    let kind = CorruptionKind::PunchedHole { class: Class::Lv, size: 4 };
    let (_, y0) = corrupted(2, kind);
    let prior = short_axis_prior();
    let cfg = RefineConfig { lambda: 1e9, iterations: 20, ..Default::default() };
    let r = refine(&y0, &prior, &cfg).unwrap();
    assert!(max_abs_diff(&r.probs, &y0) < 1e-3);
    let (before, _) = topo_loss(&y0, &prior);
    assert!((r.best().topo - before.total).abs() < 1e-3);
}

#[test]
fn zero_lambda_lowers_topological_loss() {
    // The prior asks for no rv at all while the input is confident about it.
    let (_, y0) = generate(&small_phantom(4)).unwrap();
    let mut prior = short_axis_prior();
    prior.set(Class::Rv, Class::Rv, [0, 0]);
    let cfg = RefineConfig { lambda: 0.0, iterations: 30, step_size: 0.1, ..Default::default() };
    let r = refine(&y0, &prior, &cfg).unwrap();
    assert!(r.best().topo < r.history[0].topo);
    assert!(r.history.iter().all(|h| h.similarity == 0.0));
}

#[test]
fn reported_similarity_matches_recomputation() {
    let kind = CorruptionKind::BrokenRing { gap_width: 1 };
    let (_, y0) = corrupted(5, kind);
    let lambda = 250.0;
    let cfg = RefineConfig { lambda, iterations: 10, step_size: 0.05, ..Default::default() };
    let r = refine(&y0, &short_axis_prior(), &cfg).unwrap();
    let v = (y0.height() * y0.width()) as f64;
    let mut sq = 0.0;
    for c in Class::ALL {
        for (a, b) in y0.channel(c).values().iter().zip(r.probs.channel(c).values()) {
            sq += (a - b).powi(2);
        }
    }
    let best = r.best();
    assert!((best.similarity - lambda / v * sq).abs() < 1e-9 * (1.0 + best.similarity));
    assert!((similarity(&y0, &r.probs, lambda) - best.similarity).abs() < 1e-12);
    assert!((best.total - best.topo - best.similarity).abs() < 1e-12);
}

#[test]
fn refinement_is_bit_reproducible() {
    let kind = CorruptionKind::AdjacencyBreak { gap: 1 };
    let (_, y0) = corrupted(6, kind);
    let cfg = RefineConfig { iterations: 15, step_size: 0.1, ..Default::default() };
    let a = refine(&y0, &short_axis_prior(), &cfg).unwrap();
    let b = refine(&y0, &short_axis_prior(), &cfg).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.probs, b.probs);
    assert_eq!(a.history_csv(), b.history_csv());
}

#[test]
fn paired_violation_is_invisible_to_single_labels() {
    let kind = CorruptionKind::AdjacencyBreak { gap: 1 };
    let (gt, y0) = corrupted(7, kind);
    let prior = short_axis_prior();
    let mask = argmax_mask(&y0);
    assert_eq!(prior.differences(&prior_from_mask(&mask)), vec![(Class::Rv, Class::My, 0)]);

    let (single, _) = topo_loss_single(&y0, &prior);
    let (all, _) = topo_loss(&y0, &prior);
    let rv_my = all.term(Class::Rv, Class::My, 0).unwrap();
    assert!(rv_my.spurious > 0.4, "{rv_my:?}");
    // Per-class terms coincide between the two losses.
    for t in &single.terms {
        assert_eq!(Some(t), all.term(t.i, t.j, t.dim));
    }

    let cfg = |mode| RefineConfig { step_size: 0.1, mode, ..Default::default() };
    let single_run = refine(&y0, &prior, &cfg(PairMode::Single)).unwrap();
    assert!(!single_run.topology_correct);
    let all_run = refine(&y0, &prior, &cfg(PairMode::All)).unwrap();
    assert!(all_run.topology_correct);
    assert_eq!(all_run.mask.height(), gt.height());
}

#[test]
fn every_corruption_is_detected_by_the_loss() {
    let prior = short_axis_prior();
    let kinds = [
        CorruptionKind::SpuriousComponent { class: Class::My, size: 6, confidence: 0.7 },
        CorruptionKind::PunchedHole { class: Class::Rv, size: 4 },
        CorruptionKind::BrokenRing { gap_width: 2 },
        CorruptionKind::AdjacencyBreak { gap: 2 },
        CorruptionKind::Soften { temperature: 3.0 },
    ];
    for kind in kinds {
        let (gt, probs) = generate(&small_phantom(11)).unwrap();
        let c = apply_corruption(&gt, &probs, &CorruptionSpec { kind, seed: 11 }).unwrap();
        let (clean, _) = topo_loss(&probs, &prior);
        let (loss, _) = topo_loss(&c.probs, &prior);
        assert!(loss.total > clean.total, "{}: {} vs {}", kind.name(), loss.total, clean.total);
        assert_eq!(prior_from_mask(&argmax_mask(&c.probs)), c.expected);
        assert_eq!(kind.violations(&prior), prior.differences(&c.expected));
    }
}
