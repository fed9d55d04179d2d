//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p mctopo --test acceptance`.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mctopo::baseline::cca_clean;
use mctopo::cubical::build_complex;
use mctopo::grid::{Class, LabelMask, MultiClassProb, ProbMap};
use mctopo::loss::{topo_loss, topo_loss_channels, union_prob_channels, PairMode};
use mctopo::metrics::{mean_dsc, topo_correct};
use mctopo::oracle::{brute_barcode, sort_bars, Bar};
use mctopo::persistence::compute_barcode;
use mctopo::phantom::{apply_corruption, generate, CorruptionKind, CorruptionSpec, PhantomSpec};
use mctopo::priors::{short_axis_prior, PAIRS};
use mctopo::refine::{argmax_mask, refine, RefineConfig, RefineReport};

const ORACLE_MAPS: usize = 500;
const ORACLE_MAX_SIDE: usize = 10;
const ORACLE_MAX_LEVELS: usize = 6;

const GRAD_FIELDS: usize = 50;
const GRAD_SIDE: usize = 8;
const FD_STEP: f64 = 1e-4;
const GRAD_REL_TOL: f64 = 1e-5;
/// Smallest allowed gap between union-map values and between ranked
/// lifetimes, so that no ±step perturbation reorders the filtration.
const GRAD_MIN_GAP: f64 = 1.5 * FD_STEP;
const GRAD_MIN_CHANNEL: f64 = 0.02;

/// Σ B over all six pairs and both dimensions of the short-axis prior.
const ALL_BACKGROUND_LOSS: f64 = 9.0;

const LAMBDA: f64 = 1000.0;
const ITERATIONS: usize = 100;
const STEP_CANDIDATES: [f64; 3] = [1e-3, 1e-2, 1e-1];
const CASES_PER_KIND: usize = 20;
const VALIDATION_PER_KIND: usize = 4;
const VALIDATION_SEED_BASE: u64 = 1_000_000;
const MIN_T: f64 = 0.95;
const MAX_MEAN_ABS_DELTA: f64 = 0.01;
const DETERMINISM_CASES: usize = 3;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn report(name: &'static str, passed: bool, detail: String) -> Outcome {
    println!("{} [{name}] {detail}", if passed { "PASS" } else { "FAIL" });
    Outcome { name, passed, detail }
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence

fn random_level_map(rng: &mut ChaCha8Rng) -> ProbMap {
    let h = rng.random_range(1..=ORACLE_MAX_SIDE);
    let w = rng.random_range(1..=ORACLE_MAX_SIDE);
    let k = rng.random_range(1..=ORACLE_MAX_LEVELS);
    let mut levels: Vec<f64> = (0..k).map(|_| rng.random_range(0..=20) as f64 / 20.0).collect();
    levels.dedup();
    ProbMap::new(h, w, (0..h * w).map(|_| levels[rng.random_range(0..levels.len())]).collect()).unwrap()
}

fn fast_bars(map: &ProbMap) -> Vec<Bar> {
    let mut bars: Vec<Bar> = compute_barcode(&build_complex(map))
        .pairs()
        .iter()
        .map(|p| (p.dim, p.birth, p.death))
        .collect();
    sort_bars(&mut bars);
    bars
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let mut mismatches = 0;
    for _ in 0..ORACLE_MAPS {
        let map = random_level_map(&mut rng);
        if fast_bars(&map) != brute_barcode(&map) {
            mismatches += 1;
        }
    }
    report(
        "oracle equivalence",
        mismatches == 0,
        format!(
            "{}/{ORACLE_MAPS} maps agree with the brute-force barcode ({:.1?})",
            ORACLE_MAPS - mismatches,
            start.elapsed()
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. Gradient check

fn random_field(rng: &mut ChaCha8Rng) -> MultiClassProb {
    let pixels: Vec<[f64; 4]> = (0..GRAD_SIDE * GRAD_SIDE)
        .map(|_| {
            let raw: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
            let s: f64 = raw.iter().sum();
            let spare = 1.0 - 4.0 * GRAD_MIN_CHANNEL;
            raw.map(|x| GRAD_MIN_CHANNEL + spare * x / s)
        })
        .collect();
    MultiClassProb::from_pixels(GRAD_SIDE, GRAD_SIDE, &pixels).unwrap()
}

fn min_gap(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// True when every union map has well-separated values and every dimension
/// has well-separated nonzero lifetimes.
fn well_separated(y: &MultiClassProb) -> bool {
    PAIRS.iter().all(|&(i, j)| {
        let map = union_prob_channels(y.channels(), i, j);
        if min_gap(map.values().to_vec()) <= GRAD_MIN_GAP {
            return false;
        }
        let barcode = compute_barcode(&build_complex(&map));
        (0..2).all(|d| {
            let lifetimes: Vec<f64> = barcode.dim_pairs(d).map(|p| p.lifetime()).collect();
            min_gap(lifetimes) > GRAD_MIN_GAP
        })
    })
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let prior = short_axis_prior();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6fad);
    let (mut fields, mut draws, mut worst) = (0, 0, 0.0f64);
    while fields < GRAD_FIELDS {
        draws += 1;
        let y = random_field(&mut rng);
        if !well_separated(&y) {
            continue;
        }
        fields += 1;
        let (_, grad) = topo_loss(&y, &prior);
        for class in Class::ALL {
            for k in 0..GRAD_SIDE * GRAD_SIDE {
                let eval = |delta: f64| {
                    let mut ch = y.channels().clone();
                    let c = &mut ch[class.index()];
                    let (r, col) = (k / GRAD_SIDE, k % GRAD_SIDE);
                    c.set(r, col, c.get(r, col) + delta).unwrap();
                    topo_loss_channels(&ch, &prior, PairMode::All).0.total
                };
                let fd = (eval(FD_STEP) - eval(-FD_STEP)) / (2.0 * FD_STEP);
                let a = grad.channel(class)[k];
                worst = worst.max((a - fd).abs() / a.abs().max(1.0));
            }
        }
    }
    report(
        "gradient check",
        worst <= GRAD_REL_TOL,
        format!(
            "{fields} fields ({draws} drawn), max relative error {worst:.2e} <= {GRAD_REL_TOL:e} ({:.1?})",
            start.elapsed()
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. Zero-loss sanity

fn zero_loss() -> Outcome {
    let prior = short_axis_prior();
    let (_, hot) = generate(&PhantomSpec { temperature: 0.0, ..Default::default() }).unwrap();
    let (phantom_loss, _) = topo_loss(&hot, &prior);
    let bg = MultiClassProb::one_hot(&LabelMask::filled(96, 96, 0).unwrap());
    let (bg_loss, _) = topo_loss(&bg, &prior);
    report(
        "zero-loss sanity",
        phantom_loss.total == 0.0 && bg_loss.total == ALL_BACKGROUND_LOSS,
        format!(
            "one-hot phantom loss {} (want 0), all-background loss {} (want {ALL_BACKGROUND_LOSS})",
            phantom_loss.total, bg_loss.total
        ),
    )
}

// ---------------------------------------------------------------------------
// 4-6. Refinement experiment

struct Case {
    kind: CorruptionKind,
    ground_truth: LabelMask,
    input: MultiClassProb,
}

/// Parameters of the `k`-th case of corruption family `family`.
fn corruption(family: usize, k: usize) -> CorruptionKind {
    let class = Class::FOREGROUND[k % 3];
    match family {
        0 => CorruptionKind::SpuriousComponent {
            class,
            size: 6 + 3 * (k % 4),
            confidence: 0.55 + 0.05 * (k % 5) as f64,
        },
        1 => CorruptionKind::PunchedHole { class, size: 4 + 2 * (k % 3) },
        2 => CorruptionKind::BrokenRing { gap_width: 1 + k % 3 },
        3 => CorruptionKind::AdjacencyBreak { gap: 1 + k % 2 },
        _ => CorruptionKind::Soften { temperature: 1.5 + 0.5 * (k % 4) as f64 },
    }
}

/// `per_kind` cases of each of the five corruption families, drawing seeds
/// upwards from `seed_base` and skipping seeds whose geometry rejects the
/// corruption.
fn build_cases(per_kind: usize, seed_base: u64) -> Vec<Case> {
    let mut cases = Vec::new();
    for family in 0..5 {
        let mut seed = seed_base;
        let mut made = 0;
        while made < per_kind {
            assert!(seed < seed_base + 50 * per_kind as u64, "family {family} keeps failing");
            let kind = corruption(family, made);
            let (gt, probs) = generate(&PhantomSpec { seed, ..Default::default() }).unwrap();
            if let Ok(c) = apply_corruption(&gt, &probs, &CorruptionSpec { kind, seed }) {
                cases.push(Case { kind, ground_truth: gt, input: c.probs });
                made += 1;
            }
            seed += 1;
        }
    }
    cases
}

fn config(step_size: f64, mode: PairMode) -> RefineConfig {
    RefineConfig {
        lambda: LAMBDA,
        iterations: ITERATIONS,
        step_size,
        mode,
        ..Default::default()
    }
}

struct MethodResult {
    correct: Vec<bool>,
    abs_delta: Vec<f64>,
}

impl MethodResult {
    fn t(&self) -> f64 {
        self.correct.iter().filter(|&&c| c).count() as f64 / self.correct.len() as f64
    }

    fn mean_abs_delta(&self) -> f64 {
        self.abs_delta.iter().sum::<f64>() / self.abs_delta.len() as f64
    }

    fn fixed_fraction(&self, cases: &[Case], family: fn(&CorruptionKind) -> bool) -> f64 {
        let picked: Vec<bool> = cases
            .iter()
            .zip(&self.correct)
            .filter(|(c, _)| family(&c.kind))
            .map(|(_, &ok)| ok)
            .collect();
        picked.iter().filter(|&&ok| ok).count() as f64 / picked.len() as f64
    }
}

fn evaluate(cases: &[Case], method: impl Fn(&MultiClassProb) -> LabelMask) -> MethodResult {
    let prior = short_axis_prior();
    let mut correct = Vec::new();
    let mut abs_delta = Vec::new();
    for case in cases {
        let before = argmax_mask(&case.input);
        let out = method(&case.input);
        correct.push(topo_correct(&out, &prior));
        let delta = mean_dsc(&out, &case.ground_truth).unwrap() - mean_dsc(&before, &case.ground_truth).unwrap();
        abs_delta.push(delta.abs());
    }
    MethodResult { correct, abs_delta }
}

fn refine_method(step: f64, mode: PairMode) -> impl Fn(&MultiClassProb) -> LabelMask {
    move |y| refine(y, &short_axis_prior(), &config(step, mode)).unwrap().mask
}

struct Experiment {
    cases: Vec<Case>,
    step: f64,
    sweep: Vec<(f64, f64, f64)>,
    pairs: MethodResult,
    elapsed: f64,
}

fn experiment() -> &'static Experiment {
    static EXPERIMENT: OnceLock<Experiment> = OnceLock::new();
    EXPERIMENT.get_or_init(|| {
        let validation = build_cases(VALIDATION_PER_KIND, VALIDATION_SEED_BASE);
        let mut sweep = Vec::new();
        for step in STEP_CANDIDATES {
            let r = evaluate(&validation, refine_method(step, PairMode::All));
            sweep.push((step, r.t(), r.mean_abs_delta()));
        }
        // Highest T, then smallest mean |Δμ|.
        let &(step, _, _) = sweep
            .iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.2.partial_cmp(&a.2).unwrap()))
            .unwrap();
        let cases = build_cases(CASES_PER_KIND, 0);
        let start = Instant::now();
        let pairs = evaluate(&cases, refine_method(step, PairMode::All));
        Experiment {
            cases,
            step,
            sweep,
            pairs,
            elapsed: start.elapsed().as_secs_f64(),
        }
    })
}

fn end_to_end() -> Outcome {
    let e = experiment();
    for (step, t, d) in &e.sweep {
        println!("     validation step {step:e}: T {t:.3}, mean |dmu| {d:.4}");
    }
    let (t, d) = (e.pairs.t(), e.pairs.mean_abs_delta());
    report(
        "end-to-end refinement",
        t >= MIN_T && d <= MAX_MEAN_ABS_DELTA,
        format!(
            "{} cases, step {:e}: T {t:.3} >= {MIN_T}, mean |dmu| {d:.4} <= {MAX_MEAN_ABS_DELTA} ({:.0} s)",
            e.cases.len(),
            e.step,
            e.elapsed
        ),
    )
}

fn ablation() -> Outcome {
    let e = experiment();
    let single = evaluate(&e.cases, refine_method(e.step, PairMode::Single));
    let cca = evaluate(&e.cases, |y| cca_clean(&argmax_mask(y)));
    let none = evaluate(&e.cases, argmax_mask);
    let ts = [e.pairs.t(), single.t(), cca.t(), none.t()];
    let ordered = ts.windows(2).all(|w| w[0] >= w[1]);
    let spurious = cca.fixed_fraction(&e.cases, |k| matches!(k, CorruptionKind::SpuriousComponent { .. }));
    let holes = cca.fixed_fraction(&e.cases, |k| matches!(k, CorruptionKind::PunchedHole { .. }));
    report(
        "ablation ordering",
        ordered && spurious == 1.0 && holes == 0.0,
        format!(
            "T pairs {:.3} >= single {:.3} >= cca {:.3} >= none {:.3}; cca fixes {:.0}% spurious, {:.0}% holes",
            ts[0],
            ts[1],
            ts[2],
            ts[3],
            100.0 * spurious,
            100.0 * holes
        ),
    )
}

fn bits(y: &MultiClassProb) -> Vec<u64> {
    y.channels().iter().flat_map(|c| c.values().iter().map(|v| v.to_bits())).collect()
}

fn fingerprint(r: &RefineReport) -> (Vec<u64>, Vec<u8>, String, String) {
    (bits(&r.probs), r.mask.labels().to_vec(), r.history_csv(), r.breakdown.to_string())
}

fn determinism() -> Outcome {
    let e = experiment();
    let prior = short_axis_prior();
    let cfg = config(e.step, PairMode::All);
    let mut same = true;
    for case in e.cases.iter().step_by(e.cases.len() / DETERMINISM_CASES).take(DETERMINISM_CASES) {
        let a = refine(&case.input, &prior, &cfg).unwrap();
        let b = refine(&case.input, &prior, &cfg).unwrap();
        same &= fingerprint(&a) == fingerprint(&b);
    }
    let regenerated = build_cases(CASES_PER_KIND, 0);
    for (a, b) in e.cases.iter().zip(&regenerated) {
        same &= bits(&a.input) == bits(&b.input) && a.ground_truth == b.ground_truth;
        for (i, j) in PAIRS {
            let ba = compute_barcode(&build_complex(&union_prob_channels(a.input.channels(), i, j)));
            let bb = compute_barcode(&build_complex(&union_prob_channels(b.input.channels(), i, j)));
            let key = |b: &mctopo::Barcode| -> Vec<(u8, u64, u64)> {
                b.pairs().iter().map(|p| (p.dim, p.birth.to_bits(), p.death.to_bits())).collect()
            };
            same &= key(&ba) == key(&bb);
        }
    }
    report(
        "determinism",
        same,
        format!(
            "{} regenerated phantoms, their barcodes and {DETERMINISM_CASES} refinements are bit-identical",
            regenerated.len()
        ),
    )
}

fn main() -> ExitCode {
    let outcomes = [
        oracle_equivalence(),
        gradient_check(),
        zero_loss(),
        end_to_end(),
        ablation(),
        determinism(),
    ];
    let failed: Vec<&Outcome> = outcomes.iter().filter(|o| !o.passed).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    for o in &failed {
        println!("  failed: {} ({})", o.name, o.detail);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
