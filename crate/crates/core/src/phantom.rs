//! Synthetic short-axis phantoms and controlled topological corruptions.
//!
//! A phantom is a left-ventricle disk inside a myocardial ring, with a
//! right-ventricle crescent hugging the ring on the left. Its ground-truth
//! mask always satisfies [`short_axis_prior`]; generation retries with fresh
//! random draws until it does.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`) seeded with the phantom's
//! `seed`, so phantoms are reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline::cca_clean;
use crate::error::{Error, Result};
use crate::grid::{Class, LabelMask, MultiClassProb, NUM_CLASSES};
use crate::priors::{prior_from_mask, short_axis_prior, BettiPrior, PAIRS};
use crate::refine::argmax_mask;

const MAX_ATTEMPTS: usize = 32;
const MARGIN: f64 = 2.0;

/// Probability left on each non-dominant foreground class inside a corruption.
pub const RESIDUAL: f64 = 0.01;

/// Probability that the wrong class receives inside holes and gaps.
pub const DEFECT_CONFIDENCE: f64 = 0.65;

#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub height: usize,
    pub width: usize,
    pub lv_radius: f64,
    pub my_thickness: f64,
    /// Maximum width of the rv crescent.
    pub rv_extent: f64,
    /// Scale of the random geometric perturbation, in pixels.
    pub jitter: f64,
    /// Softmax temperature turning the one-hot mask into probabilities;
    /// 0 gives the exact one-hot field.
    pub temperature: f64,
    /// Amplitude of uniform per-pixel logit noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            height: 96,
            width: 96,
            lv_radius: 12.0,
            my_thickness: 5.0,
            rv_extent: 12.0,
            jitter: 3.0,
            temperature: 0.25,
            noise: 0.1,
            seed: 0,
        }
    }
}

impl PhantomSpec {
    /// Default spec on a `size`×`size` grid, with every length scaled by `size / 96`.
    pub fn with_size(size: usize, seed: u64) -> Self {
        let d = PhantomSpec::default();
        let k = size as f64 / d.height as f64;
        PhantomSpec {
            height: size,
            width: size,
            lv_radius: d.lv_radius * k,
            my_thickness: d.my_thickness * k,
            rv_extent: d.rv_extent * k,
            jitter: d.jitter * k,
            seed,
            ..d
        }
    }
}

struct Geometry {
    centre: (f64, f64),
    lv_radius: f64,
    outer_radius: f64,
    rv_centre: (f64, f64),
    rv_radius: f64,
}

impl Geometry {
    fn draw(spec: &PhantomSpec, rng: &mut ChaCha8Rng) -> Geometry {
        let j = spec.jitter;
        let mut u = |scale: f64| if scale > 0.0 { rng.random_range(-scale..=scale) } else { 0.0 };
        let centre = (
            spec.height as f64 / 2.0 + u(j),
            spec.width as f64 / 2.0 + spec.rv_extent / 2.0 + u(j),
        );
        let lv_radius = (spec.lv_radius + u(j / 2.0)).max(2.0);
        let outer_radius = lv_radius + (spec.my_thickness + u(j / 4.0)).max(2.0);
        let extent = (spec.rv_extent + u(j / 2.0)).max(3.0);
        let rv_centre = (centre.0 + u(j / 2.0), centre.1 - extent);
        let rv_radius = outer_radius + u(j / 4.0);
        Geometry {
            centre,
            lv_radius,
            outer_radius,
            rv_centre,
            rv_radius,
        }
    }

    fn fits(&self, h: usize, w: usize) -> bool {
        let (h, w) = (h as f64, w as f64);
        let inside = |(r, c): (f64, f64), rad: f64| {
            r - rad >= MARGIN && r + rad <= h - 1.0 - MARGIN && c - rad >= MARGIN && c + rad <= w - 1.0 - MARGIN
        };
        inside(self.centre, self.outer_radius) && inside(self.rv_centre, self.rv_radius)
    }

    fn label(&self, r: usize, c: usize) -> u8 {
        let d = |(cr, cc): (f64, f64)| ((r as f64 - cr).powi(2) + (c as f64 - cc).powi(2)).sqrt();
        let dl = d(self.centre);
        if dl <= self.lv_radius {
            Class::Lv as u8
        } else if dl <= self.outer_radius {
            Class::My as u8
        } else if d(self.rv_centre) <= self.rv_radius {
            Class::Rv as u8
        } else {
            Class::Background as u8
        }
    }
}

/// Softened one-hot probabilities: softmax of `onehot / temperature` plus
/// uniform logit noise in `[-noise, noise]`.
fn soften_mask(mask: &LabelMask, temperature: f64, noise: f64, rng: &mut ChaCha8Rng) -> MultiClassProb {
    if temperature == 0.0 {
        return MultiClassProb::one_hot(mask);
    }
    let pixels: Vec<[f64; 4]> = mask
        .labels()
        .iter()
        .map(|&l| {
            let mut z = [0.0; NUM_CLASSES];
            for (c, zc) in z.iter_mut().enumerate() {
                let hot = if c == l as usize { 1.0 / temperature } else { 0.0 };
                let n = if noise > 0.0 { rng.random_range(-noise..=noise) } else { 0.0 };
                *zc = hot + n;
            }
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e = z.map(|v| (v - max).exp());
            let s: f64 = e.iter().sum();
            e.map(|v| v / s)
        })
        .collect();
    MultiClassProb::from_pixels(mask.height(), mask.width(), &pixels).expect("softmax is normalised")
}

/// Generates a ground-truth mask and its softened probability field.
pub fn generate(spec: &PhantomSpec) -> Result<(LabelMask, MultiClassProb)> {
    if !(spec.temperature >= 0.0) || !(spec.noise >= 0.0) || !(spec.jitter >= 0.0) {
        return Err(Error::InvalidConfig(
            "temperature, noise and jitter must be nonnegative".into(),
        ));
    }
    if spec.temperature > 0.0 && spec.noise >= 0.5 / spec.temperature {
        return Err(Error::InvalidConfig("noise would flip the argmax".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let target = short_axis_prior();
    let mut last_problem = String::from("no attempt made");
    for _ in 0..MAX_ATTEMPTS {
        let g = Geometry::draw(spec, &mut rng);
        if !g.fits(spec.height, spec.width) {
            last_problem = format!(
                "structures of outer radius {:.1} do not fit a {}x{} grid",
                g.outer_radius, spec.height, spec.width
            );
            continue;
        }
        let raw = LabelMask::from_fn(spec.height, spec.width, |r, c| g.label(r, c))?;
        // Digitised crescent tips can break off; keep the main piece.
        let mask = cca_clean(&raw);
        let measured = prior_from_mask(&mask);
        if measured != target {
            last_problem = format!("digitised topology differs: {:?}", target.differences(&measured));
            continue;
        }
        let probs = soften_mask(&mask, spec.temperature, spec.noise, &mut rng);
        return Ok((mask, probs));
    }
    Err(Error::Geometry(last_problem))
}

/// A topological defect to inject into a phantom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CorruptionKind {
    /// Extra blob of `size` pixels of `class` in the background.
    /// Adds one component to every union containing `class`.
    SpuriousComponent { class: Class, size: usize, confidence: f64 },
    /// Background hole of `size` pixels inside `class`.
    /// Adds one loop to every union containing `class`.
    PunchedHole { class: Class, size: usize },
    /// Cuts the myocardial ring on the side away from the rv.
    /// Removes the loop of `my` and of `rv ∪ my`.
    BrokenRing { gap_width: usize },
    /// Turns rv pixels within `gap` steps of the myocardium into background.
    /// Splits `rv ∪ my` into two components.
    AdjacencyBreak { gap: usize },
    /// Flattens every pixel distribution, `p ← p^(1/temperature)` renormalised.
    /// Leaves the argmax, and so every Betti number, unchanged.
    Soften { temperature: f64 },
}

impl CorruptionKind {
    /// Short name used in manifests.
    pub fn name(&self) -> String {
        match self {
            CorruptionKind::SpuriousComponent { class, .. } => format!("spurious_component_{class}"),
            CorruptionKind::PunchedHole { class, .. } => format!("punched_hole_{class}"),
            CorruptionKind::BrokenRing { .. } => "broken_ring".into(),
            CorruptionKind::AdjacencyBreak { .. } => "adjacency_break".into(),
            CorruptionKind::Soften { .. } => "soften".into(),
        }
    }

    /// Betti numbers of the corrupted argmax, given those of the clean mask.
    pub fn expected_prior(&self, clean: &BettiPrior) -> BettiPrior {
        let mut p = *clean;
        let bump = |p: &mut BettiPrior, class: Class, d: usize| {
            for (i, j) in PAIRS {
                if i == class || j == class {
                    let mut b = p.get(i, j);
                    b[d] += 1;
                    p.set(i, j, b);
                }
            }
        };
        match *self {
            CorruptionKind::SpuriousComponent { class, .. } => bump(&mut p, class, 0),
            CorruptionKind::PunchedHole { class, .. } => bump(&mut p, class, 1),
            CorruptionKind::BrokenRing { .. } => {
                for (i, j) in [(Class::My, Class::My), (Class::Rv, Class::My)] {
                    let mut b = p.get(i, j);
                    b[1] = b[1].saturating_sub(1);
                    p.set(i, j, b);
                }
            }
            CorruptionKind::AdjacencyBreak { .. } => {
                let mut b = p.get(Class::Rv, Class::My);
                b[0] += 1;
                p.set(Class::Rv, Class::My, b);
            }
            CorruptionKind::Soften { .. } => {}
        }
        p
    }

    /// Entries `(i, j, d)` of the clean prior that this kind violates.
    pub fn violations(&self, clean: &BettiPrior) -> Vec<(Class, Class, usize)> {
        clean.differences(&self.expected_prior(clean))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub seed: u64,
}

/// Result of [`apply_corruption`].
#[derive(Clone, Debug)]
pub struct Corrupted {
    pub probs: MultiClassProb,
    /// Row-major indices of every modified pixel.
    pub footprint: Vec<usize>,
    /// Betti numbers of the corrupted argmax (verified).
    pub expected: BettiPrior,
}

/// Compact blob of `size` offsets around the origin, nearest first.
fn blob_offsets(size: usize) -> Vec<(i64, i64)> {
    let rad = ((size as f64 / std::f64::consts::PI).sqrt().ceil() as i64) + 1;
    let mut offs: Vec<(i64, i64)> = (-rad..=rad)
        .flat_map(|dr| (-rad..=rad).map(move |dc| (dr, dc)))
        .collect();
    offs.sort_by_key(|&(dr, dc)| (dr * dr + dc * dc, dr, dc));
    offs.truncate(size);
    offs
}

/// Picks a random centre such that the blob, grown by `margin` pixels
/// (Chebyshev), lies inside the grid on pixels labelled `host`.
fn place_blob(
    mask: &LabelMask,
    offsets: &[(i64, i64)],
    host: u8,
    margin: i64,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<usize>> {
    let (h, w) = (mask.height() as i64, mask.width() as i64);
    let mut halo: Vec<(i64, i64)> = offsets
        .iter()
        .flat_map(|&(dr, dc)| {
            (-margin..=margin).flat_map(move |a| (-margin..=margin).map(move |b| (dr + a, dc + b)))
        })
        .collect();
    halo.sort_unstable();
    halo.dedup();
    let fits = |r: i64, c: i64| {
        halo.iter().all(|&(dr, dc)| {
            let (y, x) = (r + dr, c + dc);
            y >= 0 && y < h && x >= 0 && x < w && mask.get(y as usize, x as usize) == host
        })
    };
    let candidates: Vec<(i64, i64)> = (0..h)
        .flat_map(|r| (0..w).map(move |c| (r, c)))
        .filter(|&(r, c)| fits(r, c))
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let (r, c) = candidates[rng.random_range(0..candidates.len())];
    Some(
        offsets
            .iter()
            .map(|&(dr, dc)| ((r + dr) * w + c + dc) as usize)
            .collect(),
    )
}

/// Distribution with foreground `dominant` at probability `p`; background
/// takes what the other classes leave.
fn defect_pixel(dominant: Class, p: f64) -> [f64; 4] {
    let rest = 1.0 - p;
    let small = RESIDUAL.min(rest / 3.0);
    let mut out = [small; 4];
    out[dominant.index()] = p;
    out[0] = rest - 2.0 * small;
    out
}

fn hole_pixel(class: Class) -> [f64; 4] {
    let mut out = [RESIDUAL; 4];
    out[0] = DEFECT_CONFIDENCE;
    out[class.index()] = 1.0 - DEFECT_CONFIDENCE - 2.0 * RESIDUAL;
    out
}

/// Injects a corruption and verifies the resulting argmax topology.
pub fn apply_corruption(
    mask: &LabelMask,
    probs: &MultiClassProb,
    spec: &CorruptionSpec,
) -> Result<Corrupted> {
    if mask.height() != probs.height() || mask.width() != probs.width() {
        return Err(Error::ShapeMismatch("mask and probabilities differ in shape".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (h, w) = (mask.height(), mask.width());
    let n = h * w;
    let mut pixels: Vec<[f64; 4]> = (0..n).map(|k| probs.pixel(k)).collect();
    let mut footprint = Vec::new();
    let foreground = |class: Class| {
        if class == Class::Background {
            Err(Error::InvalidConfig("corruptions target foreground classes".into()))
        } else {
            Ok(())
        }
    };

    match spec.kind {
        CorruptionKind::SpuriousComponent { class, size, confidence } => {
            foreground(class)?;
            if size == 0 {
                return Err(Error::NoTopologyChange("spurious component of size 0".into()));
            }
            if !(confidence > 0.5 && confidence <= 1.0) {
                return Err(Error::NoTopologyChange(format!(
                    "confidence {confidence} does not make {class} the most probable class"
                )));
            }
            footprint = place_blob(mask, &blob_offsets(size), 0, 3, &mut rng)
                .ok_or_else(|| Error::Geometry(format!("no background room for a {size}-pixel blob")))?;
            for &k in &footprint {
                pixels[k] = defect_pixel(class, confidence);
            }
        }
        CorruptionKind::PunchedHole { class, size } => {
            foreground(class)?;
            if size == 0 {
                return Err(Error::NoTopologyChange("hole of size 0".into()));
            }
            footprint = place_blob(mask, &blob_offsets(size), class as u8, 1, &mut rng)
                .ok_or_else(|| Error::Geometry(format!("{class} has no room for a {size}-pixel hole")))?;
            for &k in &footprint {
                pixels[k] = hole_pixel(class);
            }
        }
        CorruptionKind::BrokenRing { gap_width } => {
            if gap_width == 0 {
                return Err(Error::NoTopologyChange("ring gap of width 0".into()));
            }
            let lv: Vec<usize> = (0..n).filter(|&k| mask.labels()[k] == Class::Lv as u8).collect();
            if lv.is_empty() {
                return Err(Error::Geometry("no lv to locate the ring centre".into()));
            }
            let cy = lv.iter().map(|&k| (k / w) as f64).sum::<f64>() / lv.len() as f64;
            let cx = lv.iter().map(|&k| (k % w) as f64).sum::<f64>() / lv.len() as f64;
            let r0 = (cy.round() as usize).saturating_sub(gap_width / 2);
            for r in r0..(r0 + gap_width).min(h) {
                for c in 0..w {
                    let k = r * w + c;
                    if c as f64 > cx && mask.labels()[k] == Class::My as u8 {
                        footprint.push(k);
                        pixels[k] = hole_pixel(Class::My);
                    }
                }
            }
        }
        CorruptionKind::AdjacencyBreak { gap } => {
            if gap == 0 {
                return Err(Error::NoTopologyChange("adjacency gap of 0".into()));
            }
            let dist = city_block_distance(mask, Class::My as u8);
            for k in 0..n {
                if mask.labels()[k] == Class::Rv as u8 && dist[k] <= gap {
                    footprint.push(k);
                    pixels[k] = hole_pixel(Class::Rv);
                }
            }
        }
        CorruptionKind::Soften { temperature } => {
            if !(temperature > 1.0) || !temperature.is_finite() {
                return Err(Error::NoTopologyChange(format!(
                    "temperature {temperature} does not soften"
                )));
            }
            for (k, p) in pixels.iter_mut().enumerate() {
                let q = p.map(|v| v.powf(1.0 / temperature));
                let s: f64 = q.iter().sum();
                let q = q.map(|v| v / s);
                if q != *p {
                    footprint.push(k);
                }
                *p = q;
            }
        }
    }

    let corrupted = MultiClassProb::from_pixels(h, w, &pixels)?;
    let clean = prior_from_mask(mask);
    let expected = spec.kind.expected_prior(&clean);
    let measured = prior_from_mask(&argmax_mask(&corrupted));
    if measured != expected {
        return Err(Error::Geometry(format!(
            "{} produced unexpected topology; differing entries {:?}",
            spec.kind.name(),
            expected.differences(&measured)
        )));
    }
    Ok(Corrupted {
        probs: corrupted,
        footprint,
        expected,
    })
}

/// Corrupts a phantom's probability field.
pub fn corrupt(mask: &LabelMask, probs: &MultiClassProb, spec: &CorruptionSpec) -> Result<MultiClassProb> {
    apply_corruption(mask, probs, spec).map(|c| c.probs)
}

/// 4-neighbour step distance from each pixel to the nearest pixel labelled `target`.
fn city_block_distance(mask: &LabelMask, target: u8) -> Vec<usize> {
    let (h, w) = (mask.height(), mask.width());
    let mut dist = vec![usize::MAX; h * w];
    let mut queue = std::collections::VecDeque::new();
    for (k, &l) in mask.labels().iter().enumerate() {
        if l == target {
            dist[k] = 0;
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        let (r, c) = (k / w, k % w);
        let mut visit = |j: usize| {
            if dist[j] == usize::MAX {
                dist[j] = dist[k] + 1;
                queue.push_back(j);
            }
        };
        if r > 0 {
            visit(k - w);
        }
        if r + 1 < h {
            visit(k + w);
        }
        if c > 0 {
            visit(k - 1);
        }
        if c + 1 < w {
            visit(k + 1);
        }
    }
    dist
}
