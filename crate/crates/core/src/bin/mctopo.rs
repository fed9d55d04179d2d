use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mctopo::baseline::cca_clean;
use mctopo::cubical::build_complex;
use mctopo::grid::{load_grid, save_grid, Class, Grid};
use mctopo::loss::{topo_loss_channels, union_prob, PairMode};
use mctopo::metrics::{evaluate_suite, SuiteCase, SuiteReport};
use mctopo::persistence::compute_barcode;
use mctopo::phantom::{apply_corruption, generate, CorruptionKind, CorruptionSpec, PhantomSpec};
use mctopo::priors::{short_axis_prior, BettiPrior};
use mctopo::refine::{refine, RefineConfig};
use mctopo::svg::{render_svg, SvgOptions};
use mctopo::Result;

#[derive(Parser)]
#[command(name = "mctopo", version, about = "Multi-class topology tools for probabilistic segmentations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pairs,
    Single,
}

impl From<ModeArg> for PairMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pairs => PairMode::All,
            ModeArg::Single => PairMode::Single,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Spurious,
    Hole,
    BrokenRing,
    AdjacencyBreak,
    Soften,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Export the barcode of a probability grid (or one class union of a multiclass grid).
    Barcode {
        input: PathBuf,
        /// Class union to analyse for multiclass input, e.g. `rv,lv` or `my`.
        #[arg(long)]
        union: Option<String>,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        min_lifetime: f64,
        /// Colour bars as matched/spurious against this prior (needs --union).
        #[arg(long)]
        prior: Option<PathBuf>,
    },
    /// Print the loss breakdown of a multiclass grid.
    Loss {
        input: PathBuf,
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "pairs")]
        mode: ModeArg,
    },
    /// Refine a multiclass grid towards a topological prior.
    Refine {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long, default_value_t = 1000.0)]
        lambda: f64,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = RefineConfig::default().step_size)]
        lr: f64,
        #[arg(long, value_enum, default_value = "pairs")]
        mode: ModeArg,
        /// Per-iteration losses as CSV.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the argmax label mask.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Keep the largest connected component of each foreground class.
    Cca { input: PathBuf, output: PathBuf },
    /// Generate a phantom and optionally corrupt it.
    Phantom {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid side; the anatomy scales with it.
        #[arg(long, default_value_t = 96)]
        size: usize,
        #[arg(long, value_enum, default_value = "none")]
        kind: KindArg,
        /// Target class for spurious/hole corruptions.
        #[arg(long, default_value = "rv")]
        class: String,
        /// Blob or hole size in pixels; gap width for ring and adjacency breaks.
        #[arg(long, default_value_t = 9)]
        amount: usize,
        /// Spurious blob confidence, or softening temperature.
        #[arg(long, default_value_t = 0.6)]
        level: f64,
        #[arg(long)]
        out_mask: PathBuf,
        #[arg(long)]
        out_probs: PathBuf,
    },
    /// Table of DSC and topological accuracy per method.
    ///
    /// The manifest is a CSV with header `method,input,output,ground_truth`,
    /// one row per case, holding paths to label grids.
    Metrics {
        manifest: PathBuf,
        #[arg(long)]
        prior: Option<PathBuf>,
    },
}

fn read_prior(path: Option<&Path>) -> Result<BettiPrior> {
    match path {
        Some(p) => fs::read_to_string(p)?.parse(),
        None => Ok(short_axis_prior()),
    }
}

fn parse_class(s: &str) -> Result<Class> {
    Class::from_name(s.trim())
        .filter(|&c| c != Class::Background)
        .ok_or_else(|| mctopo::Error::InvalidConfig(format!("unknown foreground class {s:?}")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Barcode { input, union, csv, svg, min_lifetime, prior } => {
            let (map, pair) = match (load_grid(&input)?, union) {
                (Grid::Prob(m), _) => (m, None),
                (Grid::MultiClass(y), Some(u)) => {
                    let names: Vec<&str> = u.split(',').collect();
                    let i = parse_class(names[0])?;
                    let j = names.get(1).map_or(Ok(i), |s| parse_class(s))?;
                    (union_prob(&y, i, j), Some((i, j)))
                }
                (Grid::MultiClass(_), None) => {
                    return Err(mctopo::Error::InvalidConfig("multiclass input needs --union".into()))
                }
                (Grid::Label(_), _) => {
                    return Err(mctopo::Error::InvalidConfig("barcode needs a probability grid".into()))
                }
            };
            let barcode = compute_barcode(&build_complex(&map));
            barcode.write_csv(fs::File::create(&csv)?)?;
            if let Some(svg) = svg {
                let matched = match (prior, pair) {
                    (Some(p), Some((i, j))) => Some(read_prior(Some(&p))?.get(i, j)),
                    _ => None,
                };
                let title = pair.map(|(i, j)| if i == j { i.to_string() } else { format!("{i} ∪ {j}") });
                fs::write(svg, render_svg(&barcode, &SvgOptions { min_lifetime, matched, title }))?;
            }
        }
        Command::Loss { input, prior, mode } => {
            let y = load_grid(&input)?.into_multiclass()?;
            let prior = read_prior(prior.as_deref())?;
            let (loss, _) = topo_loss_channels(y.channels(), &prior, mode.into());
            println!("{loss}");
        }
        Command::Refine { input, output, prior, lambda, iters, lr, mode, report, mask } => {
            let y = load_grid(&input)?.into_multiclass()?;
            let prior = read_prior(prior.as_deref())?;
            let cfg = RefineConfig {
                lambda,
                iterations: iters,
                step_size: lr,
                mode: mode.into(),
                ..Default::default()
            };
            let r = refine(&y, &prior, &cfg)?;
            save_grid(&r.probs.clone().into(), &output)?;
            if let Some(path) = report {
                fs::write(path, r.history_csv())?;
            }
            if let Some(path) = mask {
                save_grid(&r.mask.clone().into(), path)?;
            }
            let best = r.best();
            println!(
                "best iteration {} l_topo {:.6} similarity {:.6} l_tp {:.6} topology_correct {}",
                r.best_iteration, best.topo, best.similarity, best.total, r.topology_correct
            );
        }
        Command::Cca { input, output } => {
            let m = load_grid(&input)?.into_label()?;
            save_grid(&cca_clean(&m).into(), output)?;
        }
        Command::Phantom { seed, size, kind, class, amount, level, out_mask, out_probs } => {
            let spec = PhantomSpec::with_size(size, seed);
            let (mask, probs) = generate(&spec)?;
            let kind = match kind {
                KindArg::None => None,
                KindArg::Spurious => Some(CorruptionKind::SpuriousComponent {
                    class: parse_class(&class)?,
                    size: amount,
                    confidence: level,
                }),
                KindArg::Hole => Some(CorruptionKind::PunchedHole { class: parse_class(&class)?, size: amount }),
                KindArg::BrokenRing => Some(CorruptionKind::BrokenRing { gap_width: amount }),
                KindArg::AdjacencyBreak => Some(CorruptionKind::AdjacencyBreak { gap: amount }),
                KindArg::Soften => Some(CorruptionKind::Soften { temperature: level }),
            };
            let (probs, name, violated) = match kind {
                None => (probs, "none".to_string(), Vec::new()),
                Some(kind) => {
                    let c = apply_corruption(&mask, &probs, &CorruptionSpec { kind, seed })?;
                    (c.probs, kind.name(), kind.violations(&short_axis_prior()))
                }
            };
            save_grid(&mask.into(), out_mask)?;
            save_grid(&probs.into(), out_probs)?;
            let violated: Vec<String> = violated.iter().map(|(i, j, d)| format!("{i}/{j}/d{d}")).collect();
            println!("seed={seed} size={size} kind={name} violated={}", violated.join(";"));
        }
        Command::Metrics { manifest, prior } => {
            let prior = read_prior(prior.as_deref())?;
            let text = fs::read_to_string(&manifest)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let mut methods: BTreeMap<String, Vec<SuiteCase>> = BTreeMap::new();
            for (n, line) in text.lines().enumerate().skip(1) {
                if line.trim().is_empty() {
                    continue;
                }
                let f: Vec<&str> = line.split(',').map(str::trim).collect();
                if f.len() != 4 {
                    return Err(mctopo::Error::InvalidConfig(format!(
                        "manifest line {}: expected method,input,output,ground_truth",
                        n + 1
                    )));
                }
                let label = |p: &str| load_grid(base.join(p))?.into_label();
                methods.entry(f[0].to_string()).or_default().push(SuiteCase {
                    input: label(f[1])?,
                    output: label(f[2])?,
                    ground_truth: label(f[3])?,
                });
            }
            println!("{}", SuiteReport::CSV_HEADER);
            for (method, cases) in &methods {
                println!("{}", evaluate_suite(cases, &prior)?.csv_row(method));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
