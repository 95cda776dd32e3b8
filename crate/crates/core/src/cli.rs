//! Command-line front end. Results go to stdout as `key=value` lines.
//!
//! Exit codes: 0 on success, 1 for I/O and decode failures, 2 for bad
//! arguments or configuration.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::benchmark::{
    discover, format_csv, load_entries, run_benchmark, BenchConfig, BenchMethod,
};
use crate::config::{with_threads, Method, RunConfig, ScorerKind, SuperpixelTarget};
use crate::error::{Error, Result};
use crate::grid::{nearest_valid_size, resize_image};
use crate::interp::resize_labels_nearest;
use crate::io::{load_image, load_label_map, save_image, save_label_map, LabelFormat};
use crate::loss::{GroundTruth, LossWeights};
use crate::overlay::render_overlay;
use crate::pipeline::{segment, ScorerChoice, SegmentOptions};
use crate::scoring::{ColorAffinityParams, ColorSpace};
use crate::training::{
    format_weights, parse_weights, train_toy_scorer, LinearScorer, TrainingConfig, TrainingSample,
};

#[derive(Debug, Parser)]
#[command(
    name = "sinterp",
    version,
    about = "Superpixel segmentation by seed-grid interpolation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment one image.
    Segment(SegmentArgs),
    /// Score methods against ground truth over a dataset directory.
    Benchmark(BenchmarkArgs),
    /// Fit the linear toy scorer and write its weights.
    Train(TrainArgs),
}

/// Flags shared by every subcommand that runs the pipeline.
#[derive(Debug, Args)]
struct CommonArgs {
    /// key=value configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed_step: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    /// rgb or lab
    #[arg(long)]
    color_space: Option<String>,
    /// Worker threads; SINTERP_THREADS overrides this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long)]
    input: PathBuf,
    /// Total count (`600`) or seed grid (`30x20`).
    #[arg(long)]
    superpixels: Option<String>,
    /// sin or slic
    #[arg(long)]
    method: Option<String>,
    /// color, gt or trained
    #[arg(long)]
    scorer: Option<String>,
    /// Label map path; `.csv`, `.pgm`, anything else is binary.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    overlay: Option<PathBuf>,
    /// Ground truth for `--scorer gt`.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Weights file for `--scorer trained`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Comma-separated superpixel counts.
    #[arg(long, value_delimiter = ',', default_value = "200,400,600")]
    counts: Vec<usize>,
    /// Comma-separated: sin-color, sin-gt, sin-trained, slic.
    #[arg(long, value_delimiter = ',', default_value = "sin-color,sin-gt,slic")]
    methods: Vec<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Write 0 in the runtime column so output is reproducible.
    #[arg(long)]
    omit_runtime: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-2)]
    learning_rate: f64,
    #[command(flatten)]
    common: CommonArgs,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Decode { .. } => 1,
        _ => 2,
    }
}

fn resolve_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed_step {
        if s < 2 || !s.is_power_of_two() {
            return Err(Error::invalid(format!(
                "--seed-step must be a power of two >= 2, got {s}"
            )));
        }
        cfg.seed_step = s;
    }
    if let Some(t) = common.tau {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid("--tau must be positive"));
        }
        cfg.tau = t;
    }
    if let Some(cs) = &common.color_space {
        cfg.color_space = cs.parse::<ColorSpace>()?;
    }
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        cfg.threads = Some(n);
    }
    cfg.threads = cfg.effective_threads()?;
    Ok(cfg)
}

fn options_from(cfg: &RunConfig) -> SegmentOptions {
    SegmentOptions {
        method: cfg.method,
        seed_step: cfg.seed_step,
        target: cfg.target_superpixels,
        color: ColorAffinityParams {
            temperature: cfg.tau,
            color_space: cfg.color_space,
        },
        slic_compactness: cfg.slic_compactness,
        slic_iterations: cfg.slic_iterations,
    }
}

fn load_model(path: &Path) -> Result<LinearScorer> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_weights(&text)
}

fn cmd_segment(args: SegmentArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = resolve_config(&args.common)?;
    if let Some(m) = &args.method {
        cfg.method = m.parse::<Method>()?;
    }
    if let Some(s) = &args.scorer {
        cfg.scorer = s.parse::<ScorerKind>()?;
    }
    if let Some(t) = &args.superpixels {
        cfg.target_superpixels = Some(t.parse::<SuperpixelTarget>()?);
    }
    if let Some(m) = args.model {
        cfg.model = Some(m);
    }
    if cfg.method == Method::Sin {
        match cfg.scorer {
            ScorerKind::Gt if args.gt.is_none() => {
                return Err(Error::invalid("--scorer gt needs --gt"))
            }
            ScorerKind::Trained if cfg.model.is_none() => {
                return Err(Error::invalid("--scorer trained needs --model"))
            }
            _ => {}
        }
    }
    let image = load_image(&args.input)?;
    let truth = args
        .gt
        .as_ref()
        .map(load_label_map)
        .transpose()?
        .map(GroundTruth::from);
    let model = match (&cfg.scorer, &cfg.model) {
        (ScorerKind::Trained, Some(path)) => Some(load_model(path)?),
        _ => None,
    };
    let choice = match cfg.scorer {
        ScorerKind::Color => ScorerChoice::Color,
        ScorerKind::Gt => truth.as_ref().map_or(ScorerChoice::Color, ScorerChoice::Gt),
        ScorerKind::Trained => model
            .as_ref()
            .map_or(ScorerChoice::Color, ScorerChoice::Trained),
    };
    let options = options_from(&cfg);
    let seg = with_threads(cfg.threads, || segment(&image, choice, &options))??;

    save_label_map(&seg.labels, &args.out, LabelFormat::from_path(&args.out))?;
    if let Some(path) = &args.overlay {
        let drawn = render_overlay(&image, &seg.labels, cfg.overlay_mode, cfg.overlay_color)?;
        save_image(&drawn, path)?;
    }
    let (ih, iw) = seg.internal_size;
    let _ = writeln!(out, "n_superpixels={}", seg.labels.distinct_count());
    let _ = writeln!(out, "runtime_ms={:.3}", seg.runtime_ms);
    let _ = writeln!(out, "internal_height={ih}");
    let _ = writeln!(out, "internal_width={iw}");
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    if args.counts.contains(&0) {
        return Err(Error::invalid("--counts must be positive"));
    }
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<BenchMethod>())
        .collect::<Result<Vec<_>>>()?;
    let model_path = args.model.or(cfg.model.clone());
    let model = match model_path {
        Some(p) => Some(load_model(&p)?),
        None if methods.contains(&BenchMethod::SinTrained) => {
            return Err(Error::invalid("sin-trained needs --model"))
        }
        None => None,
    };

    let dataset = discover(&args.dataset)?;
    for name in &dataset.skipped {
        let _ = writeln!(err, "warning: no ground truth for {name}, skipped");
    }
    if dataset.entries.is_empty() {
        return Err(Error::io(
            &args.dataset,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no image/ground-truth pairs"),
        ));
    }
    let entries = load_entries(&dataset)?;
    let bench = BenchConfig {
        counts: args.counts,
        methods,
        options: options_from(&cfg),
        model,
    };
    let rows = with_threads(cfg.threads, || run_benchmark(&entries, &bench))??;
    let csv = format_csv(&rows, !args.omit_runtime);
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| Error::io(path, e))?;
            let _ = writeln!(out, "images={}", entries.len());
            let _ = writeln!(out, "rows={}", rows.len());
            let _ = writeln!(out, "skipped={}", dataset.skipped.len());
        }
        None => {
            let _ = out.write_all(csv.as_bytes());
            let _ = writeln!(err, "skipped={}", dataset.skipped.len());
        }
    }
    Ok(())
}

fn cmd_train(args: TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    if !(args.learning_rate > 0.0) || !args.learning_rate.is_finite() {
        return Err(Error::invalid("--learning-rate must be positive"));
    }
    let dataset = discover(&args.dataset)?;
    for name in &dataset.skipped {
        let _ = writeln!(err, "warning: no ground truth for {name}, skipped");
    }
    if dataset.entries.is_empty() {
        return Err(Error::io(
            &args.dataset,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no image/ground-truth pairs"),
        ));
    }
    // every sample has to be at a valid size for the same schedule depth
    let corpus = load_entries(&dataset)?
        .into_iter()
        .map(|e| {
            let (h, w) = e.image.dims();
            let (ih, iw) = nearest_valid_size(h, w, cfg.seed_step, None)?;
            let image = resize_image(&e.image, ih, iw)?;
            let truth = resize_labels_nearest(e.truth.labels(), ih, iw)?;
            TrainingSample::new(image, truth.into())
        })
        .collect::<Result<Vec<_>>>()?;
    // the default weights assume four levels; other seed steps fall back to
    // uniform weights unless the config file set its own
    let levels = cfg.seed_step.trailing_zeros() as usize;
    let weights = if cfg.weights.levels() != levels && cfg.weights == LossWeights::standard() {
        LossWeights::for_levels(levels)
    } else {
        cfg.weights.clone()
    };
    let config = TrainingConfig {
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        seed_step: cfg.seed_step,
        weights,
    };
    let report = with_threads(cfg.threads, || train_toy_scorer(&corpus, &config))??;
    std::fs::write(&args.out, format_weights(&report.scorer))
        .map_err(|e| Error::io(&args.out, e))?;
    let first = report.loss_history.first().copied().unwrap_or(f64::NAN);
    let last = report.loss_history.last().copied().unwrap_or(f64::NAN);
    let _ = writeln!(out, "samples={}", corpus.len());
    let _ = writeln!(out, "epochs={}", args.epochs);
    let _ = writeln!(out, "initial_loss={first:.6}");
    let _ = writeln!(out, "final_loss={last:.6}");
    Ok(())
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Segment(a) => cmd_segment(a, out),
        Command::Benchmark(a) => cmd_benchmark(a, out, err),
        Command::Train(a) => cmd_train(a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
