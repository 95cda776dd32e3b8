//! `key=value` run configuration. Blank lines and `#` comments are skipped;
//! unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::loss::LossWeights;
use crate::overlay::{parse_color, OverlayMode, DEFAULT_BOUNDARY_COLOR};
use crate::scoring::{ColorSpace, DEFAULT_TEMPERATURE};

pub const THREADS_ENV: &str = "SINTERP_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Sin,
    Slic,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin" => Ok(Method::Sin),
            "slic" => Ok(Method::Slic),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScorerKind {
    #[default]
    Color,
    Gt,
    Trained,
}

impl FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "color" => Ok(ScorerKind::Color),
            "gt" => Ok(ScorerKind::Gt),
            "trained" => Ok(ScorerKind::Trained),
            other => Err(Error::invalid(format!("unknown scorer {other:?}"))),
        }
    }
}

/// Requested superpixel budget: a total count, or an explicit seed grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperpixelTarget {
    Count(usize),
    Grid(usize, usize),
}

impl FromStr for SuperpixelTarget {
    type Err = Error;

    /// `600` or `30x20`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("superpixel target {s:?} is not N or RxC"));
        let positive = |v: &str| {
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(bad)
        };
        match s.split_once(['x', 'X']) {
            Some((r, c)) => Ok(SuperpixelTarget::Grid(positive(r)?, positive(c)?)),
            None => Ok(SuperpixelTarget::Count(positive(s)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub scorer: ScorerKind,
    pub seed_step: usize,
    pub tau: f64,
    pub color_space: ColorSpace,
    pub target_superpixels: Option<SuperpixelTarget>,
    pub weights: LossWeights,
    /// `None` means one thread per available core.
    pub threads: Option<usize>,
    /// Weights file for the trained scorer.
    pub model: Option<PathBuf>,
    pub overlay_mode: OverlayMode,
    pub overlay_color: [f32; 3],
    pub slic_compactness: f64,
    pub slic_iterations: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Sin,
            scorer: ScorerKind::Color,
            seed_step: 16,
            tau: DEFAULT_TEMPERATURE,
            color_space: ColorSpace::Rgb,
            target_superpixels: None,
            weights: LossWeights::standard(),
            threads: None,
            model: None,
            overlay_mode: OverlayMode::Boundary,
            overlay_color: DEFAULT_BOUNDARY_COLOR,
            slic_compactness: 10.0,
            slic_iterations: 10,
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number {v:?}")))
        })
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let (mut weights_h, mut weights_v) = (None, None);
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let wrap = |e: Error| Error::Config {
                line: line_no,
                message: match e {
                    Error::InvalidArgument(m) => m,
                    other => other.to_string(),
                },
            };
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected key=value, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let number = |what: &str| -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("{what} must be a number, got {value:?}")))
            };
            let count = |what: &str| -> Result<usize> {
                value.parse::<usize>().map_err(|_| {
                    Error::invalid(format!(
                        "{what} must be a non-negative integer, got {value:?}"
                    ))
                })
            };
            let result: Result<()> = (|| {
                match key {
                    "method" => cfg.method = value.parse()?,
                    "scorer" => cfg.scorer = value.parse()?,
                    "seed_step" => {
                        let s = count("seed_step")?;
                        if s < 2 || !s.is_power_of_two() {
                            return Err(Error::invalid(format!(
                                "seed_step must be a power of two >= 2, got {s}"
                            )));
                        }
                        cfg.seed_step = s;
                    }
                    "tau" => {
                        let t = number("tau")?;
                        if !(t > 0.0) || !t.is_finite() {
                            return Err(Error::invalid("tau must be positive"));
                        }
                        cfg.tau = t;
                    }
                    "color_space" => cfg.color_space = value.parse()?,
                    "target_superpixels" => cfg.target_superpixels = Some(value.parse()?),
                    "weights_h" => weights_h = Some(parse_list(value)?),
                    "weights_v" => weights_v = Some(parse_list(value)?),
                    "threads" => {
                        let t = count("threads")?;
                        if t == 0 {
                            return Err(Error::invalid("threads must be at least 1"));
                        }
                        cfg.threads = Some(t);
                    }
                    "model" => cfg.model = Some(PathBuf::from(value)),
                    "overlay_mode" => cfg.overlay_mode = value.parse()?,
                    "overlay_color" => cfg.overlay_color = parse_color(value)?,
                    "slic_compactness" => {
                        let m = number("slic_compactness")?;
                        if !(m > 0.0) {
                            return Err(Error::invalid("slic_compactness must be positive"));
                        }
                        cfg.slic_compactness = m;
                    }
                    "slic_iterations" => {
                        let i = count("slic_iterations")?;
                        if i == 0 {
                            return Err(Error::invalid("slic_iterations must be at least 1"));
                        }
                        cfg.slic_iterations = i;
                    }
                    other => return Err(Error::invalid(format!("unknown key {other:?}"))),
                }
                Ok(())
            })();
            result.map_err(wrap)?;
        }
        if weights_h.is_some() || weights_v.is_some() {
            let h = weights_h.unwrap_or_else(|| cfg.weights.horizontal.clone());
            let v = weights_v.unwrap_or_else(|| cfg.weights.vertical.clone());
            cfg.weights = LossWeights::new(h, v).map_err(|e| Error::Config {
                line: 0,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Thread count after applying the environment override.
    pub fn effective_threads(&self) -> Result<Option<usize>> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(Some(n)),
                _ => Err(Error::invalid(format!(
                    "{THREADS_ENV}={v:?} is not a positive integer"
                ))),
            },
            Err(_) => Ok(self.threads),
        }
    }
}

/// Runs `f` inside a rayon pool of `threads` workers (all cores for `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
