//! Dataset benchmark: segment every image at several superpixel budgets and
//! score the results against ground truth.
//!
//! A dataset is a flat directory. Images (`.ppm`, `.png`) pair with ground
//! truth (`.pgm`, `.csv`, `.sinl`) that shares their file stem.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::{Method, SuperpixelTarget};
use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::io::{load_image, load_label_map};
use crate::loss::GroundTruth;
use crate::metrics::{evaluate, MetricsReport};
use crate::pipeline::{segment, ScorerChoice, SegmentOptions};
use crate::training::LinearScorer;

const IMAGE_EXTENSIONS: &[&str] = &["ppm", "png"];
const TRUTH_EXTENSIONS: &[&str] = &["pgm", "csv", "sinl"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BenchMethod {
    SinColor,
    SinGt,
    SinTrained,
    Slic,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::SinColor => "sin-color",
            BenchMethod::SinGt => "sin-gt",
            BenchMethod::SinTrained => "sin-trained",
            BenchMethod::Slic => "slic",
        }
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin-color" => Ok(BenchMethod::SinColor),
            "sin-gt" => Ok(BenchMethod::SinGt),
            "sin-trained" => Ok(BenchMethod::SinTrained),
            "slic" => Ok(BenchMethod::Slic),
            other => Err(Error::invalid(format!(
                "unknown benchmark method {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetEntry {
    pub name: String,
    pub image: PathBuf,
    pub truth: PathBuf,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub entries: Vec<DatasetEntry>,
    /// Image stems without a ground-truth partner.
    pub skipped: Vec<String>,
}

fn extension_of(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
}

/// Pairs images with ground truth by file stem, sorted by name.
pub fn discover(dir: &Path) -> Result<Dataset> {
    let read = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut images = BTreeMap::new();
    let mut truths = BTreeMap::new();
    for entry in read {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        let (Some(stem), Some(ext)) = (
            path.file_stem().and_then(|s| s.to_str()),
            extension_of(&path),
        ) else {
            continue;
        };
        let stem = stem.to_string();
        if IMAGE_EXTENSIONS.contains(&ext.as_str()) {
            images.entry(stem).or_insert(path);
        } else if TRUTH_EXTENSIONS.contains(&ext.as_str()) {
            truths.entry(stem).or_insert(path);
        }
    }
    let mut dataset = Dataset::default();
    for (name, image) in images {
        match truths.remove(&name) {
            Some(truth) => dataset.entries.push(DatasetEntry { name, image, truth }),
            None => dataset.skipped.push(name),
        }
    }
    Ok(dataset)
}

#[derive(Debug, Clone)]
pub struct LoadedEntry {
    pub name: String,
    pub image: ImageGrid,
    pub truth: GroundTruth,
}

pub fn load_entries(dataset: &Dataset) -> Result<Vec<LoadedEntry>> {
    dataset
        .entries
        .iter()
        .map(|e| {
            let image = load_image(&e.image)?;
            let truth = load_label_map(&e.truth)?;
            if truth.dims() != image.dims() {
                return Err(Error::ShapeMismatch {
                    expected: image.dims(),
                    actual: truth.dims(),
                });
            }
            Ok(LoadedEntry {
                name: e.name.clone(),
                image,
                truth: truth.into(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub method: BenchMethod,
    pub count: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub counts: Vec<usize>,
    pub methods: Vec<BenchMethod>,
    pub options: SegmentOptions,
    pub model: Option<LinearScorer>,
}

fn run_one(
    entry: &LoadedEntry,
    method: BenchMethod,
    count: usize,
    cfg: &BenchConfig,
) -> Result<MetricsReport> {
    let mut options = cfg.options.clone();
    options.target = Some(SuperpixelTarget::Count(count));
    options.method = match method {
        BenchMethod::Slic => Method::Slic,
        _ => Method::Sin,
    };
    let scorer = match method {
        BenchMethod::SinColor | BenchMethod::Slic => ScorerChoice::Color,
        BenchMethod::SinGt => ScorerChoice::Gt(&entry.truth),
        BenchMethod::SinTrained => ScorerChoice::Trained(
            cfg.model
                .as_ref()
                .ok_or_else(|| Error::invalid("sin-trained needs a model"))?,
        ),
    };
    let seg = segment(&entry.image, scorer, &options)?;
    let mut report = evaluate(&seg.labels, entry.truth.labels())?;
    report.runtime_ms = seg.runtime_ms;
    Ok(report)
}

/// Rows ordered by count, then method, then image name.
pub fn run_benchmark(entries: &[LoadedEntry], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut jobs = Vec::new();
    for &count in &cfg.counts {
        for &method in &cfg.methods {
            for entry in entries {
                jobs.push((count, method, entry));
            }
        }
    }
    jobs.par_iter()
        .map(|&(count, method, entry)| {
            Ok(BenchRow {
                image: entry.name.clone(),
                method,
                count,
                report: run_one(entry, method, count, cfg)?,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "image,method,n_superpixels,asa,br,bp,co,runtime_ms";
pub const AGGREGATE_NAME: &str = "mean";

fn mean_report(rows: &[&BenchRow]) -> MetricsReport {
    let n = rows.len() as f64;
    let sum = |f: fn(&MetricsReport) -> f64| rows.iter().map(|r| f(&r.report)).sum::<f64>() / n;
    MetricsReport {
        asa: sum(|r| r.asa),
        br: sum(|r| r.br),
        bp: sum(|r| r.bp),
        co: sum(|r| r.co),
        n_superpixels: sum(|r| r.n_superpixels as f64).round() as usize,
        runtime_ms: sum(|r| r.runtime_ms),
    }
}

fn push_line(out: &mut String, image: &str, method: BenchMethod, r: &MetricsReport, timing: bool) {
    let runtime = if timing { r.runtime_ms } else { 0.0 };
    let _ = writeln!(
        out,
        "{image},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
        method.name(),
        r.n_superpixels,
        r.asa,
        r.br,
        r.bp,
        r.co,
        runtime
    );
}

/// CSV with one aggregate row after each (count, method) group. With
/// `timing = false` the runtime column is zeroed so output is reproducible.
pub fn format_csv(rows: &[BenchRow], timing: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let mut groups: BTreeMap<(usize, BenchMethod), Vec<&BenchRow>> = BTreeMap::new();
    for row in rows {
        groups.entry((row.count, row.method)).or_default().push(row);
    }
    for ((_, method), mut group) in groups {
        group.sort_by(|a, b| a.image.cmp(&b.image));
        for row in &group {
            push_line(&mut out, &row.image, method, &row.report, timing);
        }
        push_line(
            &mut out,
            AGGREGATE_NAME,
            method,
            &mean_report(&group),
            timing,
        );
    }
    out
}

/// Parses rows written by [`format_csv`], aggregate rows included.
pub fn parse_csv(text: &str) -> Result<Vec<(String, BenchMethod, MetricsReport)>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::invalid("missing benchmark CSV header"));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::invalid(format!("bad benchmark row {line:?}")));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad number {s:?}")))
            };
            Ok((
                f[0].to_string(),
                f[1].parse()?,
                MetricsReport {
                    n_superpixels: f[2]
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad count {:?}", f[2])))?,
                    asa: num(f[3])?,
                    br: num(f[4])?,
                    bp: num(f[5])?,
                    co: num(f[6])?,
                    runtime_ms: num(f[7])?,
                },
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(image: &str, method: BenchMethod, asa: f64) -> BenchRow {
        BenchRow {
            image: image.into(),
            method,
            count: 100,
            report: MetricsReport {
                asa,
                br: 0.5,
                bp: 0.25,
                co: 0.125,
                n_superpixels: 99,
                runtime_ms: 3.0,
            },
        }
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let rows = vec![
            row("b", BenchMethod::SinColor, 0.9),
            row("a", BenchMethod::SinColor, 0.8),
            row("a", BenchMethod::Slic, 0.7),
        ];
        let csv = format_csv(&rows, false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(
            lines[1],
            "a,sin-color,99,0.800000,0.500000,0.250000,0.125000,0.000000"
        );
        assert_eq!(
            lines[3],
            "mean,sin-color,99,0.850000,0.500000,0.250000,0.125000,0.000000"
        );
        assert_eq!(lines.len(), 6);
        let parsed = parse_csv(&csv).unwrap();
        assert_eq!(parsed.len(), 5);
        assert_eq!(parsed[1].0, "b");
        assert!((parsed[1].2.asa - 0.9).abs() < 1e-6);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            BenchMethod::SinColor,
            BenchMethod::SinGt,
            BenchMethod::SinTrained,
            BenchMethod::Slic,
        ] {
            assert_eq!(m.name().parse::<BenchMethod>().unwrap(), m);
        }
    }
}
