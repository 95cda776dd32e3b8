//! Training targets and the masked cross-entropy loss.
//!
//! Each insertion site gets a target naming which neighbor's label the
//! ground truth says it should copy. Sites whose neighbors already agree, or
//! whose true segment matches neither neighbor, carry no signal and are
//! ignored.

use crate::error::{Error, Result};
use crate::grid::{ExpansionSchedule, LabelMap};
use crate::interp::{insertion_site, score_dims, AssociationScores, Axis};

/// Reference segmentation at image resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth(LabelMap);

impl GroundTruth {
    pub fn new(labels: LabelMap) -> Self {
        Self(labels)
    }

    pub fn labels(&self) -> &LabelMap {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn into_inner(self) -> LabelMap {
        self.0
    }
}

impl From<LabelMap> for GroundTruth {
    fn from(labels: LabelMap) -> Self {
        Self(labels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    /// Copy the left/top neighbor.
    First,
    /// Copy the right/bottom neighbor.
    Second,
    Ignore,
}

impl Target {
    pub fn index(self) -> Option<usize> {
        match self {
            Target::First => Some(0),
            Target::Second => Some(1),
            Target::Ignore => None,
        }
    }
}

/// One target per insertion site, shaped like the matching score grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTargets {
    rows: usize,
    cols: usize,
    data: Vec<Target>,
}

impl StepTargets {
    pub fn new(rows: usize, cols: usize, data: Vec<Target>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} targets for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Target] {
        &self.data
    }

    pub fn counted(&self) -> usize {
        self.data.iter().filter(|t| **t != Target::Ignore).count()
    }
}

/// Target for a site whose pixel has segment `t` and whose neighbors have
/// `t0` and `t1`.
pub fn site_target(t: u32, t0: u32, t1: u32) -> Target {
    if t0 == t1 {
        Target::Ignore
    } else if t == t0 {
        Target::First
    } else if t == t1 {
        Target::Second
    } else {
        Target::Ignore
    }
}

/// Targets for the interpolation at `level` along `axis`, sampled from `truth`.
pub fn derive_targets(
    truth: &GroundTruth,
    schedule: &ExpansionSchedule,
    level: usize,
    axis: Axis,
) -> Result<StepTargets> {
    if truth.dims() != schedule.image_dims() {
        return Err(Error::ShapeMismatch {
            expected: schedule.image_dims(),
            actual: truth.dims(),
        });
    }
    let (rows, cols) = score_dims(schedule, level, axis)?;
    let t = truth.labels();
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let site = insertion_site(schedule, level, axis, i, j);
            let [(r0, c0), (r1, c1)] = site.neighbors;
            data.push(site_target(
                t.get(site.inserted.0, site.inserted.1),
                t.get(r0, c0),
                t.get(r1, c1),
            ));
        }
    }
    StepTargets::new(rows, cols, data)
}

/// Smallest probability fed to `ln`.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CeLoss {
    /// Mean negative log-likelihood over counted sites; 0 when none count.
    pub loss: f64,
    pub count: usize,
    /// Counted sites whose target probability fell below [`LOG_FLOOR`].
    pub clamped: usize,
}

/// Mean cross entropy over the sites that are not ignored.
pub fn ce_loss_masked(targets: &StepTargets, scores: &AssociationScores) -> Result<CeLoss> {
    if targets.dims() != scores.dims() {
        return Err(Error::ShapeMismatch {
            expected: targets.dims(),
            actual: scores.dims(),
        });
    }
    let mut sum = 0.0;
    let mut count = 0;
    let mut clamped = 0;
    for (t, pair) in targets.data().iter().zip(scores.data()) {
        let Some(k) = t.index() else { continue };
        let p = pair[k];
        if p < LOG_FLOOR {
            clamped += 1;
        }
        sum -= p.max(LOG_FLOOR).ln();
        count += 1;
    }
    let loss = if count == 0 { 0.0 } else { sum / count as f64 };
    Ok(CeLoss {
        loss,
        count,
        clamped,
    })
}

/// Per-level weights for the horizontal and vertical losses, coarsest level first.
#[derive(Debug, Clone, PartialEq)]
pub struct LossWeights {
    pub horizontal: Vec<f64>,
    pub vertical: Vec<f64>,
}

impl LossWeights {
    pub fn new(horizontal: Vec<f64>, vertical: Vec<f64>) -> Result<Self> {
        if horizontal.len() != vertical.len() {
            return Err(Error::invalid(format!(
                "{} horizontal weights but {} vertical",
                horizontal.len(),
                vertical.len()
            )));
        }
        if horizontal
            .iter()
            .chain(&vertical)
            .any(|w| !w.is_finite() || *w < 0.0)
        {
            return Err(Error::invalid(
                "loss weights must be finite and non-negative",
            ));
        }
        Ok(Self {
            horizontal,
            vertical,
        })
    }

    /// Weights for a four-level (`S = 16`) schedule.
    pub fn standard() -> Self {
        Self {
            horizontal: vec![20.0, 10.0, 5.0, 2.5],
            vertical: vec![8.0, 4.0, 2.0, 1.0],
        }
    }

    pub fn uniform(levels: usize) -> Self {
        Self {
            horizontal: vec![1.0; levels],
            vertical: vec![1.0; levels],
        }
    }

    /// [`LossWeights::standard`] for four levels, uniform otherwise.
    pub fn for_levels(levels: usize) -> Self {
        if levels == 4 {
            Self::standard()
        } else {
            Self::uniform(levels)
        }
    }

    pub fn levels(&self) -> usize {
        self.horizontal.len()
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self::standard()
    }
}

/// Weighted sum of per-level `(horizontal, vertical)` losses.
pub fn total_loss(per_level: &[(f64, f64)], weights: &LossWeights) -> Result<f64> {
    if per_level.len() != weights.levels() {
        return Err(Error::invalid(format!(
            "{} per-level losses but {} weight levels",
            per_level.len(),
            weights.levels()
        )));
    }
    Ok(per_level
        .iter()
        .zip(weights.horizontal.iter().zip(&weights.vertical))
        .map(|((lh, lv), (wh, wv))| wh * lh + wv * lv)
        .sum())
}

#[inline]
pub fn softmax_pair(logits: [f64; 2]) -> [f64; 2] {
    let p0 = 1.0 / (1.0 + (logits[1] - logits[0]).exp());
    [p0, 1.0 - p0]
}

/// Gradient of [`ce_loss_masked`] (over `softmax(logits)`) with respect to the
/// logits. Ignored sites get zero.
pub fn ce_grad_logits(targets: &StepTargets, logits: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    if logits.len() != targets.data().len() {
        return Err(Error::invalid(format!(
            "{} logit pairs for {} targets",
            logits.len(),
            targets.data().len()
        )));
    }
    let count = targets.counted();
    Ok(targets
        .data()
        .iter()
        .zip(logits)
        .map(|(t, z)| match t.index() {
            None => [0.0, 0.0],
            Some(k) => {
                let mut g = softmax_pair(*z);
                g[k] -= 1.0;
                [g[0] / count as f64, g[1] / count as f64]
            }
        })
        .collect())
}
