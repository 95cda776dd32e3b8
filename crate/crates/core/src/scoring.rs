//! Association-score providers.
//!
//! A [`Scorer`] turns an image and the expansion geometry into one
//! [`AssociationScores`] grid per level and axis. Scorers never see the
//! evolving label map.

use std::borrow::Cow;

use rayon::prelude::*;

use crate::color::image_to_packed_lab;
use crate::error::{Error, Result};
use crate::grid::{ExpansionSchedule, ImageGrid};
use crate::interp::{insertion_site, score_dims, AssociationScores, Axis};
use crate::loss::{derive_targets, GroundTruth, StepTargets, Target};

pub trait Scorer: Sync {
    /// Converts the image once before any level is scored. The result is what
    /// [`Scorer::scores`] receives.
    fn prepare<'a>(&self, image: &'a ImageGrid) -> Result<Cow<'a, ImageGrid>> {
        Ok(Cow::Borrowed(image))
    }

    fn scores(
        &self,
        image: &ImageGrid,
        schedule: &ExpansionSchedule,
        level: usize,
        axis: Axis,
    ) -> Result<AssociationScores>;
}

impl<T: Scorer + ?Sized> Scorer for &T {
    fn prepare<'a>(&self, image: &'a ImageGrid) -> Result<Cow<'a, ImageGrid>> {
        (**self).prepare(image)
    }

    fn scores(
        &self,
        image: &ImageGrid,
        schedule: &ExpansionSchedule,
        level: usize,
        axis: Axis,
    ) -> Result<AssociationScores> {
        (**self).scores(image, schedule, level, axis)
    }
}

impl<T: Scorer + ?Sized + Send> Scorer for Box<T> {
    fn prepare<'a>(&self, image: &'a ImageGrid) -> Result<Cow<'a, ImageGrid>> {
        (**self).prepare(image)
    }

    fn scores(
        &self,
        image: &ImageGrid,
        schedule: &ExpansionSchedule,
        level: usize,
        axis: Axis,
    ) -> Result<AssociationScores> {
        (**self).scores(image, schedule, level, axis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorSpace {
    #[default]
    Rgb,
    Lab,
}

impl std::str::FromStr for ColorSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rgb" => Ok(ColorSpace::Rgb),
            "lab" => Ok(ColorSpace::Lab),
            other => Err(Error::invalid(format!("unknown color space {other:?}"))),
        }
    }
}

pub const DEFAULT_TEMPERATURE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorAffinityParams {
    pub temperature: f64,
    pub color_space: ColorSpace,
}

impl Default for ColorAffinityParams {
    fn default() -> Self {
        Self {
            temperature: DEFAULT_TEMPERATURE,
            color_space: ColorSpace::Rgb,
        }
    }
}

/// Two-way softmax of `(-d0 / t, -d1 / t)`.
#[inline]
pub fn softmax_of_distances(d0: f64, d1: f64, temperature: f64) -> [f64; 2] {
    let a0 = 1.0 / (1.0 + ((d0 - d1) / temperature).exp());
    [a0, 1.0 - a0]
}

#[inline]
pub(crate) fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (*x - *y) as f64;
            d * d
        })
        .sum()
}

/// Scores each insertion site by how close its pixel's color is to each
/// neighbor's color.
#[derive(Debug, Clone, Copy, Default)]
pub struct ColorAffinityScorer {
    params: ColorAffinityParams,
}

impl ColorAffinityScorer {
    pub fn new(params: ColorAffinityParams) -> Result<Self> {
        if !(params.temperature > 0.0) || !params.temperature.is_finite() {
            return Err(Error::invalid(format!(
                "temperature must be positive, got {}",
                params.temperature
            )));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> ColorAffinityParams {
        self.params
    }
}

impl Scorer for ColorAffinityScorer {
    fn prepare<'a>(&self, image: &'a ImageGrid) -> Result<Cow<'a, ImageGrid>> {
        Ok(match self.params.color_space {
            ColorSpace::Rgb => Cow::Borrowed(image),
            ColorSpace::Lab => Cow::Owned(image_to_packed_lab(image)),
        })
    }

    fn scores(
        &self,
        image: &ImageGrid,
        schedule: &ExpansionSchedule,
        level: usize,
        axis: Axis,
    ) -> Result<AssociationScores> {
        check_image(image, schedule)?;
        let (rows, cols) = score_dims(schedule, level, axis)?;
        let tau = self.params.temperature;
        let mut data = vec![[0.5, 0.5]; rows * cols];
        data.par_chunks_mut(cols.max(1))
            .enumerate()
            .for_each(|(i, out)| {
                for (j, slot) in out.iter_mut().enumerate() {
                    let site = insertion_site(schedule, level, axis, i, j);
                    let x = image.pixel(site.inserted.0, site.inserted.1);
                    let [n0, n1] = site.neighbors.map(|(r, c)| image.pixel(r, c));
                    *slot =
                        softmax_of_distances(squared_distance(x, n0), squared_distance(x, n1), tau);
                }
            });
        AssociationScores::new(rows, cols, data)
    }
}

/// Color-affinity scores for one level and axis of `image`.
pub fn color_affinity_scores(
    image: &ImageGrid,
    schedule: &ExpansionSchedule,
    level: usize,
    axis: Axis,
    params: ColorAffinityParams,
) -> Result<AssociationScores> {
    let scorer = ColorAffinityScorer::new(params)?;
    let prepared = scorer.prepare(image)?;
    scorer.scores(&prepared, schedule, level, axis)
}

pub(crate) fn check_image(image: &ImageGrid, schedule: &ExpansionSchedule) -> Result<()> {
    if image.dims() != schedule.image_dims() {
        return Err(Error::ShapeMismatch {
            expected: schedule.image_dims(),
            actual: image.dims(),
        });
    }
    Ok(())
}

/// Certain scores from step targets; ignored sites get `(0.5, 0.5)`.
pub fn onehot_scores(targets: &StepTargets) -> AssociationScores {
    let data = targets
        .data()
        .iter()
        .map(|t| match t {
            Target::First => [1.0, 0.0],
            Target::Second => [0.0, 1.0],
            Target::Ignore => [0.5, 0.5],
        })
        .collect();
    AssociationScores::new(targets.rows(), targets.cols(), data)
        .expect("one-hot pairs are valid probabilities")
}

/// Upper-bound scorer that reads the answer off a ground-truth segmentation.
#[derive(Debug, Clone)]
pub struct GtGuidedScorer {
    truth: GroundTruth,
}

impl GtGuidedScorer {
    pub fn new(truth: GroundTruth) -> Self {
        Self { truth }
    }

    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }
}

impl Scorer for GtGuidedScorer {
    fn scores(
        &self,
        image: &ImageGrid,
        schedule: &ExpansionSchedule,
        level: usize,
        axis: Axis,
    ) -> Result<AssociationScores> {
        check_image(image, schedule)?;
        gt_guided_scores(&self.truth, schedule, level, axis)
    }
}

pub fn gt_guided_scores(
    truth: &GroundTruth,
    schedule: &ExpansionSchedule,
    level: usize,
    axis: Axis,
) -> Result<AssociationScores> {
    Ok(onehot_scores(&derive_targets(
        truth, schedule, level, axis,
    )?))
}

/// Fixed score grids, looked up by level and axis. Handy for replaying scores
/// produced elsewhere.
#[derive(Debug, Clone, Default)]
pub struct FixedScorer {
    grids: std::collections::HashMap<(usize, Axis), AssociationScores>,
}

impl FixedScorer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, level: usize, axis: Axis, scores: AssociationScores) {
        self.grids.insert((level, axis), scores);
    }
}

impl Scorer for FixedScorer {
    fn scores(
        &self,
        _image: &ImageGrid,
        schedule: &ExpansionSchedule,
        level: usize,
        axis: Axis,
    ) -> Result<AssociationScores> {
        let expected = score_dims(schedule, level, axis)?;
        let grid = self
            .grids
            .get(&(level, axis))
            .ok_or_else(|| Error::invalid(format!("no scores for level {level} {axis:?}")))?;
        if grid.dims() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: grid.dims(),
            });
        }
        Ok(grid.clone())
    }
}
