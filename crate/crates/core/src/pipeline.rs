//! End-to-end segmentation at the caller's resolution.
//!
//! Interpolation runs on a copy resized to the nearest valid size; the label
//! map is then resampled back with nearest-neighbor lookups.

use std::time::Instant;

use crate::config::{Method, SuperpixelTarget};
use crate::error::{Error, Result};
use crate::grid::{
    grid_for_count, init_map, nearest_valid_size, resize_image, ExpansionSchedule, ImageGrid,
    LabelMap,
};
use crate::interp::{expand, resize_labels_nearest};
use crate::loss::GroundTruth;
use crate::scoring::{ColorAffinityParams, ColorAffinityScorer, GtGuidedScorer, Scorer};
use crate::slic::{merge_stray_fragments, slic, SlicParams};
use crate::training::LinearScorer;

/// Which association scores drive the interpolation.
#[derive(Debug, Clone, Copy)]
pub enum ScorerChoice<'a> {
    Color,
    /// Ground truth at the input image's resolution.
    Gt(&'a GroundTruth),
    Trained(&'a LinearScorer),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOptions {
    pub method: Method,
    pub seed_step: usize,
    pub target: Option<SuperpixelTarget>,
    pub color: ColorAffinityParams,
    pub slic_compactness: f64,
    pub slic_iterations: usize,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self {
            method: Method::Sin,
            seed_step: 16,
            target: None,
            color: ColorAffinityParams::default(),
            slic_compactness: 10.0,
            slic_iterations: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    /// Labels at the input resolution.
    pub labels: LabelMap,
    /// Size the algorithm actually ran at.
    pub internal_size: (usize, usize),
    pub runtime_ms: f64,
}

/// Valid working size for an `height x width` input.
pub fn internal_size(
    height: usize,
    width: usize,
    seed_step: usize,
    target: Option<SuperpixelTarget>,
) -> Result<(usize, usize)> {
    let grid = match target {
        Some(SuperpixelTarget::Grid(r, c)) => Some((r, c)),
        Some(SuperpixelTarget::Count(n)) => Some(grid_for_count(n, height, width)?),
        None => None,
    };
    nearest_valid_size(height, width, seed_step, grid)
}

/// Expands a seed grid over an image that already has a valid size.
pub fn run_interpolation<S: Scorer + ?Sized>(
    image: &ImageGrid,
    scorer: &S,
    seed_step: usize,
) -> Result<LabelMap> {
    let (h, w) = image.dims();
    let schedule = ExpansionSchedule::new(h, w, seed_step)?;
    let prepared = scorer.prepare(image)?;
    let (h0, w0) = schedule.seed_dims();
    expand(&init_map(h0, w0), scorer, &prepared, &schedule)
}

/// Resamples a label map to `(height, width)`, keeping superpixels connected.
pub fn restore_resolution(labels: &LabelMap, height: usize, width: usize) -> Result<LabelMap> {
    let resized = resize_labels_nearest(labels, height, width)?;
    if height < labels.height() || width < labels.width() {
        // dropping rows or columns can cut a superpixel in two
        Ok(merge_stray_fragments(&resized))
    } else {
        Ok(resized)
    }
}

pub fn segment(
    image: &ImageGrid,
    scorer: ScorerChoice<'_>,
    options: &SegmentOptions,
) -> Result<Segmentation> {
    let start = Instant::now();
    let (h, w) = image.dims();
    if let ScorerChoice::Gt(truth) = scorer {
        if truth.dims() != image.dims() {
            return Err(Error::ShapeMismatch {
                expected: image.dims(),
                actual: truth.dims(),
            });
        }
    }
    let (labels, internal) = match options.method {
        Method::Sin => {
            let (ih, iw) = internal_size(h, w, options.seed_step, options.target)?;
            let resized = resize_image(image, ih, iw)?;
            let map = match scorer {
                ScorerChoice::Color => {
                    let scorer = ColorAffinityScorer::new(options.color)?;
                    run_interpolation(&resized, &scorer, options.seed_step)?
                }
                ScorerChoice::Gt(truth) => {
                    let truth = resize_labels_nearest(truth.labels(), ih, iw)?;
                    let scorer = GtGuidedScorer::new(truth.into());
                    run_interpolation(&resized, &scorer, options.seed_step)?
                }
                ScorerChoice::Trained(model) => {
                    run_interpolation(&resized, model, options.seed_step)?
                }
            };
            (restore_resolution(&map, h, w)?, (ih, iw))
        }
        Method::Slic => {
            let count = match options.target {
                Some(SuperpixelTarget::Count(n)) => n,
                Some(SuperpixelTarget::Grid(r, c)) => r * c,
                None => {
                    let (ih, iw) = nearest_valid_size(h, w, options.seed_step, None)?;
                    ExpansionSchedule::new(ih, iw, options.seed_step)?.superpixel_count()
                }
            };
            let params = SlicParams {
                n_superpixels: count,
                compactness: options.slic_compactness,
                iterations: options.slic_iterations,
                ..SlicParams::default()
            };
            (slic(image, &params)?, (h, w))
        }
    };
    Ok(Segmentation {
        labels,
        internal_size: internal,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
