//! A small trainable scorer: softmax over a linear function of per-neighbor
//! color features, fitted by full-batch gradient descent on the weighted
//! masked cross-entropy.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ExpansionSchedule, ImageGrid};
use crate::interp::{insertion_site, score_dims, AssociationScores, Axis};
use crate::loss::{
    ce_grad_logits, ce_loss_masked, derive_targets, softmax_pair, GroundTruth, LossWeights,
};
use crate::scoring::{check_image, Scorer};

/// Squared difference per RGB channel, then a first-neighbor bias.
pub const FEATURE_COUNT: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearScorer {
    weights: [f64; FEATURE_COUNT],
}

impl Default for LinearScorer {
    fn default() -> Self {
        Self {
            weights: [0.0; FEATURE_COUNT],
        }
    }
}

fn features(x: &[f32], n: &[f32], first: bool) -> [f64; FEATURE_COUNT] {
    let mut f = [0.0; FEATURE_COUNT];
    for c in 0..3 {
        let d = (x[c] - n[c]) as f64;
        f[c] = d * d;
    }
    f[3] = if first { 1.0 } else { 0.0 };
    f
}

fn dot(w: &[f64; FEATURE_COUNT], f: &[f64; FEATURE_COUNT]) -> f64 {
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

struct SiteFeatures {
    rows: usize,
    cols: usize,
    per_site: Vec<[[f64; FEATURE_COUNT]; 2]>,
}

fn site_features(
    image: &ImageGrid,
    schedule: &ExpansionSchedule,
    level: usize,
    axis: Axis,
) -> Result<SiteFeatures> {
    let (rows, cols) = score_dims(schedule, level, axis)?;
    let mut per_site = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let site = insertion_site(schedule, level, axis, i, j);
            let x = image.pixel(site.inserted.0, site.inserted.1);
            let [(r0, c0), (r1, c1)] = site.neighbors;
            per_site.push([
                features(x, image.pixel(r0, c0), true),
                features(x, image.pixel(r1, c1), false),
            ]);
        }
    }
    Ok(SiteFeatures {
        rows,
        cols,
        per_site,
    })
}

impl LinearScorer {
    pub fn new(weights: [f64; FEATURE_COUNT]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("linear scorer weights must be finite"));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> [f64; FEATURE_COUNT] {
        self.weights
    }

    fn logits(&self, feats: &SiteFeatures) -> Vec<[f64; 2]> {
        feats
            .per_site
            .iter()
            .map(|[f0, f1]| [dot(&self.weights, f0), dot(&self.weights, f1)])
            .collect()
    }

    /// Weighted loss over every level of one sample, and its gradient.
    fn loss_and_grad(
        &self,
        sample: &TrainingSample,
        schedule: &ExpansionSchedule,
        weights: &LossWeights,
    ) -> Result<(f64, [f64; FEATURE_COUNT])> {
        let mut loss = 0.0;
        let mut grad = [0.0; FEATURE_COUNT];
        for level in 1..=schedule.levels() {
            for axis in [Axis::Horizontal, Axis::Vertical] {
                let w = match axis {
                    Axis::Horizontal => weights.horizontal[level - 1],
                    Axis::Vertical => weights.vertical[level - 1],
                };
                let feats = site_features(&sample.image, schedule, level, axis)?;
                let targets = derive_targets(&sample.truth, schedule, level, axis)?;
                let logits = self.logits(&feats);
                let probs = AssociationScores::new(
                    feats.rows,
                    feats.cols,
                    logits.iter().map(|z| softmax_pair(*z)).collect(),
                )?;
                loss += w * ce_loss_masked(&targets, &probs)?.loss;
                let g = ce_grad_logits(&targets, &logits)?;
                for (gz, [f0, f1]) in g.iter().zip(&feats.per_site) {
                    for k in 0..FEATURE_COUNT {
                        grad[k] += w * (gz[0] * f0[k] + gz[1] * f1[k]);
                    }
                }
            }
        }
        Ok((loss, grad))
    }
}

impl Scorer for LinearScorer {
    fn prepare<'a>(&self, image: &'a ImageGrid) -> Result<std::borrow::Cow<'a, ImageGrid>> {
        Ok(match image.channels() {
            3 => std::borrow::Cow::Borrowed(image),
            _ => std::borrow::Cow::Owned(image.to_rgb()),
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
        if image.channels() != 3 {
            return Err(Error::invalid("linear scorer needs an RGB image"));
        }
        let feats = site_features(image, schedule, level, axis)?;
        let probs = self.logits(&feats).into_iter().map(softmax_pair).collect();
        AssociationScores::new(feats.rows, feats.cols, probs)
    }
}

#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub image: ImageGrid,
    pub truth: GroundTruth,
}

impl TrainingSample {
    pub fn new(image: ImageGrid, truth: GroundTruth) -> Result<Self> {
        if image.dims() != truth.dims() {
            return Err(Error::ShapeMismatch {
                expected: image.dims(),
                actual: truth.dims(),
            });
        }
        Ok(Self {
            image: image.to_rgb(),
            truth,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed_step: usize,
    pub weights: LossWeights,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            learning_rate: 1e-2,
            seed_step: 16,
            weights: LossWeights::standard(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub scorer: LinearScorer,
    /// Mean total loss over the corpus before training and after each epoch.
    pub loss_history: Vec<f64>,
}

fn corpus_loss_and_grad(
    scorer: &LinearScorer,
    corpus: &[(TrainingSample, ExpansionSchedule)],
    weights: &LossWeights,
) -> Result<(f64, [f64; FEATURE_COUNT])> {
    let parts: Vec<_> = corpus
        .par_iter()
        .map(|(s, sched)| scorer.loss_and_grad(s, sched, weights))
        .collect::<Result<_>>()?;
    let n = parts.len() as f64;
    let mut loss = 0.0;
    let mut grad = [0.0; FEATURE_COUNT];
    for (l, g) in parts {
        loss += l / n;
        for k in 0..FEATURE_COUNT {
            grad[k] += g[k] / n;
        }
    }
    Ok((loss, grad))
}

/// Fits a [`LinearScorer`] from zero weights.
pub fn train_toy_scorer(
    corpus: &[TrainingSample],
    config: &TrainingConfig,
) -> Result<TrainingReport> {
    if corpus.is_empty() {
        return Err(Error::invalid("training corpus is empty"));
    }
    if config.epochs == 0 {
        return Err(Error::invalid("at least one epoch is required"));
    }
    if !(config.learning_rate > 0.0) {
        return Err(Error::invalid("learning rate must be positive"));
    }
    let prepared: Vec<_> = corpus
        .iter()
        .map(|s| {
            let (h, w) = s.image.dims();
            let schedule = ExpansionSchedule::new(h, w, config.seed_step)?;
            if config.weights.levels() != schedule.levels() {
                return Err(Error::invalid(format!(
                    "{} weight levels for a {}-level schedule",
                    config.weights.levels(),
                    schedule.levels()
                )));
            }
            Ok((s.clone(), schedule))
        })
        .collect::<Result<_>>()?;

    let mut scorer = LinearScorer::default();
    let mut history = Vec::with_capacity(config.epochs + 1);
    let (mut loss, mut grad) = corpus_loss_and_grad(&scorer, &prepared, &config.weights)?;
    history.push(loss);
    for _ in 0..config.epochs {
        for k in 0..FEATURE_COUNT {
            scorer.weights[k] -= config.learning_rate * grad[k];
        }
        (loss, grad) = corpus_loss_and_grad(&scorer, &prepared, &config.weights)?;
        history.push(loss);
    }
    Ok(TrainingReport {
        scorer,
        loss_history: history,
    })
}

/// Mean weighted loss of `scorer` over `corpus`.
pub fn corpus_loss(
    scorer: &LinearScorer,
    corpus: &[TrainingSample],
    config: &TrainingConfig,
) -> Result<f64> {
    let prepared: Vec<_> = corpus
        .iter()
        .map(|s| {
            let (h, w) = s.image.dims();
            Ok((s.clone(), ExpansionSchedule::new(h, w, config.seed_step)?))
        })
        .collect::<Result<_>>()?;
    Ok(corpus_loss_and_grad(scorer, &prepared, &config.weights)?.0)
}

/// Weights as one comma-separated line; `{:?}` keeps every bit.
pub fn format_weights(scorer: &LinearScorer) -> String {
    let parts: Vec<String> = scorer.weights.iter().map(|w| format!("{w:?}")).collect();
    format!("{}\n", parts.join(","))
}

pub fn parse_weights(text: &str) -> Result<LinearScorer> {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| Error::invalid("weights file is empty"))?;
    let values: Vec<f64> = line
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad weight {v:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    let weights: [f64; FEATURE_COUNT] = values.try_into().map_err(|v: Vec<f64>| {
        Error::invalid(format!("expected {FEATURE_COUNT} weights, got {}", v.len()))
    })?;
    LinearScorer::new(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LabelMap;

    fn split_sample(h: usize, w: usize, split: usize) -> TrainingSample {
        let image = ImageGrid::from_fn(h, w, 3, |_, c, k| {
            if c < split {
                [0.9, 0.2, 0.1][k]
            } else {
                [0.1, 0.3, 0.8][k]
            }
        })
        .unwrap();
        let truth = LabelMap::new(
            h,
            w,
            (0..h * w).map(|i| u32::from(i % w >= split)).collect(),
        )
        .unwrap();
        TrainingSample::new(image, truth.into()).unwrap()
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg = TrainingConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(train_toy_scorer(&[split_sample(17, 33, 10)], &cfg).is_err());
        assert!(train_toy_scorer(&[], &TrainingConfig::default()).is_err());
    }

    #[test]
    fn training_lowers_loss() {
        let corpus = [split_sample(17, 33, 10), split_sample(17, 33, 21)];
        let cfg = TrainingConfig {
            epochs: 5,
            ..Default::default()
        };
        let report = train_toy_scorer(&corpus, &cfg).unwrap();
        assert_eq!(report.loss_history.len(), 6);
        assert!(report.loss_history[5] < report.loss_history[0]);
        // closer colors must be preferred after training
        assert!(report.scorer.weights()[..3].iter().all(|w| *w < 0.0));
    }

    #[test]
    fn weights_text_round_trip() {
        let s = LinearScorer::new([-1.5, 0.1, 1e-17, 3.0]).unwrap();
        assert_eq!(parse_weights(&format_weights(&s)).unwrap(), s);
        assert!(parse_weights("1,2").is_err());
        assert!(parse_weights("").is_err());
    }
}
