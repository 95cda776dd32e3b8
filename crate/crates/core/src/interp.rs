//! Label-map expansion by horizontal and vertical interpolation.
//!
//! Every inserted element copies the label of one of its two existing
//! neighbors along the interpolation axis. Starting from a seed map where
//! each superpixel is a single element, this keeps every superpixel
//! 4-connected at every step, so the final map needs no connectivity repair.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ExpansionSchedule, ImageGrid, LabelMap};
use crate::scoring::Scorer;

/// Interpolation direction. `Horizontal` inserts columns, `Vertical` inserts rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

const PROBABILITY_SLACK: f64 = 1e-6;

/// Probability pairs, one per insertion site, laid out row-major.
///
/// Entry `k` of a pair is the probability that the inserted element takes
/// the label of its `k`-th neighbor (left/top for 0, right/bottom for 1).
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationScores {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl AssociationScores {
    pub fn new(rows: usize, cols: usize, data: Vec<[f64; 2]>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} score pairs for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        for (idx, pair) in data.iter().enumerate() {
            let ok = pair.iter().all(|p| p.is_finite() && *p >= 0.0)
                && (pair[0] + pair[1] - 1.0).abs() <= PROBABILITY_SLACK;
            if !ok {
                return Err(Error::invalid(format!(
                    "score pair {pair:?} at index {idx} is not a probability pair"
                )));
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Every site at `(0.5, 0.5)`.
    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![[0.5, 0.5]; rows * cols],
        }
    }

    pub fn from_fn<F>(rows: usize, cols: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> [f64; 2],
    {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
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

    pub fn data(&self) -> &[[f64; 2]] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> [f64; 2] {
        self.data[i * self.cols + j]
    }

    /// Neighbor index the engine picks at `(i, j)`; ties go to 0.
    #[inline]
    pub fn choice(&self, i: usize, j: usize) -> usize {
        choose(self.get(i, j))
    }

    pub fn transpose(&self) -> AssociationScores {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        AssociationScores {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

#[inline]
fn choose(pair: [f64; 2]) -> usize {
    usize::from(pair[1] > pair[0])
}

/// Score-grid shape for the interpolation at `level` (1-based) along `axis`.
pub fn score_dims(
    schedule: &ExpansionSchedule,
    level: usize,
    axis: Axis,
) -> Result<(usize, usize)> {
    if level == 0 || level > schedule.levels() {
        return Err(Error::invalid(format!(
            "interpolation level {level} outside 1..={}",
            schedule.levels()
        )));
    }
    let (h_prev, w_prev) = schedule.dims()[level - 1];
    let (_, w_next) = schedule.dims()[level];
    Ok(match axis {
        Axis::Horizontal => (h_prev, w_prev - 1),
        Axis::Vertical => (h_prev - 1, w_next),
    })
}

/// Image coordinates of one insertion site and its two neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertionSite {
    pub inserted: (usize, usize),
    pub neighbors: [(usize, usize); 2],
}

/// Image coordinates of site `(i, j)` of the `level`/`axis` score grid.
///
/// Horizontal sites at level `l` live on rows spaced `s_{l-1}` apart and sit
/// halfway between columns `j * s_{l-1}` and `(j + 1) * s_{l-1}`; vertical
/// sites live on columns spaced `s_l` apart, halfway between two rows.
#[inline]
pub fn insertion_site(
    schedule: &ExpansionSchedule,
    level: usize,
    axis: Axis,
    i: usize,
    j: usize,
) -> InsertionSite {
    let coarse = schedule.stride(level - 1);
    let fine = schedule.stride(level);
    match axis {
        Axis::Horizontal => {
            let r = i * coarse;
            InsertionSite {
                inserted: (r, (2 * j + 1) * fine),
                neighbors: [(r, j * coarse), (r, (j + 1) * coarse)],
            }
        }
        Axis::Vertical => {
            let c = j * fine;
            InsertionSite {
                inserted: ((2 * i + 1) * fine, c),
                neighbors: [(i * coarse, c), ((i + 1) * coarse, c)],
            }
        }
    }
}

/// Flanking label pairs for every horizontal insertion site of `map`.
pub fn neighbor_pairs_h(map: &LabelMap) -> Vec<Vec<(u32, u32)>> {
    map.rows()
        .map(|row| row.windows(2).map(|w| (w[0], w[1])).collect())
        .collect()
}

/// Flanking label pairs for every vertical insertion site of `map`.
pub fn neighbor_pairs_v(map: &LabelMap) -> Vec<Vec<(u32, u32)>> {
    (0..map.height().saturating_sub(1))
        .map(|i| {
            (0..map.width())
                .map(|j| (map.get(i, j), map.get(i + 1, j)))
                .collect()
        })
        .collect()
}

fn check_score_shape(scores: &AssociationScores, expected: (usize, usize)) -> Result<()> {
    if scores.dims() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            actual: scores.dims(),
        });
    }
    Ok(())
}

/// Inserts a column between every pair of columns.
pub fn interpolate_h(map: &LabelMap, scores: &AssociationScores) -> Result<LabelMap> {
    let (h, w) = map.dims();
    check_score_shape(scores, (h, w.saturating_sub(1)))?;
    if w <= 1 {
        return Ok(map.clone());
    }
    let out_w = 2 * w - 1;
    let mut out = vec![0u32; h * out_w];
    out.par_chunks_mut(out_w).enumerate().for_each(|(i, dst)| {
        let src = map.row(i);
        for j in 0..w - 1 {
            dst[2 * j] = src[j];
            dst[2 * j + 1] = src[j + scores.choice(i, j)];
        }
        dst[out_w - 1] = src[w - 1];
    });
    LabelMap::new(h, out_w, out)
}

/// Inserts a row between every pair of rows.
pub fn interpolate_v(map: &LabelMap, scores: &AssociationScores) -> Result<LabelMap> {
    let (h, w) = map.dims();
    check_score_shape(scores, (h.saturating_sub(1), w))?;
    if h <= 1 {
        return Ok(map.clone());
    }
    let out_h = 2 * h - 1;
    let mut out = vec![0u32; out_h * w];
    out.par_chunks_mut(w).enumerate().for_each(|(r, dst)| {
        let i = r / 2;
        if r % 2 == 0 {
            dst.copy_from_slice(map.row(i));
        } else {
            let top = map.row(i);
            let bottom = map.row(i + 1);
            for j in 0..w {
                dst[j] = if scores.choice(i, j) == 0 {
                    top[j]
                } else {
                    bottom[j]
                };
            }
        }
    });
    LabelMap::new(out_h, w, out)
}

/// Runs every expansion level from the seed map `seeds` to full resolution.
pub fn expand<S: Scorer + ?Sized>(
    seeds: &LabelMap,
    scorer: &S,
    image: &ImageGrid,
    schedule: &ExpansionSchedule,
) -> Result<LabelMap> {
    if seeds.dims() != schedule.seed_dims() {
        return Err(Error::ShapeMismatch {
            expected: schedule.seed_dims(),
            actual: seeds.dims(),
        });
    }
    if image.dims() != schedule.image_dims() {
        return Err(Error::ShapeMismatch {
            expected: schedule.image_dims(),
            actual: image.dims(),
        });
    }
    let mut map = seeds.clone();
    for level in 1..=schedule.levels() {
        let scores = scorer.scores(image, schedule, level, Axis::Horizontal)?;
        map = interpolate_h(&map, &scores)?;
        let scores = scorer.scores(image, schedule, level, Axis::Vertical)?;
        map = interpolate_v(&map, &scores)?;
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub connected: bool,
    /// Labels whose elements form more than one 4-connected component, ascending.
    pub offending_labels: Vec<u32>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// 4-connected component id per element, plus the component count.
pub fn label_components(map: &LabelMap) -> (Vec<usize>, usize) {
    let (h, w) = map.dims();
    let labels = map.labels();
    let mut parent: Vec<usize> = (0..labels.len()).collect();
    for r in 0..h {
        for c in 0..w {
            let idx = r * w + c;
            if c + 1 < w && labels[idx] == labels[idx + 1] {
                union(&mut parent, idx, idx + 1);
            }
            if r + 1 < h && labels[idx] == labels[idx + w] {
                union(&mut parent, idx, idx + w);
            }
        }
    }
    let mut ids = vec![usize::MAX; labels.len()];
    let mut next = 0;
    let mut out = vec![0; labels.len()];
    for idx in 0..labels.len() {
        let root = find(&mut parent, idx);
        if ids[root] == usize::MAX {
            ids[root] = next;
            next += 1;
        }
        out[idx] = ids[root];
    }
    (out, next)
}

/// Checks that every label's elements form a single 4-connected set.
pub fn check_connectivity(map: &LabelMap) -> ConnectivityReport {
    let (components, count) = label_components(map);
    let mut owner: Vec<Option<u32>> = vec![None; count];
    let mut pieces = std::collections::HashMap::<u32, usize>::new();
    for (&label, &comp) in map.labels().iter().zip(&components) {
        if owner[comp].is_none() {
            owner[comp] = Some(label);
            *pieces.entry(label).or_default() += 1;
        }
    }
    let mut offending: Vec<u32> = pieces
        .into_iter()
        .filter(|&(_, n)| n > 1)
        .map(|(l, _)| l)
        .collect();
    offending.sort_unstable();
    ConnectivityReport {
        connected: offending.is_empty(),
        offending_labels: offending,
    }
}

#[inline]
fn nearest_source(o: usize, in_len: usize, out_len: usize) -> usize {
    ((2 * o + 1) * in_len / (2 * out_len)).min(in_len - 1)
}

/// Nearest-neighbor resampling in either direction. Shrinking can split
/// superpixels; see [`label_upsample_nearest`] for the connectivity-safe case.
pub fn resize_labels_nearest(map: &LabelMap, height: usize, width: usize) -> Result<LabelMap> {
    if map.is_empty() || height == 0 || width == 0 {
        return Err(Error::invalid("label maps must be non-empty"));
    }
    if map.dims() == (height, width) {
        return Ok(map.clone());
    }
    let cols: Vec<usize> = (0..width)
        .map(|c| nearest_source(c, map.width(), width))
        .collect();
    let mut out = Vec::with_capacity(height * width);
    for r in 0..height {
        let src = map.row(nearest_source(r, map.height(), height));
        out.extend(cols.iter().map(|&c| src[c]));
    }
    LabelMap::new(height, width, out)
}

/// Nearest-neighbor upsampling. Every source element becomes a non-empty
/// rectangular block, so 4-connectivity carries over.
pub fn label_upsample_nearest(map: &LabelMap, height: usize, width: usize) -> Result<LabelMap> {
    if height < map.height() || width < map.width() {
        return Err(Error::invalid(format!(
            "cannot upsample {}x{} to smaller {height}x{width}",
            map.height(),
            map.width()
        )));
    }
    resize_labels_nearest(map, height, width)
}
