//! SLIC baseline: windowed k-means over Lab color and position, followed by
//! connectivity enforcement.

use std::collections::BTreeSet;

use crate::color::image_to_lab;
use crate::error::{Error, Result};
use crate::grid::{grid_for_count, ImageGrid, LabelMap};
use crate::interp::label_components;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicParams {
    pub n_superpixels: usize,
    pub compactness: f64,
    pub iterations: usize,
    /// Components smaller than this fraction of the mean superpixel area are merged away.
    pub min_size_fraction: f64,
}

impl SlicParams {
    pub fn with_count(n_superpixels: usize) -> Self {
        Self {
            n_superpixels,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_superpixels == 0 {
            return Err(Error::invalid("SLIC needs at least one superpixel"));
        }
        if !(self.compactness > 0.0) {
            return Err(Error::invalid("SLIC compactness must be positive"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("SLIC needs at least one iteration"));
        }
        if !(self.min_size_fraction > 0.0 && self.min_size_fraction < 1.0) {
            return Err(Error::invalid("min_size_fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}

impl Default for SlicParams {
    fn default() -> Self {
        Self {
            n_superpixels: 400,
            compactness: 10.0,
            iterations: 10,
            min_size_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Center {
    lab: [f64; 3],
    row: f64,
    col: f64,
}

/// Raw clustering result.
#[derive(Debug, Clone)]
pub struct SlicTrace {
    pub labels: LabelMap,
    /// k-means objective after each iteration's center update.
    pub objectives: Vec<f64>,
}

struct Clustering<'a> {
    lab: &'a [[f64; 3]],
    height: usize,
    width: usize,
    step: f64,
    spatial_weight: f64,
}

impl Clustering<'_> {
    #[inline]
    fn distance(&self, idx: usize, center: &Center) -> f64 {
        let p = self.lab[idx];
        let dc = (p[0] - center.lab[0]).powi(2)
            + (p[1] - center.lab[1]).powi(2)
            + (p[2] - center.lab[2]).powi(2);
        let (r, c) = ((idx / self.width) as f64, (idx % self.width) as f64);
        let ds = (r - center.row).powi(2) + (c - center.col).powi(2);
        dc + self.spatial_weight * ds
    }

    fn assign(&self, centers: &[Center], labels: &mut [u32]) {
        // every pixel keeps its current center as a candidate, so no pixel's
        // distance can grow during assignment
        let mut best: Vec<f64> = labels
            .iter()
            .enumerate()
            .map(|(idx, &l)| self.distance(idx, &centers[l as usize]))
            .collect();
        let reach = self.step;
        for (k, center) in centers.iter().enumerate() {
            let r0 = (center.row - reach).floor().max(0.0) as usize;
            let r1 = ((center.row + reach).ceil() as usize).min(self.height - 1);
            let c0 = (center.col - reach).floor().max(0.0) as usize;
            let c1 = ((center.col + reach).ceil() as usize).min(self.width - 1);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    let idx = r * self.width + c;
                    let d = self.distance(idx, center);
                    if d < best[idx] {
                        best[idx] = d;
                        labels[idx] = k as u32;
                    }
                }
            }
        }
    }

    fn update(&self, centers: &mut [Center], labels: &[u32]) {
        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for (idx, &l) in labels.iter().enumerate() {
            let p = self.lab[idx];
            let s = &mut sums[l as usize];
            s[0] += p[0];
            s[1] += p[1];
            s[2] += p[2];
            s[3] += (idx / self.width) as f64;
            s[4] += (idx % self.width) as f64;
            s[5] += 1.0;
        }
        for (center, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                let n = s[5];
                *center = Center {
                    lab: [s[0] / n, s[1] / n, s[2] / n],
                    row: s[3] / n,
                    col: s[4] / n,
                };
            }
        }
    }

    fn objective(&self, centers: &[Center], labels: &[u32]) -> f64 {
        labels
            .iter()
            .enumerate()
            .map(|(idx, &l)| self.distance(idx, &centers[l as usize]))
            .sum()
    }
}

/// Windowed k-means clustering. Labels may be spatially disconnected.
pub fn slic_trace(image: &ImageGrid, params: &SlicParams) -> Result<SlicTrace> {
    params.validate()?;
    let (h, w) = image.dims();
    let n = h * w;
    if params.n_superpixels > n {
        return Err(Error::invalid(format!(
            "{} superpixels requested for {n} pixels",
            params.n_superpixels
        )));
    }
    let lab = image_to_lab(image);
    let step = (n as f64 / params.n_superpixels as f64).sqrt();
    let (ny, nx) = grid_for_count(params.n_superpixels, h, w)?;
    let (ny, nx) = (ny.min(h), nx.min(w));

    let mut centers = Vec::with_capacity(ny * nx);
    for i in 0..ny {
        for j in 0..nx {
            let row = ((i as f64 + 0.5) * h as f64 / ny as f64).floor() as usize;
            let col = ((j as f64 + 0.5) * w as f64 / nx as f64).floor() as usize;
            centers.push(Center {
                lab: lab[row * w + col],
                row: row as f64,
                col: col as f64,
            });
        }
    }
    let mut labels: Vec<u32> = (0..n)
        .map(|idx| {
            let (r, c) = (idx / w, idx % w);
            ((r * ny / h) * nx + c * nx / w) as u32
        })
        .collect();

    let clustering = Clustering {
        lab: &lab,
        height: h,
        width: w,
        step,
        spatial_weight: (params.compactness / step).powi(2),
    };
    let mut objectives = Vec::with_capacity(params.iterations);
    for _ in 0..params.iterations {
        clustering.assign(&centers, &mut labels);
        clustering.update(&mut centers, &labels);
        objectives.push(clustering.objective(&centers, &labels));
    }
    Ok(SlicTrace {
        labels: LabelMap::new(h, w, labels)?,
        objectives,
    })
}

/// Raw SLIC labels, before connectivity enforcement.
pub fn slic_segment(image: &ImageGrid, params: &SlicParams) -> Result<LabelMap> {
    Ok(slic_trace(image, params)?.labels)
}

/// SLIC followed by [`enforce_connectivity_post`].
pub fn slic(image: &ImageGrid, params: &SlicParams) -> Result<LabelMap> {
    let raw = slic_segment(image, params)?;
    let mean_area = raw.len() as f64 / params.n_superpixels as f64;
    let min_size = (params.min_size_fraction * mean_area).round() as usize;
    Ok(enforce_connectivity_post(&raw, min_size))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Splits every label into its 4-connected components, then merges each
/// component smaller than `min_size` into its largest adjacent neighbor.
/// Output labels are compact, numbered in row-major order of appearance.
pub fn enforce_connectivity_post(labels: &LabelMap, min_size: usize) -> LabelMap {
    let (components, count) = label_components(labels);
    let keeper = vec![false; count];
    let roots = merge_components(labels, &components, keeper, min_size);
    LabelMap::new(
        labels.height(),
        labels.width(),
        roots.into_iter().map(|r| r as u32).collect(),
    )
    .expect("same geometry as input")
    .compacted()
}

/// Keeps the largest component of every label and folds every other
/// fragment into an adjacent region. Labels keep their IDs and none
/// disappear.
pub fn merge_stray_fragments(labels: &LabelMap) -> LabelMap {
    let (components, count) = label_components(labels);
    let mut size = vec![0usize; count];
    let mut owner = vec![0u32; count];
    for (&c, &l) in components.iter().zip(labels.labels()) {
        size[c] += 1;
        owner[c] = l;
    }
    let mut largest: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    for c in 0..count {
        let best = largest.entry(owner[c]).or_insert(c);
        if size[c] > size[*best] {
            *best = c;
        }
    }
    let mut keeper = vec![false; count];
    for &c in largest.values() {
        keeper[c] = true;
    }
    let roots = merge_components(labels, &components, keeper.clone(), usize::MAX);
    // each merged region holds exactly one keeper; it names the region
    let mut name = vec![u32::MAX; count];
    for (&c, &root) in components.iter().zip(&roots) {
        if keeper[c] {
            name[root] = owner[c];
        }
    }
    let out = roots.iter().map(|&r| name[r]).collect();
    LabelMap::new(labels.height(), labels.width(), out).expect("same geometry as input")
}

/// Region root per pixel after merging. A region may stand alone once it
/// reaches `min_size` pixels or contains a keeper component.
fn merge_components(
    labels: &LabelMap,
    components: &[usize],
    mut keeper: Vec<bool>,
    min_size: usize,
) -> Vec<usize> {
    let count = keeper.len();
    let (h, w) = labels.dims();
    let mut size = vec![0usize; count];
    for &c in components {
        size[c] += 1;
    }
    let mut adjacent: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); count];
    for r in 0..h {
        for c in 0..w {
            let a = components[r * w + c];
            if c + 1 < w {
                let b = components[r * w + c + 1];
                if a != b {
                    adjacent[a].insert(b);
                    adjacent[b].insert(a);
                }
            }
            if r + 1 < h {
                let b = components[(r + 1) * w + c];
                if a != b {
                    adjacent[a].insert(b);
                    adjacent[b].insert(a);
                }
            }
        }
    }

    let mut parent: Vec<usize> = (0..count).collect();
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by_key(|&c| (size[c], c));
    loop {
        let mut merged = false;
        for &comp in &order {
            let root = find(&mut parent, comp);
            if size[root] >= min_size || keeper[root] {
                continue;
            }
            let neighbors: BTreeSet<usize> = adjacent[root]
                .iter()
                .map(|&n| find(&mut parent, n))
                .filter(|&n| n != root)
                .collect();
            let Some(&target) = neighbors
                .iter()
                .max_by_key(|&&n| (keeper[n], size[n], std::cmp::Reverse(n)))
            else {
                continue;
            };
            parent[root] = target;
            size[target] += size[root];
            keeper[target] |= keeper[root];
            let moved = std::mem::take(&mut adjacent[root]);
            adjacent[target].extend(moved);
            adjacent[target].retain(|&n| n != root && n != target);
            merged = true;
        }
        if !merged {
            break;
        }
    }
    components.iter().map(|&c| find(&mut parent, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::check_connectivity;

    #[test]
    fn single_superpixel() {
        let img = ImageGrid::from_fn(12, 9, 3, |r, c, _| ((r + c) % 5) as f32 / 5.0).unwrap();
        let labels = slic_segment(&img, &SlicParams::with_count(1)).unwrap();
        assert_eq!(labels.distinct_count(), 1);
    }

    #[test]
    fn too_many_superpixels() {
        let img = ImageGrid::filled(3, 3, &[0.5]).unwrap();
        assert!(slic_segment(&img, &SlicParams::with_count(10)).is_err());
    }

    #[test]
    fn constant_image_gives_balanced_quarters() {
        let img = ImageGrid::filled(40, 40, &[0.3, 0.6, 0.2]).unwrap();
        let labels = slic(&img, &SlicParams::with_count(4)).unwrap();
        assert_eq!(labels.distinct_count(), 4);
        let mut sizes = vec![0usize; 4];
        for &l in labels.labels() {
            sizes[l as usize] += 1;
        }
        for s in sizes {
            assert!((s as f64 - 400.0).abs() <= 80.0, "size {s}");
        }
    }

    #[test]
    fn post_processing_examples() {
        let m = LabelMap::from_rows(&[[0, 0], [1, 1]]);
        assert_eq!(enforce_connectivity_post(&m, 1), m);
        let relabeled = LabelMap::from_rows(&[[7, 7, 3], [7, 3, 3]]);
        assert_eq!(
            enforce_connectivity_post(&relabeled, 1),
            LabelMap::from_rows(&[[0, 0, 1], [0, 1, 1]])
        );
        let diag = LabelMap::from_rows(&[[0, 1], [1, 0]]);
        let fixed = enforce_connectivity_post(&diag, 2);
        assert!(check_connectivity(&fixed).connected);
        assert!(fixed.distinct_count() < 4);
    }

    #[test]
    fn disconnected_fragments_become_separate() {
        let m = LabelMap::from_rows(&[[0, 1, 0], [0, 1, 0]]);
        let out = enforce_connectivity_post(&m, 1);
        assert_eq!(out.distinct_count(), 3);
        assert!(check_connectivity(&out).connected);
    }
}
