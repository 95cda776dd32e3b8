//! Superpixel quality metrics: achievable segmentation accuracy, boundary
//! recall/precision, and compactness.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::LabelMap;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsReport {
    pub asa: f64,
    pub br: f64,
    pub bp: f64,
    pub co: f64,
    pub n_superpixels: usize,
    pub runtime_ms: f64,
}

fn check_dims(a: &LabelMap, b: &LabelMap) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::ShapeMismatch {
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    Ok(())
}

/// Fraction of pixels that land in the ground-truth segment covering most of
/// their superpixel.
pub fn asa(superpixels: &LabelMap, truth: &LabelMap) -> Result<f64> {
    check_dims(superpixels, truth)?;
    if superpixels.is_empty() {
        return Ok(1.0);
    }
    let mut pairs: Vec<u64> = superpixels
        .labels()
        .iter()
        .zip(truth.labels())
        .map(|(&s, &t)| (u64::from(s) << 32) | u64::from(t))
        .collect();
    pairs.sort_unstable();

    let mut best: HashMap<u32, usize> = HashMap::new();
    for run in pairs.chunk_by(|a, b| a == b) {
        let sp = (run[0] >> 32) as u32;
        let slot = best.entry(sp).or_default();
        *slot = (*slot).max(run.len());
    }
    let hit: usize = best.values().sum();
    Ok(hit as f64 / superpixels.len() as f64)
}

/// True where some 4-neighbor carries a different label. The image border
/// does not count as a boundary.
pub fn boundary_map(labels: &LabelMap) -> Vec<bool> {
    let (h, w) = labels.dims();
    let l = labels.labels();
    let mut out = vec![false; l.len()];
    for r in 0..h {
        for c in 0..w {
            let idx = r * w + c;
            if c + 1 < w && l[idx] != l[idx + 1] {
                out[idx] = true;
                out[idx + 1] = true;
            }
            if r + 1 < h && l[idx] != l[idx + w] {
                out[idx] = true;
                out[idx + w] = true;
            }
        }
    }
    out
}

/// Boundary matching radius: `0.0025` of the image diagonal, rounded half up.
pub fn boundary_tolerance(height: usize, width: usize) -> usize {
    let diagonal = ((height * height + width * width) as f64).sqrt();
    (0.0025 * diagonal + 0.5).floor() as usize
}

// Square (Chebyshev) dilation by `radius`, separable via running counts.
fn dilate(mask: &[bool], height: usize, width: usize, radius: usize) -> Vec<bool> {
    if radius == 0 {
        return mask.to_vec();
    }
    let mut horizontal = vec![false; mask.len()];
    let mut prefix = vec![0usize; width.max(height) + 1];
    for r in 0..height {
        let row = &mask[r * width..(r + 1) * width];
        for c in 0..width {
            prefix[c + 1] = prefix[c] + usize::from(row[c]);
        }
        for c in 0..width {
            let lo = c.saturating_sub(radius);
            let hi = (c + radius + 1).min(width);
            horizontal[r * width + c] = prefix[hi] > prefix[lo];
        }
    }
    let mut out = vec![false; mask.len()];
    for c in 0..width {
        for r in 0..height {
            prefix[r + 1] = prefix[r] + usize::from(horizontal[r * width + c]);
        }
        for r in 0..height {
            let lo = r.saturating_sub(radius);
            let hi = (r + radius + 1).min(height);
            out[r * width + c] = prefix[hi] > prefix[lo];
        }
    }
    out
}

fn matched_fraction(source: &[bool], covered: &[bool]) -> f64 {
    let total = source.iter().filter(|b| **b).count();
    if total == 0 {
        return 1.0;
    }
    let hit = source
        .iter()
        .zip(covered)
        .filter(|(s, c)| **s && **c)
        .count();
    hit as f64 / total as f64
}

/// Boundary recall and precision with a square matching window of radius `tolerance`.
pub fn br_bp(superpixels: &LabelMap, truth: &LabelMap, tolerance: usize) -> Result<(f64, f64)> {
    check_dims(superpixels, truth)?;
    let (h, w) = superpixels.dims();
    let sp_edges = boundary_map(superpixels);
    let gt_edges = boundary_map(truth);
    let br = matched_fraction(&gt_edges, &dilate(&sp_edges, h, w, tolerance));
    let bp = matched_fraction(&sp_edges, &dilate(&gt_edges, h, w, tolerance));
    Ok((br, bp))
}

/// Area-weighted isoperimetric quotient, each term capped at 1. Perimeters
/// count exposed unit edges, including edges on the image border.
pub fn co(superpixels: &LabelMap) -> f64 {
    let (h, w) = superpixels.dims();
    if superpixels.is_empty() {
        return 0.0;
    }
    let l = superpixels.labels();
    let mut stats: HashMap<u32, (usize, usize)> = HashMap::new();
    for r in 0..h {
        for c in 0..w {
            let label = l[r * w + c];
            let mut exposed = 0;
            if r == 0 || l[(r - 1) * w + c] != label {
                exposed += 1;
            }
            if r + 1 == h || l[(r + 1) * w + c] != label {
                exposed += 1;
            }
            if c == 0 || l[r * w + c - 1] != label {
                exposed += 1;
            }
            if c + 1 == w || l[r * w + c + 1] != label {
                exposed += 1;
            }
            let entry = stats.entry(label).or_default();
            entry.0 += 1;
            entry.1 += exposed;
        }
    }
    let n = superpixels.len() as f64;
    let mut entries: Vec<_> = stats.into_values().collect();
    // fixed summation order so results do not depend on hash seeds
    entries.sort_unstable();
    entries
        .into_iter()
        .map(|(area, perimeter)| {
            let area = area as f64;
            let q = 4.0 * std::f64::consts::PI * area / (perimeter as f64).powi(2);
            area / n * q.min(1.0)
        })
        .sum()
}

/// All metrics for one segmentation, with the benchmark boundary tolerance.
pub fn evaluate(superpixels: &LabelMap, truth: &LabelMap) -> Result<MetricsReport> {
    let (br, bp) = br_bp(
        superpixels,
        truth,
        boundary_tolerance(superpixels.height(), superpixels.width()),
    )?;
    Ok(MetricsReport {
        asa: asa(superpixels, truth)?,
        br,
        bp,
        co: co(superpixels),
        n_superpixels: superpixels.distinct_count(),
        runtime_ms: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrants(n: usize) -> LabelMap {
        let half = n / 2;
        LabelMap::new(
            n,
            n,
            (0..n * n)
                .map(|i| {
                    let (r, c) = (i / n, i % n);
                    (u32::from(r >= half) << 1) | u32::from(c >= half)
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn asa_examples() {
        let m = quadrants(4);
        assert_eq!(asa(&m, &m).unwrap(), 1.0);
        let single = LabelMap::filled(1, 10, 0);
        let split = LabelMap::from_rows(&[[1, 1, 1, 1, 1, 1, 2, 2, 2, 2]]);
        assert!((asa(&single, &split).unwrap() - 0.6).abs() < 1e-12);
        assert!(asa(&single, &quadrants(4)).is_err());
    }

    #[test]
    fn boundary_examples() {
        assert!(boundary_map(&LabelMap::filled(3, 3, 1)).iter().all(|b| !b));
        assert_eq!(
            boundary_map(&LabelMap::from_rows(&[[0, 1]])),
            vec![true, true]
        );
        assert_eq!(
            boundary_map(&quadrants(4)).iter().filter(|b| **b).count(),
            12
        );
    }

    #[test]
    fn tolerance_examples() {
        assert_eq!(boundary_tolerance(481, 321), 1);
        assert_eq!(boundary_tolerance(608, 448), 2);
        assert_eq!(boundary_tolerance(100, 100), 0);
    }

    #[test]
    fn br_bp_examples() {
        let m = quadrants(8);
        for tol in 0..3 {
            assert_eq!(br_bp(&m, &m, tol).unwrap(), (1.0, 1.0));
        }
        let constant = LabelMap::filled(8, 8, 0);
        assert_eq!(br_bp(&m, &constant, 1).unwrap(), (1.0, 0.0));
        assert_eq!(br_bp(&constant, &constant, 1).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn co_examples() {
        let quarter_pi = std::f64::consts::FRAC_PI_4;
        assert!((co(&quadrants(8)) - quarter_pi).abs() < 1e-12);
        let strip = LabelMap::filled(1, 50, 3);
        let expected = 4.0 * std::f64::consts::PI * 50.0 / (102.0f64 * 102.0);
        assert!((co(&strip) - expected).abs() < 1e-12);
        // a single pixel would score 4pi/16 < 1; clamp only matters above 1
        assert!((co(&LabelMap::filled(1, 1, 0)) - quarter_pi).abs() < 1e-12);
    }
}
