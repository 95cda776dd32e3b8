//! Shared helpers for the integration tests: independent oracles, random
//! instance generators and fixture loading.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::PathBuf;

use rand::Rng;
use sinterp::grid::{init_map, ExpansionSchedule, ImageGrid, LabelMap};
use sinterp::interp::{score_dims, AssociationScores, Axis};
use sinterp::io::{load_image, load_label_map};
use sinterp::loss::GroundTruth;
use sinterp::scoring::FixedScorer;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn corpus_dir() -> PathBuf {
    fixtures().join("corpus")
}

/// Every (name, image, truth) triple in the natural-image corpus, by name.
pub fn load_corpus() -> Vec<(String, ImageGrid, GroundTruth)> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "png").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let dir = corpus_dir();
            let image = load_image(dir.join(format!("{n}.png"))).unwrap();
            let truth = load_label_map(dir.join(format!("{n}.pgm"))).unwrap();
            (n, image, truth.into())
        })
        .collect()
}

/// Connectivity by breadth-first search from every unvisited element.
pub fn bfs_connected(map: &LabelMap) -> bool {
    let (h, w) = map.dims();
    let mut seen = vec![false; h * w];
    let mut started: HashSet<u32> = HashSet::new();
    for start in 0..h * w {
        if seen[start] {
            continue;
        }
        let label = map.labels()[start];
        if !started.insert(label) {
            return false;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(p) = queue.pop_front() {
            let (r, c) = (p / w, p % w);
            let mut visit = |q: usize| {
                if !seen[q] && map.labels()[q] == label {
                    seen[q] = true;
                    queue.push_back(q);
                }
            };
            if r > 0 {
                visit(p - w);
            }
            if r + 1 < h {
                visit(p + w);
            }
            if c > 0 {
                visit(p - 1);
            }
            if c + 1 < w {
                visit(p + 1);
            }
        }
    }
    true
}

pub fn random_schedule<R: Rng>(
    rng: &mut R,
    max_seeds: usize,
    steps: &[usize],
) -> ExpansionSchedule {
    let s = steps[rng.gen_range(0..steps.len())];
    let h0 = rng.gen_range(1..=max_seeds);
    let w0 = rng.gen_range(1..=max_seeds);
    ExpansionSchedule::new((h0 - 1) * s + 1, (w0 - 1) * s + 1, s).unwrap()
}

/// Probability pairs with a fair share of exact ties and certainties.
pub fn random_scores<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> AssociationScores {
    let data = (0..rows * cols)
        .map(|_| {
            let a: f64 = match rng.gen_range(0..6) {
                0 => 0.5,
                1 => 0.0,
                2 => 1.0,
                _ => rng.gen(),
            };
            [a, 1.0 - a]
        })
        .collect();
    AssociationScores::new(rows, cols, data).unwrap()
}

pub fn random_scorer<R: Rng>(rng: &mut R, schedule: &ExpansionSchedule) -> FixedScorer {
    let mut scorer = FixedScorer::new();
    for level in 1..=schedule.levels() {
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let (r, c) = score_dims(schedule, level, axis).unwrap();
            scorer.insert(level, axis, random_scores(rng, r, c));
        }
    }
    scorer
}

pub fn blank_image(schedule: &ExpansionSchedule) -> ImageGrid {
    let (h, w) = schedule.image_dims();
    ImageGrid::filled(h, w, &[0.0, 0.0, 0.0]).unwrap()
}

pub fn seeds(schedule: &ExpansionSchedule) -> LabelMap {
    let (h0, w0) = schedule.seed_dims();
    init_map(h0, w0)
}

pub fn random_labels<R: Rng>(rng: &mut R, h: usize, w: usize, k: u32) -> LabelMap {
    LabelMap::new(h, w, (0..h * w).map(|_| rng.gen_range(0..k)).collect()).unwrap()
}

/// Blocky random map: labels drawn per `block x block` cell, so regions have
/// realistic extent.
pub fn random_blocky<R: Rng>(rng: &mut R, h: usize, w: usize, block: usize, k: u32) -> LabelMap {
    let bw = w.div_ceil(block);
    let cells: Vec<u32> = (0..h.div_ceil(block) * bw)
        .map(|_| rng.gen_range(0..k))
        .collect();
    LabelMap::new(
        h,
        w,
        (0..h * w)
            .map(|i| cells[(i / w / block) * bw + (i % w) / block])
            .collect(),
    )
    .unwrap()
}

pub fn brute_asa(sp: &LabelMap, gt: &LabelMap) -> f64 {
    let mut sp_ids: Vec<u32> = sp.labels().to_vec();
    sp_ids.sort_unstable();
    sp_ids.dedup();
    let mut gt_ids: Vec<u32> = gt.labels().to_vec();
    gt_ids.sort_unstable();
    gt_ids.dedup();
    let mut total = 0usize;
    for &s in &sp_ids {
        let mut best = 0;
        for &g in &gt_ids {
            let overlap = (0..sp.len())
                .filter(|&i| sp.labels()[i] == s && gt.labels()[i] == g)
                .count();
            best = best.max(overlap);
        }
        total += best;
    }
    total as f64 / sp.len() as f64
}

pub fn brute_boundary(map: &LabelMap) -> Vec<bool> {
    let (h, w) = map.dims();
    let mut out = vec![false; h * w];
    for r in 0..h {
        for c in 0..w {
            let l = map.get(r, c);
            let diff = (r > 0 && map.get(r - 1, c) != l)
                || (r + 1 < h && map.get(r + 1, c) != l)
                || (c > 0 && map.get(r, c - 1) != l)
                || (c + 1 < w && map.get(r, c + 1) != l);
            out[r * w + c] = diff;
        }
    }
    out
}

fn near(b: &[bool], h: usize, w: usize, r: usize, c: usize, tol: usize) -> bool {
    for rr in r.saturating_sub(tol)..=(r + tol).min(h - 1) {
        for cc in c.saturating_sub(tol)..=(c + tol).min(w - 1) {
            if b[rr * w + cc] {
                return true;
            }
        }
    }
    false
}

/// Boundary recall and precision with a square tolerance window.
pub fn brute_br_bp(sp: &LabelMap, gt: &LabelMap, tol: usize) -> (f64, f64) {
    let (h, w) = sp.dims();
    let bs = brute_boundary(sp);
    let bg = brute_boundary(gt);
    let (mut gt_n, mut gt_hit, mut sp_n, mut sp_hit) = (0, 0, 0, 0);
    for r in 0..h {
        for c in 0..w {
            if bg[r * w + c] {
                gt_n += 1;
                if near(&bs, h, w, r, c, tol) {
                    gt_hit += 1;
                }
            }
            if bs[r * w + c] {
                sp_n += 1;
                if near(&bg, h, w, r, c, tol) {
                    sp_hit += 1;
                }
            }
        }
    }
    let br = if gt_n == 0 {
        1.0
    } else {
        gt_hit as f64 / gt_n as f64
    };
    let bp = if sp_n == 0 {
        1.0
    } else {
        sp_hit as f64 / sp_n as f64
    };
    (br, bp)
}

pub fn brute_co(map: &LabelMap) -> f64 {
    let (h, w) = map.dims();
    let mut area: HashMap<u32, f64> = HashMap::new();
    let mut perim: HashMap<u32, f64> = HashMap::new();
    for r in 0..h as isize {
        for c in 0..w as isize {
            let l = map.get(r as usize, c as usize);
            *area.entry(l).or_default() += 1.0;
            for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                let (nr, nc) = (r + dr, c + dc);
                let outside = nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize;
                if outside || map.get(nr as usize, nc as usize) != l {
                    *perim.entry(l).or_default() += 1.0;
                }
            }
        }
    }
    let n = (h * w) as f64;
    area.iter()
        .map(|(l, a)| a / n * (4.0 * std::f64::consts::PI * a / (perim[l] * perim[l])).min(1.0))
        .sum()
}

/// Two-color image split by a random straight line, with pixel noise, and
/// its two-segment ground truth.
pub fn split_instance<R: Rng>(rng: &mut R, h: usize, w: usize) -> (ImageGrid, LabelMap) {
    let a: [f32; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let mut b: [f32; 3] = [rng.gen(), rng.gen(), rng.gen()];
    while a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f32>() < 0.25 {
        b = [rng.gen(), rng.gen(), rng.gen()];
    }
    // line through a random interior point with a random direction
    let (pr, pc) = (
        rng.gen_range(0.25..0.75) * h as f64,
        rng.gen_range(0.25..0.75) * w as f64,
    );
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let (nr, nc) = (theta.cos(), theta.sin());
    let side = |r: usize, c: usize| ((r as f64 - pr) * nr + (c as f64 - pc) * nc) >= 0.0;
    let truth = LabelMap::new(
        h,
        w,
        (0..h * w).map(|i| u32::from(side(i / w, i % w))).collect(),
    )
    .unwrap();
    let mut data = Vec::with_capacity(h * w * 3);
    for i in 0..h * w {
        let base = if truth.labels()[i] == 1 { b } else { a };
        for v in base {
            data.push((v + rng.gen_range(-0.03..0.03)).clamp(0.0, 1.0));
        }
    }
    (ImageGrid::new(h, w, 3, data).unwrap(), truth)
}
