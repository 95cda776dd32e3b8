mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sinterp::grid::{ImageGrid, LabelMap};
use sinterp::interp::check_connectivity;
use sinterp::io::load_image;
use sinterp::metrics::asa;
use sinterp::slic::{enforce_connectivity_post, slic, slic_segment, slic_trace, SlicParams};

/// Smooth blobs plus noise, so clusters are neither trivial nor pure noise.
fn textured<R: Rng>(rng: &mut R, h: usize, w: usize) -> ImageGrid {
    let f: [f32; 6] = std::array::from_fn(|_| rng.gen_range(0.05..0.5));
    ImageGrid::from_fn(h, w, 3, |r, c, k| {
        let base = ((r as f32 * f[k]).sin() * (c as f32 * f[k + 3]).cos() + 1.0) / 2.0;
        (base + rng.gen_range(-0.15..0.15)).clamp(0.0, 1.0)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn post_processed_slic_is_connected(seed in any::<u64>(), h in 6usize..40, w in 6usize..40, k in 1usize..30, m in 1.0f64..40.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let image = textured(&mut rng, h, w);
        let params = SlicParams { n_superpixels: k, compactness: m, iterations: 4, ..SlicParams::default() };
        let labels = slic(&image, &params).unwrap();
        prop_assert!(bfs_connected(&labels));
        prop_assert!(check_connectivity(&labels).connected);
    }

    #[test]
    fn objective_never_increases(seed in any::<u64>(), k in 2usize..40, m in 1.0f64..40.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let image = textured(&mut rng, 30, 26);
        let params = SlicParams { n_superpixels: k, compactness: m, iterations: 8, ..SlicParams::default() };
        let trace = slic_trace(&image, &params).unwrap();
        for pair in trace.objectives.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-9, "{:?}", trace.objectives);
        }
    }

    #[test]
    fn connectivity_post_on_random_maps(seed in any::<u64>(), min_size in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_labels(&mut rng, 15, 12, 4);
        let out = enforce_connectivity_post(&raw, min_size);
        prop_assert!(bfs_connected(&out));
        // every surviving region meets the size floor unless it is alone
        let mut sizes = std::collections::HashMap::new();
        for l in out.labels() {
            *sizes.entry(*l).or_insert(0usize) += 1;
        }
        if sizes.len() > 1 {
            prop_assert!(sizes.values().all(|s| *s >= min_size));
        }
    }
}

#[test]
fn raw_slic_can_fragment() {
    // uniform noise at default compactness leaves split clusters behind
    let image = load_image(fixtures().join("slic_fragments.ppm")).unwrap();
    let params = SlicParams::with_count(16);
    let raw = slic_segment(&image, &params).unwrap();
    assert!(!check_connectivity(&raw).connected);
    assert!(!bfs_connected(&raw));
    let fixed = slic(&image, &params).unwrap();
    assert!(check_connectivity(&fixed).connected);
}

#[test]
fn two_color_split_is_followed() {
    let (h, w) = (40, 60);
    let image = ImageGrid::from_fn(h, w, 3, |_, c, k| {
        if c < 23 {
            [0.9, 0.1, 0.1][k]
        } else {
            [0.1, 0.2, 0.9][k]
        }
    })
    .unwrap();
    let truth = LabelMap::new(h, w, (0..h * w).map(|i| u32::from(i % w >= 23)).collect()).unwrap();
    let params = SlicParams {
        n_superpixels: 2,
        compactness: 1.0,
        ..SlicParams::default()
    };
    let labels = slic(&image, &params).unwrap();
    assert!(asa(&labels, &truth).unwrap() >= 0.99);
}

#[test]
fn single_cluster_covers_everything() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let image = textured(&mut rng, 20, 30);
    let labels = slic(&image, &SlicParams::with_count(1)).unwrap();
    assert_eq!(labels.distinct_count(), 1);
    assert!(slic(&image, &SlicParams::with_count(601)).is_err());
}
