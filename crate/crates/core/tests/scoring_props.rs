use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sinterp::grid::{ExpansionSchedule, ImageGrid};
use sinterp::interp::Axis;
use sinterp::scoring::{
    color_affinity_scores, softmax_of_distances, ColorAffinityParams, ColorSpace,
};

fn random_image<R: Rng>(rng: &mut R, h: usize, w: usize) -> ImageGrid {
    ImageGrid::new(h, w, 3, (0..h * w * 3).map(|_| rng.gen()).collect()).unwrap()
}

fn params(temperature: f64, color_space: ColorSpace) -> ColorAffinityParams {
    ColorAffinityParams {
        temperature,
        color_space,
    }
}

fn all_grids(
    image: &ImageGrid,
    schedule: &ExpansionSchedule,
    p: ColorAffinityParams,
) -> Vec<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    for level in 1..=schedule.levels() {
        for axis in [Axis::Horizontal, Axis::Vertical] {
            out.push(
                color_affinity_scores(image, schedule, level, axis, p)
                    .unwrap()
                    .data()
                    .to_vec(),
            );
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn scores_are_probabilities(seed in any::<u64>(), tau in 1e-3f64..10.0, lab in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schedule = ExpansionSchedule::new(17, 9, 8).unwrap();
        let image = random_image(&mut rng, 17, 9);
        let space = if lab { ColorSpace::Lab } else { ColorSpace::Rgb };
        for grid in all_grids(&image, &schedule, params(tau, space)) {
            for [a0, a1] in grid {
                prop_assert!(a0 >= 0.0 && a1 >= 0.0);
                prop_assert!((a0 + a1 - 1.0).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn channel_swap_changes_nothing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schedule = ExpansionSchedule::new(9, 17, 4).unwrap();
        let image = random_image(&mut rng, 9, 17);
        let swapped = ImageGrid::from_fn(9, 17, 3, |r, c, k| image.pixel(r, c)[[2, 0, 1][k]]).unwrap();
        let p = params(0.05, ColorSpace::Rgb);
        // summation order changes, so allow rounding
        for (ga, gb) in all_grids(&image, &schedule, p).iter().zip(&all_grids(&swapped, &schedule, p)) {
            for (a, b) in ga.iter().zip(gb) {
                prop_assert!((a[0] - b[0]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn closer_first_neighbor_never_loses(d0 in 0.0f64..3.0, shrink in 0.0f64..1.0, d1 in 0.0f64..3.0, tau in 1e-3f64..5.0) {
        let before = softmax_of_distances(d0, d1, tau)[0];
        let after = softmax_of_distances(d0 * shrink, d1, tau)[0];
        prop_assert!(after >= before);
    }

    #[test]
    fn huge_temperature_flattens_scores(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schedule = ExpansionSchedule::new(9, 9, 8).unwrap();
        let image = random_image(&mut rng, 9, 9);
        for grid in all_grids(&image, &schedule, params(1e9, ColorSpace::Rgb)) {
            for [a0, a1] in grid {
                prop_assert!((a0 - 0.5).abs() <= 1e-6 && (a1 - 0.5).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn temperature_keeps_the_winner(seed in any::<u64>(), t1 in 1e-3f64..1.0, t2 in 1e-3f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schedule = ExpansionSchedule::new(17, 17, 16).unwrap();
        let image = random_image(&mut rng, 17, 17);
        let a = all_grids(&image, &schedule, params(t1, ColorSpace::Rgb));
        let b = all_grids(&image, &schedule, params(t2, ColorSpace::Rgb));
        for (ga, gb) in a.iter().zip(&b) {
            for (pa, pb) in ga.iter().zip(gb) {
                prop_assert_eq!(pa[1] > pa[0], pb[1] > pb[0]);
            }
        }
    }
}

#[test]
fn reference_values() {
    let [a0, a1] = softmax_of_distances(0.0, 1.0, 1.0);
    assert!((a0 - 0.7311).abs() < 1e-4 && (a1 - 0.2689).abs() < 1e-4);
    assert_eq!(softmax_of_distances(0.2, 0.2, 0.05), [0.5, 0.5]);
}
