use std::ffi::{CStr, CString};
use std::ptr;

use sinterp_ffi::*;

fn gradient_pixels(h: usize, w: usize) -> Vec<u8> {
    (0..h * w)
        .flat_map(|i| {
            let (r, c) = (i / w, i % w);
            [
                (r * 255 / h) as u8,
                (c * 255 / w) as u8,
                ((r + c) % 50) as u8,
            ]
        })
        .collect()
}

fn default_options() -> SinSegmentOptions {
    let mut opts = std::mem::MaybeUninit::uninit();
    assert_eq!(
        unsafe { sin_segment_options_default(opts.as_mut_ptr()) },
        SinStatus::Ok
    );
    unsafe { opts.assume_init() }
}

fn last_error() -> String {
    let p = sin_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn segment_copy_and_free() {
    let (h, w) = (65, 49);
    let pixels = gradient_pixels(h, w);
    let mut image = ptr::null_mut();
    assert_eq!(
        unsafe { sin_image_from_rgb8(pixels.as_ptr(), h, w, &mut image) },
        SinStatus::Ok
    );

    let mut opts = default_options();
    opts.seed_step = 16;
    let mut map = ptr::null_mut();
    assert_eq!(
        unsafe { sin_segment(image, &opts, &mut map) },
        SinStatus::Ok
    );

    let (mut mh, mut mw, mut count) = (0, 0, 0);
    let mut connected = false;
    unsafe {
        assert_eq!(sin_label_map_dims(map, &mut mh, &mut mw), SinStatus::Ok);
        assert_eq!(sin_label_map_count(map, &mut count), SinStatus::Ok);
        assert_eq!(sin_check_connectivity(map, &mut connected), SinStatus::Ok);
    }
    assert_eq!((mh, mw), (h, w));
    assert_eq!(count, 5 * 4);
    assert!(connected);

    let mut buf = vec![0u32; h * w];
    assert_eq!(
        unsafe { sin_label_map_copy(map, buf.as_mut_ptr(), buf.len() - 1) },
        SinStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { sin_label_map_copy(map, buf.as_mut_ptr(), buf.len()) },
        SinStatus::Ok
    );
    assert_eq!(buf[0], 0);

    // a map scored against itself is perfect on ASA and BR
    let mut metrics = SinMetrics::default();
    assert_eq!(
        unsafe { sin_evaluate(map, map, &mut metrics) },
        SinStatus::Ok
    );
    assert_eq!(metrics.asa, 1.0);
    assert_eq!(metrics.br, 1.0);
    assert_eq!(metrics.n_superpixels, 20);

    unsafe {
        sin_label_map_free(map);
        sin_image_free(image);
    }
}

#[test]
fn gt_scorer_recovers_truth_partition() {
    let (h, w) = (33, 33);
    let pixels = gradient_pixels(h, w);
    let truth: Vec<u32> = (0..h * w).map(|i| u32::from(i % w >= 12)).collect();
    let (mut image, mut gt, mut out) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    let opts = SinSegmentOptions {
        seed_step: 8,
        ..default_options()
    };
    let mut metrics = SinMetrics::default();
    unsafe {
        assert_eq!(
            sin_image_from_rgb8(pixels.as_ptr(), h, w, &mut image),
            SinStatus::Ok
        );
        assert_eq!(
            sin_label_map_new(truth.as_ptr(), h, w, &mut gt),
            SinStatus::Ok
        );
        assert_eq!(sin_segment_gt(image, gt, &opts, &mut out), SinStatus::Ok);
        assert_eq!(sin_evaluate(out, gt, &mut metrics), SinStatus::Ok);
        sin_label_map_free(out);
        sin_label_map_free(gt);
        sin_image_free(image);
    }
    assert_eq!(metrics.asa, 1.0);
}

#[test]
fn errors_map_to_status_codes() {
    let mut map = ptr::null_mut();
    let labels = [0u32; 4];
    unsafe {
        assert_eq!(
            sin_label_map_new(ptr::null(), 2, 2, &mut map),
            SinStatus::NullPointer
        );
        assert!(last_error().contains("labels"));
        assert_eq!(
            sin_label_map_new(labels.as_ptr(), 2, 2, ptr::null_mut()),
            SinStatus::NullPointer
        );

        let missing = CString::new("/nonexistent/sinterp/map.sinl").unwrap();
        assert_eq!(
            sin_label_map_load(missing.as_ptr(), &mut map),
            SinStatus::Io
        );

        let (mut r, mut c) = (0, 0);
        assert_eq!(
            sin_init_dims(33, 33, 12, &mut r, &mut c),
            SinStatus::InvalidArgument
        );
        assert_eq!(sin_init_dims(33, 17, 16, &mut r, &mut c), SinStatus::Ok);
        assert_eq!((r, c), (3, 2));

        let pixels = gradient_pixels(17, 17);
        let mut image = ptr::null_mut();
        assert_eq!(
            sin_image_from_rgb8(pixels.as_ptr(), 17, 17, &mut image),
            SinStatus::Ok
        );
        let bad = SinSegmentOptions {
            method: 7,
            ..default_options()
        };
        assert_eq!(
            sin_segment(image, &bad, &mut map),
            SinStatus::InvalidArgument
        );
        assert!(last_error().contains("method"));
        sin_image_free(image);

        sin_image_free(ptr::null_mut());
        sin_label_map_free(ptr::null_mut());
    }
}

#[test]
fn label_map_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("sinterp-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = CString::new(dir.join("m.csv").to_str().unwrap()).unwrap();
    let labels = [0u32, 1, 2, 3, 4, 5];
    let (mut map, mut back) = (ptr::null_mut(), ptr::null_mut());
    let mut buf = [0u32; 6];
    unsafe {
        assert_eq!(
            sin_label_map_new(labels.as_ptr(), 2, 3, &mut map),
            SinStatus::Ok
        );
        assert_eq!(sin_label_map_save(map, path.as_ptr()), SinStatus::Ok);
        assert_eq!(sin_label_map_load(path.as_ptr(), &mut back), SinStatus::Ok);
        assert_eq!(sin_label_map_copy(back, buf.as_mut_ptr(), 6), SinStatus::Ok);
        sin_label_map_free(map);
        sin_label_map_free(back);
    }
    assert_eq!(buf, labels);
    std::fs::remove_dir_all(dir).unwrap();
}
