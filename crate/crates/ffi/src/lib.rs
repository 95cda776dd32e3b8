//! C ABI over the `sinterp` crate.
//!
//! Objects cross the boundary as opaque pointers owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`SinStatus`]; on failure [`sin_last_error_message`] describes what went
//! wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use sinterp::config::{with_threads, Method, SuperpixelTarget};
use sinterp::grid::init_dims;
use sinterp::io::{load_image, load_label_map, save_label_map, LabelFormat};
use sinterp::metrics::evaluate;
use sinterp::scoring::{ColorAffinityParams, ColorSpace, DEFAULT_TEMPERATURE};
use sinterp::{
    check_connectivity, segment, Error, GroundTruth, ImageGrid, LabelMap, ScorerChoice,
    SegmentOptions,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidSize = 3,
    ShapeMismatch = 4,
    Io = 5,
    Decode = 6,
    Config = 7,
    Panic = 8,
}

pub const SIN_METHOD_SIN: u32 = 0;
pub const SIN_METHOD_SLIC: u32 = 1;
pub const SIN_COLOR_SPACE_RGB: u32 = 0;
pub const SIN_COLOR_SPACE_LAB: u32 = 1;

/// RGB image with channel values in [0, 1].
pub struct SinImage(ImageGrid);

pub struct SinLabelMap(LabelMap);

/// Segmentation settings. Fill with [`sin_segment_options_default`] first.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SinSegmentOptions {
    /// `SIN_METHOD_SIN` or `SIN_METHOD_SLIC`.
    pub method: u32,
    pub seed_step: usize,
    /// Seed grid; used when both are nonzero.
    pub target_rows: usize,
    pub target_cols: usize,
    /// Total superpixel count; used when nonzero and no grid is given.
    pub target_count: usize,
    pub tau: f64,
    /// `SIN_COLOR_SPACE_RGB` or `SIN_COLOR_SPACE_LAB`.
    pub color_space: u32,
    pub slic_compactness: f64,
    pub slic_iterations: usize,
    /// Worker threads, 0 for one per core.
    pub threads: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SinMetrics {
    pub asa: f64,
    pub br: f64,
    pub bp: f64,
    pub co: f64,
    pub n_superpixels: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SinStatus {
    match err {
        Error::InvalidArgument(_) => SinStatus::InvalidArgument,
        Error::ShapeMismatch { .. } => SinStatus::ShapeMismatch,
        Error::InvalidSize { .. } => SinStatus::InvalidSize,
        Error::Decode { .. } => SinStatus::Decode,
        Error::Config { .. } => SinStatus::Config,
        Error::Io { .. } => SinStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SinStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            SinStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SinStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sin_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies interleaved 8-bit RGB pixels (`height * width * 3` bytes).
///
/// # Safety
/// `data` must point to `height * width * 3` readable bytes; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sin_image_from_rgb8(
    data: *const u8,
    height: usize,
    width: usize,
    out: *mut *mut SinImage,
) -> SinStatus {
    guard(|| {
        if data.is_null() {
            return Err(Failure::Null("data"));
        }
        let len = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(3))
            .ok_or_else(|| Error::invalid("image size overflows"))?;
        let bytes = std::slice::from_raw_parts(data, len);
        let grid = ImageGrid::new(
            height,
            width,
            3,
            bytes.iter().map(|b| *b as f32 / 255.0).collect(),
        )?;
        write_out(out, SinImage(grid))
    })
}

/// Decodes a PPM (P6) or PNG file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_image_load(path: *const c_char, out: *mut *mut SinImage) -> SinStatus {
    guard(|| {
        let image = load_image(path_arg(path)?)?;
        write_out(out, SinImage(image))
    })
}

/// # Safety
/// `image` must come from this library; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_image_dims(
    image: *const SinImage,
    height: *mut usize,
    width: *mut usize,
) -> SinStatus {
    guard(|| {
        let image = deref(image, "image")?;
        if height.is_null() || width.is_null() {
            return Err(Failure::Null("out"));
        }
        (*height, *width) = image.0.dims();
        Ok(())
    })
}

/// # Safety
/// `image` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn sin_image_free(image: *mut SinImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_segment_options_default(out: *mut SinSegmentOptions) -> SinStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let d = SegmentOptions::default();
        *out = SinSegmentOptions {
            method: SIN_METHOD_SIN,
            seed_step: d.seed_step,
            target_rows: 0,
            target_cols: 0,
            target_count: 0,
            tau: DEFAULT_TEMPERATURE,
            color_space: SIN_COLOR_SPACE_RGB,
            slic_compactness: d.slic_compactness,
            slic_iterations: d.slic_iterations,
            threads: 0,
        };
        Ok(())
    })
}

fn convert_options(o: &SinSegmentOptions) -> Result<(SegmentOptions, Option<usize>), Error> {
    let method = match o.method {
        SIN_METHOD_SIN => Method::Sin,
        SIN_METHOD_SLIC => Method::Slic,
        m => return Err(Error::invalid(format!("unknown method {m}"))),
    };
    let color_space = match o.color_space {
        SIN_COLOR_SPACE_RGB => ColorSpace::Rgb,
        SIN_COLOR_SPACE_LAB => ColorSpace::Lab,
        c => return Err(Error::invalid(format!("unknown color space {c}"))),
    };
    let target = match (o.target_rows, o.target_cols, o.target_count) {
        (r, c, _) if r > 0 && c > 0 => Some(SuperpixelTarget::Grid(r, c)),
        (_, _, n) if n > 0 => Some(SuperpixelTarget::Count(n)),
        _ => None,
    };
    let options = SegmentOptions {
        method,
        seed_step: o.seed_step,
        target,
        color: ColorAffinityParams {
            temperature: o.tau,
            color_space,
        },
        slic_compactness: o.slic_compactness,
        slic_iterations: o.slic_iterations,
    };
    Ok((options, (o.threads > 0).then_some(o.threads)))
}

/// Segments `image` with the color-affinity scorer (or SLIC, per
/// `options.method`). The label map has the image's size.
///
/// # Safety
/// `image` and `options` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_segment(
    image: *const SinImage,
    options: *const SinSegmentOptions,
    out: *mut *mut SinLabelMap,
) -> SinStatus {
    guard(|| {
        let image = deref(image, "image")?;
        let (opts, threads) = convert_options(deref(options, "options")?)?;
        let seg = with_threads(threads, || segment(&image.0, ScorerChoice::Color, &opts))??;
        write_out(out, SinLabelMap(seg.labels))
    })
}

/// Segments with scores read off a ground-truth map of the image's size.
///
/// # Safety
/// All pointers must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_segment_gt(
    image: *const SinImage,
    truth: *const SinLabelMap,
    options: *const SinSegmentOptions,
    out: *mut *mut SinLabelMap,
) -> SinStatus {
    guard(|| {
        let image = deref(image, "image")?;
        let truth = GroundTruth::new(deref(truth, "truth")?.0.clone());
        let (opts, threads) = convert_options(deref(options, "options")?)?;
        let seg = with_threads(threads, || {
            segment(&image.0, ScorerChoice::Gt(&truth), &opts)
        })??;
        write_out(out, SinLabelMap(seg.labels))
    })
}

/// Copies `height * width` row-major labels.
///
/// # Safety
/// `labels` must point to `height * width` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sin_label_map_new(
    labels: *const u32,
    height: usize,
    width: usize,
    out: *mut *mut SinLabelMap,
) -> SinStatus {
    guard(|| {
        if labels.is_null() {
            return Err(Failure::Null("labels"));
        }
        let len = height
            .checked_mul(width)
            .ok_or_else(|| Error::invalid("label map size overflows"))?;
        let data = std::slice::from_raw_parts(labels, len).to_vec();
        write_out(out, SinLabelMap(LabelMap::new(height, width, data)?))
    })
}

/// Reads a binary, CSV or 16-bit PGM label map.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_label_map_load(
    path: *const c_char,
    out: *mut *mut SinLabelMap,
) -> SinStatus {
    guard(|| {
        let map = load_label_map(path_arg(path)?)?;
        write_out(out, SinLabelMap(map))
    })
}

/// Writes a label map; the format follows the extension (`.csv`, `.pgm`,
/// otherwise binary).
///
/// # Safety
/// `map` must be valid; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sin_label_map_save(
    map: *const SinLabelMap,
    path: *const c_char,
) -> SinStatus {
    guard(|| {
        let map = deref(map, "map")?;
        let path = path_arg(path)?;
        let format = LabelFormat::from_path(&path);
        save_label_map(&map.0, &path, format)?;
        Ok(())
    })
}

/// # Safety
/// `map` must be valid; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_label_map_dims(
    map: *const SinLabelMap,
    height: *mut usize,
    width: *mut usize,
) -> SinStatus {
    guard(|| {
        let map = deref(map, "map")?;
        if height.is_null() || width.is_null() {
            return Err(Failure::Null("out"));
        }
        (*height, *width) = map.0.dims();
        Ok(())
    })
}

/// Number of distinct labels.
///
/// # Safety
/// `map` must be valid; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_label_map_count(
    map: *const SinLabelMap,
    count: *mut usize,
) -> SinStatus {
    guard(|| {
        let map = deref(map, "map")?;
        if count.is_null() {
            return Err(Failure::Null("count"));
        }
        *count = map.0.distinct_count();
        Ok(())
    })
}

/// Copies the labels row-major into `buffer`, which holds `len` values.
///
/// # Safety
/// `map` must be valid; `buffer` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn sin_label_map_copy(
    map: *const SinLabelMap,
    buffer: *mut u32,
    len: usize,
) -> SinStatus {
    guard(|| {
        let map = deref(map, "map")?;
        if buffer.is_null() {
            return Err(Failure::Null("buffer"));
        }
        if len < map.0.len() {
            return Err(
                Error::invalid(format!("buffer holds {len} labels, need {}", map.0.len())).into(),
            );
        }
        ptr::copy_nonoverlapping(map.0.labels().as_ptr(), buffer, map.0.len());
        Ok(())
    })
}

/// # Safety
/// `map` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn sin_label_map_free(map: *mut SinLabelMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Sets `connected` when every label forms one 4-connected region.
///
/// # Safety
/// `map` must be valid; `connected` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_check_connectivity(
    map: *const SinLabelMap,
    connected: *mut bool,
) -> SinStatus {
    guard(|| {
        let map = deref(map, "map")?;
        if connected.is_null() {
            return Err(Failure::Null("connected"));
        }
        *connected = check_connectivity(&map.0).connected;
        Ok(())
    })
}

/// ASA, boundary recall/precision and compactness against ground truth.
///
/// # Safety
/// Both maps must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_evaluate(
    superpixels: *const SinLabelMap,
    truth: *const SinLabelMap,
    out: *mut SinMetrics,
) -> SinStatus {
    guard(|| {
        let sp = deref(superpixels, "superpixels")?;
        let gt = deref(truth, "truth")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let r = evaluate(&sp.0, &gt.0)?;
        *out = SinMetrics {
            asa: r.asa,
            br: r.br,
            bp: r.bp,
            co: r.co,
            n_superpixels: r.n_superpixels,
        };
        Ok(())
    })
}

/// Seed grid dimensions: one seed every `seed_step` pixels, rounded up.
///
/// # Safety
/// The out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sin_init_dims(
    height: usize,
    width: usize,
    seed_step: usize,
    seed_rows: *mut usize,
    seed_cols: *mut usize,
) -> SinStatus {
    guard(|| {
        if seed_rows.is_null() || seed_cols.is_null() {
            return Err(Failure::Null("out"));
        }
        (*seed_rows, *seed_cols) = init_dims(height, width, seed_step)?;
        Ok(())
    })
}
