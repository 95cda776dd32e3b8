#ifndef SINTERP_H
#define SINTERP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define SIN_METHOD_SIN 0

#define SIN_METHOD_SLIC 1

#define SIN_COLOR_SPACE_RGB 0

#define SIN_COLOR_SPACE_LAB 1

typedef enum SinStatus {
  SIN_STATUS_OK = 0,
  SIN_STATUS_NULL_POINTER = 1,
  SIN_STATUS_INVALID_ARGUMENT = 2,
  SIN_STATUS_INVALID_SIZE = 3,
  SIN_STATUS_SHAPE_MISMATCH = 4,
  SIN_STATUS_IO = 5,
  SIN_STATUS_DECODE = 6,
  SIN_STATUS_CONFIG = 7,
  SIN_STATUS_PANIC = 8,
} SinStatus;

/**
 * RGB image with channel values in [0, 1].
 */
typedef struct SinImage SinImage;

typedef struct SinLabelMap SinLabelMap;

/**
 * Segmentation settings. Fill with [`sin_segment_options_default`] first.
 */
typedef struct SinSegmentOptions {
  /**
   * `SIN_METHOD_SIN` or `SIN_METHOD_SLIC`.
   */
  uint32_t method;
  size_t seed_step;
  /**
   * Seed grid; used when both are nonzero.
   */
  size_t target_rows;
  size_t target_cols;
  /**
   * Total superpixel count; used when nonzero and no grid is given.
   */
  size_t target_count;
  double tau;
  /**
   * `SIN_COLOR_SPACE_RGB` or `SIN_COLOR_SPACE_LAB`.
   */
  uint32_t color_space;
  double slic_compactness;
  size_t slic_iterations;
  /**
   * Worker threads, 0 for one per core.
   */
  size_t threads;
} SinSegmentOptions;

typedef struct SinMetrics {
  double asa;
  double br;
  double bp;
  double co;
  size_t n_superpixels;
} SinMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *sin_last_error_message(void);

/**
 * Copies interleaved 8-bit RGB pixels (`height * width * 3` bytes).
 *
 * # Safety
 * `data` must point to `height * width * 3` readable bytes; `out` must be
 * writable.
 */
enum SinStatus sin_image_from_rgb8(const uint8_t *data,
                                   size_t height,
                                   size_t width,
                                   struct SinImage **out);

/**
 * Decodes a PPM (P6) or PNG file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SinStatus sin_image_load(const char *path, struct SinImage **out);

/**
 * # Safety
 * `image` must come from this library; the out pointers must be writable.
 */
enum SinStatus sin_image_dims(const struct SinImage *image, size_t *height, size_t *width);

/**
 * # Safety
 * `image` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void sin_image_free(struct SinImage *image);

/**
 * # Safety
 * `out` must be writable.
 */
enum SinStatus sin_segment_options_default(struct SinSegmentOptions *out);

/**
 * Segments `image` with the color-affinity scorer (or SLIC, per
 * `options.method`). The label map has the image's size.
 *
 * # Safety
 * `image` and `options` must be valid; `out` must be writable.
 */
enum SinStatus sin_segment(const struct SinImage *image,
                           const struct SinSegmentOptions *options,
                           struct SinLabelMap **out);

/**
 * Segments with scores read off a ground-truth map of the image's size.
 *
 * # Safety
 * All pointers must be valid; `out` must be writable.
 */
enum SinStatus sin_segment_gt(const struct SinImage *image,
                              const struct SinLabelMap *truth,
                              const struct SinSegmentOptions *options,
                              struct SinLabelMap **out);

/**
 * Copies `height * width` row-major labels.
 *
 * # Safety
 * `labels` must point to `height * width` readable values; `out` must be
 * writable.
 */
enum SinStatus sin_label_map_new(const uint32_t *labels,
                                 size_t height,
                                 size_t width,
                                 struct SinLabelMap **out);

/**
 * Reads a binary, CSV or 16-bit PGM label map.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SinStatus sin_label_map_load(const char *path, struct SinLabelMap **out);

/**
 * Writes a label map; the format follows the extension (`.csv`, `.pgm`,
 * otherwise binary).
 *
 * # Safety
 * `map` must be valid; `path` must be a NUL-terminated string.
 */
enum SinStatus sin_label_map_save(const struct SinLabelMap *map, const char *path);

/**
 * # Safety
 * `map` must be valid; the out pointers must be writable.
 */
enum SinStatus sin_label_map_dims(const struct SinLabelMap *map, size_t *height, size_t *width);

/**
 * Number of distinct labels.
 *
 * # Safety
 * `map` must be valid; `count` must be writable.
 */
enum SinStatus sin_label_map_count(const struct SinLabelMap *map, size_t *count);

/**
 * Copies the labels row-major into `buffer`, which holds `len` values.
 *
 * # Safety
 * `map` must be valid; `buffer` must have room for `len` values.
 */
enum SinStatus sin_label_map_copy(const struct SinLabelMap *map, uint32_t *buffer, size_t len);

/**
 * # Safety
 * `map` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void sin_label_map_free(struct SinLabelMap *map);

/**
 * Sets `connected` when every label forms one 4-connected region.
 *
 * # Safety
 * `map` must be valid; `connected` must be writable.
 */
enum SinStatus sin_check_connectivity(const struct SinLabelMap *map, bool *connected);

/**
 * ASA, boundary recall/precision and compactness against ground truth.
 *
 * # Safety
 * Both maps must be valid; `out` must be writable.
 */
enum SinStatus sin_evaluate(const struct SinLabelMap *superpixels,
                            const struct SinLabelMap *truth,
                            struct SinMetrics *out);

/**
 * Seed grid dimensions: one seed every `seed_step` pixels, rounded up.
 *
 * # Safety
 * The out pointers must be writable.
 */
enum SinStatus sin_init_dims(size_t height,
                             size_t width,
                             size_t seed_step,
                             size_t *seed_rows,
                             size_t *seed_cols);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SINTERP_H */
