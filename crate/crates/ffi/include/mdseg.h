#ifndef MDSEG_H
#define MDSEG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Values accepted by [`mdseg_config_set_init`].
 */
typedef enum {
  MDSEG_INIT_RANDOM = 0,
  MDSEG_INIT_THRESHOLD = 1,
} MdsegInit;

/**
 * Values accepted by [`mdseg_segment`].
 */
typedef enum {
  MDSEG_MODE_FULL = 0,
  MDSEG_MODE_PATCH = 1,
  MDSEG_MODE_TOGETHER = 2,
} MdsegMode;

/**
 * Values accepted by [`mdseg_config_set_netgain`].
 */
typedef enum {
  MDSEG_NETGAIN_EXACT = 0,
  MDSEG_NETGAIN_ASYMPTOTIC = 1,
} MdsegNetgain;

/**
 * Values accepted by [`mdseg_synth`].
 */
typedef enum {
  MDSEG_SHAPE_CIRCLE = 0,
  MDSEG_SHAPE_SQUARE = 1,
  MDSEG_SHAPE_TRIANGLE = 2,
  MDSEG_SHAPE_STAR = 3,
  MDSEG_SHAPE_QR = 4,
} MdsegShape;

/**
 * Result code of every fallible call.
 */
typedef enum {
  MDSEG_STATUS_OK = 0,
  MDSEG_STATUS_NULL_POINTER = 1,
  MDSEG_STATUS_INVALID_ARGUMENT = 2,
  MDSEG_STATUS_INVALID_IMAGE = 3,
  MDSEG_STATUS_INVALID_CONFIG = 4,
  MDSEG_STATUS_EMPTY_SIDE = 5,
  MDSEG_STATUS_NON_CONVERGENCE = 6,
  MDSEG_STATUS_IO = 7,
  MDSEG_STATUS_FORMAT = 8,
  MDSEG_STATUS_UNDEFINED_DICE = 9,
  MDSEG_STATUS_BUFFER_SIZE = 10,
  MDSEG_STATUS_PANIC = 11,
} MdsegStatus;

/**
 * Values accepted by [`mdseg_config_set_tset`].
 */
typedef enum {
  MDSEG_TSET_STRICT = 0,
  MDSEG_TSET_SORTED = 1,
} MdsegTset;

typedef struct MdsegConfig MdsegConfig;

typedef struct MdsegImage MdsegImage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *mdseg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mdseg_version(void);

/**
 * Copies `width * height` row-major values into a new image.
 *
 * # Safety
 * `values` must point to `width * height` readable doubles; `out` must be
 * writable.
 */
MdsegStatus mdseg_image_new(uintptr_t width,
                            uintptr_t height,
                            const double *values,
                            MdsegImage **out);

/**
 * Reads a `.pgm`, `.ascii.pgm` or `.f64` image.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
MdsegStatus mdseg_image_read(const char *path, MdsegImage **out);

/**
 * Writes an image; the format follows the file extension.
 *
 * # Safety
 * `img` must be a live handle and `path` a NUL-terminated string.
 */
MdsegStatus mdseg_image_write(const MdsegImage *img, const char *path);

/**
 * # Safety
 * `img` must be null or a live handle.
 */
uintptr_t mdseg_image_width(const MdsegImage *img);

/**
 * # Safety
 * `img` must be null or a live handle.
 */
uintptr_t mdseg_image_height(const MdsegImage *img);

/**
 * Copies the pixel values into `out`, which must hold exactly
 * `width * height` doubles.
 *
 * # Safety
 * `img` must be a live handle and `out` must point to `len` writable doubles.
 */
MdsegStatus mdseg_image_values(const MdsegImage *img, double *out, uintptr_t len);

/**
 * # Safety
 * `img` must be null or a handle not yet freed.
 */
void mdseg_image_free(MdsegImage *img);

/**
 * New configuration with default settings. Never null.
 */
MdsegConfig *mdseg_config_new(void);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void mdseg_config_free(MdsegConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
MdsegStatus mdseg_config_set_targets(MdsegConfig *cfg, double p1, double p2);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
MdsegStatus mdseg_config_set_patch(MdsegConfig *cfg, uintptr_t patch_len, uintptr_t stride);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
MdsegStatus mdseg_config_set_vote_threshold(MdsegConfig *cfg, double threshold);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
MdsegStatus mdseg_config_set_median_window(MdsegConfig *cfg, uintptr_t window);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
MdsegStatus mdseg_config_set_seed(MdsegConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
MdsegStatus mdseg_config_set_max_sweeps(MdsegConfig *cfg, uintptr_t max_sweeps);

/**
 * `mode` is an [`MdsegNetgain`] value.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
MdsegStatus mdseg_config_set_netgain(MdsegConfig *cfg, uint32_t mode);

/**
 * `mode` is an [`MdsegTset`] value.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
MdsegStatus mdseg_config_set_tset(MdsegConfig *cfg, uint32_t mode);

/**
 * `mode` is an [`MdsegInit`] value.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
MdsegStatus mdseg_config_set_init(MdsegConfig *cfg, uint32_t mode);

/**
 * Segments `img` and writes the foreground mask into `mask_out`.
 *
 * # Safety
 * Handles must be live; `mask_out` must point to `len` writable bytes.
 */
MdsegStatus mdseg_segment(const MdsegImage *img,
                          const MdsegConfig *cfg,
                          uint32_t mode,
                          uint8_t *mask_out,
                          uintptr_t len);

/**
 * Distance of the partition whose side one is the nonzero entries of
 * `labels`.
 *
 * # Safety
 * Handles must be live; `labels` must point to `len` readable bytes and
 * `out` must be writable.
 */
MdsegStatus mdseg_distance(const MdsegImage *img,
                           const MdsegConfig *cfg,
                           const uint8_t *labels,
                           uintptr_t len,
                           double *out);

/**
 * Dice coefficient of two masks of `len` bytes.
 *
 * # Safety
 * `a` and `b` must point to `len` readable bytes; `out` must be writable.
 */
MdsegStatus mdseg_dsc(const uint8_t *a, const uint8_t *b, uintptr_t len, double *out);

/**
 * Synthetic shape with Gaussian noise. `truth_out` may be null; otherwise
 * it receives the `width * height` byte truth mask.
 *
 * # Safety
 * `out` must be writable; `truth_out`, when non-null, must point to
 * `truth_len` writable bytes.
 */
MdsegStatus mdseg_synth(uint32_t shape,
                        uintptr_t width,
                        uintptr_t height,
                        double sigma,
                        uint64_t seed,
                        MdsegImage **out,
                        uint8_t *truth_out,
                        uintptr_t truth_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDSEG_H */
