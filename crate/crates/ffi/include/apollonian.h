#ifndef APOLLONIAN_H
#define APOLLONIAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a call.
typedef enum ApStatus {
  AP_STATUS_OK = 0,
  AP_STATUS_NULL_POINTER = 1,
  AP_STATUS_INVALID_ARGUMENT = 2,
  AP_STATUS_CONFIG = 3,
  AP_STATUS_MATH = 4,
  AP_STATUS_IO = 5,
  AP_STATUS_PANIC = 6,
} ApStatus;

// Opaque packing store.
typedef struct ApStore ApStore;

// Inversive coordinates of one circle: curvature, co-curvature and
// curvature times the center.
typedef struct ApCircle {
  double curvature;
  double cocurvature;
  double bx;
  double by;
} ApCircle;

// Power-law fit `N ~ C x^exponent`.
typedef struct ApFit {
  double exponent;
  double stderr;
  double log_constant;
  double x_lo;
  double x_hi;
  size_t n_points;
} ApFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ap_version(void);

// Copies the last error message of this thread into `buf` (truncated,
// always NUL-terminated when `len > 0`) and returns its full length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t ap_last_error(char *buf, size_t len);

// Generates the packing named `packing` (`bounded`, `strip`,
// `curvatures:b1,b2,b3,b4`, `sphere`, ...) up to curvature `max_curvature`.
//
// # Safety
// `packing` must be a NUL-terminated string; `out` must be writable.
enum ApStatus ap_store_generate(const char *packing,
                                bool exact,
                                double max_curvature,
                                struct ApStore **out_store);

// Reads a packing cache file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum ApStatus ap_store_load(const char *path, struct ApStore **out_store);

// Writes a packing cache file.
//
// # Safety
// `s` must be a live store handle; `path` a NUL-terminated string.
enum ApStatus ap_store_save(const struct ApStore *s, const char *path);

// Releases a store; null is ignored.
//
// # Safety
// `s` must be null or a handle not yet freed.
void ap_store_free(struct ApStore *s);

// Number of records in the store.
//
// # Safety
// `s` must be a live store handle; `out_len` writable.
enum ApStatus ap_store_len(const struct ApStore *s, size_t *out_len);

// Record `index` of a circle store in canonical order.
//
// # Safety
// `s` must be a live store handle; `out_circle` writable.
enum ApStatus ap_store_circle(const struct ApStore *s, size_t index, struct ApCircle *out_circle);

// `N_t`: circles of `f`-volume above `t` meeting `region`. Sets
// `out_exact` to whether `t` lies in the store's validity window.
//
// # Safety
// `s` must be a live store handle; strings NUL-terminated; outputs writable.
enum ApStatus ap_store_count(const struct ApStore *s,
                             const char *metric,
                             const char *region,
                             double t,
                             uint64_t *out_count,
                             bool *out_exact);

// Growth exponent of `#{b <= x}` over `[x_lo, x_hi]`.
//
// # Safety
// `s` must be a live store handle; `out_fit` writable.
enum ApStatus ap_store_fit_curvature_growth(const struct ApStore *s,
                                            double x_lo,
                                            double x_hi,
                                            uint32_t per_decade,
                                            struct ApFit *out_fit);

// Covering-sum dimension of the residual set in `region` from refinement
// levels `level_lo..=level_hi`.
//
// # Safety
// Strings must be NUL-terminated; `out_dimension` writable.
enum ApStatus ap_dimension_estimate(const char *packing,
                                    const char *region,
                                    uint32_t level_lo,
                                    uint32_t level_hi,
                                    double *out_dimension);

// Partial Poincaré sum over reduced words of length at most `length`.
//
// # Safety
// `packing` must be NUL-terminated; `out_sum` writable.
enum ApStatus ap_poincare_partial(const char *packing, double s, uint32_t length, double *out_sum);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APOLLONIAN_H */
