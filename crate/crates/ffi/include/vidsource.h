#ifndef VIDSOURCE_H
#define VIDSOURCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

enum VsStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  VS_STATUS_OK = 0,
  VS_STATUS_NULL_POINTER = 1,
  VS_STATUS_INVALID_INPUT = 2,
  VS_STATUS_INVALID_PARAMETER = 3,
  VS_STATUS_FORMAT = 4,
  VS_STATUS_IO = 5,
  VS_STATUS_SCHEMA_MISMATCH = 6,
  VS_STATUS_BUFFER_TOO_SMALL = 7,
  VS_STATUS_INTERNAL = 8,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum VsStatus VsStatus;
#else
typedef int32_t VsStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * A loaded model. Create with [`vs_model_load`], release with
 * [`vs_model_free`].
 */
typedef struct VsModel VsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *vs_last_error_message(void);

/**
 * Length of the full feature vector (88).
 */
size_t vs_feature_count(void);

/**
 * Canonical name of feature `i`, or null when out of range. The string is
 * static.
 */
const char *vs_feature_name(size_t i);

/**
 * Extracts the feature vector of an interleaved 8-bit RGB frame using the
 * default distortion parameters. `out` must hold `vs_feature_count()`
 * doubles.
 *
 * # Safety
 * `rgb` must point to `width * height * 3` readable bytes and `out` to
 * `out_len` writable doubles.
 */
VsStatus vs_extract_features(const uint8_t *rgb,
                             size_t width,
                             size_t height,
                             uint64_t seed,
                             double *out,
                             size_t out_len);

/**
 * Loads a model file written by the `train` command.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
VsStatus vs_model_load(const char *path, struct VsModel **out);

/**
 * Parses a model from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
VsStatus vs_model_from_json(const char *json, struct VsModel **out);

/**
 * Releases a model; null is ignored.
 *
 * # Safety
 * `model` must come from a load function and not be used afterwards.
 */
void vs_model_free(struct VsModel *model);

/**
 * Number of classes the model distinguishes, 0 for null.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t vs_model_class_count(const struct VsModel *model);

/**
 * Name of class `i`, or null when out of range. Valid while the model is.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
const char *vs_model_class_name(const struct VsModel *model, size_t i);

/**
 * Predicts the class index of one frame from its full feature vector in
 * canonical order; the model picks out its own subset by name.
 *
 * # Safety
 * `model` must be a live handle, `features` must point to `len` doubles
 * and `class_index` must be writable.
 */
VsStatus vs_model_predict(const struct VsModel *model,
                          const double *features,
                          size_t len,
                          size_t *class_index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VIDSOURCE_H */
