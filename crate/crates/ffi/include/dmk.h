/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef DMK_H
#define DMK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum DmkStatus {
  DMK_STATUS_OK = 0,
  // A required pointer argument was null.
  DMK_STATUS_NULL_POINTER = 1,
  // An argument was out of range or inconsistent with another.
  DMK_STATUS_INVALID_ARGUMENT = 2,
  // Input text (label JSON, WKT, manifest CSV) could not be parsed.
  DMK_STATUS_PARSE = 3,
  // A file could not be read.
  DMK_STATUS_IO = 4,
  // A Rust panic was caught; the library state is unaffected.
  DMK_STATUS_PANIC = 99,
} DmkStatus;

// Pixel confusion matrix indexed `[ground truth][prediction]`.
typedef struct DmkConfusion DmkConfusion;

// Scene annotation: size plus building footprints and damage labels.
typedef struct DmkLabel DmkLabel;

// Class mask, values 0-4.
typedef struct DmkMask DmkMask;

// Train/validation scene ids.
typedef struct DmkSplit DmkSplit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next `dmk_*` call on the same thread.
const char *dmk_last_error(void);

// Library version, e.g. `"0.1.0"`. Static storage.
const char *dmk_version(void);

// Releases a string returned by the library.
//
// # Safety
// `s` must come from a `dmk_*` call that documents it as caller-owned, or be null.
void dmk_string_free(char *s);

// Parses xBD-style label JSON.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum DmkStatus dmk_label_parse(const char *json, struct DmkLabel **out);

// Serializes a label back to JSON. Free the result with `dmk_string_free`.
//
// # Safety
// `label` must be a live handle; `out` must be writable.
enum DmkStatus dmk_label_to_json(const struct DmkLabel *label, char **out);

// Number of buildings, or 0 for a null handle.
//
// # Safety
// `label` must be a live handle or null.
size_t dmk_label_building_count(const struct DmkLabel *label);

// Damage ordinal (0 no damage … 3 destroyed) of building `index`, or -1 when unassessed.
//
// # Safety
// `label` must be a live handle; `out` must be writable.
enum DmkStatus dmk_label_building_class(const struct DmkLabel *label, size_t index, int32_t *out);

// # Safety
// `label` must come from this library and not be used afterwards, or be null.
void dmk_label_free(struct DmkLabel *label);

// Copies `width * height` class values into a new mask.
//
// # Safety
// `data` must point to `width * height` bytes; `out` must be writable.
enum DmkStatus dmk_mask_new(uint32_t width,
                            uint32_t height,
                            const uint8_t *data,
                            struct DmkMask **out);

// # Safety
// `mask` must be a live handle or null.
uint32_t dmk_mask_width(const struct DmkMask *mask);

// # Safety
// `mask` must be a live handle or null.
uint32_t dmk_mask_height(const struct DmkMask *mask);

// Row-major class values, owned by the mask.
//
// # Safety
// `mask` must be a live handle or null; the pointer dies with the mask.
const uint8_t *dmk_mask_data(const struct DmkMask *mask);

// # Safety
// `mask` must come from this library and not be used afterwards, or be null.
void dmk_mask_free(struct DmkMask *mask);

// Paints each building with its damage class (1-4) at pixel centers, last building wins.
//
// # Safety
// `label` must be a live handle; `out` must be writable.
enum DmkStatus dmk_rasterize(const struct DmkLabel *label, struct DmkMask **out);

// Traces 8-connected components of at least `min_area` pixels into a label,
// one building per component with its majority class.
//
// # Safety
// `mask` must be a live handle; `out` must be writable.
enum DmkStatus dmk_polygonize(const struct DmkMask *mask, size_t min_area, struct DmkLabel **out);

// Mean SSIM (Gaussian window 11, sigma 1.5, data range 255) of two images.
//
// # Safety
// `a` and `b` must each point to `width * height * channels` doubles; `out` must be writable.
enum DmkStatus dmk_ssim(const double *a,
                        const double *b,
                        uint32_t width,
                        uint32_t height,
                        uint8_t channels,
                        double *out);

// `0.3 * seg_f1 + 0.7 * cls_f1`; both inputs must lie in [0, 1].
//
// # Safety
// `out` must be writable.
enum DmkStatus dmk_combined_score(double seg_f1, double cls_f1, double *out);

// Empty `k`-class matrix (5 for damage masks).
//
// # Safety
// `out` must be writable.
enum DmkStatus dmk_confusion_new(size_t k, struct DmkConfusion **out);

// Adds every pixel of a prediction/ground-truth pair.
//
// # Safety
// All handles must be live.
enum DmkStatus dmk_confusion_accumulate(struct DmkConfusion *cm,
                                        const struct DmkMask *pred,
                                        const struct DmkMask *gt);

// Adds `other` into `cm`; both must have the same class count.
//
// # Safety
// Both handles must be live.
enum DmkStatus dmk_confusion_merge(struct DmkConfusion *cm, const struct DmkConfusion *other);

// Count of pixels with ground truth `gt` predicted as `pred`.
//
// # Safety
// `cm` must be a live handle; `out` must be writable.
enum DmkStatus dmk_confusion_get(const struct DmkConfusion *cm,
                                 size_t gt,
                                 size_t pred,
                                 uint64_t *out);

// Mean IoU over classes present in ground truth or prediction.
//
// # Safety
// `cm` must be a live handle; `out` must be writable.
enum DmkStatus dmk_confusion_miou(const struct DmkConfusion *cm, double *out);

// Ground-truth-support-weighted mean F1 over all classes.
//
// # Safety
// `cm` must be a live handle; `out` must be writable.
enum DmkStatus dmk_confusion_weighted_f1(const struct DmkConfusion *cm, double *out);

// # Safety
// `cm` must come from this library and not be used afterwards, or be null.
void dmk_confusion_free(struct DmkConfusion *cm);

// Seeded per-disaster split of a manifest CSV file (`scene_id,disaster,pre_image,post_image,label`).
//
// # Safety
// `manifest_path` must be a NUL-terminated path; `out` must be writable.
enum DmkStatus dmk_split(const char *manifest_path,
                         double val_fraction,
                         uint64_t seed,
                         struct DmkSplit **out);

// # Safety
// `split` must be a live handle or null.
size_t dmk_split_train_count(const struct DmkSplit *split);

// # Safety
// `split` must be a live handle or null.
size_t dmk_split_val_count(const struct DmkSplit *split);

// Training scene id `index` in sorted order, owned by the split; null when out of range.
//
// # Safety
// `split` must be a live handle or null; the pointer dies with the split.
const char *dmk_split_train_id(const struct DmkSplit *split, size_t index);

// Validation scene id `index` in sorted order, owned by the split; null when out of range.
//
// # Safety
// `split` must be a live handle or null; the pointer dies with the split.
const char *dmk_split_val_id(const struct DmkSplit *split, size_t index);

// # Safety
// `split` must come from this library and not be used afterwards, or be null.
void dmk_split_free(struct DmkSplit *split);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DMK_H */
