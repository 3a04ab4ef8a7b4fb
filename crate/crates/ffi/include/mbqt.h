#ifndef MBQT_H
#define MBQT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MbqtStatus {
  MBQT_STATUS_OK = 0,
  MBQT_STATUS_NULL_POINTER = 1,
  MBQT_STATUS_INVALID_ARGUMENT = 2,
  MBQT_STATUS_INVALID_SPEC = 3,
  MBQT_STATUS_TOO_LARGE = 4,
  MBQT_STATUS_NUMERICAL = 5,
  MBQT_STATUS_UNSUPPORTED = 6,
  MBQT_STATUS_PANIC = 7,
} MbqtStatus;

/**
 * Opaque MPS handle.
 */
typedef struct MbqtMps MbqtMps;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call on the same thread.
 */
const char *mbqt_last_error(void);

/**
 * Cluster state on `n` qubits.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MbqtStatus mbqt_cluster_new(size_t n, struct MbqtMps **out);

/**
 * Theta family with per-site angles. `left` and `right` hold
 * `(re a, im a, re b, im b)`.
 *
 * # Safety
 * `thetas` must hold `n` doubles, `left` and `right` four each.
 */
enum MbqtStatus mbqt_theta_new(size_t n,
                               const double *thetas,
                               const double *left,
                               const double *right,
                               struct MbqtMps **out);

/**
 * Any family from its JSON spec (`{"family": "theta", ...}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MbqtStatus mbqt_family_from_json(const char *json, struct MbqtMps **out);

/**
 * An MPS from its site-tensor JSON.
 *
 * # Safety
 * As for `mbqt_family_from_json`.
 */
enum MbqtStatus mbqt_mps_from_json(const char *json, struct MbqtMps **out);

/**
 * # Safety
 * `mps` must come from this library and not be used afterwards.
 */
void mbqt_mps_free(struct MbqtMps *mps);

/**
 * Number of sites, or 0 for NULL.
 *
 * # Safety
 * `mps` must be NULL or a live handle.
 */
size_t mbqt_mps_n(const struct MbqtMps *mps);

/**
 * Amplitude of the bit string `bits[0..len]` (`bits[k]` on site `k`).
 *
 * # Safety
 * `bits` must hold `len` bytes; `re` and `im` must be valid.
 */
enum MbqtStatus mbqt_mps_amplitude(const struct MbqtMps *mps,
                                   const uint8_t *bits,
                                   size_t len,
                                   double *re,
                                   double *im);

/**
 * Correlation length of a uniform chain. `*diverging` is set to 1 (and
 * `*xi` to infinity) when the gap closes.
 *
 * # Safety
 * `xi` and `diverging` must be valid.
 */
enum MbqtStatus mbqt_mps_correlation_length(const struct MbqtMps *mps,
                                            double *xi,
                                            int32_t *diverging);

/**
 * Site-tensor JSON of the state; free with `mbqt_string_free`.
 *
 * # Safety
 * `out` must be valid.
 */
enum MbqtStatus mbqt_mps_to_json(const struct MbqtMps *mps, char **out);

/**
 * # Safety
 * `s` must come from this library.
 */
void mbqt_string_free(char *s);

/**
 * Normalized entanglement spectrum for the cut after `cut` sites,
 * descending. Writes up to `cap` values and the total count to `*len`.
 *
 * # Safety
 * `values` must have room for `cap` doubles; `len` must be valid.
 */
enum MbqtStatus mbqt_mps_spectrum(const struct MbqtMps *mps,
                                  size_t cut,
                                  double *values,
                                  size_t cap,
                                  size_t *len);

/**
 * Runs a teleportation protocol on a JSON family spec with seeded outcomes.
 * Writes the `k` outcomes and the 2x2 logical gate, row-major as
 * interleaved `(re, im)` (8 doubles).
 *
 * # Safety
 * `angles` and `outcomes` must hold `k` entries, `gate` 8 doubles.
 */
enum MbqtStatus mbqt_teleport_run(const char *family_json,
                                  const double *angles,
                                  size_t k,
                                  uint64_t seed,
                                  int32_t feedforward,
                                  uint8_t *outcomes,
                                  double *gate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MBQT_H */
