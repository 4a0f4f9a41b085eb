#ifndef STOCLOT_H
#define STOCLOT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Values 2 to 4 match the command-line exit codes.
typedef enum StoclotStatus {
  STOCLOT_STATUS_OK = 0,
  // Solver failure or violated internal invariant.
  STOCLOT_STATUS_INTERNAL = 1,
  // The demand cannot be met; the message holds the certificate.
  STOCLOT_STATUS_INFEASIBLE = 2,
  // Malformed argument or input document.
  STOCLOT_STATUS_INPUT = 3,
  // A resource limit was hit.
  STOCLOT_STATUS_RESOURCE = 4,
  // A required pointer argument was null.
  STOCLOT_STATUS_NULL_ARGUMENT = 5,
  // A panic was caught at the boundary.
  STOCLOT_STATUS_PANIC = 6,
} StoclotStatus;

// Opaque instance handle.
typedef struct StoclotInstance StoclotInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into the library on this thread.
const char *stoclot_last_error(void);

// Library version as a static string.
const char *stoclot_version(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed before.
void stoclot_string_free(char *s);

// Parses an instance document and returns a new handle in `*out`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum StoclotStatus stoclot_instance_from_json(const char *json,
                                              bool validate_triangle,
                                              struct StoclotInstance **out);

// Serializes an instance back to JSON.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum StoclotStatus stoclot_instance_to_json(const struct StoclotInstance *inst, char **out);

// Releases an instance handle. Null is ignored.
//
// # Safety
// `inst` must come from [`stoclot_instance_from_json`] and not have been
// freed before.
void stoclot_instance_free(struct StoclotInstance *inst);

// Number of clients, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t stoclot_instance_n_clients(const struct StoclotInstance *inst);

// Number of facilities, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t stoclot_instance_n_facilities(const struct StoclotInstance *inst);

// Facility budget `k`, or 0 for a null handle.
//
// # Safety
// `inst` must be null or a live handle.
size_t stoclot_instance_k(const struct StoclotInstance *inst);

// Dependent rounding of `y[0..n]`. Writes the selected indices to
// `out_indices` (capacity `n`) and their count to `*out_len`.
//
// # Safety
// `y` must point to `n` doubles and `out_indices` to room for `n` indices.
enum StoclotStatus stoclot_dep_round(const double *y,
                                     size_t n,
                                     uint64_t seed,
                                     size_t *out_indices,
                                     size_t *out_len);

// Draws one solution set with the named algorithm (`faithful`, `half-p`,
// `half-r`, `iterative`, `general`, `scc` or `partial`). `demand_json`
// holds a demand document with chance entries and may be null for
// `partial`. The result is `{"set": [facility ids]}`.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be valid.
enum StoclotStatus stoclot_sample(const struct StoclotInstance *inst,
                                  const char *algo,
                                  const char *demand_json,
                                  uint64_t seed,
                                  char **out);

// Monte Carlo verification of an algorithm's guarantees over `samples`
// draws; writes the report JSON to `*out`.
//
// # Safety
// As for [`stoclot_sample`].
enum StoclotStatus stoclot_verify(const struct StoclotInstance *inst,
                                  const char *algo,
                                  const char *demand_json,
                                  size_t samples,
                                  uint64_t seed,
                                  char **out);

// Certified upper bound for the center-shift lottery with shift `q`,
// from a grid of `cells` cells.
//
// # Safety
// `out_bound` must be a valid pointer.
enum StoclotStatus stoclot_certify_scc(double q, size_t cells, double *out_bound);

// Partial-cluster certification. `qdist_json` may be null for the tuned
// distribution. The certificate JSON is written to `*out`.
//
// # Safety
// `qdist_json` must be null or NUL-terminated; `out` must be valid.
enum StoclotStatus stoclot_certify_partial(size_t levels,
                                           size_t m_max,
                                           uint32_t eps_log2,
                                           const char *qdist_json,
                                           bool sweep_p,
                                           char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STOCLOT_H */
