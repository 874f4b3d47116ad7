#ifndef CHASE_RD_H
#define CHASE_RD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The nonzero codes 2 to 4 match the CLI exit codes.
 */
typedef enum ChaseRdStatus {
  CHASE_RD_STATUS_OK = 0,
  CHASE_RD_STATUS_INVALID_INPUT = 2,
  CHASE_RD_STATUS_BUDGET = 3,
  CHASE_RD_STATUS_NUMERICAL = 4,
  CHASE_RD_STATUS_NULL_POINTER = 5,
  CHASE_RD_STATUS_PANIC = 6,
} ChaseRdStatus;

/**
 * Opaque BCH code handle.
 */
typedef struct ChaseRdBch ChaseRdBch;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next
 * call on the same thread; never null.
 */
const char *chase_rd_last_error(void);

/**
 * Reverse water-filling over `m` classes.
 *
 * `out_q` and `out_d_star` hold `m` values each; any scalar output may be
 * null. `block_length` of 0 means the composition total.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum ChaseRdStatus chase_rd_waterfill(const uint64_t *composition,
                                      const double *p,
                                      size_t m,
                                      uint64_t t,
                                      uint64_t block_length,
                                      double *out_q,
                                      double *out_d_star,
                                      double *out_nu,
                                      double *out_rate,
                                      double *out_log2_list_size);

/**
 * Exact list failure probability for class composition `composition`,
 * crossovers `p`, flip vector `q` and real list length `list_len >= 1`.
 *
 * # Safety
 * Pointers must be valid for `m` elements; `out` for one.
 */
enum ChaseRdStatus chase_rd_list_failure(const uint64_t *composition,
                                         const double *p,
                                         const double *q,
                                         size_t m,
                                         uint64_t t,
                                         double list_len,
                                         double *out);

/**
 * Flip vector minimizing the exact list failure probability.
 *
 * # Safety
 * Pointers must be valid for `m` elements; `out_value` may be null.
 */
enum ChaseRdStatus chase_rd_optimize_flip(const uint64_t *composition,
                                          const double *p,
                                          size_t m,
                                          uint64_t t,
                                          double list_len,
                                          double *out_q,
                                          double *out_value);

/**
 * Asymptotic BI-AWGN water level and LLR cutoff for noise `sigma` and
 * distortion budget `distortion`. `out_threshold_llr` may be null.
 *
 * # Safety
 * `out_nu` must be valid for one write.
 */
enum ChaseRdStatus chase_rd_awgn_level(double sigma,
                                       double distortion,
                                       double *out_nu,
                                       double *out_threshold_llr);

/**
 * Narrow-sense binary BCH code of length `2^m - 1` correcting `t` errors.
 *
 * # Safety
 * `out` must be valid for one write. Free the handle with
 * [`chase_rd_bch_free`].
 */
enum ChaseRdStatus chase_rd_bch_new(uint32_t m, size_t t, struct ChaseRdBch **out);

/**
 * # Safety
 * `handle` must come from [`chase_rd_bch_new`] and not be used afterwards.
 */
void chase_rd_bch_free(struct ChaseRdBch *handle);

/**
 * Code length, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or live.
 */
size_t chase_rd_bch_n(const struct ChaseRdBch *handle);

/**
 * Code dimension, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or live.
 */
size_t chase_rd_bch_k(const struct ChaseRdBch *handle);

/**
 * Systematic encoding of `k` message bits into `n` codeword bits (one bit
 * per byte).
 *
 * # Safety
 * `message` must hold `k` bytes and `codeword` `n` bytes.
 */
enum ChaseRdStatus chase_rd_bch_encode(const struct ChaseRdBch *handle,
                                       const uint8_t *message,
                                       uint8_t *codeword);

/**
 * Bounded-distance decoding of an `n`-bit word. On success `*corrected`
 * is 1 and `codeword` holds the decoded word; on decoding failure
 * `*corrected` is 0 and `codeword` is left unchanged.
 *
 * # Safety
 * `word` and `codeword` must hold `n` bytes; `corrected` one byte.
 */
enum ChaseRdStatus chase_rd_bch_decode(const struct ChaseRdBch *handle,
                                       const uint8_t *word,
                                       uint8_t *codeword,
                                       uint8_t *corrected);

/**
 * Run a CLI command (`"waterfill"`, `"awgn-rule"`, `"exact"`,
 * `"optimize"`, `"simulate"` or `"figure"`) on a JSON config and return the
 * JSON report in `*out`.
 *
 * # Safety
 * `command` and `config_json` must be NUL-terminated; `out` valid for one
 * write. Release `*out` with [`chase_rd_string_free`].
 */
enum ChaseRdStatus chase_rd_run_json(const char *command, const char *config_json, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void chase_rd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHASE_RD_H */
