#ifndef SUBTREND_H
#define SUBTREND_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StShift {
  ST_SHIFT_CUMULATIVE = 0,
  ST_SHIFT_PER_LEVEL = 1,
} StShift;

// Status codes returned by every fallible function.
typedef enum StStatus {
  ST_STATUS_OK = 0,
  // A required pointer argument was null.
  ST_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  ST_STATUS_INVALID_UTF8 = 2,
  // Input data could not be parsed or violates its invariants.
  ST_STATUS_MALFORMED_INPUT = 3,
  // No adjacent pair has data in both groups.
  ST_STATUS_NO_COMPARABLE_PAIRS = 4,
  // A numeric argument or option is out of range.
  ST_STATUS_INVALID_ARGUMENT = 5,
  // An output buffer is too small; the required length was written.
  ST_STATUS_BUFFER_TOO_SMALL = 6,
  ST_STATUS_IO = 7,
  // A panic was caught at the boundary.
  ST_STATUS_INTERNAL = 8,
} StStatus;

typedef enum StTieMode {
  ST_TIE_MODE_EXPECTED_HALF = 0,
  ST_TIE_MODE_RANDOM_COIN = 1,
} StTieMode;

typedef enum StTieScope {
  ST_TIE_SCOPE_ALL_EXACT_TIES = 0,
  ST_TIE_SCOPE_ZERO_ZERO_PAIRS = 1,
} StTieScope;

// Opaque validated dataset.
typedef struct StDataset StDataset;

// Opaque test result.
typedef struct StTestResult StTestResult;

// Options for the bootstrap test. Start from [`st_test_options_default`].
typedef struct StTestOptions {
  double alpha;
  size_t n_boot;
  uint64_t seed;
  enum StTieMode tie_mode;
  enum StTieScope tie_scope;
  enum StShift shift;
  // Keep the bootstrap statistics in the result handle.
  bool keep_sample;
} StTestOptions;

// Scalar outcome of a test.
typedef struct StTestSummary {
  double m_observed;
  // Meaningful only when `has_critical_value` is true (false when alpha = 1).
  double critical_value;
  bool has_critical_value;
  double p_value;
  bool reject;
  size_t n_boot;
  size_t num_columns;
} StTestSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *st_version(void);

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *st_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void st_string_free(char *s);

// Defaults: alpha 0.05, 10000 replicates, seed 0, expected-half ties on all
// exact ties, cumulative shifts, no sample kept.
struct StTestOptions st_test_options_default(void);

// Parses CSV text with columns `group`, `level`, `value`. `levels` fixes the
// number of levels; pass 0 to use the largest level present.
//
// # Safety
// `csv` must be a NUL-terminated string; `out` must be writable.
enum StStatus st_dataset_from_csv(const char *csv, size_t levels, struct StDataset **out);

// Builds a dataset from flat arrays. `values_a` holds the measurements of
// group a level by level, `sizes_a[i]` of them for level `i`; likewise for
// group b. Both groups have `num_levels` levels.
//
// # Safety
// Each array must hold the number of elements its sizes imply.
enum StStatus st_dataset_from_arrays(const double *values_a,
                                     const size_t *sizes_a,
                                     const double *values_b,
                                     const size_t *sizes_b,
                                     size_t num_levels,
                                     struct StDataset **out);

// # Safety
// `ds` must come from this library and not have been freed. Null is ignored.
void st_dataset_free(struct StDataset *ds);

// # Safety
// `ds` must be a live dataset handle; `out` must be writable.
enum StStatus st_dataset_num_levels(const struct StDataset *ds, size_t *out);

// Runs the bootstrap test on a dataset.
//
// # Safety
// `ds` and `opts` must be valid; `out` must be writable.
enum StStatus st_bootstrap_test(const struct StDataset *ds,
                                const struct StTestOptions *opts,
                                struct StTestResult **out);

// Runs the bootstrap test from a frequency table with `num_columns`
// columns. `pairs` lists the 1-based adjacent pair of each column, or is
// null for pairs `1..=num_columns`. The sizes arrays have `num_levels`
// entries and must reproduce the totals.
//
// # Safety
// Arrays must hold the stated number of elements; `out` must be writable.
enum StStatus st_fixed_table_test(const double *o_x,
                                  const double *o_y,
                                  const uint64_t *tot_x,
                                  const uint64_t *tot_y,
                                  const size_t *pairs,
                                  size_t num_columns,
                                  const size_t *sizes_x,
                                  const size_t *sizes_y,
                                  size_t num_levels,
                                  const struct StTestOptions *opts,
                                  struct StTestResult **out);

// # Safety
// `res` must come from this library and not have been freed. Null is ignored.
void st_result_free(struct StTestResult *res);

// # Safety
// `res` must be a live result handle; `out` must be writable.
enum StStatus st_result_summary(const struct StTestResult *res, struct StTestSummary *out);

// Borrows the bootstrap statistics kept with `keep_sample`. `*data` is set
// to null and `*len` to 0 when no sample was kept. The memory belongs to
// the handle.
//
// # Safety
// `res` must be a live result handle; `data` and `len` must be writable.
enum StStatus st_result_bootstrap_sample(const struct StTestResult *res,
                                         const double **data,
                                         size_t *len);

// Full result as JSON; release with [`st_string_free`].
//
// # Safety
// `res` must be a live result handle; `out` must be writable.
enum StStatus st_result_to_json(const struct StTestResult *res, char **out);

// Discrepancy statistic of a frequency table with `num_columns` columns.
//
// # Safety
// Arrays must hold `num_columns` elements; `out` must be writable.
enum StStatus st_m_statistic(const double *o_x,
                             const double *o_y,
                             const uint64_t *tot_x,
                             const uint64_t *tot_y,
                             size_t num_columns,
                             double *out);

// Writes `Pr(O = k)`, `k = 0..=n1*n2`, from the deletion recurrence into
// `mass`. `*len` receives the number of entries; when `capacity` is too
// small nothing else is written and the status is `BufferTooSmall`.
//
// # Safety
// `mass` must hold `capacity` elements; `len` must be writable.
enum StStatus st_exact_pmf(size_t n1,
                           size_t n2,
                           double p,
                           double *mass,
                           size_t capacity,
                           size_t *len);

// Runs a type-I error study (no `true_p_y`) or a power study from a JSON
// simulation config and returns the JSON report; release it with
// [`st_string_free`].
//
// # Safety
// `config_json` must be a NUL-terminated string; `out` must be writable.
enum StStatus st_simulate_json(const char *config_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBTREND_H */
