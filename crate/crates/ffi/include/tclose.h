#ifndef TCLOSE_H
#define TCLOSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum TcStatus {
  TC_STATUS_OK = 0,
  TC_STATUS_NULL_ARGUMENT = 1,
  TC_STATUS_INVALID_UTF8 = 2,
  TC_STATUS_PARSE = 3,
  TC_STATUS_INVALID_INPUT = 4,
  TC_STATUS_OUT_OF_RANGE = 5,
  TC_STATUS_TOO_LARGE = 6,
  TC_STATUS_UNSUPPORTED = 7,
  TC_STATUS_INTERNAL = 8,
} TcStatus;

typedef enum TcAlgorithm {
  TC_ALGORITHM_EXACT = 0,
  TC_ALGORITHM_ORACLE = 1,
  TC_ALGORITHM_MILP = 2,
  TC_ALGORITHM_APPROX = 3,
} TcAlgorithm;

/**
 * Outcome of a solver call.
 */
typedef struct TcSolution TcSolution;

/**
 * A metric over SA values, possibly bound to a table only when used.
 */
typedef struct TcSpace TcSpace;

/**
 * A parsed microdata table.
 */
typedef struct TcTable TcTable;

/**
 * Size guards; see `tc_limits_default`.
 */
typedef struct TcLimits {
  uint32_t oracle_max_rows;
  uint32_t exact_max_rows;
  uint64_t milp_max_assignments;
} TcLimits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *tc_last_error(void);

/**
 * Library version, a static string.
 */
const char *tc_version(void);

struct TcLimits tc_limits_default(void);

/**
 * Parses CSV text with `qi:`/`sa:` headers.
 *
 * # Safety
 * `csv` must be a NUL-terminated string and `out_table` a valid pointer.
 */
enum TcStatus tc_table_from_csv(const char *csv, bool split_digits, struct TcTable **out_table);

/**
 * # Safety
 * `table` must come from [`tc_table_from_csv`] or be NULL.
 */
void tc_table_free(struct TcTable *table);

/**
 * # Safety
 * `table` must be a live handle.
 */
size_t tc_table_rows(const struct TcTable *table);

/**
 * # Safety
 * `table` must be a live handle.
 */
size_t tc_table_columns(const struct TcTable *table);

/**
 * Equal-distance space over whatever SA values the table has.
 *
 * # Safety
 * `out_space` must be a valid pointer.
 */
enum TcStatus tc_space_equal(struct TcSpace **out_space);

/**
 * Space over labels `1`..`4` with distance 1 among the first three and
 * 1/2 from each of them to `4`.
 *
 * # Safety
 * `out_space` must be a valid pointer.
 */
enum TcStatus tc_space_four_point(struct TcSpace **out_space);

/**
 * Parses a space file: `equal [s]`, or a size line, a label line and the
 * distance matrix.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out_space` a valid pointer.
 */
enum TcStatus tc_space_parse(const char *spec, struct TcSpace **out_space);

/**
 * # Safety
 * `space` must come from a `tc_space_*` constructor or be NULL.
 */
void tc_space_free(struct TcSpace *space);

/**
 * Exact EMD between two comma-separated distributions, written as a newly
 * allocated string to release with [`tc_string_free`].
 *
 * # Safety
 * String arguments must be NUL-terminated, `space` a live handle and
 * `out_value` a valid pointer.
 */
enum TcStatus tc_emd(const char *x, const char *y, const struct TcSpace *space, char **out_value);

/**
 * Minimum-cost t-closeness partition with `Exact`, `Oracle` or `Milp`.
 * `limits` may be NULL for the defaults.
 *
 * # Safety
 * Handles must be live, `t` NUL-terminated and `out_solution` valid.
 */
enum TcStatus tc_solve_tclose(const struct TcTable *table,
                              const struct TcSpace *space,
                              const char *t,
                              enum TcAlgorithm algorithm,
                              const struct TcLimits *limits,
                              struct TcSolution **out_solution);

/**
 * Minimum-cost k-anonymous partition with `Exact`, `Oracle` or `Approx`.
 *
 * # Safety
 * `table` must be live and `out_solution` valid; `limits` may be NULL.
 */
enum TcStatus tc_solve_kanon(const struct TcTable *table,
                             size_t k,
                             enum TcAlgorithm algorithm,
                             const struct TcLimits *limits,
                             struct TcSolution **out_solution);

/**
 * Minimum-cost 2-diverse partition with `Exact` or `Oracle`.
 *
 * # Safety
 * `table` must be live and `out_solution` valid; `limits` may be NULL.
 */
enum TcStatus tc_solve_2diversity(const struct TcTable *table,
                                  enum TcAlgorithm algorithm,
                                  const struct TcLimits *limits,
                                  struct TcSolution **out_solution);

/**
 * # Safety
 * `solution` must come from a `tc_solve_*` call or be NULL.
 */
void tc_solution_free(struct TcSolution *solution);

/**
 * False when no partition satisfies the principle.
 *
 * # Safety
 * `solution` must be a live handle.
 */
bool tc_solution_feasible(const struct TcSolution *solution);

/**
 * # Safety
 * `solution` must be a live handle and `out_cost` valid.
 */
enum TcStatus tc_solution_cost(const struct TcSolution *solution, uint64_t *out_cost);

/**
 * Number of groups; 0 for an infeasible solution.
 *
 * # Safety
 * `solution` must be a live handle.
 */
size_t tc_solution_group_count(const struct TcSolution *solution);

/**
 * Writes the group index of each row into `out_groups`, which must hold
 * `rows` entries, `rows` being the row count of the solved table.
 *
 * # Safety
 * `solution` must be live and `out_groups` point to `rows` writable slots.
 */
enum TcStatus tc_solution_assignment(const struct TcSolution *solution,
                                     size_t *out_groups,
                                     size_t rows);

/**
 * Partition file text: one line of row indices per group, then
 * `cost=<n>`; `infeasible` otherwise. Release with [`tc_string_free`].
 *
 * # Safety
 * `solution` must be live and `out_text` valid.
 */
enum TcStatus tc_solution_to_string(const struct TcSolution *solution, char **out_text);

/**
 * # Safety
 * `s` must come from this library or be NULL.
 */
void tc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TCLOSE_H */
