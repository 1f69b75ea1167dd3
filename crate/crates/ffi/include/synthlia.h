#ifndef SYNTHLIA_H
#define SYNTHLIA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlStatus {
  SL_STATUS_OK = 0,
  /**
   * The solver ran but found no solution; see `sl_output_reason`.
   */
  SL_STATUS_GAVE_UP = 1,
  SL_STATUS_PARSE_ERROR = 2,
  SL_STATUS_INVALID_ARGUMENT = 3,
  /**
   * An internal error was caught at the boundary.
   */
  SL_STATUS_PANIC = 4,
} SlStatus;

typedef enum SlMode {
  SL_MODE_AUTO = 0,
  SL_MODE_CEGQI = 1,
  SL_MODE_ENUM = 2,
  SL_MODE_PORTFOLIO = 3,
} SlMode;

/**
 * The result of one solve call.
 */
typedef struct SlOutput SlOutput;

/**
 * A parsed synthesis problem.
 */
typedef struct SlProblem SlProblem;

typedef struct SlConfig {
  enum SlMode mode;
  uint32_t max_size;
  uint32_t max_iters;
  uint32_t recon_budget;
  /**
   * Seconds; zero or negative means no limit.
   */
  double timeout_secs;
  bool verify;
  bool rewriter_pruning;
  bool io_pruning;
} SlConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Writes the default configuration to `out`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `SlConfig`.
 */
enum SlStatus sl_config_default(struct SlConfig *out);

/**
 * Parses a problem in SyGuS format. On success `*out` owns a new problem
 * that must be released with `sl_problem_free`.
 *
 * # Safety
 * `text` must be null or a nul-terminated string; `out` must be null or
 * point to a writable pointer.
 */
enum SlStatus sl_problem_parse(const char *text, struct SlProblem **out);

/**
 * # Safety
 * `p` must be null or a pointer from `sl_problem_parse` not yet freed.
 */
void sl_problem_free(struct SlProblem *p);

/**
 * Solves `problem`. A null `config` means the defaults. Returns `Ok` or
 * `GaveUp`; in both cases `*out` owns a new output that must be released
 * with `sl_output_free`.
 *
 * # Safety
 * `problem` must come from `sl_problem_parse`; `config` must be null or
 * point to a valid `SlConfig`; `out` must point to a writable pointer.
 */
enum SlStatus sl_solve(const struct SlProblem *problem,
                       const struct SlConfig *config,
                       struct SlOutput **out);

/**
 * `define-fun` lines of the solution, or null if the solver gave up.
 *
 * # Safety
 * `o` must be null or a live output from `sl_solve`.
 */
const char *sl_output_solution(const struct SlOutput *o);

/**
 * Why the solver gave up, or null on success.
 *
 * # Safety
 * `o` must be null or a live output from `sl_solve`.
 */
const char *sl_output_reason(const struct SlOutput *o);

/**
 * Name of the strategy that produced the solution, or null.
 *
 * # Safety
 * `o` must be null or a live output from `sl_solve`.
 */
const char *sl_output_strategy(const struct SlOutput *o);

/**
 * Search counters as `key=value` lines.
 *
 * # Safety
 * `o` must be null or a live output from `sl_solve`.
 */
const char *sl_output_stats(const struct SlOutput *o);

/**
 * # Safety
 * `o` must be null or an output from `sl_solve` not yet freed.
 */
void sl_output_free(struct SlOutput *o);

/**
 * Message for the most recent failure on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *sl_last_error(void);

const char *sl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYNTHLIA_H */
