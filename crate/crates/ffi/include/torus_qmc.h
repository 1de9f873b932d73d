#ifndef TORUS_QMC_H
#define TORUS_QMC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a certification run.
 */
typedef enum TqOutcome {
  TQ_CERTIFIED = 0,
  TQ_REFUTED = 1,
  TQ_INCOMPLETE = 2,
} TqOutcome;

typedef enum TqStatus {
  TQ_OK = 0,
  TQ_NULL_POINTER = 1,
  TQ_INVALID_ARGUMENT = 2,
  TQ_PARSE_ERROR = 3,
  TQ_OUT_OF_RANGE = 4,
  TQ_NUMERICAL = 5,
  TQ_BUFFER_TOO_SMALL = 6,
  TQ_INTERNAL = 7,
  TQ_PANIC = 8,
} TqStatus;

typedef struct TqCertificate TqCertificate;

typedef struct TqPointSet TqPointSet;

typedef struct TqSearchResult TqSearchResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread; empty after
 * a successful call. Valid until the next call on the same thread.
 */
const char *tq_last_error(void);

/**
 * Library version as a static string.
 */
const char *tq_version(void);

void tq_string_free(char *s);

/**
 * Point set from `n` coordinate pairs in `[0, 1)`. Doubles are taken at
 * their exact binary value.
 */
enum TqStatus tq_pointset_new(const double *xs,
                              const double *ys,
                              size_t n,
                              struct TqPointSet **out);

/**
 * Point set from point-file text.
 */
enum TqStatus tq_pointset_parse(const char *text, struct TqPointSet **out);

void tq_pointset_free(struct TqPointSet *p);

/**
 * Number of points, or 0 for a null handle.
 */
size_t tq_pointset_len(const struct TqPointSet *p);

/**
 * Copies the coordinates (rounded to double) into buffers of length `cap`.
 */
enum TqStatus tq_pointset_coords(const struct TqPointSet *p, double *xs, double *ys, size_t cap);

/**
 * Rank-1 lattice `{(i/n, i·g/n mod 1)}`.
 */
enum TqStatus tq_lattice(size_t n, size_t g, struct TqPointSet **out);

/**
 * Fibonacci lattice with `F_index` points.
 */
enum TqStatus tq_fibonacci_lattice(size_t index, struct TqPointSet **out);

/**
 * Worst-case error for kernel weight `gamma` (a rational string such as
 * `"1"` or `"3/2"`; null means 1).
 */
enum TqStatus tq_wce(const struct TqPointSet *p, const char *gamma, double *out);

/**
 * Periodic L2-discrepancy.
 */
enum TqStatus tq_discrepancy(const struct TqPointSet *p, double *out);

/**
 * Number of semi-canonical cells for `n` points.
 */
enum TqStatus tq_semi_canonical_count(size_t n, uint64_t *out);

/**
 * Global search over all cells. `threads = 0` uses the default pool.
 */
enum TqStatus tq_optimize(size_t n, const char *gamma, size_t threads, struct TqSearchResult **out);

void tq_search_result_free(struct TqSearchResult *r);

enum TqStatus tq_search_result_wce(const struct TqSearchResult *r, double *out);

/**
 * The optimal point set of a search.
 */
enum TqStatus tq_search_result_points(const struct TqSearchResult *r, struct TqPointSet **out);

/**
 * The search record as JSON; free with `tq_string_free`. Null on a null
 * handle.
 */
char *tq_search_result_json(const struct TqSearchResult *r);

/**
 * Certifies `candidate` as an optimal point set. `delta <= 0` selects the
 * offset automatically; `threads = 0` uses the default pool.
 */
enum TqStatus tq_certify(const struct TqPointSet *candidate,
                         const char *gamma,
                         double delta,
                         size_t threads,
                         struct TqCertificate **out);

void tq_certificate_free(struct TqCertificate *c);

enum TqStatus tq_certificate_outcome(const struct TqCertificate *c, enum TqOutcome *out);

/**
 * The full certificate as JSON; free with `tq_string_free`.
 */
char *tq_certificate_json(const struct TqCertificate *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORUS_QMC_H */
