#ifndef PTLAB_H
#define PTLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stdint.h>

/*
 Result codes. Zero is success.
 */
typedef enum PtlabStatus {
  PTLAB_STATUS_OK = 0,
  PTLAB_STATUS_NULL_POINTER = 1,
  PTLAB_STATUS_INVALID_ARGUMENT = 2,
  PTLAB_STATUS_DIMENSION_MISMATCH = 3,
  PTLAB_STATUS_OUT_OF_RANGE = 4,
  PTLAB_STATUS_CAP_EXCEEDED = 5,
  PTLAB_STATUS_PARSE = 6,
  PTLAB_STATUS_IO = 7,
  PTLAB_STATUS_UNSUPPORTED = 8,
  PTLAB_STATUS_PANIC = 9,
} PtlabStatus;

/*
 Opaque truth table of a Boolean function on F₂ⁿ.
 */
typedef struct PtlabBoolFn PtlabBoolFn;

/*
 Opaque tester built from an expression.
 */
typedef struct PtlabTester PtlabTester;

/*
 An exact rational `num / den` with `den > 0`.
 */
typedef struct PtlabFraction {
  int64_t num;
  int64_t den;
} PtlabFraction;

/*
 Outcome of one tester run.
 */
typedef struct PtlabVerdict {
  bool accept;
  uint64_t rounds;
  uint64_t queries;
  uint64_t seed;
} PtlabVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failing call on this thread, or NULL if none. The
 pointer stays valid until the next failing call on the same thread.
 */
const char *ptlab_last_error_message(void);

/*
 Builds a function from `2ⁿ` characters `'0'`/`'1'` in index order.

 # Safety
 `bits` must be a NUL-terminated string and `out_fn` a valid pointer.
 */
enum PtlabStatus ptlab_boolfn_from_bits(uint32_t n, const char *bits, struct PtlabBoolFn **out_fn);

/*
 Reads a `.tt` file.

 # Safety
 `path` must be a NUL-terminated string and `out_fn` a valid pointer.
 */
enum PtlabStatus ptlab_boolfn_read_tt(const char *path, struct PtlabBoolFn **out_fn);

/*
 Frees a function handle. NULL is ignored.

 # Safety
 `f` must come from this library and not have been freed.
 */
void ptlab_boolfn_free(struct PtlabBoolFn *f);

/*
 Dimension `n`, or 0 for NULL.

 # Safety
 `f` must be NULL or a live handle.
 */
uint32_t ptlab_boolfn_dim(const struct PtlabBoolFn *f);

/*
 Writes the table as `2ⁿ` characters plus a NUL into `buf` when it fits.
 `needed` always receives the required buffer size including the NUL.

 # Safety
 `buf` must be NULL or point to `len` writable bytes; `needed` must be valid.
 */
enum PtlabStatus ptlab_boolfn_to_bits(const struct PtlabBoolFn *f,
                                      char *buf,
                                      uintptr_t len,
                                      uintptr_t *needed);

/*
 `f(x)` for the point with index `x` (bit `j` holds coordinate `j+1`).

 # Safety
 `f` and `value` must be valid pointers.
 */
enum PtlabStatus ptlab_boolfn_eval(const struct PtlabBoolFn *f, uint32_t x, bool *value);

/*
 Number of points where `f` is 1.

 # Safety
 `f` and `weight` must be valid pointers.
 */
enum PtlabStatus ptlab_boolfn_weight(const struct PtlabBoolFn *f, uint64_t *weight);

/*
 Relative Hamming distance between two functions of the same dimension.

 # Safety
 All pointers must be valid.
 */
enum PtlabStatus ptlab_boolfn_dist(const struct PtlabBoolFn *f,
                                   const struct PtlabBoolFn *g,
                                   struct PtlabFraction *dist);

/*
 Exact probability that one uniform `(x, y)` draw shows the pattern with
 `ones` ones (0 to 3) on `(f(x), f(y), f(x+y))`.

 # Safety
 `f` and `prob` must be valid pointers.
 */
enum PtlabStatus ptlab_rejection_probability(const struct PtlabBoolFn *f,
                                             uint8_t ones,
                                             struct PtlabFraction *prob);

/*
 Number of unordered triangles `{x, y, x+y}` inside the support.

 # Safety
 `f` and `count` must be valid pointers.
 */
enum PtlabStatus ptlab_triangle_count(const struct PtlabBoolFn *f, uint64_t *count);

/*
 Exact distance to a property named `lin`, `free100`, `free110`, `free111`,
 `nltf` or `all1`. When `witness` is not NULL it receives a new handle for a
 nearest member (NULL if the property has none to report).

 # Safety
 `property` must be a NUL-terminated string; other pointers valid or, for
 `witness`, NULL.
 */
enum PtlabStatus ptlab_distance_to(const char *property,
                                   const struct PtlabBoolFn *f,
                                   struct PtlabFraction *dist,
                                   struct PtlabBoolFn **witness);

/*
 Whether `f` belongs to the named property.

 # Safety
 `property` must be a NUL-terminated string; other pointers valid.
 */
enum PtlabStatus ptlab_membership(const char *property, const struct PtlabBoolFn *f, bool *member);

/*
 Parses a tester expression such as `"intersect(free111, free100, eps0=1/4)"`.

 # Safety
 `expr` must be a NUL-terminated string and `out_tester` a valid pointer.
 */
enum PtlabStatus ptlab_tester_parse(const char *expr, struct PtlabTester **out_tester);

/*
 Frees a tester handle. NULL is ignored.

 # Safety
 `t` must come from this library and not have been freed.
 */
void ptlab_tester_free(struct PtlabTester *t);

/*
 Worst-case query count at distance parameter `eps`.

 # Safety
 `t` and `queries` must be valid pointers.
 */
enum PtlabStatus ptlab_tester_budget(const struct PtlabTester *t,
                                     struct PtlabFraction eps,
                                     uint64_t *queries);

/*
 Runs the tester once on `f` with a fresh oracle and the given seed.

 # Safety
 All pointers must be valid.
 */
enum PtlabStatus ptlab_tester_run(const struct PtlabTester *t,
                                  const struct PtlabBoolFn *f,
                                  struct PtlabFraction eps,
                                  uint64_t seed,
                                  struct PtlabVerdict *verdict);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PTLAB_H */
