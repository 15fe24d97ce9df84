#ifndef ULTRATREE_H
#define ULTRATREE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UtStatus {
  UT_STATUS_OK = 0,
  UT_STATUS_NULL_POINTER = 1,
  UT_STATUS_INVALID_UTF8 = 2,
  /**
   * malformed JSON, fraction or vertex id
   */
  UT_STATUS_INVALID_INPUT = 3,
  /**
   * the input is well formed but not a valid tree
   */
  UT_STATUS_INVALID_TREE = 4,
  /**
   * some edge has both endpoints labeled 0
   */
  UT_STATUS_DEGENERATE = 5,
  UT_STATUS_UNKNOWN_VERTEX = 6,
  /**
   * a generator could not be truncated with the given scheme
   */
  UT_STATUS_GENERATOR = 7,
  UT_STATUS_PANIC = 8,
} UtStatus;

/**
 * Distance index over a tree.
 */
typedef struct UtIndex UtIndex;

/**
 * A finite labeled tree.
 */
typedef struct UtTree UtTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ut_last_error(void);

/**
 * # Safety
 * `s` is null or a string returned by this library and not yet freed.
 */
void ut_string_free(char *s);

/**
 * Parses a tree from its JSON form.
 *
 * # Safety
 * `json` is a nul-terminated string; `out` is valid for writes.
 */
enum UtStatus ut_tree_from_json(const char *json, struct UtTree **out);

/**
 * Materializes `budget` vertices of a generator and labels them.
 *
 * # Safety
 * Both strings are nul-terminated; `out` is valid for writes.
 */
enum UtStatus ut_tree_truncate(const char *generator_json,
                               const char *scheme_json,
                               size_t budget,
                               struct UtTree **out);

/**
 * # Safety
 * `tree` is a live handle; `out` is valid for writes.
 */
enum UtStatus ut_tree_len(const struct UtTree *tree, size_t *out);

/**
 * # Safety
 * `tree` is a live handle; `out` is valid for writes.
 */
enum UtStatus ut_tree_to_json(const struct UtTree *tree, char **out);

/**
 * # Safety
 * `tree` is null or a live handle, not used afterwards.
 */
void ut_tree_free(struct UtTree *tree);

/**
 * Builds a distance index over a copy of `tree`. Fails with
 * `UT_STATUS_DEGENERATE` if the labeling is not an ultrametric.
 *
 * # Safety
 * `tree` is a live handle; `out` is valid for writes.
 */
enum UtStatus ut_index_build(const struct UtTree *tree, struct UtIndex **out);

/**
 * # Safety
 * `index` is null or a live handle, not used afterwards.
 */
void ut_index_free(struct UtIndex *index);

/**
 * `d(u, v)` as `"p/q"`.
 *
 * # Safety
 * `index` is a live handle; `u` and `v` are nul-terminated; `out` is valid
 * for writes.
 */
enum UtStatus ut_index_distance(const struct UtIndex *index,
                                const char *u,
                                const char *v,
                                char **out);

/**
 * Number of open balls of radius `radius` (a positive fraction) needed to
 * cover the tree.
 *
 * # Safety
 * `index` is a live handle; `radius` is nul-terminated; `out` is valid for
 * writes.
 */
enum UtStatus ut_index_covering_number(const struct UtIndex *index,
                                       const char *radius,
                                       size_t *out);

/**
 * Distance from `v` to its nearest other vertex, as `"p/q"`.
 *
 * # Safety
 * `index` is a live handle; `v` is nul-terminated; `out` is valid for
 * writes.
 */
enum UtStatus ut_index_isolation_radius(const struct UtIndex *index, const char *v, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ULTRATREE_H */
