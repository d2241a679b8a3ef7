#ifndef BSYNC_H
#define BSYNC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every call.
 */
typedef enum BsyncStatus {
  BSYNC_STATUS_OK = 0,
  BSYNC_STATUS_NULL_POINTER = 1,
  BSYNC_STATUS_INVALID_UTF8 = 2,
  BSYNC_STATUS_PARSE = 3,
  BSYNC_STATUS_DEADLOCK = 4,
  BSYNC_STATUS_INAPPLICABLE = 5,
  BSYNC_STATUS_RESOURCE_LIMIT = 6,
  BSYNC_STATUS_INTERNAL = 7,
} BsyncStatus;

/**
 * A control graph or bare DAG.
 */
typedef struct BsyncGraph BsyncGraph;

/**
 * A validated process term.
 */
typedef struct BsyncProcess BsyncProcess;

/**
 * A uniform sampler with its own random stream.
 */
typedef struct BsyncSampler BsyncSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *bsync_last_error(void);

/**
 * Library version as a static string.
 */
const char *bsync_version(void);

/**
 * Release a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void bsync_string_free(char *s);

/**
 * Parse and validate a process term.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum BsyncStatus bsync_process_parse(const char *text_in, struct BsyncProcess **out);

/**
 * # Safety
 * `p` must come from [`bsync_process_parse`] and not be freed twice.
 */
void bsync_process_free(struct BsyncProcess *p);

/**
 * Number of actions in the term.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BsyncStatus bsync_process_size(const struct BsyncProcess *p, uintptr_t *out);

/**
 * Control graph of a process. Deadlocked processes still yield a graph.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BsyncStatus bsync_graph_from_process(const struct BsyncProcess *p, struct BsyncGraph **out);

/**
 * Parse an edge list: one `u -> v` per line, or a lone vertex name.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum BsyncStatus bsync_graph_parse_edges(const char *text_in, struct BsyncGraph **out);

/**
 * # Safety
 * `g` must come from this library and not be freed twice.
 */
void bsync_graph_free(struct BsyncGraph *g);

/**
 * # Safety
 * Pointers must be valid.
 */
enum BsyncStatus bsync_graph_num_vertices(const struct BsyncGraph *g, uintptr_t *out);

/**
 * Whether the graph has a cycle or a residual barrier.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BsyncStatus bsync_graph_has_deadlock(const struct BsyncGraph *g, bool *out);

/**
 * Exact number of executions as a decimal string.
 *
 * # Safety
 * Pointers must be valid; free the result with [`bsync_string_free`].
 */
enum BsyncStatus bsync_count(const struct BsyncGraph *g, char **out);

/**
 * Exact count through the fork-join shape of the term.
 *
 * # Safety
 * Pointers must be valid; free the result with [`bsync_string_free`].
 */
enum BsyncStatus bsync_count_fork_join(const struct BsyncProcess *p, char **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum BsyncStatus bsync_is_fork_join(const struct BsyncProcess *p, bool *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum BsyncStatus bsync_is_bit_decomposable(const struct BsyncGraph *g, bool *out);

/**
 * Prepare a uniform sampler for `g`, seeded with `seed`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BsyncStatus bsync_sampler_new(const struct BsyncGraph *g,
                                   uint64_t seed,
                                   struct BsyncSampler **out);

/**
 * Next execution as space-separated action labels.
 *
 * # Safety
 * Pointers must be valid; free the result with [`bsync_string_free`].
 */
enum BsyncStatus bsync_sampler_next(struct BsyncSampler *s, char **out);

/**
 * # Safety
 * `s` must come from [`bsync_sampler_new`] and not be freed twice.
 */
void bsync_sampler_free(struct BsyncSampler *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BSYNC_H */
