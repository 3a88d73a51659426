/* C interface to the hypercolor library. Generated by cbindgen; do not edit. */

#ifndef HYPERCOLOR_H
#define HYPERCOLOR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a call.
typedef enum HcStatus {
  HC_STATUS_OK = 0,
  // A required pointer argument was null.
  HC_STATUS_NULL_POINTER = 1,
  // An argument was out of range or inconsistent.
  HC_STATUS_INVALID_ARGUMENT = 2,
  // The input could not be parsed.
  HC_STATUS_PARSE = 3,
  // Reading or writing a file failed.
  HC_STATUS_IO = 4,
  // Two edges share more than one vertex.
  HC_STATUS_NOT_SIMPLE = 5,
  // The operation requires a triangle-free hypergraph.
  HC_STATUS_HAS_TRIANGLE = 6,
  // The resampling finisher gave up.
  HC_STATUS_RESAMPLE_CAP_EXCEEDED = 7,
  // An internal consistency check failed.
  HC_STATUS_INVARIANT = 8,
  // The library panicked.
  HC_STATUS_PANIC = 9,
} HcStatus;

// Which pipeline to run.
typedef enum HcMode {
  // Direct when the hypergraph is triangle-free, full otherwise.
  HC_MODE_AUTO = 0,
  // Nibble and finisher on the whole hypergraph (must be triangle-free).
  HC_MODE_DIRECT = 1,
  // Partition into triangle-free classes first.
  HC_MODE_FULL = 2,
} HcMode;

// Opaque coloring handle.
typedef struct HcColoring HcColoring;

// Opaque hypergraph handle.
typedef struct HcHypergraph HcHypergraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null if none. The
// pointer stays valid until the next failing call on the same thread.
const char *hc_last_error(void);

// Builds a `k`-uniform hypergraph on `n` vertices from `num_edges` edges
// stored row-major in `edges` (`k * num_edges` vertex ids).
//
// # Safety
// `edges` must point to `k * num_edges` readable `u32` values (it may be
// null when `num_edges` is 0) and `out` must be writable.
enum HcStatus hc_hypergraph_from_edges(size_t k,
                                       size_t n,
                                       const uint32_t *edges,
                                       size_t num_edges,
                                       struct HcHypergraph **out);

// Reads a hypergraph in the text format from `path`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` must be writable.
enum HcStatus hc_hypergraph_read_file(const char *path, struct HcHypergraph **out);

// Generates a random simple `k`-uniform hypergraph with maximum degree at
// most `max_degree`, optionally with no triangles.
//
// # Safety
// `out` must be writable.
enum HcStatus hc_hypergraph_generate(size_t k,
                                     size_t n,
                                     size_t max_degree,
                                     bool triangle_free,
                                     uint64_t seed,
                                     struct HcHypergraph **out);

// Releases a hypergraph. Null is ignored.
//
// # Safety
// `h` must come from this library and not be used afterwards.
void hc_hypergraph_free(struct HcHypergraph *h);

// Edge size `k`, or 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
size_t hc_hypergraph_k(const struct HcHypergraph *h);

// Number of vertices, or 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
size_t hc_hypergraph_num_vertices(const struct HcHypergraph *h);

// Number of edges, or 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
size_t hc_hypergraph_num_edges(const struct HcHypergraph *h);

// Maximum vertex degree, or 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
size_t hc_hypergraph_max_degree(const struct HcHypergraph *h);

// Whether every two edges share at most one vertex. False for null.
//
// # Safety
// `h` must be null or a live handle.
bool hc_hypergraph_is_simple(const struct HcHypergraph *h);

// Colors `h` and stores a new coloring handle in `out`. The coloring is
// verified before it is returned.
//
// # Safety
// `h` must be a live handle and `out` must be writable.
enum HcStatus hc_color(const struct HcHypergraph *h,
                       enum HcMode mode,
                       uint64_t seed,
                       struct HcColoring **out);

// Releases a coloring. Null is ignored.
//
// # Safety
// `c` must come from this library and not be used afterwards.
void hc_coloring_free(struct HcColoring *c);

// Number of vertices covered by the coloring, or 0 for null.
//
// # Safety
// `c` must be null or a live handle.
size_t hc_coloring_len(const struct HcColoring *c);

// Number of distinct colors, or 0 for null.
//
// # Safety
// `c` must be null or a live handle.
size_t hc_coloring_colors_used(const struct HcColoring *c);

// Copies the colors into `buf`, which must hold `hc_coloring_len(c)` values.
//
// # Safety
// `c` must be a live handle and `buf` must point to `len` writable `u32`s.
enum HcStatus hc_coloring_copy(const struct HcColoring *c, uint32_t *buf, size_t len);

// Checks a coloring given as one color per vertex. Writes whether it is
// proper to `proper` and the number of monochromatic edges to
// `monochromatic` (which may be null).
//
// # Safety
// `h` must be a live handle, `colors` must point to `n` readable values
// and `proper` must be writable.
enum HcStatus hc_verify(const struct HcHypergraph *h,
                        const uint32_t *colors,
                        size_t n,
                        bool *proper,
                        size_t *monochromatic);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERCOLOR_H */
