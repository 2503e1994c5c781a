#ifndef HYPERTREE_H
#define HYPERTREE_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from hypertree-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum HtStatus {
  HT_STATUS_OK = 0,
  HT_STATUS_NULL_POINTER = 1,
  HT_STATUS_UTF8 = 2,
  HT_STATUS_PARSE = 3,
  HT_STATUS_INVALID_INPUT = 4,
  HT_STATUS_CAPACITY = 5,
  HT_STATUS_NUMERICAL = 6,
  HT_STATUS_IO = 7,
  HT_STATUS_PANIC = 8,
} HtStatus;

/**
 * Sampler backend selector.
 */
typedef enum HtBackend {
  HT_BACKEND_KERNEL = 0,
  HT_BACKEND_PERCOLATION = 1,
} HtBackend;

/**
 * Coboundary-space convention in dimension 0.
 */
typedef enum HtConvention {
  HT_CONVENTION_REDUCED = 0,
  HT_CONVENTION_UNREDUCED = 1,
} HtConvention;

/**
 * Opaque complex handle.
 */
typedef struct HtComplex HtComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent error on this thread. Valid until the
 * next failing call from the same thread; never null.
 */
const char *ht_last_error(void);

/**
 * Frees a string returned by this library. Null is a no-op.
 */
void ht_string_free(char *s);

/**
 * Frees a complex handle. Null is a no-op.
 */
void ht_complex_free(struct HtComplex *complex);

/**
 * Parses the standard complex format (header `n d`, one ascending
 * face per line, `#` comments).
 */
enum HtStatus ht_complex_parse(const char *text, struct HtComplex **out);

/**
 * Reads a complex file from disk.
 */
enum HtStatus ht_complex_read_file(const char *path, struct HtComplex **out);

/**
 * Serializes a complex in the standard format.
 */
enum HtStatus ht_complex_to_string(const struct HtComplex *complex, char **out);

/**
 * Vertex count `n`; 0 for a null handle.
 */
uint32_t ht_complex_vertex_count(const struct HtComplex *complex);

/**
 * Top dimension `d`; 0 for a null handle.
 */
uint32_t ht_complex_dimension(const struct HtComplex *complex);

/**
 * Number of top faces; 0 for a null handle.
 */
uint64_t ht_complex_face_count(const struct HtComplex *complex);

/**
 * Draws one generalized hypertree with the given backend.
 */
enum HtStatus ht_sample_hypertree(uint32_t n,
                                  uint32_t d,
                                  uint32_t ell,
                                  uint64_t seed,
                                  enum HtBackend backend,
                                  struct HtComplex **out);

/**
 * Draws the union of `k` independent copies (copy `j` runs on the
 * child seed derived from `seed` and `j`).
 */
enum HtStatus ht_sample_union(uint32_t n,
                              uint32_t d,
                              uint32_t ell,
                              uint32_t k,
                              uint64_t seed,
                              struct HtComplex **out);

/**
 * Number of top faces containing the given face.
 */
enum HtStatus ht_cover_count(const struct HtComplex *complex,
                             const uint32_t *verts,
                             size_t len,
                             uint64_t *out);

/**
 * Normalized face weight as a reduced rational.
 */
enum HtStatus ht_weight(const struct HtComplex *complex,
                        const uint32_t *verts,
                        size_t len,
                        int64_t *out_num,
                        uint64_t *out_den);

/**
 * Hypertree predicate: complete lower skeleton (structural), full
 * face count, finite integral homology.
 */
enum HtStatus ht_is_hypertree(const struct HtComplex *complex, uint8_t *out);

/**
 * `|H_{d-1}|`: `*finite` is 0 for infinite homology, else 1 with the
 * order in `*order` (Numerical if it does not fit u64).
 */
enum HtStatus ht_homology_order(const struct HtComplex *complex, uint8_t *finite, uint64_t *order);

/**
 * Exact measure weight `|H|²/n^C(n-2,d)` as decimal numerator and
 * denominator strings (free both with `ht_string_free`).
 */
enum HtStatus ht_measure_weight(const struct HtComplex *complex, char **out_num, char **out_den);

/**
 * Coboundary-expansion constant 𝔥ᵢ as a reduced rational;
 * `*is_infinite = 1` (with 0/1 written) when no non-coboundary
 * cochain exists.
 */
enum HtStatus ht_expansion_constant(const struct HtComplex *complex,
                                    uint32_t i,
                                    enum HtConvention convention,
                                    uint8_t *is_infinite,
                                    int64_t *out_num,
                                    uint64_t *out_den);

/**
 * Dimension of `H^i(K; F₂)` under the chosen convention.
 */
enum HtStatus ht_cohomology_dim(const struct HtComplex *complex,
                                uint32_t i,
                                enum HtConvention convention,
                                uint64_t *out);

/**
 * Least α making the complex an α-skeleton expander, as a reduced
 * rational.
 */
enum HtStatus ht_skeleton_alpha(const struct HtComplex *complex,
                                int64_t *out_num,
                                uint64_t *out_den);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERTREE_H */
