#ifndef SPECTRA_H
#define SPECTRA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Positive values mirror the library's error kinds.
enum SpectraStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  SPECTRA_STATUS_OK = 0,
  SPECTRA_STATUS_NOT_IRREDUCIBLE = 1,
  SPECTRA_STATUS_NO_CONVERGENCE = 2,
  SPECTRA_STATUS_EMPTY_CUT = 3,
  SPECTRA_STATUS_FULL_CUT = 4,
  SPECTRA_STATUS_TOO_LARGE = 5,
  SPECTRA_STATUS_DEGENERATE_GAP = 6,
  SPECTRA_STATUS_DEGENERATE_SIGMA = 7,
  SPECTRA_STATUS_NOT_REVERSIBLE = 8,
  SPECTRA_STATUS_NOT_PERFECT_SQUARE = 9,
  SPECTRA_STATUS_NOT_PRIME = 10,
  SPECTRA_STATUS_PRECISION_EXHAUSTED = 11,
  SPECTRA_STATUS_SINGULAR_BLOCK = 12,
  SPECTRA_STATUS_DEGENERATE_BOUNDARY = 13,
  SPECTRA_STATUS_SINGULAR_CLUMP = 14,
  SPECTRA_STATUS_NOT_PD_SYM_PART = 15,
  SPECTRA_STATUS_INVALID_PATH = 16,
  SPECTRA_STATUS_MISSING_PAIR = 17,
  SPECTRA_STATUS_SHAPE_MISMATCH = 18,
  SPECTRA_STATUS_OUT_OF_RANGE = 19,
  SPECTRA_STATUS_CAP_EXCEEDED = 20,
  SPECTRA_STATUS_PARSE = 21,
  SPECTRA_STATUS_IO = 22,
  // A required pointer argument was null.
  SPECTRA_STATUS_NULL_POINTER = -1,
  // The library panicked; the message describes where.
  SPECTRA_STATUS_PANIC = -2,
  // A string argument was not valid UTF-8.
  SPECTRA_STATUS_INVALID_UTF8 = -3,
};
#ifndef __cplusplus
typedef int32_t SpectraStatus;
#endif // __cplusplus

// Opaque matrix handle.
typedef struct SpectraMatrix SpectraMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; empty after a success.
// The pointer stays valid until the next library call on the same thread.
const char *spectra_last_error(void);

// Library version as a static NUL-terminated string.
const char *spectra_version(void);

// Frees a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed before.
void spectra_string_free(char *s);

// Creates a machine-precision matrix from `n*n` row-major doubles.
//
// # Safety
// `values` must point to `n*n` readable doubles and `out` to a writable handle slot.
SpectraStatus spectra_matrix_new(size_t n, const double *values, struct SpectraMatrix **out);

// Creates an exact rational matrix from row-major numerators and denominators.
//
// # Safety
// `num` and `den` must each point to `n*n` readable integers.
SpectraStatus spectra_matrix_new_rational(size_t n,
                                          const int64_t *num,
                                          const int64_t *den,
                                          struct SpectraMatrix **out);

// Reads a matrix file (JSON or CSV).
//
// # Safety
// `path` must be a NUL-terminated string.
SpectraStatus spectra_matrix_read(const char *path, struct SpectraMatrix **out);

// Writes a matrix file; `format` is `json`, `rational-json`, `decimal-json` or `csv`.
//
// # Safety
// `m` must be a live handle; `path` and `format` NUL-terminated strings.
SpectraStatus spectra_matrix_write(const struct SpectraMatrix *m,
                                   const char *path,
                                   const char *format);

// Serializes a matrix into a newly allocated string (free with [`spectra_string_free`]).
//
// # Safety
// `m` must be a live handle, `format` a NUL-terminated string, `out` writable.
SpectraStatus spectra_matrix_to_string(const struct SpectraMatrix *m,
                                       const char *format,
                                       char **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `m` must come from this library and not have been freed before.
void spectra_matrix_free(struct SpectraMatrix *m);

// Dimension of the matrix, or 0 for a null handle.
//
// # Safety
// `m` must be null or a live handle.
size_t spectra_matrix_dim(const struct SpectraMatrix *m);

// Copies the entries as row-major doubles into `buf` (length `n*n`).
//
// # Safety
// `m` must be a live handle and `buf` hold `n*n` writable doubles.
SpectraStatus spectra_matrix_values(const struct SpectraMatrix *m, double *buf);

// Whether the entries are exact rationals (1) or not (0); 0 for null.
//
// # Safety
// `m` must be null or a live handle.
int32_t spectra_matrix_is_exact(const struct SpectraMatrix *m);

// The rootn family; `n` must be a perfect square.
//
// # Safety
// `out` must be writable.
SpectraStatus spectra_construct_rootn(size_t n, struct SpectraMatrix **out);

// The de Bruijn matrix on `2^k` vertices.
//
// # Safety
// `out` must be writable.
SpectraStatus spectra_construct_debruijn(uint32_t k, struct SpectraMatrix **out);

// The Chet matrix `C_n` at `digits` decimal digits.
//
// # Safety
// `out` must be writable.
SpectraStatus spectra_construct_chet(size_t n, uint32_t digits, struct SpectraMatrix **out);

// The Klawe–Vazirani matrix for an odd prime `p`.
//
// # Safety
// `out` must be writable.
SpectraStatus spectra_construct_klawe_vazirani(size_t p, struct SpectraMatrix **out);

// The 4×4 matrix with non-expansion ⅓.
//
// # Safety
// `out` must be writable.
SpectraStatus spectra_construct_beyond_half(struct SpectraMatrix **out);

// Perron value and vectors: `u` (left) and `v` (right) each of length `n`,
// normalized so that `Σv = 1` and `⟨u, v⟩ = 1`. Any output may be null.
//
// # Safety
// Non-null outputs must be writable for their lengths.
SpectraStatus spectra_perron(const struct SpectraMatrix *m, double *r, double *u, double *v);

// Edge expansion: exact for `n ≤ limit` (0 selects the default), otherwise the
// best-interval upper bound. `witness` (length `n`, may be null) receives the
// minimizing set, `witness_len` its size, `exact` whether the value is exact.
//
// # Safety
// Non-null outputs must be writable for their lengths.
SpectraStatus spectra_phi(const struct SpectraMatrix *m,
                          size_t limit,
                          double *phi,
                          size_t *witness,
                          size_t *witness_len,
                          int32_t *exact);

// `Δ = 1 − Re λ₂/λ₁`.
//
// # Safety
// `m` must be a live handle and `out` writable.
SpectraStatus spectra_spectral_gap(const struct SpectraMatrix *m, double *out);

// Eigenvalues by descending real part into `re` and `im` (length `n` each).
//
// # Safety
// `re` and `im` must hold `n` writable doubles.
SpectraStatus spectra_eigenvalues(const struct SpectraMatrix *m, double *re, double *im);

// Singular values, descending, into `out` (length `n`).
//
// # Safety
// `out` must hold `n` writable doubles.
SpectraStatus spectra_singular_values(const struct SpectraMatrix *m, double *out);

// Mixing time `τ_ε` of the Perron-normalized matrix.
//
// # Safety
// `m` must be a live handle and `out` writable.
SpectraStatus spectra_mixing_time(const struct SpectraMatrix *m, double eps, size_t *out);

// Capacity of the balanced form of `m` for boundary vertices `u[0..k]` with values `a[0..k]`.
//
// # Safety
// `u` and `a` must hold `k` readable elements; `out` must be writable.
SpectraStatus spectra_capacity(const struct SpectraMatrix *m,
                               const size_t *u,
                               const double *a,
                               size_t k,
                               double *out);

// Runs a verification suite (`trials` = 0 selects its default). `passed` receives
// 1 or 0; `report_json` (may be null) receives the full report.
//
// # Safety
// `suite` must be a NUL-terminated string and `passed` writable.
SpectraStatus spectra_verify(const char *suite,
                             size_t trials,
                             uint64_t seed,
                             int32_t *passed,
                             char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRA_H */
