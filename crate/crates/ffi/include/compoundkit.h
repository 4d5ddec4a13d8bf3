#ifndef COMPOUNDKIT_H
#define COMPOUNDKIT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

#define CK_MULT_ORACLE 0

#define CK_MULT_KRON 1

#define CK_ADD_ENTRYWISE 0

#define CK_ADD_KRON 1

#define CK_ADD_EPS 2

#define CK_LIFT_M 0

#define CK_LIFT_L 1

// Status codes returned by every fallible function.
typedef enum CkStatus {
  CK_STATUS_OK = 0,
  CK_STATUS_INVARIANT = 1,
  CK_STATUS_PARSE = 2,
  CK_STATUS_DOMAIN = 3,
  CK_STATUS_RESOURCE = 4,
  CK_STATUS_NUMERICAL = 5,
  CK_STATUS_NULL_POINTER = 6,
  CK_STATUS_PANIC = 7,
} CkStatus;

// Opaque dense row-major matrix.
typedef struct CkMatrix CkMatrix;

// Opaque signed selector (`M_{n,k}` or `L_{n,k}`).
typedef struct CkSelector CkSelector;

// Message for the last failed call on this thread; empty after success.
// The pointer stays valid until the next call on the same thread.
const char *ck_last_error_message(void);

// Copies `rows * cols` row-major values into a new matrix.
//
// # Safety
// `data` must point to `rows * cols` doubles; `out` must be writable.
enum CkStatus ck_matrix_new(size_t rows, size_t cols, const double *data, struct CkMatrix **out);

// # Safety
// `m` must come from this library and not be freed twice. Null is ignored.
void ck_matrix_free(struct CkMatrix *m);

// # Safety
// `m` must be a live handle or null (returns 0).
size_t ck_matrix_rows(const struct CkMatrix *m);

// # Safety
// `m` must be a live handle or null (returns 0).
size_t ck_matrix_cols(const struct CkMatrix *m);

// Copies the row-major entries into `buf`, which must hold at least
// `rows * cols` doubles.
//
// # Safety
// `buf` must be writable for `len` doubles.
enum CkStatus ck_matrix_copy_data(const struct CkMatrix *m, double *buf, size_t len);

// `A^(k)` by the minor oracle or the Kronecker route.
//
// # Safety
// `a` must be a live handle; `out` must be writable.
enum CkStatus ck_mult_compound(const struct CkMatrix *a,
                               size_t k,
                               uint32_t method,
                               size_t cap,
                               struct CkMatrix **out);

// `A^[k]` by the entrywise, Kronecker or ε-polynomial route.
//
// # Safety
// `a` must be a live handle; `out` must be writable.
enum CkStatus ck_add_compound(const struct CkMatrix *a,
                              size_t k,
                              uint32_t method,
                              size_t cap,
                              struct CkMatrix **out);

// `(AB)^[k]` from the columns of `A` (n x m) and rows of `B` (m x n).
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum CkStatus ck_product_add_compound(const struct CkMatrix *a,
                                      const struct CkMatrix *b,
                                      size_t k,
                                      size_t cap,
                                      struct CkMatrix **out);

// 1-based position of the increasing sequence `seq[0..k]` in `Q(n, k)`.
//
// # Safety
// `seq` must point to `k` values; `out` must be writable.
enum CkStatus ck_rank_q(size_t n, const size_t *seq, size_t k, size_t *out);

// 1-based position of `seq[0..k]` in `R(n, k)`.
//
// # Safety
// `seq` must point to `k` values; `out` must be writable.
enum CkStatus ck_rank_r(size_t n, const size_t *seq, size_t k, size_t *out);

// Writes the `p`-th (1-based) element of `Q(n, k)` into `out[0..k]`.
//
// # Safety
// `out` must be writable for `k` values.
enum CkStatus ck_unrank_q(size_t n, size_t k, size_t p, size_t *out);

// Writes the `p`-th (1-based) element of `R(n, k)` into `out[0..k]`.
//
// # Safety
// `out` must be writable for `k` values.
enum CkStatus ck_unrank_r(size_t n, size_t k, size_t p, size_t *out);

// Builds `M_{n,k}` (`which = CK_LIFT_M`) or `L_{n,k}` (`CK_LIFT_L`).
//
// # Safety
// `out` must be writable.
enum CkStatus ck_lift(size_t n, size_t k, uint32_t which, size_t cap, struct CkSelector **out);

// # Safety
// `s` must come from this library and not be freed twice. Null is ignored.
void ck_selector_free(struct CkSelector *s);

// # Safety
// `s` must be a live handle or null (returns 0).
size_t ck_selector_rows(const struct CkSelector *s);

// # Safety
// `s` must be a live handle or null (returns 0).
size_t ck_selector_cols(const struct CkSelector *s);

// # Safety
// `s` must be a live handle or null (returns 0).
size_t ck_selector_nnz(const struct CkSelector *s);

// Exports the sorted 1-based triplets. Each buffer must hold `nnz` values.
//
// # Safety
// The three buffers must be writable for `len` values each.
enum CkStatus ck_selector_triplets(const struct CkSelector *s,
                                   size_t *rows,
                                   size_t *cols,
                                   int8_t *signs,
                                   size_t len);

// Sets `*contractive` to 1 when `A^[k]` is Hurwitz, else 0, and
// `*abscissa` to its spectral abscissa.
//
// # Safety
// `a` must be a live handle; both outputs must be writable.
enum CkStatus ck_k_contraction(const struct CkMatrix *a,
                               size_t k,
                               size_t cap,
                               int32_t *contractive,
                               double *abscissa);

#endif  /* COMPOUNDKIT_H */
