#ifndef LATTICE_GROWTH_H
#define LATTICE_GROWTH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LgStatus {
  LG_STATUS_OK = 0,
  LG_STATUS_NULL_POINTER = 1,
  LG_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A value does not fit the caller's integer type.
   */
  LG_STATUS_OVERFLOW = 3,
  LG_STATUS_BUFFER_TOO_SMALL = 4,
  LG_STATUS_PANIC = 5,
} LgStatus;

/**
 * Zeta function of a curve over a finite field.
 */
typedef struct LgCurveZeta LgCurveZeta;

/**
 * Graded Lie algebra of a parahoric over F_p, truncated to a window.
 */
typedef struct LgParahoric LgParahoric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *lg_last_error(void);

/**
 * Builds a zeta function from the L-polynomial `coeffs[0..len]`, constant term first.
 *
 * # Safety
 * `coeffs` must point to `len` values; `out` must be writable.
 */
enum LgStatus lg_curve_zeta_new(uint64_t q,
                                uint32_t genus,
                                const int64_t *coeffs,
                                size_t len,
                                struct LgCurveZeta **out);

/**
 * Builds a zeta function from `#C(F_{q^n})` for `n = 1..=genus`.
 *
 * # Safety
 * `counts` must point to `len` values; `out` must be writable.
 */
enum LgStatus lg_curve_zeta_from_point_counts(uint64_t q,
                                              uint32_t genus,
                                              const int64_t *counts,
                                              size_t len,
                                              struct LgCurveZeta **out);

/**
 * # Safety
 * `z` must come from a constructor above and not be used afterwards.
 */
void lg_curve_zeta_free(struct LgCurveZeta *z);

/**
 * Class number `P(1)`.
 *
 * # Safety
 * `z` must be a live handle; `out` must be writable.
 */
enum LgStatus lg_curve_zeta_class_number(const struct LgCurveZeta *z, uint64_t *out);

/**
 * Writes `b_0..=b_n`, the effective-divisor counts by degree, to `out[0..=n]`.
 *
 * # Safety
 * `z` must be a live handle; `out` must hold `len` values.
 */
enum LgStatus lg_curve_zeta_divisor_counts(const struct LgCurveZeta *z,
                                           size_t n,
                                           uint64_t *out,
                                           size_t len);

/**
 * Whether `(sqrt q - 1)^(2g) <= P(1) <= (sqrt q + 1)^(2g)`.
 *
 * # Safety
 * `z` must be a live handle; `out` must be writable.
 */
enum LgStatus lg_curve_zeta_weil_bounds_hold(const struct LgCurveZeta *z, bool *out);

/**
 * Type data for a label such as `"E6"` or `"2A3"`, as a JSON string to release
 * with [`lg_string_free`].
 *
 * # Safety
 * `type_label` must be a NUL-terminated string; `out` must be writable.
 */
enum LgStatus lg_type_data_json(const char *type_label, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void lg_string_free(char *s);

/**
 * Builds the graded algebra of the parahoric of type `xi[0..xi_len]` (node
 * indices; empty means the special vertex) for a finite type and twist over
 * F_p on grades `1..=window` (`0` picks the default window).
 *
 * # Safety
 * `type_label` must be a NUL-terminated string, `xi` must hold `xi_len`
 * values and `out` must be writable.
 */
enum LgStatus lg_parahoric_new(const char *type_label,
                               uint32_t twist,
                               const size_t *xi,
                               size_t xi_len,
                               uint32_t p,
                               size_t window,
                               struct LgParahoric **out);

/**
 * # Safety
 * `g` must come from [`lg_parahoric_new`] and not be used afterwards.
 */
void lg_parahoric_free(struct LgParahoric *g);

/**
 * Number of grades in the window.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum LgStatus lg_parahoric_window(const struct LgParahoric *g, size_t *out);

/**
 * Writes the dimensions of grades `1..=window` to `out[0..window]`.
 *
 * # Safety
 * `g` must be a live handle; `out` must hold `len` values.
 */
enum LgStatus lg_parahoric_grade_dims(const struct LgParahoric *g, size_t *out, size_t len);

/**
 * Whether the Jacobi identity holds on the window.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum LgStatus lg_parahoric_jacobi_holds(const struct LgParahoric *g, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATTICE_GROWTH_H */
