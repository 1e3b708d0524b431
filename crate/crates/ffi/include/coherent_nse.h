#ifndef COHERENT_NSE_H
#define COHERENT_NSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum CnseStatus {
  CNSE_STATUS_OK = 0,
  CNSE_STATUS_NULL_POINTER = 1,
  CNSE_STATUS_INVALID_ARGUMENT = 2,
  CNSE_STATUS_DOMAIN = 3,
  CNSE_STATUS_LATTICE_MISMATCH = 4,
  CNSE_STATUS_CLASS = 5,
  CNSE_STATUS_IO = 6,
  CNSE_STATUS_PARSE = 7,
  CNSE_STATUS_SOLVER = 8,
  CNSE_STATUS_BLOW_UP = 9,
  CNSE_STATUS_PANIC = 10,
} CnseStatus;

// A term expansion `Σ z^α ξ_α`.
typedef struct CnseExpansion CnseExpansion;

// A real divergence-free spectral field.
typedef struct CnseField CnseField;

// A periodic lattice.
typedef struct CnseLattice CnseLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *cnse_last_error(void);

// Library version as a static string.
const char *cnse_version(void);

// A cube `[0, 2π)³` with `n` grid points per side.
//
// # Safety
// `out` must be a valid pointer.
enum CnseStatus cnse_lattice_cube(size_t n, struct CnseLattice **out);

// # Safety
// `lattice` must come from this library and not be used afterwards.
void cnse_lattice_free(struct CnseLattice *lattice);

// Grid points per side; 0 for a null handle.
//
// # Safety
// `lattice` must be null or valid.
size_t cnse_lattice_resolution(const struct CnseLattice *lattice);

// Number of stored (half-space) modes; 0 for a null handle.
//
// # Safety
// `lattice` must be null or valid.
size_t cnse_lattice_mode_count(const struct CnseLattice *lattice);

// The zero field.
//
// # Safety
// Pointers must be valid.
enum CnseStatus cnse_field_zeros(const struct CnseLattice *lattice, struct CnseField **out);

// The Leray projection of a single mode `k` with complex amplitude
// `re + i im` (its conjugate sits at `-k`).
//
// # Safety
// `k`, `re`, `im` must point to three values each; `out` must be valid.
enum CnseStatus cnse_field_single_mode(const struct CnseLattice *lattice,
                                       const int32_t *k,
                                       const double *re,
                                       const double *im,
                                       struct CnseField **out);

// # Safety
// `field` must come from this library and not be used afterwards.
void cnse_field_free(struct CnseField *field);

// `|A^α e^{σA^{1/2}} u|`.
//
// # Safety
// Pointers must be valid.
enum CnseStatus cnse_field_gevrey_norm(const struct CnseField *field,
                                       double alpha,
                                       double sigma,
                                       double *out);

// Coefficient at mode `k` (zero when not retained), written to `re[3]`
// and `im[3]`.
//
// # Safety
// `k` must point to three values, `re` and `im` to room for three.
enum CnseStatus cnse_field_coefficient(const struct CnseField *field,
                                       const int32_t *k,
                                       double *re,
                                       double *im);

// `y += a x`.
//
// # Safety
// Pointers must be valid and distinct.
enum CnseStatus cnse_field_axpy(struct CnseField *y, double a, const struct CnseField *x);

// `B(u, v)`, the projected advection term.
//
// # Safety
// Pointers must be valid.
enum CnseStatus cnse_field_bilinear(const struct CnseField *u,
                                    const struct CnseField *v,
                                    struct CnseField **out);

// # Safety
// Pointers must be valid; `path` is a NUL-terminated UTF-8 string.
enum CnseStatus cnse_field_load(const char *path, struct CnseField **out);

// # Safety
// Pointers must be valid; `path` is a NUL-terminated UTF-8 string.
enum CnseStatus cnse_field_save(const struct CnseField *field, const char *path);

// # Safety
// Pointers must be valid; `path` is a NUL-terminated UTF-8 string.
enum CnseStatus cnse_expansion_load(const char *path, struct CnseExpansion **out);

// Writes the expansion; coefficients go to separate files when `separate`
// is nonzero.
//
// # Safety
// Pointers must be valid; `path` is a NUL-terminated UTF-8 string.
enum CnseStatus cnse_expansion_save(const struct CnseExpansion *expansion,
                                    const char *path,
                                    int32_t separate);

// # Safety
// `expansion` must come from this library and not be used afterwards.
void cnse_expansion_free(struct CnseExpansion *expansion);

// Number of terms; 0 for a null handle.
//
// # Safety
// `expansion` must be null or valid.
size_t cnse_expansion_term_count(const struct CnseExpansion *expansion);

// The real field `Σ z^α ξ_α` at time `t`.
//
// # Safety
// Pointers must be valid.
enum CnseStatus cnse_expansion_evaluate(const struct CnseExpansion *expansion,
                                        double t,
                                        struct CnseField **out);

// The term-wise resolvent `Z p`.
//
// # Safety
// Pointers must be valid.
enum CnseStatus cnse_expansion_resolvent(const struct CnseExpansion *expansion,
                                         struct CnseExpansion **out);

// Runs the experiment described by a configuration file, writing its
// artifacts to `out_dir` (or the configured directory when null).
// `*passed` is set to 1 when every verdict passes, else 0.
//
// # Safety
// `config_path` is a NUL-terminated UTF-8 string; `out_dir` is null or one;
// `passed` must be valid.
enum CnseStatus cnse_run_experiment(const char *config_path, const char *out_dir, int32_t *passed);

// Runs the invariant suite with `seed`; `*passed` is 1 when all hold.
//
// # Safety
// `passed` must be valid.
enum CnseStatus cnse_selftest(uint64_t seed, int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COHERENT_NSE_H */
