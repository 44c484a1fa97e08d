#ifndef COMPDIST_H
#define COMPDIST_H

#include <stddef.h>

typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_POINTER = 1,
  CD_STATUS_INVALID_ARGUMENT = 2,
  CD_STATUS_DIMENSION_MISMATCH = 3,
  CD_STATUS_NOT_FOUND = 4,
  CD_STATUS_NOT_REDUCIBLE = 5,
  CD_STATUS_IO = 6,
  CD_STATUS_PARSE = 7,
  CD_STATUS_NUMERIC = 8,
  CD_STATUS_BUFFER_TOO_SMALL = 9,
  CD_STATUS_PANIC = 10,
} CdStatus;

typedef enum CdVerbMethod {
  CD_VERB_METHOD_RELATIONAL = 0,
  CD_VERB_METHOD_SEPARABLE = 1,
} CdVerbMethod;

typedef enum CdModel {
  CD_MODEL_RELATIONAL = 0,
  CD_MODEL_COPY_SUBJECT = 1,
  CD_MODEL_COPY_OBJECT = 2,
  CD_MODEL_FROB_ADD = 3,
  CD_MODEL_FROB_MUL = 4,
  CD_MODEL_FROB_TENSOR = 5,
  CD_MODEL_VERB_OBJECT = 6,
} CdModel;

// A loaded semantic space.
typedef struct CdSpace CdSpace;

// A square verb matrix.
typedef struct CdVerbMatrix CdVerbMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *cd_last_error(void);

// Loads a space written by `compdist build-space` (or any `word<TAB>v1...`
// file).
//
// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum CdStatus cd_space_load(const char *path, struct CdSpace **out);

// # Safety
// `space` must come from [`cd_space_load`] and not be freed already. Null is
// ignored.
void cd_space_free(struct CdSpace *space);

// Vector dimension, or 0 for a null handle.
//
// # Safety
// `space` must be null or a live handle.
size_t cd_space_dim(const struct CdSpace *space);

// Copies the vector of `word` into `out`, which must hold `dim` doubles.
//
// # Safety
// `space` must be a live handle, `word` nul-terminated and `out` valid for
// `out_len` doubles.
enum CdStatus cd_space_vector(const struct CdSpace *space,
                              const char *word,
                              double *out,
                              size_t out_len);

// Wraps a row-major `dim × dim` array as a verb matrix.
//
// # Safety
// `verb` must be nul-terminated, `data` valid for `dim * dim` doubles and
// `out` writable.
enum CdStatus cd_verb_from_data(const char *verb,
                                const double *data,
                                size_t dim,
                                struct CdVerbMatrix **out);

// Builds a verb matrix from `n_pairs` subject/object vectors stored back to
// back in `subjects` and `objects`.
//
// # Safety
// `subjects` and `objects` must each be valid for `n_pairs * dim` doubles;
// `verb` nul-terminated; `out` writable.
enum CdStatus cd_verb_build(const char *verb,
                            const double *subjects,
                            const double *objects,
                            size_t n_pairs,
                            size_t dim,
                            enum CdVerbMethod method,
                            struct CdVerbMatrix **out);

// Trains a verb matrix so that `V · input_i ≈ target_i` by gradient
// descent. A non-positive `learning_rate` picks the default step size, and a
// zero `max_epochs` the default epoch budget.
//
// # Safety
// `inputs` and `targets` must each be valid for `n * dim` doubles; `verb`
// nul-terminated; `out` writable.
enum CdStatus cd_verb_train_regression(const char *verb,
                                       const double *inputs,
                                       const double *targets,
                                       size_t n,
                                       size_t dim,
                                       double learning_rate,
                                       size_t max_epochs,
                                       double tolerance,
                                       struct CdVerbMatrix **out);

// Best rank-1 approximation of `verb` as a new handle.
//
// # Safety
// `verb` must be a live handle and `out` writable.
enum CdStatus cd_verb_rank1(const struct CdVerbMatrix *verb, struct CdVerbMatrix **out);

// Cosine between the matrix and its rank-1 approximation.
//
// # Safety
// `verb` must be a live handle and `out` writable.
enum CdStatus cd_verb_entanglement(const struct CdVerbMatrix *verb, double *out);

// Side length of the matrix, or 0 for a null handle.
//
// # Safety
// `verb` must be null or a live handle.
size_t cd_verb_dim(const struct CdVerbMatrix *verb);

// Copies the matrix in row-major order into `out` (`dim * dim` doubles).
//
// # Safety
// `verb` must be a live handle and `out` valid for `out_len` doubles.
enum CdStatus cd_verb_data(const struct CdVerbMatrix *verb, double *out, size_t out_len);

// # Safety
// `verb` must come from one of the `cd_verb_*` constructors and not be
// freed already. Null is ignored.
void cd_verb_free(struct CdVerbMatrix *verb);

// Composes a sentence and writes its representation to `out`. Vector
// models write `dim` doubles; `CD_MODEL_RELATIONAL` and
// `CD_MODEL_FROB_TENSOR` write a row-major `dim × dim` matrix.
// `CD_MODEL_VERB_OBJECT` ignores `subject`, which may be null. The number
// of doubles written goes to `written` when it is not null.
//
// # Safety
// `subject` (unless ignored) and `object` must be valid for `dim` doubles,
// `verb` a live handle and `out` valid for `out_len` doubles.
enum CdStatus cd_compose(enum CdModel model,
                         const double *subject,
                         const struct CdVerbMatrix *verb,
                         const double *object,
                         size_t dim,
                         double *out,
                         size_t out_len,
                         size_t *written);

// Cosine of two equal-length arrays (matrices compare flattened).
//
// # Safety
// `a` and `b` must be valid for `len` doubles and `out` writable.
enum CdStatus cd_cosine(const double *a, const double *b, size_t len, double *out);

// Spearman's ρ with tie-averaged ranks.
//
// # Safety
// `xs` and `ys` must be valid for `n` doubles and `out` writable.
enum CdStatus cd_spearman(const double *xs, const double *ys, size_t n, double *out);

// Checks that the word types, e.g. `"n"`, `"n^r·s·n^l"`, reduce to
// `target`. On success the number of contraction steps goes to `steps`
// when it is not null; otherwise `CD_STATUS_NOT_REDUCIBLE` is returned.
//
// # Safety
// `types` must point to `n` nul-terminated strings and `target` be
// nul-terminated.
enum CdStatus cd_pregroup_reduce(const char *const *types,
                                 size_t n,
                                 const char *target,
                                 size_t *steps);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMPDIST_H */
