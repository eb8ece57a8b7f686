/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef TROLLSPOT_H
#define TROLLSPOT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  TS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TS_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or not valid UTF-8.
   */
  TS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input data or configuration failed validation.
   */
  TS_STATUS_VALIDATION = 3,
  /**
   * The operation failed while running.
   */
  TS_STATUS_RUNTIME = 4,
  /**
   * An internal panic was caught at the boundary.
   */
  TS_STATUS_PANIC = 5,
} TsStatus;

/**
 * Fitted co-clustering.
 */
typedef struct TsCocluster TsCocluster;

/**
 * Loaded comment corpus.
 */
typedef struct TsCorpus TsCorpus;

/**
 * Users × features matrix.
 */
typedef struct TsFeatureMatrix TsFeatureMatrix;

/**
 * Trained classifier.
 */
typedef struct TsModel TsModel;

/**
 * Per-comment text statistics.
 */
typedef struct {
  uint32_t words;
  uint32_t sentences;
  double capital_pct;
  double flesch_ease;
  double fk_grade;
  double ari;
  uint32_t urls;
} TsCommentStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *ts_version(void);

/**
 * Message of the last failed call on this thread, or null. Free with
 * [`ts_string_free`].
 */
char *ts_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a pointer previously returned by this library and not
 * yet freed.
 */
void ts_string_free(char *s);

/**
 * Loads a corpus file. `format` is `"jsonl"` or `"csv"`.
 *
 * # Safety
 * `path` and `format` must be NUL-terminated strings; `out` must be writable.
 */
TsStatus ts_corpus_load(const char *path, const char *format, TsCorpus **out);

/**
 * # Safety
 * `corpus` must be null or a live handle from [`ts_corpus_load`].
 */
void ts_corpus_free(TsCorpus *corpus);

/**
 * Number of comments and distinct users in a corpus.
 *
 * # Safety
 * `corpus` must be a live handle; the outputs must be writable.
 */
TsStatus ts_corpus_size(const TsCorpus *corpus, size_t *comments, size_t *users);

/**
 * Extracts the 73-column feature matrix with the default graph settings.
 *
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
TsStatus ts_features_extract(const TsCorpus *corpus, TsFeatureMatrix **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
TsStatus ts_features_load(const char *path, TsFeatureMatrix **out);

/**
 * # Safety
 * `matrix` must be a live handle; `path` a NUL-terminated string.
 */
TsStatus ts_features_save(const TsFeatureMatrix *matrix, const char *path);

/**
 * # Safety
 * `matrix` must be a live handle; the outputs must be writable.
 */
TsStatus ts_features_shape(const TsFeatureMatrix *matrix, size_t *rows, size_t *cols);

/**
 * Copies the values row-major into `out`, which must hold `rows * cols`
 * doubles (`len`).
 *
 * # Safety
 * `matrix` must be a live handle; `out` must point to `len` writable doubles.
 */
TsStatus ts_features_values(const TsFeatureMatrix *matrix, double *out, size_t len);

/**
 * Name of column `col`. Free with [`ts_string_free`].
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
TsStatus ts_features_column_name(const TsFeatureMatrix *matrix, size_t col, char **out);

/**
 * Id of the user in row `row`. Free with [`ts_string_free`].
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
TsStatus ts_features_user(const TsFeatureMatrix *matrix, size_t row, char **out);

/**
 * # Safety
 * `matrix` must be null or a live handle.
 */
void ts_features_free(TsFeatureMatrix *matrix);

/**
 * Trains a random forest on `rows × cols` values and integer labels in
 * `0..n_classes`.
 *
 * # Safety
 * `x` must point to `rows * cols` doubles, `y` to `rows` labels, and `out`
 * must be writable.
 */
TsStatus ts_forest_train(const double *x,
                         const uint32_t *y,
                         size_t rows,
                         size_t cols,
                         size_t n_classes,
                         size_t n_trees,
                         uint64_t seed,
                         TsModel **out);

/**
 * Class probabilities for one row of `cols` values, written to `out`
 * (`n_classes` doubles).
 *
 * # Safety
 * `model` must be a live handle; `row` must point to `cols` doubles and
 * `out` to `n_classes` writable doubles.
 */
TsStatus ts_model_predict_proba(const TsModel *model,
                                const double *row,
                                size_t cols,
                                double *out,
                                size_t n_classes);

/**
 * # Safety
 * `model` must be a live handle; `path` a NUL-terminated string.
 */
TsStatus ts_model_save(const TsModel *model, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
TsStatus ts_model_load(const char *path, TsModel **out);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
void ts_model_free(TsModel *model);

/**
 * Area under the ROC curve; `labels[i]` nonzero marks a positive.
 *
 * # Safety
 * `scores` and `labels` must point to `n` elements; `out` must be writable.
 */
TsStatus ts_auc(const double *scores, const uint8_t *labels, size_t n, double *out);

/**
 * Smallest number of hours holding more than half of the 24 hourly counts.
 *
 * # Safety
 * `counts` must point to 24 values; `out` must be writable.
 */
TsStatus ts_highly_active_hours(const uint64_t *counts, uint32_t *out);

/**
 * # Safety
 * `text` must be a NUL-terminated UTF-8 string; `out` must be writable.
 */
TsStatus ts_comment_stats(const char *text, TsCommentStats *out);

/**
 * Fits a sparse nonnegative co-clustering of a `rows × cols` matrix.
 *
 * # Safety
 * `x` must point to `rows * cols` doubles; `out` must be writable.
 */
TsStatus ts_cocluster_fit(const double *x,
                          size_t rows,
                          size_t cols,
                          size_t rank,
                          double lambda,
                          uint64_t seed,
                          TsCocluster **out);

/**
 * Rank and final objective value.
 *
 * # Safety
 * `model` must be a live handle; the outputs must be writable.
 */
TsStatus ts_cocluster_info(const TsCocluster *model, size_t *rank, double *objective);

/**
 * Copies the membership matrix A (`rows × rank`, row-major) into `out`.
 *
 * # Safety
 * `model` must be a live handle; `out` must point to `len` writable doubles.
 */
TsStatus ts_cocluster_membership(const TsCocluster *model, double *out, size_t len);

/**
 * Whether row `user` is a member of cluster `cluster` under the model's
 * membership threshold.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
TsStatus ts_cocluster_is_member(const TsCocluster *model, size_t user, size_t cluster, bool *out);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
void ts_cocluster_free(TsCocluster *model);

/**
 * Runs a pipeline command (`ingest`, `features`, `stats`, `experiment`,
 * `cocluster` or `synth`) with a config file, as the CLI does. When
 * `has_seed` is false the config file's seed is used. `out_dir` may be null.
 *
 * # Safety
 * `command` and `config_path` must be NUL-terminated strings; `out_dir` must
 * be null or a NUL-terminated string.
 */
TsStatus ts_run_command(const char *command,
                        const char *config_path,
                        bool has_seed,
                        uint64_t seed,
                        const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TROLLSPOT_H */
