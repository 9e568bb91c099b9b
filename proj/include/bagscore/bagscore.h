#ifndef BAGSCORE_H
#define BAGSCORE_H

/* C interface to the bagging-score library.
 *
 * Conventions:
 *   - Every fallible call returns bs_status; BS_OK is 0.
 *   - On failure, bs_last_error_message() returns a thread-local description
 *     of what went wrong (valid until the thread's next failing call).
 *   - Objects returned through bs_*** out-parameters are owned by the caller
 *     and released with the matching bs_*_free().
 *   - NULL config pointers mean "use the published defaults".
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(BAGSCORE_BUILD)
#define BS_API __declspec(dllexport)
#else
#define BS_API __declspec(dllimport)
#endif
#else
#define BS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bs_status {
    BS_OK = 0,
    BS_ERR_INVALID_INPUT = 1,
    BS_ERR_INVALID_BANDWIDTH = 2,
    BS_ERR_DEGENERATE_SPREAD = 3,
    BS_ERR_DIMENSION_MISMATCH = 4,
    BS_ERR_INGESTION = 5,
    BS_ERR_TRAINING_DIVERGED = 6,
    BS_ERR_UNDEFINED_VARIANCE = 7,
    BS_ERR_DIVISION_BY_ZERO = 8,
    BS_ERR_FORMAT = 9,
    BS_ERR_IO = 10,
    BS_ERR_INVALID_ARGUMENT = 100, /* NULL pointer or misuse of this interface */
    BS_ERR_INTERNAL = 101
} bs_status;

BS_API const char* bs_status_name(bs_status status);

/* Thread-local message describing this thread's most recent failure; the
 * empty string if there has been none. */
BS_API const char* bs_last_error_message(void);

/* ------------------------------------------------------------------ */
/* Density-based aggregation over a plain array of predictions         */
/* ------------------------------------------------------------------ */

typedef struct bs_kde_config {
    uint32_t grid_divisor;          /* grid step = range / grid_divisor */
    double bandwidth_divisor;       /* kernel width h = sigma / bandwidth_divisor */
    double window_half_width_factor; /* kernel truncated at +- factor * sigma */
} bs_kde_config;

BS_API void bs_kde_config_default(bs_kde_config* config);

/* Representative value (density-curve argmax) and its score in (0, 1].
 * Identical values short-circuit to (value, 1.0). */
BS_API bs_status bs_bagging_score(const double* values, size_t n,
                                  const bs_kde_config* config,
                                  double* representative, double* score);

BS_API bs_status bs_aggregate_mean(const double* values, size_t n, double* out);
BS_API bs_status bs_aggregate_median(const double* values, size_t n, double* out);
BS_API bs_status bs_population_std(const double* values, size_t n, double* out);

/* Full sampled density curve. */
typedef struct bs_density bs_density;

BS_API bs_status bs_estimate_density(const double* values, size_t n,
                                     const bs_kde_config* config, bs_density** out);
BS_API size_t bs_density_size(const bs_density* grid);
BS_API bs_status bs_density_at(const bs_density* grid, size_t index, double* position,
                               double* density);
BS_API bs_status bs_density_info(const bs_density* grid, double* sigma, double* step);
BS_API void bs_density_free(bs_density* grid);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */
/* ------------------------------------------------------------------ */

typedef struct bs_dataset bs_dataset;

/* Numeric CSV with a header row, last column the target. */
BS_API bs_status bs_dataset_load_csv(const char* path, bs_dataset** out);

/* The canonical compressive-strength table: exactly 9 columns, 1030 rows.
 * checksum_ok (optional) receives 0 if a sibling ".checksum" pin exists and
 * does not match, 1 otherwise. */
BS_API bs_status bs_dataset_load_concrete(const char* path, int* checksum_ok,
                                          bs_dataset** out);

/* Seeded disjoint split; |test| = round(test_fraction * rows). */
BS_API bs_status bs_dataset_split(const bs_dataset* data, uint32_t seed,
                                  double test_fraction, bs_dataset** train,
                                  bs_dataset** test);

/* 1-D synthetic data from a registered ground-truth function, sampled
 * uniformly on [domain_lo, domain_hi] minus n_gaps exclusion intervals
 * (gap_bounds holds lo,hi pairs; may be NULL when n_gaps is 0). */
BS_API bs_status bs_dataset_synthetic(const char* function_id, double domain_lo,
                                      double domain_hi, size_t n_train, double noise_std,
                                      const double* gap_bounds, size_t n_gaps,
                                      uint32_t seed, bs_dataset** out);

/* Exact ground truth of a registered synthetic function. */
BS_API bs_status bs_synthetic_truth(const char* function_id, double x, double* out);

BS_API size_t bs_dataset_rows(const bs_dataset* data);
BS_API size_t bs_dataset_cols(const bs_dataset* data);

/* Copies row i's features (cols doubles) into features_out and, when
 * target_out is non-NULL, its target value. features_out may be NULL to
 * fetch only the target. */
BS_API bs_status bs_dataset_row(const bs_dataset* data, size_t index,
                                double* features_out, double* target_out);

BS_API void bs_dataset_free(bs_dataset* data);

/* ------------------------------------------------------------------ */
/* Ensemble models                                                     */
/* ------------------------------------------------------------------ */

typedef struct bs_model bs_model;

typedef struct bs_train_config {
    uint32_t epochs;        /* upper bound; early stopping may end sooner */
    double learning_rate;
    uint32_t batch_size;
    double val_fraction;    /* per-member validation share */
    uint32_t patience;      /* epochs without validation improvement */
} bs_train_config;

BS_API void bs_train_config_default(bs_train_config* config);

/* Trains n_members networks of the published architecture on data; member i
 * uses seed seed_base + i (i from 1). n_threads 0 means one worker per
 * hardware thread; the result is identical for any thread count. */
BS_API bs_status bs_model_train(const bs_dataset* data, size_t n_members,
                                const bs_train_config* config, size_t n_threads,
                                uint32_t seed_base, bs_model** out);

BS_API bs_status bs_model_save(const bs_model* model, const char* path);
BS_API bs_status bs_model_load(const char* path, bs_model** out);

BS_API size_t bs_model_members(const bs_model* model);
BS_API size_t bs_model_input_dim(const bs_model* model);

/* Every member's de-standardized prediction for one feature row; out_values
 * must hold bs_model_members() doubles. */
BS_API bs_status bs_model_predict(const bs_model* model, const double* x,
                                  size_t n_features, double* out_values);

/* The three aggregators plus the score for one feature row. Any output
 * pointer may be NULL to skip it. */
BS_API bs_status bs_model_aggregates(const bs_model* model, const double* x,
                                     size_t n_features, const bs_kde_config* config,
                                     double* mean, double* median,
                                     double* representative, double* score);

/* Density curve of the model's prediction set for one feature row. */
BS_API bs_status bs_model_density(const bs_model* model, const double* x,
                                  size_t n_features, const bs_kde_config* config,
                                  bs_density** out);

BS_API void bs_model_free(bs_model* model);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */
/* ------------------------------------------------------------------ */

typedef struct bs_eval_scores {
    double r2;
    double rmse;
    double mape; /* percent */
    double mae;
} bs_eval_scores;

typedef struct bs_eval_report {
    bs_eval_scores mean;
    bs_eval_scores median;
    bs_eval_scores bs; /* density-mode representative */
    size_t n_test;
} bs_eval_report;

BS_API bs_status bs_model_evaluate(const bs_model* model, const bs_dataset* test,
                                   const bs_kde_config* config, bs_eval_report* out);

/* Renderings of a report; *out is NUL-terminated and released with
 * bs_string_free. The CSV uses full precision, the text 6 significant
 * digits. */
BS_API bs_status bs_report_render_text(const bs_eval_report* report, char** out);
BS_API bs_status bs_report_render_csv(const bs_eval_report* report, char** out);
BS_API void bs_string_free(char* s);

/* Plain-array metrics. mape is in percent; a zero true value is an error. */
BS_API bs_status bs_metric_r2(const double* y_true, const double* y_pred, size_t n,
                              double* out);
BS_API bs_status bs_metric_rmse(const double* y_true, const double* y_pred, size_t n,
                                double* out);
BS_API bs_status bs_metric_mape(const double* y_true, const double* y_pred, size_t n,
                                double* out);
BS_API bs_status bs_metric_mae(const double* y_true, const double* y_pred, size_t n,
                               double* out);

/* FNV-1a 64 of a file's bytes; used to pin inputs in run manifests. */
BS_API bs_status bs_fnv1a64_file(const char* path, uint64_t* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BAGSCORE_H */
