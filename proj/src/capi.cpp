#include "bagscore/bagscore.h"

#include <cstring>
#include <new>
#include <string>

#include "bagscore/dataset.hpp"
#include "bagscore/ensemble.hpp"
#include "bagscore/kde.hpp"
#include "bagscore/metrics.hpp"
#include "bagscore/synthetic.hpp"

struct bs_density {
    bagscore::DensityGrid grid;
};
struct bs_dataset {
    bagscore::Dataset data;
};
struct bs_model {
    bagscore::EnsembleModel model;
};

namespace {

using bagscore::errc;

thread_local std::string t_last_error;

bs_status set_error(bs_status status, const std::string& message) {
    t_last_error = message;
    return status;
}

bs_status arg_error(const char* what) { return set_error(BS_ERR_INVALID_ARGUMENT, what); }

// errc values 1..10 are mirrored one-to-one into bs_status.
static_assert(static_cast<int>(errc::invalid_input) == BS_ERR_INVALID_INPUT);
static_assert(static_cast<int>(errc::invalid_bandwidth) == BS_ERR_INVALID_BANDWIDTH);
static_assert(static_cast<int>(errc::degenerate_spread) == BS_ERR_DEGENERATE_SPREAD);
static_assert(static_cast<int>(errc::dimension_mismatch) == BS_ERR_DIMENSION_MISMATCH);
static_assert(static_cast<int>(errc::ingestion) == BS_ERR_INGESTION);
static_assert(static_cast<int>(errc::training_diverged) == BS_ERR_TRAINING_DIVERGED);
static_assert(static_cast<int>(errc::undefined_variance) == BS_ERR_UNDEFINED_VARIANCE);
static_assert(static_cast<int>(errc::division_by_zero) == BS_ERR_DIVISION_BY_ZERO);
static_assert(static_cast<int>(errc::format) == BS_ERR_FORMAT);
static_assert(static_cast<int>(errc::io) == BS_ERR_IO);

template <typename Fn>
bs_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const bagscore::Error& e) {
        return set_error(static_cast<bs_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(BS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(BS_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(BS_ERR_INTERNAL, "unknown failure");
    }
}

bagscore::PredictionSet to_set(const double* values, size_t n) {
    return {std::vector<double>(values, values + n), {}};
}

bagscore::KdeConfig to_kde(const bs_kde_config* config) {
    if (config == nullptr) return {};
    bagscore::KdeConfig out;
    out.grid_divisor = config->grid_divisor;
    out.bandwidth_divisor = config->bandwidth_divisor;
    out.window_half_width_factor = config->window_half_width_factor;
    return out;
}

bagscore::TrainConfig to_train(const bs_train_config* config) {
    if (config == nullptr) return {};
    bagscore::TrainConfig out;
    out.epochs = config->epochs;
    out.learning_rate = config->learning_rate;
    out.batch_size = config->batch_size;
    out.val_fraction = config->val_fraction;
    out.patience = config->patience;
    return out;
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* bs_status_name(bs_status status) {
    switch (status) {
        case BS_OK: return "ok";
        case BS_ERR_INVALID_INPUT: return "invalid_input";
        case BS_ERR_INVALID_BANDWIDTH: return "invalid_bandwidth";
        case BS_ERR_DEGENERATE_SPREAD: return "degenerate_spread";
        case BS_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
        case BS_ERR_INGESTION: return "ingestion";
        case BS_ERR_TRAINING_DIVERGED: return "training_diverged";
        case BS_ERR_UNDEFINED_VARIANCE: return "undefined_variance";
        case BS_ERR_DIVISION_BY_ZERO: return "division_by_zero";
        case BS_ERR_FORMAT: return "format";
        case BS_ERR_IO: return "io";
        case BS_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case BS_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* bs_last_error_message(void) { return t_last_error.c_str(); }

void bs_kde_config_default(bs_kde_config* config) {
    if (config == nullptr) return;
    const bagscore::KdeConfig defaults;
    config->grid_divisor = defaults.grid_divisor;
    config->bandwidth_divisor = defaults.bandwidth_divisor;
    config->window_half_width_factor = defaults.window_half_width_factor;
}

void bs_train_config_default(bs_train_config* config) {
    if (config == nullptr) return;
    const bagscore::TrainConfig defaults;
    config->epochs = defaults.epochs;
    config->learning_rate = defaults.learning_rate;
    config->batch_size = defaults.batch_size;
    config->val_fraction = defaults.val_fraction;
    config->patience = defaults.patience;
}

bs_status bs_bagging_score(const double* values, size_t n, const bs_kde_config* config,
                           double* representative, double* score) {
    if (values == nullptr) return arg_error("values is NULL");
    if (representative == nullptr || score == nullptr) {
        return arg_error("representative/score output is NULL");
    }
    return guarded([&] {
        const bagscore::BaggingResult r = bagscore::bagging_score(to_set(values, n), to_kde(config));
        *representative = r.representative;
        *score = r.score;
        return BS_OK;
    });
}

bs_status bs_aggregate_mean(const double* values, size_t n, double* out) {
    if (values == nullptr || out == nullptr) return arg_error("values/out is NULL");
    return guarded([&] {
        *out = bagscore::aggregate_mean(to_set(values, n));
        return BS_OK;
    });
}

bs_status bs_aggregate_median(const double* values, size_t n, double* out) {
    if (values == nullptr || out == nullptr) return arg_error("values/out is NULL");
    return guarded([&] {
        *out = bagscore::aggregate_median(to_set(values, n));
        return BS_OK;
    });
}

bs_status bs_population_std(const double* values, size_t n, double* out) {
    if (values == nullptr || out == nullptr) return arg_error("values/out is NULL");
    return guarded([&] {
        *out = bagscore::population_std(to_set(values, n));
        return BS_OK;
    });
}

bs_status bs_estimate_density(const double* values, size_t n, const bs_kde_config* config,
                              bs_density** out) {
    if (values == nullptr || out == nullptr) return arg_error("values/out is NULL");
    *out = nullptr;
    return guarded([&] {
        auto grid = bagscore::estimate_density(to_set(values, n), to_kde(config));
        *out = new bs_density{std::move(grid)};
        return BS_OK;
    });
}

size_t bs_density_size(const bs_density* grid) {
    return grid == nullptr ? 0 : grid->grid.positions.size();
}

bs_status bs_density_at(const bs_density* grid, size_t index, double* position,
                        double* density) {
    if (grid == nullptr) return arg_error("grid is NULL");
    if (index >= grid->grid.positions.size()) return arg_error("grid index out of range");
    if (position != nullptr) *position = grid->grid.positions[index];
    if (density != nullptr) *density = grid->grid.densities[index];
    return BS_OK;
}

bs_status bs_density_info(const bs_density* grid, double* sigma, double* step) {
    if (grid == nullptr) return arg_error("grid is NULL");
    if (sigma != nullptr) *sigma = grid->grid.sigma;
    if (step != nullptr) *step = grid->grid.step;
    return BS_OK;
}

void bs_density_free(bs_density* grid) { delete grid; }

bs_status bs_dataset_load_csv(const char* path, bs_dataset** out) {
    if (path == nullptr || out == nullptr) return arg_error("path/out is NULL");
    *out = nullptr;
    return guarded([&] {
        *out = new bs_dataset{bagscore::load_csv(path)};
        return BS_OK;
    });
}

bs_status bs_dataset_load_concrete(const char* path, int* checksum_ok, bs_dataset** out) {
    if (path == nullptr || out == nullptr) return arg_error("path/out is NULL");
    *out = nullptr;
    return guarded([&] {
        bool ok = true;
        *out = new bs_dataset{bagscore::load_concrete(path, &ok)};
        if (checksum_ok != nullptr) *checksum_ok = ok ? 1 : 0;
        return BS_OK;
    });
}

bs_status bs_dataset_split(const bs_dataset* data, uint32_t seed, double test_fraction,
                           bs_dataset** train, bs_dataset** test) {
    if (data == nullptr || train == nullptr || test == nullptr) {
        return arg_error("data/train/test is NULL");
    }
    *train = nullptr;
    *test = nullptr;
    return guarded([&] {
        auto [tr, te] = bagscore::train_test_split(data->data, seed, test_fraction);
        *train = new bs_dataset{std::move(tr)};
        *test = new bs_dataset{std::move(te)};
        return BS_OK;
    });
}

bs_status bs_dataset_synthetic(const char* function_id, double domain_lo, double domain_hi,
                               size_t n_train, double noise_std, const double* gap_bounds,
                               size_t n_gaps, uint32_t seed, bs_dataset** out) {
    if (function_id == nullptr || out == nullptr) return arg_error("function_id/out is NULL");
    if (n_gaps > 0 && gap_bounds == nullptr) return arg_error("gap_bounds is NULL");
    *out = nullptr;
    return guarded([&] {
        bagscore::SyntheticSpec spec;
        spec.function_id = function_id;
        spec.domain_lo = domain_lo;
        spec.domain_hi = domain_hi;
        spec.n_train = n_train;
        spec.noise_std = noise_std;
        for (size_t i = 0; i < n_gaps; ++i) {
            spec.gap_intervals.emplace_back(gap_bounds[2 * i], gap_bounds[2 * i + 1]);
        }
        *out = new bs_dataset{bagscore::generate_synthetic(spec, seed)};
        return BS_OK;
    });
}

bs_status bs_synthetic_truth(const char* function_id, double x, double* out) {
    if (function_id == nullptr || out == nullptr) return arg_error("function_id/out is NULL");
    return guarded([&] {
        bagscore::SyntheticSpec spec;
        spec.function_id = function_id;
        *out = bagscore::synthetic_truth(spec, x);
        return BS_OK;
    });
}

size_t bs_dataset_rows(const bs_dataset* data) {
    return data == nullptr ? 0 : data->data.n_rows;
}

size_t bs_dataset_cols(const bs_dataset* data) {
    return data == nullptr ? 0 : data->data.n_cols;
}

bs_status bs_dataset_row(const bs_dataset* data, size_t index, double* features_out,
                         double* target_out) {
    if (data == nullptr) return arg_error("data is NULL");
    if (index >= data->data.n_rows) return arg_error("row index out of range");
    if (features_out != nullptr) {
        const auto row = data->data.row(index);
        std::memcpy(features_out, row.data(), row.size() * sizeof(double));
    }
    if (target_out != nullptr) *target_out = data->data.targets[index];
    return BS_OK;
}

void bs_dataset_free(bs_dataset* data) { delete data; }

bs_status bs_model_train(const bs_dataset* data, size_t n_members,
                         const bs_train_config* config, size_t n_threads,
                         uint32_t seed_base, bs_model** out) {
    if (data == nullptr || out == nullptr) return arg_error("data/out is NULL");
    *out = nullptr;
    return guarded([&] {
        const bagscore::MlpSpec spec = bagscore::default_mlp_spec(data->data.n_cols);
        auto model = bagscore::train_ensemble(spec, n_members, data->data, to_train(config),
                                              n_threads, seed_base);
        *out = new bs_model{std::move(model)};
        return BS_OK;
    });
}

bs_status bs_model_save(const bs_model* model, const char* path) {
    if (model == nullptr || path == nullptr) return arg_error("model/path is NULL");
    return guarded([&] {
        bagscore::save_model(model->model, path);
        return BS_OK;
    });
}

bs_status bs_model_load(const char* path, bs_model** out) {
    if (path == nullptr || out == nullptr) return arg_error("path/out is NULL");
    *out = nullptr;
    return guarded([&] {
        *out = new bs_model{bagscore::load_model(path)};
        return BS_OK;
    });
}

size_t bs_model_members(const bs_model* model) {
    return model == nullptr ? 0 : model->model.members.size();
}

size_t bs_model_input_dim(const bs_model* model) {
    return model == nullptr ? 0 : model->model.spec.input_dim;
}

bs_status bs_model_predict(const bs_model* model, const double* x, size_t n_features,
                           double* out_values) {
    if (model == nullptr || x == nullptr || out_values == nullptr) {
        return arg_error("model/x/out_values is NULL");
    }
    return guarded([&] {
        const auto set = bagscore::predict_ensemble(model->model, {x, n_features});
        std::memcpy(out_values, set.values.data(), set.values.size() * sizeof(double));
        return BS_OK;
    });
}

bs_status bs_model_aggregates(const bs_model* model, const double* x, size_t n_features,
                              const bs_kde_config* config, double* mean, double* median,
                              double* representative, double* score) {
    if (model == nullptr || x == nullptr) return arg_error("model/x is NULL");
    return guarded([&] {
        const auto set = bagscore::predict_ensemble(model->model, {x, n_features});
        if (mean != nullptr) *mean = bagscore::aggregate_mean(set);
        if (median != nullptr) *median = bagscore::aggregate_median(set);
        if (representative != nullptr || score != nullptr) {
            const auto r = bagscore::bagging_score(set, to_kde(config));
            if (representative != nullptr) *representative = r.representative;
            if (score != nullptr) *score = r.score;
        }
        return BS_OK;
    });
}

bs_status bs_model_density(const bs_model* model, const double* x, size_t n_features,
                           const bs_kde_config* config, bs_density** out) {
    if (model == nullptr || x == nullptr || out == nullptr) {
        return arg_error("model/x/out is NULL");
    }
    *out = nullptr;
    return guarded([&] {
        const auto set = bagscore::predict_ensemble(model->model, {x, n_features});
        *out = new bs_density{bagscore::estimate_density(set, to_kde(config))};
        return BS_OK;
    });
}

void bs_model_free(bs_model* model) { delete model; }

bs_status bs_model_evaluate(const bs_model* model, const bs_dataset* test,
                            const bs_kde_config* config, bs_eval_report* out) {
    if (model == nullptr || test == nullptr || out == nullptr) {
        return arg_error("model/test/out is NULL");
    }
    return guarded([&] {
        const auto report = bagscore::evaluate_aggregators(model->model, test->data,
                                                           to_kde(config));
        auto fill = [](bs_eval_scores& dst, const bagscore::AggregatorScores& src) {
            dst.r2 = src.r2;
            dst.rmse = src.rmse;
            dst.mape = src.mape;
            dst.mae = src.mae;
        };
        fill(out->mean, report.mean);
        fill(out->median, report.median);
        fill(out->bs, report.bs);
        out->n_test = report.n_test;
        return BS_OK;
    });
}

bs_status bs_report_render_text(const bs_eval_report* report, char** out) {
    if (report == nullptr || out == nullptr) return arg_error("report/out is NULL");
    *out = nullptr;
    return guarded([&] {
        bagscore::EvalReport r;
        r.mean = {report->mean.r2, report->mean.rmse, report->mean.mape, report->mean.mae};
        r.median = {report->median.r2, report->median.rmse, report->median.mape,
                    report->median.mae};
        r.bs = {report->bs.r2, report->bs.rmse, report->bs.mape, report->bs.mae};
        r.n_test = report->n_test;
        *out = copy_string(bagscore::render_report_text(r));
        return BS_OK;
    });
}

bs_status bs_report_render_csv(const bs_eval_report* report, char** out) {
    if (report == nullptr || out == nullptr) return arg_error("report/out is NULL");
    *out = nullptr;
    return guarded([&] {
        bagscore::EvalReport r;
        r.mean = {report->mean.r2, report->mean.rmse, report->mean.mape, report->mean.mae};
        r.median = {report->median.r2, report->median.rmse, report->median.mape,
                    report->median.mae};
        r.bs = {report->bs.r2, report->bs.rmse, report->bs.mape, report->bs.mae};
        r.n_test = report->n_test;
        *out = copy_string(bagscore::render_report_csv(r));
        return BS_OK;
    });
}

void bs_string_free(char* s) { delete[] s; }

bs_status bs_metric_r2(const double* y_true, const double* y_pred, size_t n, double* out) {
    if (y_true == nullptr || y_pred == nullptr || out == nullptr) {
        return arg_error("y_true/y_pred/out is NULL");
    }
    return guarded([&] {
        *out = bagscore::r2({y_true, n}, {y_pred, n});
        return BS_OK;
    });
}

bs_status bs_metric_rmse(const double* y_true, const double* y_pred, size_t n, double* out) {
    if (y_true == nullptr || y_pred == nullptr || out == nullptr) {
        return arg_error("y_true/y_pred/out is NULL");
    }
    return guarded([&] {
        *out = bagscore::rmse({y_true, n}, {y_pred, n});
        return BS_OK;
    });
}

bs_status bs_metric_mape(const double* y_true, const double* y_pred, size_t n, double* out) {
    if (y_true == nullptr || y_pred == nullptr || out == nullptr) {
        return arg_error("y_true/y_pred/out is NULL");
    }
    return guarded([&] {
        *out = bagscore::mape({y_true, n}, {y_pred, n});
        return BS_OK;
    });
}

bs_status bs_metric_mae(const double* y_true, const double* y_pred, size_t n, double* out) {
    if (y_true == nullptr || y_pred == nullptr || out == nullptr) {
        return arg_error("y_true/y_pred/out is NULL");
    }
    return guarded([&] {
        *out = bagscore::mae({y_true, n}, {y_pred, n});
        return BS_OK;
    });
}

bs_status bs_fnv1a64_file(const char* path, uint64_t* out) {
    if (path == nullptr || out == nullptr) return arg_error("path/out is NULL");
    return guarded([&] {
        *out = bagscore::fnv1a64_file(path);
        return BS_OK;
    });
}

} /* extern "C" */
