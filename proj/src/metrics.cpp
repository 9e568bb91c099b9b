#include "bagscore/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace bagscore {

namespace {

void require_paired(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.empty()) fail(errc::invalid_input, "metric input is empty");
    if (y_true.size() != y_pred.size()) {
        fail(errc::invalid_input, "metric inputs have lengths " +
                                      std::to_string(y_true.size()) + " and " +
                                      std::to_string(y_pred.size()));
    }
}

}  // namespace

double r2(std::span<const double> y_true, std::span<const double> y_pred) {
    require_paired(y_true, y_pred);
    double mean = 0.0;
    for (double v : y_true) mean += v;
    mean /= static_cast<double>(y_true.size());

    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double r = y_true[i] - y_pred[i];
        const double d = y_true[i] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (!(ss_tot > 0.0)) {
        fail(errc::undefined_variance, "r2 is undefined for a constant target");
    }
    return 1.0 - ss_res / ss_tot;
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
    require_paired(y_true, y_pred);
    double acc = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double r = y_true[i] - y_pred[i];
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(y_true.size()));
}

double mape(std::span<const double> y_true, std::span<const double> y_pred) {
    require_paired(y_true, y_pred);
    double acc = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 0.0) {
            fail(errc::division_by_zero,
                 "mape is undefined: true value at row " + std::to_string(i + 1) + " is zero");
        }
        acc += std::abs(y_true[i] - y_pred[i]) / std::abs(y_true[i]);
    }
    return 100.0 * acc / static_cast<double>(y_true.size());
}

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
    require_paired(y_true, y_pred);
    double acc = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) acc += std::abs(y_true[i] - y_pred[i]);
    return acc / static_cast<double>(y_true.size());
}

EvalReport evaluate_aggregators(const EnsembleModel& model, const Dataset& test,
                                const KdeConfig& config) {
    if (test.n_rows == 0) fail(errc::invalid_input, "test set is empty");

    std::vector<double> pred_mean(test.n_rows), pred_median(test.n_rows),
        pred_bs(test.n_rows);
    for (std::size_t i = 0; i < test.n_rows; ++i) {
        const PredictionSet set = predict_ensemble(model, test.row(i));
        pred_mean[i] = aggregate_mean(set);
        pred_median[i] = aggregate_median(set);
        pred_bs[i] = bagging_score(set, config).representative;
    }

    auto score = [&](const std::vector<double>& pred) {
        AggregatorScores s;
        s.r2 = r2(test.targets, pred);
        s.rmse = rmse(test.targets, pred);
        s.mape = mape(test.targets, pred);
        s.mae = mae(test.targets, pred);
        return s;
    };

    EvalReport report;
    report.mean = score(pred_mean);
    report.median = score(pred_median);
    report.bs = score(pred_bs);
    report.n_test = test.n_rows;
    return report;
}

namespace {

void append_text_row(std::string& out, const char* tag, const AggregatorScores& s) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-8s %11.6g %11.6g %11.6g %11.6g\n", tag, s.r2, s.rmse,
                  s.mape, s.mae);
    out += buf;
}

void append_csv_row(std::string& out, const char* tag, const AggregatorScores& s) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g\n", tag, s.r2, s.rmse, s.mape,
                  s.mae);
    out += buf;
}

}  // namespace

std::string render_report_text(const EvalReport& report) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-8s %11s %11s %11s %11s\n", "", "r2", "rmse",
                  "mape(%)", "mae");
    out += buf;
    append_text_row(out, "mean", report.mean);
    append_text_row(out, "median", report.median);
    append_text_row(out, "bs", report.bs);
    std::snprintf(buf, sizeof(buf), "n_test = %zu\n", report.n_test);
    out += buf;
    return out;
}

std::string render_report_csv(const EvalReport& report) {
    std::string out = "aggregator,r2,rmse,mape,mae\n";
    append_csv_row(out, "mean", report.mean);
    append_csv_row(out, "median", report.median);
    append_csv_row(out, "bs", report.bs);
    return out;
}

}  // namespace bagscore
