#pragma once

// Regression quality measures (r2, rmse, mape, mae) and the three-aggregator
// comparison report that scores the density-mode representative against the
// mean and median of the same prediction sets.

#include <span>
#include <string>

#include "bagscore/dataset.hpp"
#include "bagscore/ensemble.hpp"
#include "bagscore/kde.hpp"

namespace bagscore {

// Coefficient of determination 1 - SS_res/SS_tot; negative for models worse
// than the mean predictor. Constant y_true raises errc::undefined_variance.
double r2(std::span<const double> y_true, std::span<const double> y_pred);

// Root mean squared error in target units.
double rmse(std::span<const double> y_true, std::span<const double> y_pred);

// Mean absolute percentage error, in percent (x100). Any zero true value
// raises errc::division_by_zero naming the offending row.
double mape(std::span<const double> y_true, std::span<const double> y_pred);

// Mean absolute error in target units.
double mae(std::span<const double> y_true, std::span<const double> y_pred);

struct AggregatorScores {
    double r2 = 0.0;
    double rmse = 0.0;
    double mape = 0.0;
    double mae = 0.0;
};

struct EvalReport {
    AggregatorScores mean;
    AggregatorScores median;
    AggregatorScores bs;  // density-mode representative
    std::size_t n_test = 0;
};

// Runs every test row through the model once, aggregates the resulting
// prediction set three ways, and scores each aggregator with all four
// metrics. Metric failures carry the offending row in their message.
EvalReport evaluate_aggregators(const EnsembleModel& model, const Dataset& test,
                                const KdeConfig& config = {});

// Aligned human-readable table, 6 significant digits.
std::string render_report_text(const EvalReport& report);
// Machine-readable: header "aggregator,r2,rmse,mape,mae", full precision.
std::string render_report_csv(const EvalReport& report);

}  // namespace bagscore
