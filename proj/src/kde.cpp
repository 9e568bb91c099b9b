#include "bagscore/kde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bagscore {

namespace {

void require_finite_nonempty(const std::vector<double>& values) {
    if (values.empty()) fail(errc::invalid_input, "prediction set is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            fail(errc::invalid_input,
                 "prediction set contains a non-finite value at index " + std::to_string(i));
        }
    }
}

void require_valid(const KdeConfig& config) {
    if (config.grid_divisor == 0) {
        fail(errc::invalid_input, "grid_divisor must be positive");
    }
    if (!(config.bandwidth_divisor > 0.0) || !std::isfinite(config.bandwidth_divisor)) {
        fail(errc::invalid_input, "bandwidth_divisor must be positive and finite");
    }
    if (!(config.window_half_width_factor > 0.0) || !std::isfinite(config.window_half_width_factor)) {
        fail(errc::invalid_input, "window_half_width_factor must be positive and finite");
    }
}

}  // namespace

double population_std(const PredictionSet& values) {
    require_finite_nonempty(values.values);
    const std::size_t n = values.values.size();
    double sum = 0.0;
    for (double v : values.values) sum += v;
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (double v : values.values) {
        const double d = v - mean;
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(n));
}

double kernel(double x, double x_mu, double h_k) {
    if (!(h_k > 0.0)) fail(errc::invalid_bandwidth, "kernel bandwidth must be positive");
    const double d = x - x_mu;
    return std::exp(-(d * d) / (2.0 * h_k * h_k));
}

DensityGrid estimate_density(const PredictionSet& values, const KdeConfig& config) {
    require_valid(config);
    require_finite_nonempty(values.values);
    if (values.values.size() < 2) {
        fail(errc::invalid_input, "density estimation needs at least two predictions");
    }

    const auto [lo_it, hi_it] = std::minmax_element(values.values.begin(), values.values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) {
        fail(errc::degenerate_spread, "all predictions are identical; density grid undefined");
    }

    const double sigma = population_std(values);
    const double h = sigma / config.bandwidth_divisor;
    const double half_window = sigma * config.window_half_width_factor;
    const double step = (hi - lo) / static_cast<double>(config.grid_divisor);
    const double start = lo - sigma;
    const double end = hi + sigma;
    if (start + step == start) {
        fail(errc::invalid_input, "grid step vanishes at this magnitude");
    }

    std::vector<double> sorted = values.values;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    DensityGrid grid;
    grid.sigma = sigma;
    grid.step = step;
    // 2*grid_divisor + 2 bounds the point count: sigma <= range/2 for any set.
    grid.positions.reserve(2 * config.grid_divisor + 2);
    grid.densities.reserve(2 * config.grid_divisor + 2);

    for (std::size_t i = 0;; ++i) {
        const double pos = start + static_cast<double>(i) * step;
        if (pos > end) break;
        const auto first = std::lower_bound(sorted.begin(), sorted.end(), pos - half_window);
        const auto last = std::upper_bound(first, sorted.end(), pos + half_window);
        double sum = 0.0;
        for (auto it = first; it != last; ++it) sum += kernel(*it, pos, h);
        grid.positions.push_back(pos);
        grid.densities.push_back(sum / n);
    }
    return grid;
}

BaggingResult bagging_score(const PredictionSet& values, const KdeConfig& config) {
    require_valid(config);
    require_finite_nonempty(values.values);

    const auto [lo_it, hi_it] = std::minmax_element(values.values.begin(), values.values.end());
    if (values.values.size() == 1 || !(*hi_it > *lo_it)) {
        // Identical predictions: the normalization convention makes the score
        // exactly 1 without touching the grid.
        return BaggingResult{values.values.front(), 1.0};
    }

    const DensityGrid grid = estimate_density(values, config);
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.densities.size(); ++i) {
        if (grid.densities[i] > grid.densities[best]) best = i;
    }
    return BaggingResult{grid.positions[best], grid.densities[best]};
}

double aggregate_mean(const PredictionSet& values) {
    require_finite_nonempty(values.values);
    double sum = 0.0;
    for (double v : values.values) sum += v;
    return sum / static_cast<double>(values.values.size());
}

double aggregate_median(const PredictionSet& values) {
    require_finite_nonempty(values.values);
    std::vector<double> sorted = values.values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace bagscore
