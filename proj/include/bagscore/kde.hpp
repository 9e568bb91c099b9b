#pragma once

// Density-based aggregation of an ensemble's prediction set: a truncated
// Gaussian kernel is averaged over a uniform grid spanning the predictions,
// and the mode of the resulting curve gives the representative value together
// with a confidence score in (0, 1]. MEAN and MEDIAN baselines live here too.

#include <cstdint>
#include <vector>

#include "bagscore/errors.hpp"

namespace bagscore {

// Raw ensemble outputs for one input point. source_seeds is optional; when
// non-empty it is parallel to values and records which member produced each
// prediction.
struct PredictionSet {
    std::vector<double> values;
    std::vector<std::uint32_t> source_seeds;
};

// Grid and kernel geometry. The defaults are the published constants:
// grid step = range/1000, kernel width h = sigma/6, truncation window
// +-sigma/2 around each grid point.
struct KdeConfig {
    std::uint32_t grid_divisor = 1000;
    double bandwidth_divisor = 6.0;
    double window_half_width_factor = 0.5;
};

// Sampled density curve. positions runs from min(values) - sigma upward in
// uniform steps while position <= max(values) + sigma; densities is parallel
// and each entry lies in [0, 1].
struct DensityGrid {
    std::vector<double> positions;
    std::vector<double> densities;
    double sigma = 0.0;
    double step = 0.0;
};

struct BaggingResult {
    double representative = 0.0;  // grid position of the density maximum
    double score = 0.0;           // the maximum itself, in (0, 1]
};

// Population standard deviation (divisor n). Single element -> 0.
double population_std(const PredictionSet& values);

// Gaussian kernel exp(-(x - x_mu)^2 / (2 h_k^2)); 1 exactly when x == x_mu.
double kernel(double x, double x_mu, double h_k);

// Sweeps the grid and averages the truncated kernel over the predictions
// within +-sigma/2 of each grid point. Requires at least two distinct values;
// zero spread raises errc::degenerate_spread (callers wanting the identical-
// predictions convention should use bagging_score).
DensityGrid estimate_density(const PredictionSet& values, const KdeConfig& config = {});

// Representative value and score. Identical predictions (or a single one)
// short-circuit to (value, 1.0); otherwise the density maximum is taken,
// ties broken toward the lowest grid position.
BaggingResult bagging_score(const PredictionSet& values, const KdeConfig& config = {});

double aggregate_mean(const PredictionSet& values);
double aggregate_median(const PredictionSet& values);

}  // namespace bagscore
