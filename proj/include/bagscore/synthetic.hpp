#pragma once

// Seeded 1-D synthetic regression data with optional exclusion gaps in the
// sampling domain. Querying inside a gap forces the ensemble to extrapolate,
// which is where the aggregators disagree. The built-in ground truth is
// f(x) = x*sin(x); further functions can be registered by id.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bagscore/dataset.hpp"

namespace bagscore {

struct SyntheticSpec {
    std::string function_id = "x_sin_x";
    double domain_lo = -15.0;
    double domain_hi = 15.0;
    std::size_t n_train = 200;
    double noise_std = 0.0;
    std::vector<std::pair<double, double>> gap_intervals;  // excluded from sampling
};

void validate_synthetic_spec(const SyntheticSpec& spec);

// Exact ground truth of the spec's function at x.
double synthetic_truth(const SyntheticSpec& spec, double x);

// n_train points drawn uniformly from the domain minus the gaps, targets
// f(x) plus Gaussian noise of the given standard deviation. For each point
// x is drawn first, then its noise, so prefixes agree across sizes.
// Deterministic in seed.
Dataset generate_synthetic(const SyntheticSpec& spec, std::uint32_t seed);

// Registers (or replaces) a ground-truth function under an id so specs can
// refer to it. Thread-safe.
void register_synthetic_function(const std::string& id,
                                 std::function<double(double)> fn);

}  // namespace bagscore
