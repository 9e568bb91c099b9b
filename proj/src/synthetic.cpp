#include "bagscore/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "bagscore/rng.hpp"

namespace bagscore {

namespace {

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::string, std::function<double(double)>>& registry() {
    static std::map<std::string, std::function<double(double)>> fns{
        {"x_sin_x", [](double x) { return x * std::sin(x); }},
    };
    return fns;
}

std::function<double(double)> lookup(const std::string& id) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = registry().find(id);
    if (it == registry().end()) {
        fail(errc::invalid_input, "unknown synthetic function id '" + id + "'");
    }
    return it->second;
}

// The sampleable part of the domain: the gaps removed, as a sorted list of
// disjoint intervals.
std::vector<std::pair<double, double>> complement_segments(const SyntheticSpec& spec) {
    std::vector<std::pair<double, double>> gaps = spec.gap_intervals;
    std::sort(gaps.begin(), gaps.end());
    std::vector<std::pair<double, double>> segments;
    double cursor = spec.domain_lo;
    for (const auto& [a, b] : gaps) {
        if (a > cursor) segments.emplace_back(cursor, a);
        cursor = std::max(cursor, b);
    }
    if (cursor < spec.domain_hi) segments.emplace_back(cursor, spec.domain_hi);
    return segments;
}

}  // namespace

void validate_synthetic_spec(const SyntheticSpec& spec) {
    if (!std::isfinite(spec.domain_lo) || !std::isfinite(spec.domain_hi) ||
        !(spec.domain_lo < spec.domain_hi)) {
        fail(errc::invalid_input, "synthetic domain must be a finite interval");
    }
    if (spec.n_train < 10) fail(errc::invalid_input, "n_train must be at least 10");
    if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.noise_std)) {
        fail(errc::invalid_input, "noise_std must be finite and non-negative");
    }
    for (const auto& [a, b] : spec.gap_intervals) {
        if (!(a < b) || a < spec.domain_lo || b > spec.domain_hi) {
            fail(errc::invalid_input, "gap intervals must be non-empty and lie in the domain");
        }
    }
    double sampleable = 0.0;
    for (const auto& [a, b] : complement_segments(spec)) sampleable += b - a;
    if (!(sampleable > 0.0)) {
        fail(errc::invalid_input, "gaps leave nothing of the domain to sample");
    }
    lookup(spec.function_id);  // raises on an unknown id
}

double synthetic_truth(const SyntheticSpec& spec, double x) {
    return lookup(spec.function_id)(x);
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint32_t seed) {
    validate_synthetic_spec(spec);
    const auto fn = lookup(spec.function_id);
    const auto segments = complement_segments(spec);
    double total = 0.0;
    for (const auto& [a, b] : segments) total += b - a;

    // Maps u in [0,1) onto the concatenated sampleable segments.
    auto place = [&](double u) {
        double t = u * total;
        for (const auto& [a, b] : segments) {
            const double len = b - a;
            if (t <= len) return std::min(a + t, b);
            t -= len;
        }
        return segments.back().second;
    };

    rng::Engine gen(seed);
    Dataset data;
    data.n_rows = spec.n_train;
    data.n_cols = 1;
    data.feature_names = {"x"};
    data.target_name = "y";
    data.features.reserve(spec.n_train);
    data.targets.reserve(spec.n_train);
    for (std::size_t i = 0; i < spec.n_train; ++i) {
        const double x = place(rng::uniform01(gen));
        const double noise = rng::gaussian(gen) * spec.noise_std;
        data.features.push_back(x);
        data.targets.push_back(fn(x) + noise);
    }
    return data;
}

void register_synthetic_function(const std::string& id, std::function<double(double)> fn) {
    if (!fn) fail(errc::invalid_input, "cannot register an empty function");
    std::lock_guard<std::mutex> lock(registry_mutex());
    registry()[id] = std::move(fn);
}

}  // namespace bagscore
