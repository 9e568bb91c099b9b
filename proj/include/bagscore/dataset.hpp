#pragma once

// Tabular regression data: CSV ingestion, seeded train/test splitting, and
// z-score standardization. Datasets are immutable after construction and
// freely shareable across threads.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bagscore/errors.hpp"

namespace bagscore {

struct Dataset {
    std::vector<double> features;  // row-major, n_rows x n_cols
    std::vector<double> targets;
    std::vector<std::string> feature_names;
    std::string target_name;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * n_cols, n_cols};
    }
};

// Generic numeric CSV with a header row; the last column is the target.
// Blank lines are skipped; any non-numeric cell raises errc::ingestion with
// 1-based line and column coordinates.
Dataset load_csv(const std::string& path);

// Canonical compressive-strength table: exactly 9 numeric columns and 1030
// data rows, anything else is an ingestion error. If a sibling pin file
// "<path>.checksum" exists (FNV-1a 64 hex), the CSV bytes are verified
// against it; a mismatch warns on stderr and clears *checksum_ok but does
// not fail the load.
Dataset load_concrete(const std::string& path, bool* checksum_ok = nullptr);

// Disjoint covering split with |test| = round(test_fraction * n_rows),
// deterministic in seed. Row order within each part follows the original.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, std::uint32_t seed,
                                             double test_fraction = 0.1);

// Per-column mean and scale (population convention). Constant columns get
// scale 1 so the transform stays total.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> scale;
};

struct ScalerPair {
    Scaler features;
    double target_mean = 0.0;
    double target_scale = 1.0;
};

ScalerPair fit_scaler(const Dataset& data);
Dataset apply_scaler(const Dataset& data, const ScalerPair& scalers);
Dataset invert_scaler(const Dataset& data, const ScalerPair& scalers);

// FNV-1a 64-bit over a byte stream; used to pin input files in manifests and
// the concrete checksum advisory.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64_file(const std::string& path);
std::string fnv1a64_hex(std::uint64_t value);

}  // namespace bagscore
