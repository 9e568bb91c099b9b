#pragma once

// A bagging ensemble of identically-shaped MLPs, each trained from its own
// seed, sharing one set of standardization statistics. Covers training,
// prediction-set generation, and a versioned binary model format.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bagscore/dataset.hpp"
#include "bagscore/kde.hpp"
#include "bagscore/mlp.hpp"
#include "bagscore/train.hpp"

namespace bagscore {

struct EnsembleModel {
    MlpSpec spec;
    std::vector<NetworkParams> members;  // ordered by seed
    ScalerPair scalers;                  // fitted once on the training table
};

// Trains n_members networks; member i runs with seed seed_base + i (i from 1,
// so the default base gives seeds 1..n_members). Standardization statistics
// come from `data` as a whole; each member then derives its own train/
// validation split and batch order from its seed. n_threads 0 picks the
// hardware count; any thread count yields bitwise the same model as the
// sequential schedule. A diverging member surfaces as the training-diverged
// error carrying the lowest failing seed.
EnsembleModel train_ensemble(const MlpSpec& spec, std::size_t n_members,
                             const Dataset& data, const TrainConfig& config = {},
                             std::size_t n_threads = 0, std::uint32_t seed_base = 0);

// Standardizes x, evaluates every member, and de-standardizes the outputs.
// Result length equals the member count and source_seeds records provenance.
PredictionSet predict_ensemble(const EnsembleModel& model, std::span<const double> x);

// Binary model file: magic "BSEN", format version, the spec, the scalers,
// then every member's parameters as little-endian 64-bit floats. Loading a
// saved model is bitwise exact; structural damage (bad magic, unknown
// version, truncation, non-finite values) raises errc::format.
void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

}  // namespace bagscore
