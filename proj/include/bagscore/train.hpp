#pragma once

// Single-network training: seeded 70/30 train/validation split, minibatch
// MSE descent with adaptive moments, early stopping on validation loss with
// best-weights restore. Deterministic in (spec, seed, data, config).

#include <cstdint>
#include <utility>
#include <vector>

#include "bagscore/mlp.hpp"

namespace bagscore {

struct TrainConfig {
    std::uint32_t epochs = 500;
    double learning_rate = 1e-3;
    std::uint32_t batch_size = 32;
    double val_fraction = 0.3;
    std::uint32_t patience = 50;  // non-improving validation epochs tolerated
};

void validate_config(const TrainConfig& config);

// Disjoint covering index sets, |val| = round(val_fraction * n_rows) clamped
// so both sides stay non-empty. Both lists come back sorted ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_val(
    std::size_t n_rows, std::uint32_t seed, double val_fraction);

// x is n_rows x input_dim, already standardized, y likewise. The same seed
// drives initialization, the split, and the per-epoch batch order (three
// separate mt19937 streams).
NetworkParams train_network(const MlpSpec& spec, std::uint32_t seed, const Matrix& x,
                            const std::vector<double>& y, const TrainConfig& config);

// Mean squared error of the network over the batch (x, y).
double mse_loss(const NetworkParams& params, const MlpSpec& spec, const Matrix& x,
                const std::vector<double>& y);

// The same loss plus its analytic gradients with respect to every weight and
// bias; gradient shapes mirror params. This is the quantity the optimizer
// steps on, exposed so it can be checked against finite differences.
double mse_gradients(const NetworkParams& params, const MlpSpec& spec, const Matrix& x,
                     const std::vector<double>& y, std::vector<Matrix>& grad_w,
                     std::vector<std::vector<double>>& grad_b);

}  // namespace bagscore
