#pragma once

// Fixed-topology multilayer perceptron: a chain of affine layers with a
// per-hidden-layer choice of linear or tanh transfer. The published
// configuration is three hidden layers of 20 neurons with tanh only on the
// middle one; everything here is deterministic in (spec, seed).

#include <cstdint>
#include <span>
#include <vector>

#include "bagscore/errors.hpp"
#include "bagscore/rng.hpp"

namespace bagscore {

// Row-major dense matrix, sized once and indexed (row, col).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

enum class Activation : std::uint8_t {
    linear = 0,
    tanh = 1,
};

struct MlpSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_widths{20, 20, 20};
    std::vector<Activation> activations{Activation::linear, Activation::tanh,
                                        Activation::linear};
    std::size_t output_dim = 1;

    // Layer dimensions [input, hidden..., output].
    std::vector<std::size_t> layer_dims() const;
};

MlpSpec default_mlp_spec(std::size_t input_dim);

void validate_spec(const MlpSpec& spec);

// One network's parameters. weights[l] has shape (fan_in x fan_out), so a
// [8,20,20,20,1] stack yields (8x20),(20x20),(20x20),(20x1).
struct NetworkParams {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    std::uint32_t seed = 0;
};

double tanh_activation(double x);
double activate(Activation act, double x);
// Derivative expressed through the activated value y = activate(act, x).
double activate_derivative_from_output(Activation act, double y);

// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases, drawn layer by
// layer, row-major, from mt19937(seed) via rng::uniform01. Same (spec, seed)
// is bitwise reproducible.
NetworkParams init_network(const MlpSpec& spec, std::uint32_t seed);

// Scalar forward pass through the full stack (output layer is affine).
double forward(const NetworkParams& params, const MlpSpec& spec,
               std::span<const double> x);

}  // namespace bagscore
