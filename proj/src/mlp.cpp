#include "bagscore/mlp.hpp"

#include <cmath>
#include <string>

namespace bagscore {

std::vector<std::size_t> MlpSpec::layer_dims() const {
    std::vector<std::size_t> dims;
    dims.reserve(hidden_widths.size() + 2);
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden_widths.begin(), hidden_widths.end());
    dims.push_back(output_dim);
    return dims;
}

MlpSpec default_mlp_spec(std::size_t input_dim) {
    MlpSpec spec;
    spec.input_dim = input_dim;
    return spec;
}

void validate_spec(const MlpSpec& spec) {
    if (spec.input_dim == 0) fail(errc::invalid_input, "input_dim must be positive");
    if (spec.output_dim != 1) fail(errc::invalid_input, "output_dim must be 1");
    if (spec.hidden_widths.empty()) fail(errc::invalid_input, "at least one hidden layer required");
    if (spec.hidden_widths.size() != spec.activations.size()) {
        fail(errc::invalid_input, "activations must be parallel to hidden_widths");
    }
    for (std::size_t w : spec.hidden_widths) {
        if (w == 0) fail(errc::invalid_input, "hidden widths must be positive");
    }
}

double tanh_activation(double x) {
    return std::tanh(x);
}

double activate(Activation act, double x) {
    return act == Activation::tanh ? tanh_activation(x) : x;
}

double activate_derivative_from_output(Activation act, double y) {
    return act == Activation::tanh ? 1.0 - y * y : 1.0;
}

NetworkParams init_network(const MlpSpec& spec, std::uint32_t seed) {
    validate_spec(spec);
    const auto dims = spec.layer_dims();

    NetworkParams params;
    params.seed = seed;
    params.weights.reserve(dims.size() - 1);
    params.biases.reserve(dims.size() - 1);

    rng::Engine gen(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_in, fan_out);
        for (double& value : w.a) {
            value = (2.0 * rng::uniform01(gen) - 1.0) * limit;
        }
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(fan_out, 0.0);
    }
    return params;
}

double forward(const NetworkParams& params, const MlpSpec& spec,
               std::span<const double> x) {
    validate_spec(spec);
    if (x.size() != spec.input_dim) {
        fail(errc::dimension_mismatch,
             "input has " + std::to_string(x.size()) + " features, expected " +
                 std::to_string(spec.input_dim));
    }
    if (params.weights.size() != spec.hidden_widths.size() + 1) {
        fail(errc::dimension_mismatch, "parameter stack does not match spec");
    }

    std::vector<double> current(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        const Matrix& w = params.weights[l];
        const std::vector<double>& b = params.biases[l];
        if (w.rows != current.size()) {
            fail(errc::dimension_mismatch, "weight shape mismatch at layer " + std::to_string(l));
        }
        next.assign(w.cols, 0.0);
        for (std::size_t i = 0; i < w.rows; ++i) {
            const double xi = current[i];
            const double* row = &w.a[i * w.cols];
            for (std::size_t j = 0; j < w.cols; ++j) next[j] += xi * row[j];
        }
        const bool hidden = l < spec.hidden_widths.size();
        const Activation act = hidden ? spec.activations[l] : Activation::linear;
        for (std::size_t j = 0; j < w.cols; ++j) {
            next[j] = activate(act, next[j] + b[j]);
        }
        current.swap(next);
    }
    return current[0];
}

}  // namespace bagscore
