#include "bagscore/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bagscore {

void validate_config(const TrainConfig& config) {
    if (config.epochs == 0) fail(errc::invalid_input, "epochs must be positive");
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        fail(errc::invalid_input, "learning_rate must be positive and finite");
    }
    if (config.batch_size == 0) fail(errc::invalid_input, "batch_size must be positive");
    if (!(config.val_fraction > 0.0) || !(config.val_fraction < 1.0)) {
        fail(errc::invalid_input, "val_fraction must lie in (0, 1)");
    }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_train_val(
    std::size_t n_rows, std::uint32_t seed, double val_fraction) {
    if (n_rows < 2) fail(errc::invalid_input, "need at least two rows to split");
    if (!(val_fraction > 0.0) || !(val_fraction < 1.0)) {
        fail(errc::invalid_input, "val_fraction must lie in (0, 1)");
    }

    std::size_t n_val = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(n_rows)));
    n_val = std::clamp<std::size_t>(n_val, 1, n_rows - 1);

    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), 0);
    rng::Engine gen(seed);
    rng::shuffle(order, gen);

    std::vector<std::size_t> val(order.begin(), order.begin() + n_val);
    std::vector<std::size_t> train(order.begin() + n_val, order.end());
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    return {train, val};
}

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    std::uint64_t steps = 0;

    explicit AdamState(const NetworkParams& params) {
        for (const Matrix& w : params.weights) {
            m_w.emplace_back(w.rows, w.cols);
            v_w.emplace_back(w.rows, w.cols);
        }
        for (const auto& b : params.biases) {
            m_b.emplace_back(b.size(), 0.0);
            v_b.emplace_back(b.size(), 0.0);
        }
    }
};

void adam_update(std::vector<double>& param, std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, double lr,
                 double bias1, double bias2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * grad[i];
        v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
    }
}

// Gathers rows of x/y selected by idx[begin..end) into contiguous batch
// buffers.
void gather_batch(const Matrix& x, const std::vector<double>& y,
                  const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                  Matrix& xb, std::vector<double>& yb) {
    const std::size_t b = end - begin;
    xb.rows = b;
    xb.cols = x.cols;
    xb.a.resize(b * x.cols);
    yb.resize(b);
    for (std::size_t r = 0; r < b; ++r) {
        const std::size_t src = idx[begin + r];
        std::copy_n(&x.a[src * x.cols], x.cols, &xb.a[r * x.cols]);
        yb[r] = y[src];
    }
}

// out = in * w + b, activated. in is B x fan_in, out becomes B x fan_out.
void affine_forward(const Matrix& in, const Matrix& w, const std::vector<double>& b,
                    Activation act, Matrix& out) {
    out.rows = in.rows;
    out.cols = w.cols;
    out.a.assign(in.rows * w.cols, 0.0);
    for (std::size_t r = 0; r < in.rows; ++r) {
        const double* xrow = &in.a[r * in.cols];
        double* orow = &out.a[r * out.cols];
        for (std::size_t i = 0; i < w.rows; ++i) {
            const double xi = xrow[i];
            const double* wrow = &w.a[i * w.cols];
            for (std::size_t j = 0; j < w.cols; ++j) orow[j] += xi * wrow[j];
        }
        for (std::size_t j = 0; j < w.cols; ++j) orow[j] = activate(act, orow[j] + b[j]);
    }
}

struct Workspace {
    std::vector<Matrix> acts;    // acts[0] = batch input, acts[l+1] = layer l output
    std::vector<Matrix> deltas;  // d(loss)/d(pre-activation) per layer
    std::vector<Matrix> grad_w;
    std::vector<std::vector<double>> grad_b;
    Matrix xb;
    std::vector<double> yb;

    explicit Workspace(const NetworkParams& params) {
        acts.resize(params.weights.size() + 1);
        deltas.resize(params.weights.size());
        for (const Matrix& w : params.weights) {
            grad_w.emplace_back(w.rows, w.cols);
            grad_b.emplace_back(w.cols, 0.0);
        }
    }
};

Activation layer_activation(const MlpSpec& spec, std::size_t layer) {
    return layer < spec.activations.size() ? spec.activations[layer] : Activation::linear;
}

// Forward through all layers for the batch sitting in ws.acts[0]; returns
// the batch MSE against yb.
double batch_forward(const NetworkParams& params, const MlpSpec& spec, Workspace& ws) {
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        affine_forward(ws.acts[l], params.weights[l], params.biases[l],
                       layer_activation(spec, l), ws.acts[l + 1]);
    }
    const Matrix& out = ws.acts.back();
    double loss = 0.0;
    for (std::size_t r = 0; r < out.rows; ++r) {
        const double e = out.a[r] - ws.yb[r];
        loss += e * e;
    }
    return loss / static_cast<double>(out.rows);
}

// Backward pass filling ws.grad_w / ws.grad_b for the MSE of the current batch.
void batch_backward(const NetworkParams& params, const MlpSpec& spec, Workspace& ws) {
    const std::size_t n_layers = params.weights.size();
    const Matrix& out = ws.acts.back();
    const double inv_b = 1.0 / static_cast<double>(out.rows);

    Matrix& dlast = ws.deltas[n_layers - 1];
    dlast.rows = out.rows;
    dlast.cols = 1;
    dlast.a.resize(out.rows);
    for (std::size_t r = 0; r < out.rows; ++r) {
        dlast.a[r] = 2.0 * (out.a[r] - ws.yb[r]) * inv_b;
    }

    for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix& delta = ws.deltas[l];
        const Matrix& input = ws.acts[l];
        Matrix& gw = ws.grad_w[l];
        std::vector<double>& gb = ws.grad_b[l];
        std::fill(gw.a.begin(), gw.a.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);

        for (std::size_t r = 0; r < delta.rows; ++r) {
            const double* drow = &delta.a[r * delta.cols];
            const double* irow = &input.a[r * input.cols];
            for (std::size_t j = 0; j < delta.cols; ++j) gb[j] += drow[j];
            for (std::size_t i = 0; i < input.cols; ++i) {
                const double xi = irow[i];
                double* grow = &gw.a[i * gw.cols];
                for (std::size_t j = 0; j < delta.cols; ++j) grow[j] += xi * drow[j];
            }
        }

        if (l == 0) break;
        const Matrix& w = params.weights[l];
        const Activation prev_act = layer_activation(spec, l - 1);
        Matrix& dprev = ws.deltas[l - 1];
        dprev.rows = delta.rows;
        dprev.cols = w.rows;
        dprev.a.assign(delta.rows * w.rows, 0.0);
        for (std::size_t r = 0; r < delta.rows; ++r) {
            const double* drow = &delta.a[r * delta.cols];
            const double* arow = &input.a[r * input.cols];
            double* prow = &dprev.a[r * w.rows];
            for (std::size_t i = 0; i < w.rows; ++i) {
                double acc = 0.0;
                const double* wrow = &w.a[i * w.cols];
                for (std::size_t j = 0; j < w.cols; ++j) acc += drow[j] * wrow[j];
                prow[i] = acc * activate_derivative_from_output(prev_act, arow[i]);
            }
        }
    }
}

double validation_mse(const NetworkParams& params, const MlpSpec& spec, const Matrix& x,
                      const std::vector<double>& y, const std::vector<std::size_t>& idx,
                      Workspace& ws) {
    gather_batch(x, y, idx, 0, idx.size(), ws.xb, ws.yb);
    ws.acts[0] = ws.xb;
    return batch_forward(params, spec, ws);
}

void require_batch(const NetworkParams& params, const MlpSpec& spec, const Matrix& x,
                   const std::vector<double>& y) {
    validate_spec(spec);
    if (params.weights.size() != spec.hidden_widths.size() + 1) {
        fail(errc::dimension_mismatch, "parameter stack does not match spec");
    }
    if (x.cols != spec.input_dim) {
        fail(errc::dimension_mismatch, "batch has " + std::to_string(x.cols) +
                                           " columns, spec expects " +
                                           std::to_string(spec.input_dim));
    }
    if (x.rows != y.size() || x.rows == 0) {
        fail(errc::dimension_mismatch, "batch feature/target row counts differ or are zero");
    }
}

}  // namespace

double mse_loss(const NetworkParams& params, const MlpSpec& spec, const Matrix& x,
                const std::vector<double>& y) {
    require_batch(params, spec, x, y);
    Workspace ws(params);
    ws.acts[0] = x;
    ws.yb = y;
    return batch_forward(params, spec, ws);
}

double mse_gradients(const NetworkParams& params, const MlpSpec& spec, const Matrix& x,
                     const std::vector<double>& y, std::vector<Matrix>& grad_w,
                     std::vector<std::vector<double>>& grad_b) {
    require_batch(params, spec, x, y);
    Workspace ws(params);
    ws.acts[0] = x;
    ws.yb = y;
    const double loss = batch_forward(params, spec, ws);
    batch_backward(params, spec, ws);
    grad_w = ws.grad_w;
    grad_b = ws.grad_b;
    return loss;
}

NetworkParams train_network(const MlpSpec& spec, std::uint32_t seed, const Matrix& x,
                            const std::vector<double>& y, const TrainConfig& config) {
    validate_spec(spec);
    validate_config(config);
    if (x.cols != spec.input_dim) {
        fail(errc::dimension_mismatch, "training matrix has " + std::to_string(x.cols) +
                                           " columns, spec expects " +
                                           std::to_string(spec.input_dim));
    }
    if (x.rows != y.size()) fail(errc::dimension_mismatch, "feature/target row counts differ");
    if (x.rows < 2) fail(errc::invalid_input, "need at least two training rows");

    auto [train_idx, val_idx] = split_train_val(x.rows, seed, config.val_fraction);

    NetworkParams params = init_network(spec, seed);
    AdamState adam(params);
    Workspace ws(params);
    rng::Engine order_gen(seed);

    NetworkParams best = params;
    double best_val = validation_mse(params, spec, x, y, val_idx, ws);
    std::uint32_t stall = 0;

    for (std::uint32_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng::shuffle(train_idx, order_gen);

        for (std::size_t begin = 0; begin < train_idx.size(); begin += config.batch_size) {
            const std::size_t end = std::min<std::size_t>(begin + config.batch_size,
                                                          train_idx.size());
            gather_batch(x, y, train_idx, begin, end, ws.xb, ws.yb);
            ws.acts[0] = ws.xb;
            const double loss = batch_forward(params, spec, ws);
            if (!std::isfinite(loss)) {
                throw TrainingDivergedError(
                    "training loss became non-finite at epoch " + std::to_string(epoch), epoch);
            }
            batch_backward(params, spec, ws);

            adam.steps += 1;
            const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.steps));
            const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.steps));
            for (std::size_t l = 0; l < params.weights.size(); ++l) {
                adam_update(params.weights[l].a, ws.grad_w[l].a, adam.m_w[l].a, adam.v_w[l].a,
                            config.learning_rate, bias1, bias2);
                adam_update(params.biases[l], ws.grad_b[l], adam.m_b[l], adam.v_b[l],
                            config.learning_rate, bias1, bias2);
            }
        }

        const double val = validation_mse(params, spec, x, y, val_idx, ws);
        if (!std::isfinite(val)) {
            throw TrainingDivergedError(
                "validation loss became non-finite at epoch " + std::to_string(epoch), epoch);
        }
        if (val < best_val) {
            best_val = val;
            best = params;
            stall = 0;
        } else {
            ++stall;
            if (stall > config.patience) break;
        }
    }

    best.seed = seed;
    return best;
}

}  // namespace bagscore
