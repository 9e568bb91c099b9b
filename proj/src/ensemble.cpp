#include "bagscore/ensemble.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <thread>

namespace bagscore {

namespace {

// Copies the standardized table into the dense layout train_network expects.
void to_matrix(const Dataset& data, Matrix& x, std::vector<double>& y) {
    x.rows = data.n_rows;
    x.cols = data.n_cols;
    x.a = data.features;
    y = data.targets;
}

}  // namespace

EnsembleModel train_ensemble(const MlpSpec& spec, std::size_t n_members,
                             const Dataset& data, const TrainConfig& config,
                             std::size_t n_threads, std::uint32_t seed_base) {
    validate_spec(spec);
    validate_config(config);
    if (n_members == 0) fail(errc::invalid_input, "ensemble needs at least one member");
    if (data.n_cols != spec.input_dim) {
        fail(errc::dimension_mismatch, "dataset has " + std::to_string(data.n_cols) +
                                           " features, spec expects " +
                                           std::to_string(spec.input_dim));
    }

    EnsembleModel model;
    model.spec = spec;
    model.scalers = fit_scaler(data);

    Matrix x;
    std::vector<double> y;
    to_matrix(apply_scaler(data, model.scalers), x, y);

    model.members.resize(n_members);
    std::vector<std::exception_ptr> failures(n_members);

    auto train_one = [&](std::size_t i) {
        const std::uint32_t seed = seed_base + static_cast<std::uint32_t>(i) + 1;
        try {
            model.members[i] = train_network(spec, seed, x, y, config);
        } catch (const TrainingDivergedError& e) {
            failures[i] = std::make_exception_ptr(TrainingDivergedError(
                "member with seed " + std::to_string(seed) + ": " + e.what(), e.epoch(),
                static_cast<std::int64_t>(seed)));
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };

    std::size_t workers = n_threads == 0 ? std::thread::hardware_concurrency() : n_threads;
    if (workers == 0) workers = 1;
    workers = std::min(workers, n_members);

    if (workers <= 1) {
        for (std::size_t i = 0; i < n_members; ++i) {
            train_one(i);
            if (failures[i]) std::rethrow_exception(failures[i]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&]() {
                for (std::size_t i = next.fetch_add(1); i < n_members; i = next.fetch_add(1)) {
                    train_one(i);
                }
            });
        }
        for (std::thread& t : pool) t.join();
        // Report the lowest failing member so the error matches the
        // sequential schedule.
        for (std::size_t i = 0; i < n_members; ++i) {
            if (failures[i]) std::rethrow_exception(failures[i]);
        }
    }

    return model;
}

PredictionSet predict_ensemble(const EnsembleModel& model, std::span<const double> x) {
    if (model.members.empty()) fail(errc::invalid_input, "model has no members");
    if (x.size() != model.spec.input_dim) {
        fail(errc::dimension_mismatch, "input has " + std::to_string(x.size()) +
                                           " features, model expects " +
                                           std::to_string(model.spec.input_dim));
    }
    const Scaler& fs = model.scalers.features;
    if (fs.mean.size() != x.size() || fs.scale.size() != x.size()) {
        fail(errc::dimension_mismatch, "scaler width does not match the model input");
    }

    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - fs.mean[j]) / fs.scale[j];

    PredictionSet out;
    out.values.reserve(model.members.size());
    out.source_seeds.reserve(model.members.size());
    for (const NetworkParams& member : model.members) {
        const double standardized = forward(member, model.spec, z);
        out.values.push_back(standardized * model.scalers.target_scale +
                             model.scalers.target_mean);
        out.source_seeds.push_back(member.seed);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model file format, version 1. All integers and floats little-endian.
//
//   "BSEN"  u32 version
//   u64 input_dim  u64 n_hidden  u64[] hidden_widths
//   u64 n_activations  u8[] activations  u64 output_dim
//   u64 n_features  f64[] feature_means  f64[] feature_scales
//   f64 target_mean  f64 target_scale
//   u64 n_members
//   per member: u32 seed
//     per layer: u64 rows  u64 cols  f64[] weights  u64 bias_len  f64[] biases
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'B', 'S', 'E', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
    const unsigned char* p;
    std::size_t left;

    void need(std::size_t n) const {
        if (left < n) fail(errc::format, "model file is truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        p += 4;
        left -= 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        p += 8;
        left -= 8;
        return v;
    }
    double f64() {
        const double v = std::bit_cast<double>(u64());
        if (!std::isfinite(v)) fail(errc::format, "model file holds a non-finite value");
        return v;
    }
    std::uint8_t u8() {
        need(1);
        std::uint8_t v = *p;
        ++p;
        --left;
        return v;
    }
    // A count that will be materialized as n items of at least `unit` bytes;
    // bounding by the remaining payload rejects absurd sizes from corruption.
    std::size_t count(std::size_t unit) {
        const std::uint64_t n = u64();
        if (n > left / unit) fail(errc::format, "model file is truncated");
        return static_cast<std::size_t>(n);
    }
};

void append_params(std::string& out, const NetworkParams& member) {
    put_u32(out, member.seed);
    for (std::size_t l = 0; l < member.weights.size(); ++l) {
        const Matrix& w = member.weights[l];
        put_u64(out, w.rows);
        put_u64(out, w.cols);
        for (double v : w.a) put_f64(out, v);
        put_u64(out, member.biases[l].size());
        for (double v : member.biases[l]) put_f64(out, v);
    }
}

}  // namespace

void save_model(const EnsembleModel& model, const std::string& path) {
    if (model.members.empty()) fail(errc::invalid_input, "refusing to save an empty ensemble");
    validate_spec(model.spec);

    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put_u32(out, kFormatVersion);

    put_u64(out, model.spec.input_dim);
    put_u64(out, model.spec.hidden_widths.size());
    for (std::size_t w : model.spec.hidden_widths) put_u64(out, w);
    put_u64(out, model.spec.activations.size());
    for (Activation a : model.spec.activations) out.push_back(static_cast<char>(a));
    put_u64(out, model.spec.output_dim);

    const Scaler& fs = model.scalers.features;
    put_u64(out, fs.mean.size());
    for (double v : fs.mean) put_f64(out, v);
    for (double v : fs.scale) put_f64(out, v);
    put_f64(out, model.scalers.target_mean);
    put_f64(out, model.scalers.target_scale);

    put_u64(out, model.members.size());
    for (const NetworkParams& member : model.members) append_params(out, member);

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) fail(errc::io, "cannot open " + path + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    file.flush();
    if (!file) fail(errc::io, "write to " + path + " failed");
}

EnsembleModel load_model(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) fail(errc::io, "cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    if (!file.good() && !file.eof()) fail(errc::io, "read from " + path + " failed");

    Reader r{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()};
    r.need(sizeof(kMagic));
    if (std::memcmp(r.p, kMagic, sizeof(kMagic)) != 0) {
        fail(errc::format, path + " is not a model file (bad magic)");
    }
    r.p += sizeof(kMagic);
    r.left -= sizeof(kMagic);

    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        fail(errc::format, "unsupported model format version " + std::to_string(version));
    }

    EnsembleModel model;
    model.spec.input_dim = r.count(1);
    model.spec.hidden_widths.resize(r.count(8));
    for (std::size_t& w : model.spec.hidden_widths) w = static_cast<std::size_t>(r.u64());
    model.spec.activations.resize(r.count(1));
    for (Activation& a : model.spec.activations) {
        const std::uint8_t raw = r.u8();
        if (raw > static_cast<std::uint8_t>(Activation::tanh)) {
            fail(errc::format, "model file names an unknown activation");
        }
        a = static_cast<Activation>(raw);
    }
    model.spec.output_dim = static_cast<std::size_t>(r.u64());
    validate_spec(model.spec);

    Scaler& fs = model.scalers.features;
    const std::size_t n_features = r.count(16);
    if (n_features != model.spec.input_dim) {
        fail(errc::format, "scaler width disagrees with the stored spec");
    }
    fs.mean.resize(n_features);
    fs.scale.resize(n_features);
    for (double& v : fs.mean) v = r.f64();
    for (double& v : fs.scale) v = r.f64();
    model.scalers.target_mean = r.f64();
    model.scalers.target_scale = r.f64();
    if (!(model.scalers.target_scale > 0.0)) {
        fail(errc::format, "model file holds a non-positive target scale");
    }
    for (double s : fs.scale) {
        if (!(s > 0.0)) fail(errc::format, "model file holds a non-positive feature scale");
    }

    const std::vector<std::size_t> dims = model.spec.layer_dims();
    const std::size_t n_members = r.count(4);
    if (n_members == 0) fail(errc::format, "model file holds no members");
    model.members.resize(n_members);
    for (NetworkParams& member : model.members) {
        member.seed = r.u32();
        member.weights.reserve(dims.size() - 1);
        member.biases.reserve(dims.size() - 1);
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const std::size_t rows = static_cast<std::size_t>(r.u64());
            const std::size_t cols = static_cast<std::size_t>(r.u64());
            if (rows != dims[l] || cols != dims[l + 1]) {
                fail(errc::format, "member layer shape disagrees with the stored spec");
            }
            if (rows > r.left / 8 / (cols == 0 ? 1 : cols)) {
                fail(errc::format, "model file is truncated");
            }
            Matrix w(rows, cols);
            for (double& v : w.a) v = r.f64();
            member.weights.push_back(std::move(w));
            const std::size_t bias_len = r.count(8);
            if (bias_len != cols) {
                fail(errc::format, "member bias length disagrees with the stored spec");
            }
            std::vector<double> b(bias_len);
            for (double& v : b) v = r.f64();
            member.biases.push_back(std::move(b));
        }
    }
    if (r.left != 0) fail(errc::format, "model file has trailing bytes");

    return model;
}

}  // namespace bagscore
