#pragma once

// Shared fixtures: temp directories, little CSV writers, deterministic random
// prediction sets, a multi-feature regression generator, and a CLI runner.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bagscore/rng.hpp"

namespace testutil {

// Self-deleting directory under the system temp root.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0;; ++attempt) {
            path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" +
                            std::to_string(counter()++) + "-" + std::to_string(attempt));
            std::error_code ec;
            if (std::filesystem::create_directory(path_, ec)) break;
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    f << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// A small linear-ish table: y = 2*x1 + 0.5*x2 + 3, no noise.
inline std::string toy_csv(std::size_t rows) {
    std::string csv = "x1,x2,y\n";
    bagscore::rng::Engine gen(7);
    char buf[128];
    for (std::size_t i = 0; i < rows; ++i) {
        const double x1 = bagscore::rng::uniform_range(gen, -2.0, 2.0);
        const double x2 = bagscore::rng::uniform_range(gen, -2.0, 2.0);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x1, x2,
                      2.0 * x1 + 0.5 * x2 + 3.0);
        csv += buf;
    }
    return csv;
}

// Mixture-of-clusters prediction set: k cluster centers, points spread
// normally around them. Sizes and shapes vary with the engine state.
inline std::vector<double> random_cluster_set(bagscore::rng::Engine& gen, std::size_t n) {
    const std::size_t k = 1 + static_cast<std::size_t>(gen() % 4);
    std::vector<double> centers, spreads;
    for (std::size_t c = 0; c < k; ++c) {
        centers.push_back(bagscore::rng::uniform_range(gen, -50.0, 50.0));
        spreads.push_back(bagscore::rng::uniform_range(gen, 0.1, 5.0));
    }
    std::vector<double> values;
    values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = gen() % k;
        values.push_back(centers[c] + spreads[c] * bagscore::rng::gaussian(gen));
    }
    return values;
}

// Eight-feature benchmark-style generator:
// y = 10*sin(pi*x1*x2) + 20*(x3-0.5)^2 + 10*x4 + 5*x5 + noise, x in U(0,1)^8
// (three features are pure distractors).
inline void friedman_table(bagscore::rng::Engine& gen, std::size_t rows, double noise_std,
                           std::vector<double>& features, std::vector<double>& targets) {
    constexpr double kPi = 3.14159265358979323846;
    features.clear();
    targets.clear();
    features.reserve(rows * 8);
    targets.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double x[8];
        for (double& v : x) v = bagscore::rng::uniform01(gen);
        features.insert(features.end(), x, x + 8);
        const double y = 10.0 * std::sin(kPi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
                         10.0 * x[3] + 5.0 * x[4] + noise_std * bagscore::rng::gaussian(gen);
        targets.push_back(y);
    }
}

inline std::string friedman_csv(std::uint32_t seed, std::size_t rows, double noise_std) {
    std::vector<double> features, targets;
    bagscore::rng::Engine gen(seed);
    friedman_table(gen, rows, noise_std, features, targets);
    std::string csv = "x1,x2,x3,x4,x5,x6,x7,x8,y\n";
    char buf[64];
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,", features[i * 8 + j]);
            csv += buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g\n", targets[i]);
        csv += buf;
    }
    return csv;
}

struct CliResult {
    int exit_code = -1;
    std::string out;  // stdout + stderr, interleaved by redirection
};

// Runs the CLI named by BAGSCORE_CLI_BIN with the given argument string.
inline CliResult run_cli(const std::string& args, const TempDir& dir,
                         const std::string& log_name = "cli.log") {
    const char* bin = std::getenv("BAGSCORE_CLI_BIN");
    CliResult result;
    if (bin == nullptr) {
        result.out = "BAGSCORE_CLI_BIN is not set";
        return result;
    }
    const std::string log = dir.file(log_name);
    const std::string cmd = std::string(bin) + " " + args + " >" + log + " 2>&1";
    const int raw = std::system(cmd.c_str());
    result.exit_code = (raw == -1) ? -1 : WEXITSTATUS(raw);
    result.out = read_file(log);
    return result;
}

}  // namespace testutil
