// bagscore: batch experiments for density-aggregated bagging ensembles.
// Talks to the library exclusively through its C interface.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "bagscore/bagscore.h"

namespace {

// Every fallible library call goes through CHECK so failures exit with the
// library's message on stderr.
#define CHECK(expr)                                                       \
    do {                                                                  \
        const bs_status check_st = (expr);                                \
        if (check_st != BS_OK) return fail_status(check_st);              \
    } while (0)

int fail_status(bs_status st) {
    std::fprintf(stderr, "error: %s (%s)\n", bs_last_error_message(), bs_status_name(st));
    return 1;
}

int fail_msg(const std::string& msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return 1;
}

std::string fmt_f(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Flat key=value run record, written next to every command's outputs.
class Manifest {
public:
    explicit Manifest(std::string command) { put("command", std::move(command)); }

    void put(const std::string& key, const std::string& value) {
        body_ += key;
        body_ += '=';
        body_ += value;
        body_ += '\n';
    }
    void put_u64(const std::string& key, std::uint64_t v) { put(key, std::to_string(v)); }
    void put_f64(const std::string& key, double v) { put(key, fmt_f(v)); }

    void put_file_checksum(const std::string& key, const std::string& path) {
        std::uint64_t h = 0;
        if (bs_fnv1a64_file(path.c_str(), &h) == BS_OK) {
            put(key, fmt_hex64(h));
        } else {
            put(key, "unavailable");
        }
    }

    bool write(const std::string& path, double duration_seconds) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f", duration_seconds);
        std::ofstream file(path, std::ios::trunc);
        if (!file) return false;
        file << body_ << "duration_seconds=" << buf << '\n';
        return static_cast<bool>(file);
    }

private:
    std::string body_;
};

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream file(path, std::ios::trunc);
    if (!file) return false;
    file << content;
    return static_cast<bool>(file);
}

// Output directories are created on demand so --out-dir can name a fresh
// per-run location.
bool ensure_dir(const std::string& dir) {
    if (dir.empty() || dir == ".") return true;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    return !ec;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct KdeFlags {
    bs_kde_config config;

    KdeFlags() { bs_kde_config_default(&config); }

    void attach(CLI::App* cmd) {
        cmd->add_option("--grid-divisor", config.grid_divisor,
                        "Density grid step = prediction range / this")
            ->capture_default_str();
        cmd->add_option("--bandwidth-divisor", config.bandwidth_divisor,
                        "Kernel width h = sigma / this")
            ->capture_default_str();
        cmd->add_option("--window-factor", config.window_half_width_factor,
                        "Kernel truncation half-width, in sigmas")
            ->capture_default_str();
    }

    void record(Manifest& m) const {
        m.put_u64("grid_divisor", config.grid_divisor);
        m.put_f64("bandwidth_divisor", config.bandwidth_divisor);
        m.put_f64("window_half_width_factor", config.window_half_width_factor);
    }
};

struct TrainFlags {
    bs_train_config config;
    std::size_t n_nets = 1000;
    std::uint32_t seed_base = 0;
    std::size_t threads = 0;
    CLI::Option* n_nets_opt = nullptr;

    TrainFlags() { bs_train_config_default(&config); }

    void attach(CLI::App* cmd) {
        n_nets_opt = cmd->add_option("--n-nets", n_nets, "Ensemble size")
                         ->capture_default_str()
                         ->envname("BAGSCORE_N_NETS");
        cmd->add_option("--epochs", config.epochs, "Epoch cap per member")
            ->capture_default_str();
        cmd->add_option("--learning-rate", config.learning_rate, "Optimizer step size")
            ->capture_default_str();
        cmd->add_option("--batch-size", config.batch_size, "Minibatch size")
            ->capture_default_str();
        cmd->add_option("--val-fraction", config.val_fraction,
                        "Per-member validation share")
            ->capture_default_str();
        cmd->add_option("--patience", config.patience,
                        "Non-improving validation epochs before stopping")
            ->capture_default_str();
        cmd->add_option("--seed-base", seed_base, "Member i trains with seed base + i")
            ->capture_default_str();
        cmd->add_option("--threads", threads, "Training workers; 0 = hardware count")
            ->capture_default_str()
            ->envname("BAGSCORE_THREADS");
    }

    // The desk preset shrinks the ensemble to a size a workstation finishes
    // quickly; an explicit --n-nets always wins.
    void apply_preset(const std::string& preset) {
        if (preset == "desk" && n_nets_opt->count() == 0) n_nets = 100;
    }

    void record(Manifest& m) const {
        m.put_u64("n_nets", n_nets);
        m.put_u64("epochs", config.epochs);
        m.put_f64("learning_rate", config.learning_rate);
        m.put_u64("batch_size", config.batch_size);
        m.put_f64("val_fraction", config.val_fraction);
        m.put_u64("patience", config.patience);
        m.put_u64("seed_base", seed_base);
        m.put_u64("threads", threads);
    }
};

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    if (dir.back() == '/') return dir + name;
    return dir + "/" + name;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
    std::string dataset;
    std::string out_dir = ".";
    std::string preset;
    std::uint32_t seed = 1;
    double test_fraction = 0.1;
    TrainFlags train;
};

int cmd_train(const TrainArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!ensure_dir(args.out_dir)) {
        return fail_msg("cannot create output directory " + args.out_dir);
    }

    bs_dataset* full = nullptr;
    CHECK(bs_dataset_load_csv(args.dataset.c_str(), &full));

    bs_dataset* train_part = nullptr;
    bs_dataset* test_part = nullptr;
    bs_status st = bs_dataset_split(full, args.seed, args.test_fraction, &train_part,
                                    &test_part);
    bs_dataset_free(full);
    if (st != BS_OK) return fail_status(st);
    bs_dataset_free(test_part);  // compare re-derives it from the same seed

    bs_model* model = nullptr;
    st = bs_model_train(train_part, args.train.n_nets, &args.train.config,
                        args.train.threads, args.train.seed_base, &model);
    const std::size_t train_rows = bs_dataset_rows(train_part);
    bs_dataset_free(train_part);
    if (st != BS_OK) return fail_status(st);

    const std::string model_path = join_path(args.out_dir, "model.bsen");
    st = bs_model_save(model, model_path.c_str());
    const std::size_t members = bs_model_members(model);
    const std::size_t input_dim = bs_model_input_dim(model);
    bs_model_free(model);
    if (st != BS_OK) return fail_status(st);

    Manifest m("train");
    m.put("dataset", args.dataset);
    m.put_file_checksum("dataset_fnv1a64", args.dataset);
    m.put_u64("seed", args.seed);
    m.put_f64("test_fraction", args.test_fraction);
    m.put_u64("train_rows", train_rows);
    args.train.record(m);
    m.put("model_path", model_path);
    m.put_file_checksum("model_fnv1a64", model_path);
    const std::string manifest_path = join_path(args.out_dir, "train.manifest");
    if (!m.write(manifest_path, seconds_since(t0))) {
        return fail_msg("cannot write " + manifest_path);
    }

    std::printf("trained %zu members (input dim %zu) on %zu rows -> %s\n", members,
                input_dim, train_rows, model_path.c_str());
    return 0;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
    std::string model_path;
    std::string dataset;
    std::string out_dir = ".";
    std::uint32_t seed = 1;
    double test_fraction = 0.1;
    KdeFlags kde;
};

int cmd_compare(const CompareArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!ensure_dir(args.out_dir)) {
        return fail_msg("cannot create output directory " + args.out_dir);
    }

    bs_model* model = nullptr;
    CHECK(bs_model_load(args.model_path.c_str(), &model));

    bs_dataset* full = nullptr;
    bs_status st = bs_dataset_load_csv(args.dataset.c_str(), &full);
    if (st != BS_OK) {
        bs_model_free(model);
        return fail_status(st);
    }

    bs_dataset* train_part = nullptr;
    bs_dataset* test_part = nullptr;
    st = bs_dataset_split(full, args.seed, args.test_fraction, &train_part, &test_part);
    bs_dataset_free(full);
    if (st != BS_OK) {
        bs_model_free(model);
        return fail_status(st);
    }
    bs_dataset_free(train_part);

    bs_eval_report report;
    st = bs_model_evaluate(model, test_part, &args.kde.config, &report);
    const std::size_t test_rows = bs_dataset_rows(test_part);
    bs_dataset_free(test_part);
    bs_model_free(model);
    if (st != BS_OK) return fail_status(st);

    char* text = nullptr;
    CHECK(bs_report_render_text(&report, &text));
    char* csv = nullptr;
    st = bs_report_render_csv(&report, &csv);
    if (st != BS_OK) {
        bs_string_free(text);
        return fail_status(st);
    }

    const std::string text_path = join_path(args.out_dir, "report.txt");
    const std::string csv_path = join_path(args.out_dir, "report.csv");
    const bool ok = write_file(text_path, text) && write_file(csv_path, csv);
    std::printf("%s", text);
    bs_string_free(text);
    bs_string_free(csv);
    if (!ok) return fail_msg("cannot write report files under " + args.out_dir);

    Manifest m("compare");
    m.put("model", args.model_path);
    m.put_file_checksum("model_fnv1a64", args.model_path);
    m.put("dataset", args.dataset);
    m.put_file_checksum("dataset_fnv1a64", args.dataset);
    m.put_u64("seed", args.seed);
    m.put_f64("test_fraction", args.test_fraction);
    m.put_u64("test_rows", test_rows);
    args.kde.record(m);
    m.put("report_text", text_path);
    m.put("report_csv", csv_path);
    m.put_file_checksum("report_csv_fnv1a64", csv_path);
    const std::string manifest_path = join_path(args.out_dir, "compare.manifest");
    if (!m.write(manifest_path, seconds_since(t0))) {
        return fail_msg("cannot write " + manifest_path);
    }
    return 0;
}

// ---------------------------------------------------------------- density

struct DensityArgs {
    std::string model_path;
    std::string dataset;
    std::vector<double> values;    // raw prediction set, bypasses the model
    std::vector<double> features;  // inline feature row for the model
    std::int64_t row = -1;         // dataset row index for the model
    std::string out_dir = ".";
    KdeFlags kde;
};

int cmd_density(const DensityArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!ensure_dir(args.out_dir)) {
        return fail_msg("cannot create output directory " + args.out_dir);
    }

    Manifest m("density");
    std::vector<double> set;

    if (!args.values.empty()) {
        set = args.values;
        m.put("input", "inline_values");
        m.put_u64("n_values", set.size());
    } else {
        if (args.model_path.empty()) {
            return fail_msg("need --values, or --model with --at or --row");
        }
        bs_model* model = nullptr;
        CHECK(bs_model_load(args.model_path.c_str(), &model));
        m.put("model", args.model_path);
        m.put_file_checksum("model_fnv1a64", args.model_path);

        std::vector<double> x = args.features;
        if (x.empty()) {
            if (args.row < 0 || args.dataset.empty()) {
                bs_model_free(model);
                return fail_msg("need --at or both --dataset and --row");
            }
            bs_dataset* data = nullptr;
            bs_status st = bs_dataset_load_csv(args.dataset.c_str(), &data);
            if (st != BS_OK) {
                bs_model_free(model);
                return fail_status(st);
            }
            x.resize(bs_dataset_cols(data));
            st = bs_dataset_row(data, static_cast<std::size_t>(args.row), x.data(), nullptr);
            bs_dataset_free(data);
            if (st != BS_OK) {
                bs_model_free(model);
                return fail_status(st);
            }
            m.put("dataset", args.dataset);
            m.put_u64("row", static_cast<std::uint64_t>(args.row));
        } else {
            m.put("input", "inline_features");
        }

        set.resize(bs_model_members(model));
        const bs_status st = bs_model_predict(model, x.data(), x.size(), set.data());
        bs_model_free(model);
        if (st != BS_OK) return fail_status(st);
    }

    double mean = 0.0, median = 0.0, representative = 0.0, score = 0.0;
    CHECK(bs_aggregate_mean(set.data(), set.size(), &mean));
    CHECK(bs_aggregate_median(set.data(), set.size(), &median));
    CHECK(bs_bagging_score(set.data(), set.size(), &args.kde.config, &representative,
                           &score));

    std::string csv = "position,density\n";
    bs_density* grid = nullptr;
    const bs_status dst = bs_estimate_density(set.data(), set.size(), &args.kde.config,
                                              &grid);
    if (dst == BS_OK) {
        const std::size_t n = bs_density_size(grid);
        for (std::size_t i = 0; i < n; ++i) {
            double p = 0.0, d = 0.0;
            bs_density_at(grid, i, &p, &d);
            csv += fmt_f(p);
            csv += ',';
            csv += fmt_f(d);
            csv += '\n';
        }
        bs_density_free(grid);
    } else if (dst == BS_ERR_DEGENERATE_SPREAD) {
        // All predictions coincide: the curve collapses to one certain point.
        csv += fmt_f(representative);
        csv += ",1\n";
    } else {
        return fail_status(dst);
    }

    const std::string csv_path = join_path(args.out_dir, "density.csv");
    if (!write_file(csv_path, csv)) return fail_msg("cannot write " + csv_path);

    std::printf("mean=%.17g median=%.17g representative=%.17g score=%.17g\n", mean, median,
                representative, score);

    args.kde.record(m);
    m.put("density_csv", csv_path);
    m.put_file_checksum("density_csv_fnv1a64", csv_path);
    m.put_f64("mean", mean);
    m.put_f64("median", median);
    m.put_f64("representative", representative);
    m.put_f64("score", score);
    const std::string manifest_path = join_path(args.out_dir, "density.manifest");
    if (!m.write(manifest_path, seconds_since(t0))) {
        return fail_msg("cannot write " + manifest_path);
    }
    return 0;
}

// -------------------------------------------------------------- synthetic

struct SyntheticArgs {
    std::string function_id = "x_sin_x";
    double domain_lo = -15.0;
    double domain_hi = 15.0;
    std::size_t n_train = 200;
    double noise_std = 1.0;
    std::vector<std::pair<double, double>> gaps;
    std::vector<double> queries;
    std::string out_dir = ".";
    std::string preset;
    std::uint32_t seed = 1;
    TrainFlags train;
    KdeFlags kde;
};

int cmd_synthetic(const SyntheticArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!ensure_dir(args.out_dir)) {
        return fail_msg("cannot create output directory " + args.out_dir);
    }

    std::vector<double> queries = args.queries;
    if (queries.empty()) {
        for (const auto& [lo, hi] : args.gaps) queries.push_back(0.5 * (lo + hi));
        if (queries.empty()) {
            return fail_msg("give --query points or --gap intervals to query");
        }
    }

    std::vector<double> gap_bounds;
    for (const auto& [lo, hi] : args.gaps) {
        gap_bounds.push_back(lo);
        gap_bounds.push_back(hi);
    }

    bs_dataset* data = nullptr;
    CHECK(bs_dataset_synthetic(args.function_id.c_str(), args.domain_lo, args.domain_hi,
                               args.n_train, args.noise_std, gap_bounds.data(),
                               args.gaps.size(), args.seed, &data));

    bs_model* model = nullptr;
    bs_status st = bs_model_train(data, args.train.n_nets, &args.train.config,
                                  args.train.threads, args.train.seed_base, &model);
    bs_dataset_free(data);
    if (st != BS_OK) return fail_status(st);

    std::string csv =
        "query_x,truth,mean,median,representative,score,"
        "abs_err_mean,abs_err_median,abs_err_representative\n";
    double agg_mean = 0.0, agg_median = 0.0, agg_bs = 0.0;
    std::printf("%12s %12s %12s %12s %12s %8s\n", "x", "truth", "mean", "median", "repr",
                "score");
    for (double q : queries) {
        double truth = 0.0;
        st = bs_synthetic_truth(args.function_id.c_str(), q, &truth);
        if (st != BS_OK) break;
        double mean = 0.0, median = 0.0, repr = 0.0, score = 0.0;
        st = bs_model_aggregates(model, &q, 1, &args.kde.config, &mean, &median, &repr,
                                 &score);
        if (st != BS_OK) break;

        const double em = std::abs(mean - truth);
        const double ed = std::abs(median - truth);
        const double eb = std::abs(repr - truth);
        agg_mean += em;
        agg_median += ed;
        agg_bs += eb;

        csv += fmt_f(q) + "," + fmt_f(truth) + "," + fmt_f(mean) + "," + fmt_f(median) +
               "," + fmt_f(repr) + "," + fmt_f(score) + "," + fmt_f(em) + "," + fmt_f(ed) +
               "," + fmt_f(eb) + "\n";
        std::printf("%12.5g %12.5g %12.5g %12.5g %12.5g %8.4f\n", q, truth, mean, median,
                    repr, score);
    }
    bs_model_free(model);
    if (st != BS_OK) return fail_status(st);

    const double n_q = static_cast<double>(queries.size());
    agg_mean /= n_q;
    agg_median /= n_q;
    agg_bs /= n_q;
    csv += "aggregate,,,,,," + fmt_f(agg_mean) + "," + fmt_f(agg_median) + "," +
           fmt_f(agg_bs) + "\n";
    std::printf("mean abs error over %zu queries: mean=%.6g median=%.6g representative=%.6g\n",
                queries.size(), agg_mean, agg_median, agg_bs);

    const std::string csv_path = join_path(args.out_dir, "synthetic_report.csv");
    if (!write_file(csv_path, csv)) return fail_msg("cannot write " + csv_path);

    Manifest m("synthetic");
    m.put("function_id", args.function_id);
    m.put_f64("domain_lo", args.domain_lo);
    m.put_f64("domain_hi", args.domain_hi);
    m.put_u64("n_train", args.n_train);
    m.put_f64("noise_std", args.noise_std);
    for (std::size_t i = 0; i < args.gaps.size(); ++i) {
        m.put("gap_" + std::to_string(i),
              fmt_f(args.gaps[i].first) + ":" + fmt_f(args.gaps[i].second));
    }
    for (std::size_t i = 0; i < queries.size(); ++i) {
        m.put_f64("query_" + std::to_string(i), queries[i]);
    }
    m.put_u64("seed", args.seed);
    args.train.record(m);
    args.kde.record(m);
    m.put("report_csv", csv_path);
    m.put_file_checksum("report_csv_fnv1a64", csv_path);
    m.put_f64("agg_abs_err_mean", agg_mean);
    m.put_f64("agg_abs_err_median", agg_median);
    m.put_f64("agg_abs_err_representative", agg_bs);
    const std::string manifest_path = join_path(args.out_dir, "synthetic.manifest");
    if (!m.write(manifest_path, seconds_since(t0))) {
        return fail_msg("cannot write " + manifest_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bagging ensembles aggregated by the mode of a prediction-set density"};
    app.require_subcommand(1);
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "Train an ensemble and save the model");
    train->add_option("--dataset", train_args.dataset, "Training CSV (last column = target)")
        ->required()
        ->envname("BAGSCORE_DATASET");
    train->add_option("--out-dir", train_args.out_dir, "Output directory")
        ->capture_default_str()
        ->envname("BAGSCORE_OUT_DIR");
    train->add_option("--seed", train_args.seed, "Train/test split seed")
        ->capture_default_str()
        ->envname("BAGSCORE_SEED");
    train->add_option("--test-fraction", train_args.test_fraction,
                      "Share of rows held out of training")
        ->capture_default_str();
    train->add_option("--preset", train_args.preset, "Sizing preset: desk (100 nets)")
        ->envname("BAGSCORE_PRESET");
    train_args.train.attach(train);

    CompareArgs compare_args;
    CLI::App* compare = app.add_subcommand(
        "compare", "Score mean/median/density-mode aggregation on the held-out split");
    compare->add_option("--model", compare_args.model_path, "Model file from 'train'")
        ->required();
    compare->add_option("--dataset", compare_args.dataset, "The CSV used for training")
        ->required()
        ->envname("BAGSCORE_DATASET");
    compare->add_option("--out-dir", compare_args.out_dir, "Output directory")
        ->capture_default_str()
        ->envname("BAGSCORE_OUT_DIR");
    compare->add_option("--seed", compare_args.seed,
                        "Split seed; must match the training run")
        ->capture_default_str()
        ->envname("BAGSCORE_SEED");
    compare->add_option("--test-fraction", compare_args.test_fraction,
                        "Share of rows held out of training")
        ->capture_default_str();
    compare_args.kde.attach(compare);

    DensityArgs density_args;
    CLI::App* density = app.add_subcommand(
        "density", "Dump the density curve and aggregates for one prediction set");
    density->add_option("--model", density_args.model_path, "Model file from 'train'");
    density->add_option("--dataset", density_args.dataset, "CSV supplying --row");
    density->add_option("--values", density_args.values,
                        "Aggregate this raw prediction set instead of a model's")
        ->delimiter(',');
    density->add_option("--at", density_args.features, "Inline feature row for the model")
        ->delimiter(',');
    density->add_option("--row", density_args.row, "0-based dataset row to predict");
    density->add_option("--out-dir", density_args.out_dir, "Output directory")
        ->capture_default_str()
        ->envname("BAGSCORE_OUT_DIR");
    density_args.kde.attach(density);

    SyntheticArgs synthetic_args;
    CLI::App* synthetic = app.add_subcommand(
        "synthetic", "Train on gapped synthetic data and query inside the gaps");
    synthetic->add_option("--function", synthetic_args.function_id, "Ground-truth id")
        ->capture_default_str();
    synthetic->add_option("--domain-lo", synthetic_args.domain_lo, "Sampling domain start")
        ->capture_default_str();
    synthetic->add_option("--domain-hi", synthetic_args.domain_hi, "Sampling domain end")
        ->capture_default_str();
    synthetic->add_option("--n-train", synthetic_args.n_train, "Training points")
        ->capture_default_str();
    synthetic->add_option("--noise-std", synthetic_args.noise_std,
                          "Gaussian target noise standard deviation")
        ->capture_default_str();
    synthetic->add_option("--gap", synthetic_args.gaps,
                          "Interval lo:hi excluded from sampling (repeatable)")
        ->delimiter(':');
    synthetic->add_option("--query", synthetic_args.queries,
                          "Query point (repeatable; default: gap midpoints)");
    synthetic->add_option("--out-dir", synthetic_args.out_dir, "Output directory")
        ->capture_default_str()
        ->envname("BAGSCORE_OUT_DIR");
    synthetic->add_option("--seed", synthetic_args.seed, "Data generation seed")
        ->capture_default_str()
        ->envname("BAGSCORE_SEED");
    synthetic->add_option("--preset", synthetic_args.preset, "Sizing preset: desk (100 nets)")
        ->envname("BAGSCORE_PRESET");
    synthetic_args.train.attach(synthetic);
    synthetic_args.kde.attach(synthetic);

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) {
        train_args.train.apply_preset(train_args.preset);
        return cmd_train(train_args);
    }
    if (compare->parsed()) return cmd_compare(compare_args);
    if (density->parsed()) return cmd_density(density_args);
    if (synthetic->parsed()) {
        synthetic_args.train.apply_preset(synthetic_args.preset);
        return cmd_synthetic(synthetic_args);
    }
    return 0;
}
