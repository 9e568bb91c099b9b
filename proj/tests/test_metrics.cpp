#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "bagscore/ensemble.hpp"
#include "bagscore/metrics.hpp"
#include "bagscore/rng.hpp"
#include "doctest.h"
#include "support/test_util.hpp"

using bagscore::errc;

namespace {

template <typename Fn>
errc thrown_code(Fn&& fn) {
    try {
        fn();
    } catch (const bagscore::Error& e) {
        return e.code();
    }
    return errc::ok;
}

template <typename Fn>
std::string thrown_message(Fn&& fn) {
    try {
        fn();
    } catch (const bagscore::Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("r2 hand values") {
    const std::vector<double> y_true{1.0, 2.0, 3.0};
    CHECK(bagscore::r2(y_true, std::vector<double>{1.0, 2.0, 4.0}) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(bagscore::r2(y_true, y_true) == doctest::Approx(1.0).epsilon(1e-12));
    // Predicting the mean everywhere scores exactly zero.
    CHECK(bagscore::r2(y_true, std::vector<double>{2.0, 2.0, 2.0}) ==
          doctest::Approx(0.0).epsilon(1e-12));
    // Worse than the mean predictor goes negative.
    CHECK(bagscore::r2(y_true, std::vector<double>{3.0, 2.0, 1.0}) < 0.0);
}

TEST_CASE("rmse hand values") {
    CHECK(bagscore::rmse(std::vector<double>{0.0, 0.0}, std::vector<double>{3.0, 4.0}) ==
          doctest::Approx(3.5355339059327378).epsilon(1e-12));
    // A constant offset d comes back as |d|.
    const std::vector<double> y{5.0, -2.0, 7.5, 0.25};
    std::vector<double> shifted(y);
    for (double& v : shifted) v += -1.75;
    CHECK(bagscore::rmse(y, shifted) == doctest::Approx(1.75).epsilon(1e-12));
}

TEST_CASE("mape hand values") {
    CHECK(bagscore::mape(std::vector<double>{10.0}, std::vector<double>{9.0}) ==
          doctest::Approx(10.0).epsilon(1e-12));
    CHECK(bagscore::mape(std::vector<double>{10.0, 20.0}, std::vector<double>{9.0, 24.0}) ==
          doctest::Approx(15.0).epsilon(1e-12));
    // Negative true values use their magnitude.
    CHECK(bagscore::mape(std::vector<double>{-10.0}, std::vector<double>{-9.0}) ==
          doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("mae hand values") {
    CHECK(bagscore::mae(std::vector<double>{0.0, 0.0}, std::vector<double>{-2.0, 2.0}) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(bagscore::mae(std::vector<double>{0.0, 0.0, 0.0},
                        std::vector<double>{1.0, 2.0, 6.0}) ==
          doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("metric error contracts") {
    const std::vector<double> y{1.0, 2.0};
    const std::vector<double> p{1.0, 2.0};

    CHECK(thrown_code([&] { bagscore::r2(std::vector<double>{4.0, 4.0, 4.0},
                                         std::vector<double>{1.0, 2.0, 3.0}); }) ==
          errc::undefined_variance);

    const std::string msg = thrown_message(
        [&] { bagscore::mape(std::vector<double>{1.0, 0.0, 3.0}, std::vector<double>{1.0, 2.0, 3.0}); });
    CHECK(msg.find("2") != std::string::npos);  // 1-based offending row
    CHECK(thrown_code([&] { bagscore::mape(std::vector<double>{1.0, 0.0, 3.0},
                                           std::vector<double>{1.0, 2.0, 3.0}); }) ==
          errc::division_by_zero);

    for (auto metric : {bagscore::r2, bagscore::rmse, bagscore::mape, bagscore::mae}) {
        CHECK(thrown_code([&] { metric(y, std::vector<double>{1.0}); }) == errc::invalid_input);
        CHECK(thrown_code([&] { metric(std::vector<double>{}, std::vector<double>{}); }) ==
              errc::invalid_input);
    }
    (void)p;
}

TEST_CASE("rmse dominates mae and both respect permutations") {
    bagscore::rng::Engine gen(33);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + gen() % 40;
        std::vector<double> y(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = bagscore::rng::uniform_range(gen, -50.0, 50.0);
            p[i] = y[i] + bagscore::rng::uniform_range(gen, -5.0, 5.0);
        }
        CHECK(bagscore::rmse(y, p) >= bagscore::mae(y, p) - 1e-15);

        // Shuffle both arrays with the same permutation: nothing changes.
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        bagscore::rng::shuffle(idx, gen);
        std::vector<double> y2(n), p2(n);
        for (std::size_t i = 0; i < n; ++i) {
            y2[i] = y[idx[i]];
            p2[i] = p[idx[i]];
        }
        CHECK(bagscore::rmse(y, p) == doctest::Approx(bagscore::rmse(y2, p2)).epsilon(1e-12));
        CHECK(bagscore::mae(y, p) == doctest::Approx(bagscore::mae(y2, p2)).epsilon(1e-12));
    }
}

TEST_CASE("r2 strictly drops when one prediction is pushed away") {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> p{1.1, 1.9, 3.0, 4.2, 4.9};
    const double before = bagscore::r2(y, p);
    p[2] += 1.5;
    CHECK(bagscore::r2(y, p) < before);
}

TEST_CASE("single-member ensembles score identically under every aggregator") {
    bagscore::Dataset data;
    bagscore::rng::Engine gen(61);
    testutil::friedman_table(gen, 60, 0.5, data.features, data.targets);
    data.n_rows = 60;
    data.n_cols = 8;
    data.feature_names = {"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"};
    data.target_name = "y";

    bagscore::TrainConfig config;
    config.epochs = 20;
    const auto model =
        bagscore::train_ensemble(bagscore::default_mlp_spec(8), 1, data, config);

    bagscore::Dataset test;
    testutil::friedman_table(gen, 20, 0.5, test.features, test.targets);
    test.n_rows = 20;
    test.n_cols = 8;
    test.feature_names = data.feature_names;
    test.target_name = "y";

    const auto report = bagscore::evaluate_aggregators(model, test);
    CHECK(report.n_test == 20);
    CHECK(report.mean.rmse == report.median.rmse);
    CHECK(report.mean.rmse == report.bs.rmse);
    CHECK(report.mean.r2 == report.bs.r2);
    CHECK(report.mean.mape == report.bs.mape);
    CHECK(report.mean.mae == report.bs.mae);
}

TEST_CASE("report renderers carry all twelve numbers") {
    bagscore::EvalReport report;
    report.mean = {0.9123456789, 1.5, 12.25, 1.25};
    report.median = {0.95, 1.25, 11.0, 1.0};
    report.bs = {0.97, 1.0, 10.5, 0.875};
    report.n_test = 103;

    const std::string text = bagscore::render_report_text(report);
    CHECK(text.find("mean") != std::string::npos);
    CHECK(text.find("median") != std::string::npos);
    CHECK(text.find("bs") != std::string::npos);
    CHECK(text.find("n_test = 103") != std::string::npos);
    CHECK(text.find("0.912346") != std::string::npos);  // 6 significant digits

    const std::string csv = bagscore::render_report_csv(report);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "aggregator,r2,rmse,mape,mae");
    std::string row;
    int rows = 0;
    double sum = 0.0;
    while (std::getline(lines, row)) {
        REQUIRE(std::count(row.begin(), row.end(), ',') == 4);
        std::istringstream cells(row);
        std::string tag;
        std::getline(cells, tag, ',');
        CHECK((tag == "mean" || tag == "median" || tag == "bs"));
        std::string cell;
        while (std::getline(cells, cell, ',')) sum += std::stod(cell);
        ++rows;
    }
    CHECK(rows == 3);
    // Full-precision round trip: the parsed numbers reproduce the struct sums.
    const double expect = 0.9123456789 + 1.5 + 12.25 + 1.25 + 0.95 + 1.25 + 11.0 + 1.0 +
                          0.97 + 1.0 + 10.5 + 0.875;
    CHECK(sum == doctest::Approx(expect).epsilon(1e-15));
}
