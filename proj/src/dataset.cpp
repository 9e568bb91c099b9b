#include "bagscore/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bagscore/rng.hpp"

namespace bagscore {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

double parse_cell(const std::string& raw, std::size_t line_no, std::size_t col_no) {
    const std::string cell = trim(raw);
    if (cell.empty()) {
        throw IngestionError("empty cell at line " + std::to_string(line_no) + ", column " +
                                 std::to_string(col_no),
                             line_no, col_no);
    }
    char* end = nullptr;
    const double value = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || !std::isfinite(value)) {
        throw IngestionError("non-numeric cell '" + cell + "' at line " + std::to_string(line_no) +
                                 ", column " + std::to_string(col_no),
                             line_no, col_no);
    }
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io, "cannot open dataset file: " + path);

    std::string line;
    std::size_t line_no = 0;

    // Header
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        header = split_fields(line);
        break;
    }
    if (header.size() < 2) {
        throw IngestionError("header must name at least two columns", line_no, 0);
    }

    Dataset data;
    data.n_cols = header.size() - 1;
    for (std::size_t c = 0; c < data.n_cols; ++c) data.feature_names.push_back(trim(header[c]));
    data.target_name = trim(header.back());

    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw IngestionError("line " + std::to_string(line_no) + " has " +
                                     std::to_string(fields.size()) + " columns, expected " +
                                     std::to_string(header.size()),
                                 line_no, fields.size());
        }
        for (std::size_t c = 0; c < data.n_cols; ++c) {
            data.features.push_back(parse_cell(fields[c], line_no, c + 1));
        }
        data.targets.push_back(parse_cell(fields.back(), line_no, header.size()));
        ++data.n_rows;
    }
    if (data.n_rows == 0) {
        throw IngestionError("dataset has a header but no data rows", line_no, 0);
    }
    return data;
}

Dataset load_concrete(const std::string& path, bool* checksum_ok) {
    if (checksum_ok) *checksum_ok = true;

    Dataset data = load_csv(path);
    if (data.n_cols != 8) {
        throw IngestionError("concrete table must have 9 columns (8 features + strength), got " +
                                 std::to_string(data.n_cols + 1),
                             1, data.n_cols + 1);
    }
    if (data.n_rows != 1030) {
        throw IngestionError("concrete table must have 1030 data rows, got " +
                                 std::to_string(data.n_rows),
                             data.n_rows + 1, 0);
    }

    const std::string pin_path = path + ".checksum";
    std::ifstream pin(pin_path);
    if (pin) {
        std::string expected;
        pin >> expected;
        const std::string actual = fnv1a64_hex(fnv1a64_file(path));
        if (!expected.empty() && expected != actual) {
            std::fprintf(stderr,
                         "warning: %s checksum %s does not match pinned %s (from %s); "
                         "proceeding anyway\n",
                         path.c_str(), actual.c_str(), expected.c_str(), pin_path.c_str());
            if (checksum_ok) *checksum_ok = false;
        }
    }
    return data;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, std::uint32_t seed,
                                             double test_fraction) {
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
        fail(errc::invalid_input, "test_fraction must lie in (0, 1)");
    }
    if (data.n_rows < 2) fail(errc::invalid_input, "need at least two rows to split");

    std::size_t n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(data.n_rows)));
    n_test = std::clamp<std::size_t>(n_test, 1, data.n_rows - 1);

    std::vector<std::size_t> order(data.n_rows);
    std::iota(order.begin(), order.end(), 0);
    rng::Engine gen(seed);
    rng::shuffle(order, gen);

    std::vector<std::size_t> test_idx(order.begin(), order.begin() + n_test);
    std::vector<std::size_t> train_idx(order.begin() + n_test, order.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    auto take = [&data](const std::vector<std::size_t>& idx) {
        Dataset part;
        part.feature_names = data.feature_names;
        part.target_name = data.target_name;
        part.n_cols = data.n_cols;
        part.n_rows = idx.size();
        part.features.reserve(idx.size() * data.n_cols);
        part.targets.reserve(idx.size());
        for (std::size_t i : idx) {
            const auto r = data.row(i);
            part.features.insert(part.features.end(), r.begin(), r.end());
            part.targets.push_back(data.targets[i]);
        }
        return part;
    };
    return {take(train_idx), take(test_idx)};
}

namespace {

// Mean and population scale of one column; constant columns degrade to scale 1.
std::pair<double, double> column_stats(const double* begin, std::size_t n, std::size_t stride) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += begin[i * stride];
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = begin[i * stride] - mean;
        sq += d * d;
    }
    const double scale = std::sqrt(sq / static_cast<double>(n));
    return {mean, scale > 0.0 ? scale : 1.0};
}

}  // namespace

ScalerPair fit_scaler(const Dataset& data) {
    if (data.n_rows < 2) fail(errc::invalid_input, "need at least two rows to fit a scaler");
    ScalerPair scalers;
    scalers.features.mean.resize(data.n_cols);
    scalers.features.scale.resize(data.n_cols);
    for (std::size_t c = 0; c < data.n_cols; ++c) {
        const auto [mean, scale] = column_stats(data.features.data() + c, data.n_rows, data.n_cols);
        scalers.features.mean[c] = mean;
        scalers.features.scale[c] = scale;
    }
    const auto [tm, ts] = column_stats(data.targets.data(), data.n_rows, 1);
    scalers.target_mean = tm;
    scalers.target_scale = ts;
    return scalers;
}

Dataset apply_scaler(const Dataset& data, const ScalerPair& scalers) {
    if (scalers.features.mean.size() != data.n_cols) {
        fail(errc::dimension_mismatch, "scaler was fitted for a different column count");
    }
    Dataset out = data;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        for (std::size_t c = 0; c < data.n_cols; ++c) {
            out.features[i * data.n_cols + c] =
                (data.features[i * data.n_cols + c] - scalers.features.mean[c]) /
                scalers.features.scale[c];
        }
        out.targets[i] = (data.targets[i] - scalers.target_mean) / scalers.target_scale;
    }
    return out;
}

Dataset invert_scaler(const Dataset& data, const ScalerPair& scalers) {
    if (scalers.features.mean.size() != data.n_cols) {
        fail(errc::dimension_mismatch, "scaler was fitted for a different column count");
    }
    Dataset out = data;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        for (std::size_t c = 0; c < data.n_cols; ++c) {
            out.features[i * data.n_cols + c] =
                data.features[i * data.n_cols + c] * scalers.features.scale[c] +
                scalers.features.mean[c];
        }
        out.targets[i] = data.targets[i] * scalers.target_scale + scalers.target_mean;
    }
    return out;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io, "cannot open file for checksum: " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buffer[1 << 16];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buffer[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

std::string fnv1a64_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

}  // namespace bagscore
