#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bagscore {

enum class errc : int {
    ok = 0,
    invalid_input = 1,
    invalid_bandwidth = 2,
    degenerate_spread = 3,
    dimension_mismatch = 4,
    ingestion = 5,
    training_diverged = 6,
    undefined_variance = 7,
    division_by_zero = 8,
    format = 9,
    io = 10,
};

const char* errc_name(errc c) noexcept;

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

// CSV / file ingestion failure. line/column are 1-based file coordinates
// (line 1 is the header); 0 means not applicable.
class IngestionError : public Error {
public:
    IngestionError(const std::string& message, std::size_t line, std::size_t column)
        : Error(errc::ingestion, message), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

// Raised when a training loss turns non-finite. member_seed is -1 until the
// ensemble trainer attaches the failing member.
class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(const std::string& message, std::size_t epoch,
                          std::int64_t member_seed = -1)
        : Error(errc::training_diverged, message),
          epoch_(epoch),
          member_seed_(member_seed) {}

    std::size_t epoch() const noexcept { return epoch_; }
    std::int64_t member_seed() const noexcept { return member_seed_; }

private:
    std::size_t epoch_;
    std::int64_t member_seed_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace bagscore
