#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

// Precondition and parameter violations are reported as std::invalid_argument.

/// Malformed or insufficient input data (CSV rows, degenerate samples).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integration failure, stability violation, or loss of mass through the grid boundary.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double time = 0.0)
        : std::runtime_error(what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

inline void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace qbm
