#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phenokg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Base error; module-specific errors derive from this so callers can catch
// per-category or wholesale.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonFinite : Error {
    using Error::Error;
};

// Collects warnings emitted during fitting/ingestion so the CLI can surface
// them without the library depending on a logger.
struct WarningLog {
    std::vector<std::string> messages;
    void warn(std::string msg) { messages.push_back(std::move(msg)); }
    bool empty() const { return messages.empty(); }
};

inline bool approx_equal(double a, double b, double tol = 1e-9) {
    return std::abs(a - b) <= tol;
}

}  // namespace phenokg
