#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace qigl {

using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using Index = Eigen::Index;

// Argument contract violations (bad sizes, indices, ranges).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dimension mismatches between tensors that must agree.
struct ShapeError : ArgumentError {
    using ArgumentError::ArgumentError;
};

// Quantum state invariant broken (e.g. unnormalized amplitudes).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Degenerate or insufficient data (identical rows, n < 2, zero scale range).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical domain violations (non-PSD matrix beyond tolerance).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// FNV-1a 64-bit hash; used for config hashes and file manifests.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t value);

/// Shortest round-trip decimal form of a double ("0.3", not "0.29999...").
std::string format_double(double value);

/// Thread budget: min(hardware, QIGL_THREADS). At least 1.
int max_threads();

/// Runs fn(i) for i in [0, n). Work items must be independent; any shared
/// output must be written to per-index slots so results do not depend on
/// the thread count.
void parallel_for(Index n, const std::function<void(Index)>& fn);

}  // namespace qigl
