#ifndef GRBM_COMMON_HPP
#define GRBM_COMMON_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace grbm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Precondition or dimension violations.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf encountered where finite values are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Request exceeds what brute-force enumeration can handle.
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed file contents.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing or unreadable artifact.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A stop epoch was selected but no checkpoint exists there.
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or unknown configuration keys/values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A cross-validation fold is missing a class.
struct StratificationError : ContractError {
  using ContractError::ContractError;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

inline void require_finite(const Eigen::Ref<const Matrix>& m,
                           const std::string& what) {
  if (!m.allFinite()) throw NumericError("non-finite values in " + what);
}

inline void require_finite(double x, const std::string& what) {
  if (!std::isfinite(x)) throw NumericError("non-finite value in " + what);
}

// 1 / (1 + exp(-x)) without overflow for large |x|.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow for large |x|.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// Probabilities are clamped to [kProbEps, 1-kProbEps] before logs.
constexpr double kProbEps = 1e-12;

// Entropy of a Bernoulli(p) in nats.
inline double binary_entropy(double p) {
  const double q = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return -q * std::log(q) - (1.0 - q) * std::log(1.0 - q);
}

}  // namespace grbm

#endif
