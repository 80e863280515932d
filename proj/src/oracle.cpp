#include "grbm/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace grbm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

void check_data(const GrbmParams& params, const Matrix& data) {
  if (data.cols() != params.visible_units())
    throw ContractError("dataset rows have length " +
                        std::to_string(data.cols()) + ", expected N=" +
                        std::to_string(params.visible_units()));
  require(data.rows() > 0, "dataset must be non-empty");
}

}  // namespace

ExactModel::ExactModel(GrbmParams params) : params_(std::move(params)) {
  params_.validate();
  const Index m = params_.hidden_units();
  const Index n = params_.visible_units();
  if (m > kMaxHidden)
    throw CapabilityError("ExactModel: M=" + std::to_string(m) +
                          " exceeds the enumeration cap of " +
                          std::to_string(kMaxHidden));

  const std::uint64_t n_configs = 1ull << m;
  config_log_weight_.assign(n_configs, 0.0);

  // Gray-code walk: exactly one hidden unit flips per step, so the
  // active-filter sum m_j is updated in O(N) per configuration.
  const Vector inv_two_var =
      (2.0 * params_.sigma.array().square()).inverse();
  Vector active_sum = Vector::Zero(n);
  double bias_sum = 0.0;
  std::uint64_t gray = 0;
  for (std::uint64_t t = 0;; ++t) {
    const double quad =
        ((active_sum.array().square() +
          2.0 * params_.b.array() * active_sum.array()) *
         inv_two_var.array())
            .sum();
    config_log_weight_[gray] = bias_sum + quad;
    if (t + 1 == n_configs) break;
    const int flip = std::countr_zero(t + 1);
    const std::uint64_t bit = 1ull << flip;
    gray ^= bit;
    if (gray & bit) {
      active_sum += params_.W.row(flip).transpose();
      bias_sum += params_.a[flip];
    } else {
      active_sum -= params_.W.row(flip).transpose();
      bias_sum -= params_.a[flip];
    }
  }

  const double top = *std::max_element(config_log_weight_.begin(),
                                       config_log_weight_.end());
  double acc = 0.0;
  for (double g : config_log_weight_) acc += std::exp(g - top);
  log_weight_lse_ = top + std::log(acc);

  double gauss_const = 0.0;
  for (Index j = 0; j < n; ++j)
    gauss_const +=
        0.5 * (kLog2Pi + 2.0 * std::log(params_.sigma[j]));
  log_z_ = log_weight_lse_ + gauss_const;
  require_finite(log_z_, "ExactModel::log_partition");
}

Vector ExactModel::config_mean(std::uint64_t h) const {
  Vector mean = params_.b;
  for (Index i = 0; i < params_.hidden_units(); ++i)
    if (h & (1ull << i)) mean += params_.W.row(i).transpose();
  return mean;
}

double ExactModel::log_marginal(const Vector& v) const {
  return -free_energy(params_, v) - log_z_;
}

double ExactModel::exact_log_likelihood(const Matrix& data) const {
  check_data(params_, data);
  return -free_energy_batch(params_, data).mean() - log_z_;
}

GradientEstimate ExactModel::exact_gradient(const Matrix& data) const {
  check_data(params_, data);
  const Index m = params_.hidden_units();
  const double count = static_cast<double>(data.rows());
  const Vector inv_var = params_.sigma.array().square().inverse();

  const Matrix probs = hidden_conditional_batch(params_, data);
  GradientEstimate grad;
  grad.dW = probs.transpose() * (data * inv_var.asDiagonal()) / count;
  grad.da = probs.colwise().mean();
  grad.db = ((data.rowwise() - params_.b.transpose()) * inv_var.asDiagonal())
                .colwise()
                .mean();

  const Vector p_config = hidden_configuration_distribution();
  for (Index h = 0; h < p_config.size(); ++h) {
    const double p = p_config[h];
    if (p <= 0.0) continue;
    const auto mask = static_cast<std::uint64_t>(h);
    const Vector mean = config_mean(mask);
    const Vector scaled_mean = mean.cwiseProduct(inv_var);
    for (Index i = 0; i < m; ++i)
      if (mask & (1ull << i)) {
        grad.dW.row(i) -= p * scaled_mean.transpose();
        grad.da[i] -= p;
      }
    grad.db -= p * (mean - params_.b).cwiseProduct(inv_var);
  }
  return grad;
}

Vector ExactModel::hidden_configuration_distribution() const {
  const auto n_configs = static_cast<Index>(config_log_weight_.size());
  Vector p(n_configs);
  for (Index h = 0; h < n_configs; ++h)
    p[h] = std::exp(config_log_weight_[static_cast<std::size_t>(h)] -
                    log_weight_lse_);
  return p;
}

Vector ExactModel::hidden_marginal() const {
  const Vector p = hidden_configuration_distribution();
  Vector marginal = Vector::Zero(params_.hidden_units());
  for (Index h = 0; h < p.size(); ++h)
    for (Index i = 0; i < params_.hidden_units(); ++i)
      if (static_cast<std::uint64_t>(h) & (1ull << i)) marginal[i] += p[h];
  return marginal;
}

Vector ExactModel::visible_mean() const {
  const Vector p = hidden_configuration_distribution();
  Vector mean = Vector::Zero(params_.visible_units());
  for (Index h = 0; h < p.size(); ++h)
    mean += p[h] * config_mean(static_cast<std::uint64_t>(h));
  return mean;
}

double ExactModel::exact_joint_mutual_information(const Matrix& data) const {
  check_data(params_, data);
  const Index m = params_.hidden_units();
  if (m > kMaxHiddenJoint)
    throw CapabilityError(
        "exact_joint_mutual_information: M=" + std::to_string(m) +
        " exceeds the joint-entropy cap of " + std::to_string(kMaxHiddenJoint));

  const std::size_t n_configs = 1ull << m;
  std::vector<double> aggregated(n_configs, 0.0);
  std::vector<double> scratch(n_configs);
  const Matrix probs = hidden_conditional_batch(params_, data);
  const double inv_count = 1.0 / static_cast<double>(data.rows());

  double conditional_entropy = 0.0;
  for (Index r = 0; r < data.rows(); ++r) {
    scratch[0] = 1.0;
    std::size_t filled = 1;
    for (Index i = 0; i < m; ++i) {
      const double p = probs(r, i);
      for (std::size_t c = 0; c < filled; ++c) {
        scratch[filled + c] = scratch[c] * p;
        scratch[c] *= (1.0 - p);
      }
      filled *= 2;
      conditional_entropy += binary_entropy(p) * inv_count;
    }
    for (std::size_t c = 0; c < n_configs; ++c)
      aggregated[c] += scratch[c] * inv_count;
  }

  double joint_entropy = 0.0;
  for (double q : aggregated) {
    const double clamped = std::clamp(q, kProbEps, 1.0);
    joint_entropy -= q * std::log(clamped);
  }
  return std::max(0.0, joint_entropy - conditional_entropy);
}

Matrix ExactModel::sample(Index count, Rng& rng) const {
  require(count >= 1, "sample: count must be >= 1");
  const Vector p = hidden_configuration_distribution();
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Index h = 0; h < p.size(); ++h) {
    acc += p[h];
    cdf[static_cast<std::size_t>(h)] = acc;
  }
  Matrix out(count, params_.visible_units());
  for (Index r = 0; r < count; ++r) {
    const double u = uniform01(rng) * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const auto h = static_cast<std::uint64_t>(
        std::min<std::ptrdiff_t>(it - cdf.begin(),
                                 static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    const Vector mean = config_mean(h);
    for (Index j = 0; j < out.cols(); ++j)
      out(r, j) = mean[j] + params_.sigma[j] * normal01(rng);
  }
  return out;
}

}  // namespace grbm
