#ifndef GRBM_ORACLE_HPP
#define GRBM_ORACLE_HPP

#include <vector>

#include "grbm/model.hpp"

namespace grbm {

// Exact computations on tiny GRBMs by enumerating all 2^M hidden
// configurations. Integrating the visible units out of each configuration
// in closed form gives an unnormalized log weight
//   g(h) = sum_i a_i h_i + sum_j ((b_j + m_j(h))^2 - b_j^2) / (2 sigma_j^2),
// with m_j(h) = sum_i w_ij h_i, so that
//   log Z = logsumexp_h g(h) + sum_j log(2 pi sigma_j^2) / 2.
class ExactModel {
 public:
  static constexpr Index kMaxHidden = 20;
  static constexpr Index kMaxHiddenJoint = 12;

  explicit ExactModel(GrbmParams params);

  const GrbmParams& params() const { return params_; }

  double log_partition() const { return log_z_; }

  // log p(v) = -F(v) - log Z
  double log_marginal(const Vector& v) const;

  // Mean log p(v) over the rows of `data`.
  double exact_log_likelihood(const Matrix& data) const;

  // Exact E_data[...] - E_model[...] gradient of the mean log-likelihood.
  GradientEstimate exact_gradient(const Matrix& data) const;

  // I(H; D) = S(H) - S(H | D) for the empirical distribution over rows,
  // with p(h) the data-averaged product of per-unit conditionals.
  // Requires M <= kMaxHiddenJoint.
  double exact_joint_mutual_information(const Matrix& data) const;

  // p(h) over all 2^M configurations, indexed by bitmask (bit i = h_i).
  Vector hidden_configuration_distribution() const;

  // Model marginals p(H_i = 1).
  Vector hidden_marginal() const;

  // E[V] under the model.
  Vector visible_mean() const;

  // Exact i.i.d. model samples: h from p(h), then v from p(V | h).
  Matrix sample(Index count, Rng& rng) const;

 private:
  GrbmParams params_;
  std::vector<double> config_log_weight_;  // g(h) by bitmask
  double log_weight_lse_ = 0.0;            // logsumexp_h g(h)
  double log_z_ = 0.0;

  Vector config_mean(std::uint64_t h) const;  // b + W^T h
};

}  // namespace grbm

#endif
