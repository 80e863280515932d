#ifndef GRBM_MODEL_HPP
#define GRBM_MODEL_HPP

#include "grbm/common.hpp"
#include "grbm/rng.hpp"

namespace grbm {

// Gaussian RBM parameters. Energy:
//   E(v, h) = sum_j (v_j - b_j)^2 / (2 sigma_j^2)
//           - sum_i a_i h_i - sum_ij (v_j / sigma_j^2) w_ij h_i
// Row i of W is the filter of hidden unit i.
struct GrbmParams {
  Matrix W;      // M x N
  Vector a;      // M, hidden biases
  Vector b;      // N, visible biases
  Vector sigma;  // N, positive; never updated by training

  Index hidden_units() const { return W.rows(); }
  Index visible_units() const { return W.cols(); }

  // Throws ContractError on dimension mismatch, NumericError on
  // non-finite entries or non-positive sigma.
  void validate() const;

  static GrbmParams zeros(Index m, Index n);
  static GrbmParams random_init(Index m, Index n, double weight_std, Rng& rng);
};

// Log-likelihood gradient direction (ascent) with respect to W, a, b.
struct GradientEstimate {
  Matrix dW;
  Vector da;
  Vector db;

  static GradientEstimate zeros(Index m, Index n);
  GradientEstimate& operator+=(const GradientEstimate& other);
  GradientEstimate& operator*=(double scale);
};

// p(H_i = 1 | v) = logistic(a_i + sum_j w_ij v_j / sigma_j^2)
Vector hidden_conditional(const GrbmParams& params, const Vector& v);

// Same, rows of `data` are visible vectors; returns cases x M.
Matrix hidden_conditional_batch(const GrbmParams& params, const Matrix& data);

struct GaussianConditional {
  Vector mean;      // b_j + sum_i w_ij h_i
  Vector variance;  // sigma_j^2
};

// p(V | h), independent Gaussians per visible unit.
GaussianConditional visible_conditional(const GrbmParams& params,
                                        const Vector& h);

// One Bernoulli draw per hidden unit from p(H | v).
Vector sample_hidden(const GrbmParams& params, const Vector& v, Rng& rng);

// One Gaussian draw per visible unit from p(V | h).
Vector sample_visible(const GrbmParams& params, const Vector& h, Rng& rng);

// F(v) = sum_j (v_j - b_j)^2 / (2 sigma_j^2) - sum_i softplus(a_i + x_i);
// exp(-F(v)) is proportional to the marginal p(v).
double free_energy(const GrbmParams& params, const Vector& v);

Vector free_energy_batch(const GrbmParams& params, const Matrix& data);

// Mean free energy of test data minus mean free energy of training data.
double fed(const GrbmParams& params, const Matrix& train, const Matrix& test);

}  // namespace grbm

#endif
