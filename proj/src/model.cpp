#include "grbm/model.hpp"

namespace grbm {

void GrbmParams::validate() const {
  const Index m = W.rows();
  const Index n = W.cols();
  if (m < 1 || n < 1) throw ContractError("GrbmParams: M and N must be >= 1");
  if (a.size() != m)
    throw ContractError("GrbmParams: a has length " + std::to_string(a.size()) +
                        ", expected M=" + std::to_string(m));
  if (b.size() != n)
    throw ContractError("GrbmParams: b has length " + std::to_string(b.size()) +
                        ", expected N=" + std::to_string(n));
  if (sigma.size() != n)
    throw ContractError("GrbmParams: sigma has length " +
                        std::to_string(sigma.size()) +
                        ", expected N=" + std::to_string(n));
  require_finite(W, "GrbmParams::W");
  require_finite(a, "GrbmParams::a");
  require_finite(b, "GrbmParams::b");
  require_finite(sigma, "GrbmParams::sigma");
  if ((sigma.array() <= 0.0).any())
    throw NumericError("GrbmParams: sigma entries must be positive");
}

GrbmParams GrbmParams::zeros(Index m, Index n) {
  GrbmParams p;
  p.W = Matrix::Zero(m, n);
  p.a = Vector::Zero(m);
  p.b = Vector::Zero(n);
  p.sigma = Vector::Ones(n);
  return p;
}

GrbmParams GrbmParams::random_init(Index m, Index n, double weight_std,
                                   Rng& rng) {
  GrbmParams p = zeros(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) p.W(i, j) = weight_std * normal01(rng);
  return p;
}

GradientEstimate GradientEstimate::zeros(Index m, Index n) {
  return {Matrix::Zero(m, n), Vector::Zero(m), Vector::Zero(n)};
}

GradientEstimate& GradientEstimate::operator+=(const GradientEstimate& other) {
  dW += other.dW;
  da += other.da;
  db += other.db;
  return *this;
}

GradientEstimate& GradientEstimate::operator*=(double scale) {
  dW *= scale;
  da *= scale;
  db *= scale;
  return *this;
}

namespace {

void check_visible(const GrbmParams& params, const Vector& v) {
  if (v.size() != params.visible_units())
    throw ContractError("visible vector has length " +
                        std::to_string(v.size()) + ", expected N=" +
                        std::to_string(params.visible_units()));
}

void check_visible_batch(const GrbmParams& params, const Matrix& data) {
  if (data.cols() != params.visible_units())
    throw ContractError("data rows have length " +
                        std::to_string(data.cols()) + ", expected N=" +
                        std::to_string(params.visible_units()));
}

void check_hidden(const GrbmParams& params, const Vector& h) {
  if (h.size() != params.hidden_units())
    throw ContractError("hidden vector has length " +
                        std::to_string(h.size()) + ", expected M=" +
                        std::to_string(params.hidden_units()));
}

}  // namespace

Vector hidden_conditional(const GrbmParams& params, const Vector& v) {
  check_visible(params, v);
  require_finite(v, "hidden_conditional input");
  const Vector scaled = v.array() / params.sigma.array().square();
  Vector x = params.a + params.W * scaled;
  for (Index i = 0; i < x.size(); ++i) x[i] = logistic(x[i]);
  return x;
}

Matrix hidden_conditional_batch(const GrbmParams& params, const Matrix& data) {
  check_visible_batch(params, data);
  const Vector inv_var = params.sigma.array().square().inverse();
  Matrix x = (data * inv_var.asDiagonal()) * params.W.transpose();
  x.rowwise() += params.a.transpose();
  return x.unaryExpr([](double t) { return logistic(t); });
}

GaussianConditional visible_conditional(const GrbmParams& params,
                                        const Vector& h) {
  check_hidden(params, h);
  GaussianConditional out;
  out.mean = params.b + params.W.transpose() * h;
  out.variance = params.sigma.array().square();
  return out;
}

Vector sample_hidden(const GrbmParams& params, const Vector& v, Rng& rng) {
  const Vector p = hidden_conditional(params, v);
  Vector h(p.size());
  for (Index i = 0; i < p.size(); ++i) h[i] = uniform01(rng) < p[i] ? 1.0 : 0.0;
  return h;
}

Vector sample_visible(const GrbmParams& params, const Vector& h, Rng& rng) {
  const GaussianConditional cond = visible_conditional(params, h);
  Vector v(cond.mean.size());
  for (Index j = 0; j < v.size(); ++j)
    v[j] = cond.mean[j] + params.sigma[j] * normal01(rng);
  return v;
}

double free_energy(const GrbmParams& params, const Vector& v) {
  check_visible(params, v);
  require_finite(v, "free_energy input");
  const Vector centered = v - params.b;
  double quad =
      (centered.array().square() / (2.0 * params.sigma.array().square())).sum();
  const Vector scaled = v.array() / params.sigma.array().square();
  const Vector x = params.a + params.W * scaled;
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) s += softplus(x[i]);
  return quad - s;
}

Vector free_energy_batch(const GrbmParams& params, const Matrix& data) {
  check_visible_batch(params, data);
  const Vector inv_var = params.sigma.array().square().inverse();
  Matrix x = (data * inv_var.asDiagonal()) * params.W.transpose();
  x.rowwise() += params.a.transpose();
  Vector out(data.rows());
  for (Index r = 0; r < data.rows(); ++r) {
    const auto centered = data.row(r).transpose() - params.b;
    double quad = (centered.array().square() /
                   (2.0 * params.sigma.array().square()))
                      .sum();
    double s = 0.0;
    for (Index i = 0; i < x.cols(); ++i) s += softplus(x(r, i));
    out[r] = quad - s;
  }
  return out;
}

double fed(const GrbmParams& params, const Matrix& train, const Matrix& test) {
  require(train.rows() > 0, "fed: training set must be non-empty");
  require(test.rows() > 0, "fed: test set must be non-empty");
  return free_energy_batch(params, test).mean() -
         free_energy_batch(params, train).mean();
}

}  // namespace grbm
