#include <cmath>

#include "doctest.h"
#include "grbm/model.hpp"
#include "grbm/oracle.hpp"
#include "support/test_support.hpp"

using namespace grbm;
using grbm::testing::random_tiny_grbm;
using grbm::testing::raw_energy;

TEST_CASE("hidden_conditional is 0.5 for a zero model") {
  const GrbmParams p = GrbmParams::zeros(4, 3);
  const Vector v = Vector::Constant(3, 1.7);
  const Vector probs = hidden_conditional(p, v);
  for (Index i = 0; i < probs.size(); ++i) CHECK(probs[i] == doctest::Approx(0.5));
}

TEST_CASE("hidden_conditional closed form") {
  GrbmParams p = GrbmParams::zeros(1, 2);
  p.a[0] = 1.0;
  p.W(0, 0) = 1.0;
  p.W(0, 1) = -1.0;
  Vector v(2);
  v << 2.0, 1.0;
  const Vector probs = hidden_conditional(p, v);
  CHECK(probs[0] == doctest::Approx(0.880797).epsilon(1e-5));
}

TEST_CASE("hidden_conditional matches enumeration over hidden states") {
  Rng rng = make_rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const GrbmParams p = random_tiny_grbm(rng, 3, 2);
    const Matrix vs = grbm::testing::random_data(rng, 5, 2);
    for (Index r = 0; r < vs.rows(); ++r) {
      const Vector v = vs.row(r).transpose();
      const Vector probs = hidden_conditional(p, v);
      for (Index i = 0; i < 3; ++i) {
        double numer = 0.0;
        double denom = 0.0;
        for (std::uint64_t h = 0; h < 8; ++h) {
          const double weight = std::exp(-raw_energy(p, v, h));
          denom += weight;
          if (h & (1ull << i)) numer += weight;
        }
        CHECK(std::abs(probs[i] - numer / denom) <= 1e-10);
      }
    }
  }
}

TEST_CASE("hidden_conditional rejects dimension mismatch") {
  const GrbmParams p = GrbmParams::zeros(2, 3);
  CHECK_THROWS_AS(hidden_conditional(p, Vector::Zero(4)), ContractError);
}

TEST_CASE("visible_conditional with no active units") {
  Rng rng = make_rng(3);
  const GrbmParams p = random_tiny_grbm(rng, 3, 4);
  const auto cond = visible_conditional(p, Vector::Zero(3));
  CHECK((cond.mean - p.b).norm() == doctest::Approx(0.0));
  for (Index j = 0; j < 4; ++j)
    CHECK(cond.variance[j] == doctest::Approx(p.sigma[j] * p.sigma[j]));
}

TEST_CASE("visible_conditional direct formula") {
  GrbmParams p = GrbmParams::zeros(1, 1);
  p.W(0, 0) = 2.0;
  p.b[0] = 0.5;
  const auto cond = visible_conditional(p, Vector::Ones(1));
  CHECK(cond.mean[0] == doctest::Approx(2.5));
  CHECK(cond.variance[0] == doctest::Approx(1.0));
}

TEST_CASE("sample_visible mean matches the conditional within 4 SE") {
  Rng rng = make_rng(11);
  const GrbmParams p = random_tiny_grbm(rng, 3, 2);
  Vector h(3);
  h << 1.0, 0.0, 1.0;
  const auto cond = visible_conditional(p, h);
  const Index n = 100000;
  Vector mean = Vector::Zero(2);
  for (Index s = 0; s < n; ++s) mean += sample_visible(p, h, rng);
  mean /= static_cast<double>(n);
  for (Index j = 0; j < 2; ++j) {
    const double se = p.sigma[j] / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean[j] - cond.mean[j]) <= 4.0 * se);
  }
}

TEST_CASE("sample_hidden hits the 0.5 rate for a zero model") {
  const GrbmParams p = GrbmParams::zeros(2, 2);
  Rng rng = make_rng(5);
  const Vector v = Vector::Zero(2);
  const Index n = 100000;
  Vector rate = Vector::Zero(2);
  for (Index s = 0; s < n; ++s) rate += sample_hidden(p, v, rng);
  rate /= static_cast<double>(n);
  for (Index i = 0; i < 2; ++i) {
    CHECK(rate[i] >= 0.494);
    CHECK(rate[i] <= 0.506);
  }
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  Rng rng_a = make_rng(99);
  Rng rng_b = make_rng(99);
  Rng model_rng = make_rng(1);
  const GrbmParams p = random_tiny_grbm(model_rng, 4, 3);
  const Vector v = Vector::Constant(3, 0.3);
  Vector h(4);
  h << 1, 0, 1, 0;
  for (int s = 0; s < 50; ++s) {
    CHECK(sample_hidden(p, v, rng_a) == sample_hidden(p, v, rng_b));
    CHECK(sample_visible(p, h, rng_a) == sample_visible(p, h, rng_b));
  }
}

TEST_CASE("sample_visible unit variance for the zero model") {
  const GrbmParams p = GrbmParams::zeros(1, 1);
  Rng rng = make_rng(17);
  const Vector h = Vector::Zero(1);
  const Index n = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Index s = 0; s < n; ++s) {
    const double v = sample_visible(p, h, rng)[0];
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(var - 1.0) <= 0.03);
}

TEST_CASE("free_energy closed form at the origin") {
  const GrbmParams p = GrbmParams::zeros(5, 2);
  CHECK(free_energy(p, Vector::Zero(2)) ==
        doctest::Approx(-5.0 * std::log(2.0)));
}

TEST_CASE("exp(-F(v)) equals the enumerated unnormalized marginal") {
  Rng rng = make_rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const GrbmParams p = random_tiny_grbm(rng, 4, 2);
    const Matrix vs = grbm::testing::random_data(rng, 3, 2);
    for (Index r = 0; r < vs.rows(); ++r) {
      const Vector v = vs.row(r).transpose();
      double direct = 0.0;
      for (std::uint64_t h = 0; h < 16; ++h)
        direct += std::exp(-raw_energy(p, v, h));
      const double via_f = std::exp(-free_energy(p, v));
      CHECK(std::abs(via_f - direct) <= 1e-9 * std::abs(direct));
    }
  }
}

TEST_CASE("free_energy marginal identity against the oracle partition") {
  Rng rng = make_rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const GrbmParams p = random_tiny_grbm(rng, 5, 3);
    const ExactModel oracle(p);
    const Matrix vs = grbm::testing::random_data(rng, 4, 3);
    for (Index r = 0; r < vs.rows(); ++r) {
      const Vector v = vs.row(r).transpose();
      const double log_p =
          -free_energy(p, v) - oracle.log_partition();
      CHECK(log_p == doctest::Approx(oracle.log_marginal(v)).epsilon(1e-12));
    }
  }
}

TEST_CASE("free_energy survives huge hidden biases") {
  GrbmParams p = GrbmParams::zeros(3, 2);
  p.a.setConstant(1000.0);
  const double f = free_energy(p, Vector::Ones(2));
  CHECK(std::isfinite(f));
}

TEST_CASE("fed is zero on identical sets and definitional on singletons") {
  Rng rng = make_rng(31);
  const GrbmParams p = random_tiny_grbm(rng, 3, 2);
  const Matrix set = grbm::testing::random_data(rng, 10, 2);
  CHECK(fed(p, set, set) == doctest::Approx(0.0));

  const Matrix v1 = grbm::testing::random_data(rng, 1, 2);
  const Matrix v2 = grbm::testing::random_data(rng, 1, 2);
  CHECK(fed(p, v1, v2) ==
        doctest::Approx(free_energy(p, v2.row(0).transpose()) -
                        free_energy(p, v1.row(0).transpose())));
  CHECK_THROWS_AS(fed(p, Matrix(0, 2), set), ContractError);
}

TEST_CASE("fed on disjoint halves of an i.i.d. sample is within 5 SE of 0") {
  Rng rng = make_rng(37);
  const GrbmParams p = random_tiny_grbm(rng, 3, 2);
  const ExactModel oracle(p);
  const Matrix sample = oracle.sample(20000, rng);
  const Matrix first = sample.topRows(10000);
  const Matrix second = sample.bottomRows(10000);
  const double value = fed(p, first, second);

  const Vector f_first = free_energy_batch(p, first);
  const Vector f_second = free_energy_batch(p, second);
  const auto var = [](const Vector& f) {
    const double mean = f.mean();
    return (f.array() - mean).square().sum() /
           static_cast<double>(f.size() - 1);
  };
  const double se = std::sqrt(var(f_first) / f_first.size() +
                              var(f_second) / f_second.size());
  CHECK(std::abs(value) <= 5.0 * se);
}

TEST_CASE("GrbmParams validation catches bad shapes and sigma") {
  GrbmParams p = GrbmParams::zeros(2, 2);
  p.sigma[0] = 0.0;
  CHECK_THROWS_AS(p.validate(), NumericError);
  p = GrbmParams::zeros(2, 2);
  p.a.resize(3);
  CHECK_THROWS_AS(p.validate(), ContractError);
}
