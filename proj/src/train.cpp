#include "grbm/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace grbm {

void SparsityConfig::validate() const {
  if (!(target > 0.0 && target < 1.0))
    throw ContractError("SparsityConfig: target must lie in (0, 1)");
  if (strength < 0.0)
    throw ContractError("SparsityConfig: strength must be >= 0");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw ContractError("TrainConfig: learning_rate must be > 0");
  if (epochs < 0) throw ContractError("TrainConfig: epochs must be >= 0");
  if (batch_size < 1) throw ContractError("TrainConfig: batch_size must be >= 1");
  if (gibbs_steps < 1) throw ContractError("TrainConfig: gibbs_steps must be >= 1");
  if (n_chains < 0) throw ContractError("TrainConfig: n_chains must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ContractError("TrainConfig: momentum must lie in [0, 1)");
  if (checkpoint_every < 1)
    throw ContractError("TrainConfig: checkpoint_every must be >= 1");
  if (ami_eval_size < 1)
    throw ContractError("TrainConfig: ami_eval_size must be >= 1");
  if (sparsity) sparsity->validate();
}

PersistentChains PersistentChains::init(const Matrix& data, Index n_chains,
                                        std::uint64_t seed) {
  require(n_chains >= 1, "PersistentChains: n_chains must be >= 1");
  require(data.rows() > 0, "PersistentChains: data must be non-empty");
  PersistentChains chains;
  chains.states.resize(n_chains, data.cols());
  Rng pick = derive_rng(seed, 0xC4A1u);
  const Index distinct = std::min(n_chains, data.rows());
  const auto rows = sample_without_replacement(data.rows(), distinct, pick);
  for (Index c = 0; c < n_chains; ++c)
    chains.states.row(c) = data.row(rows[static_cast<std::size_t>(c % distinct)]);
  chains.streams.reserve(static_cast<std::size_t>(n_chains));
  for (Index c = 0; c < n_chains; ++c)
    chains.streams.push_back(derive_rng(seed, 0xF00Du + static_cast<std::uint64_t>(c)));
  return chains;
}

GradientEstimate mean_field_statistics(const GrbmParams& params,
                                       const Matrix& visible) {
  require(visible.rows() > 0, "mean_field_statistics: empty batch");
  const double count = static_cast<double>(visible.rows());
  const Vector inv_var = params.sigma.array().square().inverse();
  const Matrix probs = hidden_conditional_batch(params, visible);
  GradientEstimate stats;
  stats.dW = probs.transpose() * (visible * inv_var.asDiagonal()) / count;
  stats.da = probs.colwise().mean();
  stats.db = ((visible.rowwise() - params.b.transpose()) * inv_var.asDiagonal())
                 .colwise()
                 .mean();
  return stats;
}

namespace {

// Sample hidden states for all rows, then resample the rows' visible
// states; `draw` supplies the stream for a given row so persistent
// chains can keep one stream per chain.
template <typename StreamForRow>
void gibbs_step_impl(const GrbmParams& params, Matrix& states,
                     StreamForRow&& stream_for_row) {
  const Matrix probs = hidden_conditional_batch(params, states);
  Matrix hidden(states.rows(), params.hidden_units());
  for (Index r = 0; r < states.rows(); ++r) {
    Rng& rng = stream_for_row(r);
    for (Index i = 0; i < hidden.cols(); ++i)
      hidden(r, i) = uniform01(rng) < probs(r, i) ? 1.0 : 0.0;
  }
  states = hidden * params.W;
  states.rowwise() += params.b.transpose();
  for (Index r = 0; r < states.rows(); ++r) {
    Rng& rng = stream_for_row(r);
    for (Index j = 0; j < states.cols(); ++j)
      states(r, j) += params.sigma[j] * normal01(rng);
  }
}

}  // namespace

void gibbs_step(const GrbmParams& params, Matrix& states, Rng& rng) {
  gibbs_step_impl(params, states, [&rng](Index) -> Rng& { return rng; });
}

GradientEstimate cd_gradient(const GrbmParams& params, const Matrix& batch,
                             int k, Rng& rng) {
  require(batch.rows() >= 1, "cd_gradient: batch must contain >= 1 case");
  require(k >= 1, "cd_gradient: k must be >= 1");
  require_finite(batch, "cd_gradient batch");

  GradientEstimate grad = mean_field_statistics(params, batch);
  Matrix reconstruction = batch;
  for (int step = 0; step < k; ++step)
    gibbs_step(params, reconstruction, rng);
  if (!reconstruction.allFinite())
    throw NumericError("cd_gradient: non-finite Gibbs reconstruction");
  const GradientEstimate neg = mean_field_statistics(params, reconstruction);
  grad.dW -= neg.dW;
  grad.da -= neg.da;
  grad.db -= neg.db;
  if (!grad.dW.allFinite() || !grad.da.allFinite() || !grad.db.allFinite())
    throw NumericError("cd_gradient: non-finite gradient estimate");
  return grad;
}

GradientEstimate pcd_gradient(const GrbmParams& params, const Matrix& batch,
                              PersistentChains& chains, int k) {
  require(chains.count() >= 1, "pcd_gradient: chains not initialized");
  require(chains.states.cols() == params.visible_units(),
          "pcd_gradient: chain width does not match N");
  require(k >= 1, "pcd_gradient: k must be >= 1");
  require(chains.streams.size() == static_cast<std::size_t>(chains.count()),
          "pcd_gradient: one rng stream per chain required");
  require_finite(batch, "pcd_gradient batch");

  GradientEstimate grad = mean_field_statistics(params, batch);
  for (int step = 0; step < k; ++step)
    gibbs_step_impl(params, chains.states, [&chains](Index r) -> Rng& {
      return chains.streams[static_cast<std::size_t>(r)];
    });
  if (!chains.states.allFinite())
    throw NumericError("pcd_gradient: non-finite chain state");
  const GradientEstimate neg = mean_field_statistics(params, chains.states);
  grad.dW -= neg.dW;
  grad.da -= neg.da;
  grad.db -= neg.db;
  if (!grad.dW.allFinite() || !grad.da.allFinite() || !grad.db.allFinite())
    throw NumericError("pcd_gradient: non-finite gradient estimate");
  return grad;
}

GradientEstimate sparsity_adjustment(const GrbmParams& params,
                                     const Matrix& batch,
                                     const SparsityConfig& cfg) {
  cfg.validate();
  require(batch.rows() >= 1, "sparsity_adjustment: empty batch");
  GradientEstimate adj =
      GradientEstimate::zeros(params.hidden_units(), params.visible_units());
  if (cfg.strength == 0.0) return adj;
  const Matrix probs = hidden_conditional_batch(params, batch);
  const Vector q = probs.colwise().mean();
  adj.da = cfg.strength * (cfg.target - q.array()).matrix();
  if (cfg.apply_to_weights) {
    const double count = static_cast<double>(batch.rows());
    const Vector inv_var = params.sigma.array().square().inverse();
    const Matrix slope = probs.array() * (1.0 - probs.array());
    const Matrix mean_slope_v =
        slope.transpose() * (batch * inv_var.asDiagonal()) / count;
    adj.dW = (cfg.strength * (cfg.target - q.array())).matrix().asDiagonal() *
             mean_slope_v;
  }
  return adj;
}

void apply_update(GrbmParams& params, const GradientEstimate& grad,
                  const TrainConfig& cfg, GradientEstimate& velocity) {
  require(grad.dW.rows() == params.W.rows() && grad.dW.cols() == params.W.cols(),
          "apply_update: gradient dimensions do not match parameters");
  require(grad.da.size() == params.a.size() && grad.db.size() == params.b.size(),
          "apply_update: gradient dimensions do not match parameters");
  if (velocity.dW.size() == 0)
    velocity = GradientEstimate::zeros(params.W.rows(), params.W.cols());
  velocity.dW = cfg.momentum * velocity.dW + cfg.learning_rate * grad.dW;
  velocity.da = cfg.momentum * velocity.da + cfg.learning_rate * grad.da;
  velocity.db = cfg.momentum * velocity.db + cfg.learning_rate * grad.db;
  params.W += velocity.dW;
  params.a += velocity.da;
  params.b += velocity.db;
  if (!params.W.allFinite() || !params.a.allFinite() || !params.b.allFinite())
    throw NumericError("apply_update: parameters became non-finite");
}

namespace {

Matrix gather_rows(const Matrix& data, const std::vector<Index>& rows,
                   std::size_t begin, std::size_t end) {
  Matrix out(static_cast<Index>(end - begin), data.cols());
  for (std::size_t r = begin; r < end; ++r)
    out.row(static_cast<Index>(r - begin)) = data.row(rows[r]);
  return out;
}

}  // namespace

TrainResult train(const GrbmParams& initial, const Matrix& data,
                  const TrainConfig& cfg, const TrainHooks& hooks,
                  const Matrix* fed_test) {
  initial.validate();
  cfg.validate();
  require(data.cols() == initial.visible_units(),
          "train: dataset row length does not match N");
  require(data.rows() >= 1, "train: dataset must be non-empty");
  if (fed_test)
    require(fed_test->cols() == initial.visible_units(),
            "train: FED test set row length does not match N");

  TrainResult result;
  result.params = initial;
  const Vector sigma_before = initial.sigma;

  // Seed-fixed evaluation subset for AMI (and the training side of FED).
  Rng eval_rng = derive_rng(cfg.seed, 0xA31Eu);
  const Index eval_size = std::min<Index>(cfg.ami_eval_size, data.rows());
  const auto eval_rows =
      sample_without_replacement(data.rows(), eval_size, eval_rng);
  const Matrix eval_set =
      gather_rows(data, eval_rows, 0, eval_rows.size());

  // Without a test set, FED falls back to two disjoint halves of the
  // evaluation subset (a resampling baseline that should hover near 0).
  Matrix fed_train_side;
  Matrix fed_test_side;
  if (fed_test) {
    fed_train_side = eval_set;
    fed_test_side = *fed_test;
  } else {
    const Index half = std::max<Index>(1, eval_set.rows() / 2);
    fed_train_side = eval_set.topRows(half);
    fed_test_side = eval_set.bottomRows(eval_set.rows() - half);
    if (fed_test_side.rows() == 0) fed_test_side = fed_train_side;
  }

  const auto evaluate = [&](long epoch) {
    EpochMetrics m;
    m.epoch = epoch;
    m.ami = ami(result.params, eval_set);
    m.fed = fed(result.params, fed_train_side, fed_test_side);
    m.mean_abs_weight = result.params.W.array().abs().mean();
    m.sparsity_mean =
        unit_activation_marginal(result.params, eval_set).mean();
    return m;
  };

  const auto record = [&](const EpochMetrics& m, bool tracked) {
    std::string checkpoint_id;
    const bool due = m.epoch % cfg.checkpoint_every == 0 || m.epoch == cfg.epochs;
    if (due && hooks.save_checkpoint)
      checkpoint_id = hooks.save_checkpoint(result.params, m.epoch, m.ami);
    if (tracked) result.trace.push(m.epoch, m.ami, checkpoint_id);
    result.metrics.push_back(m);
    if (hooks.on_epoch) hooks.on_epoch(m);
  };

  record(evaluate(0), cfg.epochs >= 1);
  if (cfg.epochs == 0) return result;

  Rng shuffle_rng = derive_rng(cfg.seed, 0x51u);
  Rng cd_rng = derive_rng(cfg.seed, 0xCD01u);
  PersistentChains chains;
  if (cfg.algorithm == Algorithm::pcd) {
    const Index n_chains = cfg.n_chains > 0 ? cfg.n_chains : cfg.batch_size;
    chains = PersistentChains::init(data, n_chains, cfg.seed);
  }
  GradientEstimate velocity;

  std::vector<Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  for (long epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const auto rows = order.size();
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    long batch_index = 0;
    for (std::size_t begin = 0; begin < rows; begin += bs, ++batch_index) {
      const std::size_t end = std::min(rows, begin + bs);
      const Matrix batch = gather_rows(data, order, begin, end);
      try {
        GradientEstimate grad =
            cfg.algorithm == Algorithm::cd
                ? cd_gradient(result.params, batch, cfg.gibbs_steps, cd_rng)
                : pcd_gradient(result.params, batch, chains, cfg.gibbs_steps);
        if (cfg.sparsity && cfg.sparsity->strength > 0.0)
          grad += sparsity_adjustment(result.params, batch, *cfg.sparsity);
        apply_update(result.params, grad, cfg, velocity);
      } catch (const NumericError& err) {
        throw NumericError("training aborted at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + err.what());
      }
    }
    record(evaluate(epoch), true);
  }

  // Training never touches sigma.
  if (result.params.sigma != sigma_before)
    throw NumericError("train: sigma changed during training");
  return result;
}

}  // namespace grbm
