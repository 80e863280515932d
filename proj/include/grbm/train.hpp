#ifndef GRBM_TRAIN_HPP
#define GRBM_TRAIN_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grbm/infomax.hpp"
#include "grbm/model.hpp"

namespace grbm {

enum class Algorithm { cd, pcd };

// Drives mean hidden activations toward `target` (rho) with weight
// `strength` (lambda). Bias-only by default; the weight-penalty variant
// is gated behind apply_to_weights.
struct SparsityConfig {
  double target = 0.05;
  double strength = 0.0;
  bool apply_to_weights = false;

  void validate() const;
};

struct TrainConfig {
  double learning_rate = 0.003;
  long epochs = 80;
  long batch_size = 100;
  Algorithm algorithm = Algorithm::pcd;
  int gibbs_steps = 1;  // k
  long n_chains = 0;    // 0 means batch_size
  std::optional<SparsityConfig> sparsity;
  double momentum = 0.0;
  std::uint64_t seed = 0;
  long checkpoint_every = 1;
  long ami_eval_size = 10000;

  void validate() const;
};

// Fantasy-particle visible states; chain i is always advanced by
// stream i so results do not depend on scheduling.
struct PersistentChains {
  Matrix states;  // n_chains x N
  std::vector<Rng> streams;

  Index count() const { return states.rows(); }

  // Chains start at data rows sampled without replacement (cycling when
  // n_chains exceeds the dataset).
  static PersistentChains init(const Matrix& data, Index n_chains,
                               std::uint64_t seed);
};

// Mean-field sufficient statistics at the given visible states:
// dW = E[p(H|v) v^T / sigma^2], da = E[p(H|v)], db = E[(v - b)/sigma^2].
GradientEstimate mean_field_statistics(const GrbmParams& params,
                                       const Matrix& visible);

// One block Gibbs sweep per row (sample h, then v), in place.
void gibbs_step(const GrbmParams& params, Matrix& states, Rng& rng);

// CD-k: positive statistics at the data, negative statistics at the
// k-step Gibbs reconstruction started from the data.
GradientEstimate cd_gradient(const GrbmParams& params, const Matrix& batch,
                             int k, Rng& rng);

// PCD: negative statistics from the persistent chains after advancing
// them k steps; chains are mutated in place.
GradientEstimate pcd_gradient(const GrbmParams& params, const Matrix& batch,
                              PersistentChains& chains, int k);

// da_i = lambda * (rho - q_i) with q_i the batch-mean activation
// probability; dW and db stay zero unless apply_to_weights is set.
GradientEstimate sparsity_adjustment(const GrbmParams& params,
                                     const Matrix& batch,
                                     const SparsityConfig& cfg);

// velocity <- momentum * velocity + learning_rate * grad;
// params <- params + velocity. Sigma is never touched.
void apply_update(GrbmParams& params, const GradientEstimate& grad,
                  const TrainConfig& cfg, GradientEstimate& velocity);

struct EpochMetrics {
  long epoch = 0;
  double ami = 0.0;
  double fed = 0.0;
  double mean_abs_weight = 0.0;
  double sparsity_mean = 0.0;
};

struct TrainHooks {
  // Called once per logged epoch, including epoch 0.
  std::function<void(const EpochMetrics&)> on_epoch;
  // Called when a checkpoint is due; returns the checkpoint id recorded
  // in the AMI trace.
  std::function<std::string(const GrbmParams&, long epoch, double ami)>
      save_checkpoint;
};

struct TrainResult {
  GrbmParams params;
  AmiTrace trace;
  std::vector<EpochMetrics> metrics;
};

// Runs epochs x ceil(|D| / batch_size) updates with a fresh data
// permutation per epoch. AMI and FED are evaluated at every epoch
// boundary on a seed-fixed evaluation subset; FED compares against
// `fed_test` rows when given, else against a disjoint held-out slice of
// the training data. Numeric failures abort with the failing epoch and
// batch named; checkpoints already written stay on disk.
TrainResult train(const GrbmParams& initial, const Matrix& data,
                  const TrainConfig& cfg, const TrainHooks& hooks = {},
                  const Matrix* fed_test = nullptr);

}  // namespace grbm

#endif
