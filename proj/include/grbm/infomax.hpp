#ifndef GRBM_INFOMAX_HPP
#define GRBM_INFOMAX_HPP

#include <functional>
#include <string>
#include <vector>

#include "grbm/model.hpp"

namespace grbm {

// Per-unit decomposition I(H_i; D) = S_D(H_i) - S(H_i | D), in nats.
struct MutualInfoReport {
  Vector per_unit_mi;
  Vector per_unit_marginal_entropy;
  Vector per_unit_conditional_entropy;
  double ami = 0.0;                // sum of per_unit_mi
  std::vector<Index> unit_order;   // unit indices by ascending MI, stable

  // Number of units with MI strictly above `threshold` nats.
  Index units_above(double threshold) const;
};

struct AmiTraceEntry {
  long epoch = 0;
  double ami = 0.0;
  std::string checkpoint_id;  // empty when no checkpoint was taken
};

// Per-epoch AMI values; epochs strictly increasing. Running peak kept
// with earliest-epoch tie breaking.
class AmiTrace {
 public:
  void push(long epoch, double ami, std::string checkpoint_id = {});

  const std::vector<AmiTraceEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  double peak_value() const;
  long peak_epoch() const;
  Index peak_index() const;

 private:
  std::vector<AmiTraceEntry> entries_;
  Index peak_index_ = -1;
};

struct StopCriterion {
  double theta = 0.0;
};

struct StopDecision {
  long epoch = 0;
  std::string checkpoint_id;
};

// p(H_i = 1) = mean over data of p(H_i = 1 | d).
Vector unit_activation_marginal(const GrbmParams& params, const Matrix& data);

MutualInfoReport unit_mutual_information(const GrbmParams& params,
                                         const Matrix& data);

// AMI = sum_i I(H_i; D).
double ami(const GrbmParams& params, const Matrix& data);

// Elementwise -AMI + constant over the trace (reporting convenience).
std::vector<double> ami_bar(const AmiTrace& trace, double constant);

// Centered moving average of the AMI values; window 1 leaves the trace
// unchanged. Checkpoint ids are preserved.
AmiTrace smooth_trace(const AmiTrace& trace, int window);

// Appendix-A selector on the raw trace:
//   R_L(T)  = max_T' AMI(T') - AMI(T)
//   R''(T)  = R_L(T) * Sign(T - argmin_T' R_L(T')), Sign(0) = 0
//   T*      = earliest T minimizing |R''(T) - theta|
// Returns the entry index of T*; never touches checkpoints.
Index select_stop_entry(const AmiTrace& trace, const StopCriterion& criterion);

// Same selection, but the chosen entry must carry a checkpoint id;
// throws ResolutionError otherwise.
StopDecision early_stop_index(const AmiTrace& trace,
                              const StopCriterion& criterion);

using CheckpointLoader = std::function<GrbmParams(const std::string& id)>;

// Loads the parameters checkpointed at the selected stop epoch.
GrbmParams select_parameters(const AmiTrace& trace,
                             const StopCriterion& criterion,
                             const CheckpointLoader& loader);

}  // namespace grbm

#endif
