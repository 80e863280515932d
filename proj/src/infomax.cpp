#include "grbm/infomax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace grbm {

Index MutualInfoReport::units_above(double threshold) const {
  Index count = 0;
  for (Index i = 0; i < per_unit_mi.size(); ++i)
    if (per_unit_mi[i] > threshold) ++count;
  return count;
}

void AmiTrace::push(long epoch, double ami_value, std::string checkpoint_id) {
  if (!entries_.empty() && epoch <= entries_.back().epoch)
    throw ContractError("AmiTrace: epochs must be strictly increasing (got " +
                        std::to_string(epoch) + " after " +
                        std::to_string(entries_.back().epoch) + ")");
  require_finite(ami_value, "AmiTrace entry");
  entries_.push_back({epoch, ami_value, std::move(checkpoint_id)});
  if (peak_index_ < 0 ||
      ami_value > entries_[static_cast<std::size_t>(peak_index_)].ami)
    peak_index_ = static_cast<Index>(entries_.size()) - 1;
}

double AmiTrace::peak_value() const {
  require(!entries_.empty(), "AmiTrace: empty trace has no peak");
  return entries_[static_cast<std::size_t>(peak_index_)].ami;
}

long AmiTrace::peak_epoch() const {
  require(!entries_.empty(), "AmiTrace: empty trace has no peak");
  return entries_[static_cast<std::size_t>(peak_index_)].epoch;
}

Index AmiTrace::peak_index() const {
  require(!entries_.empty(), "AmiTrace: empty trace has no peak");
  return peak_index_;
}

Vector unit_activation_marginal(const GrbmParams& params, const Matrix& data) {
  require(data.rows() > 0, "unit_activation_marginal: dataset is empty");
  return hidden_conditional_batch(params, data).colwise().mean();
}

MutualInfoReport unit_mutual_information(const GrbmParams& params,
                                         const Matrix& data) {
  require(data.rows() > 0, "unit_mutual_information: dataset is empty");
  const Matrix probs = hidden_conditional_batch(params, data);
  const Index m = probs.cols();
  const double inv_count = 1.0 / static_cast<double>(probs.rows());

  MutualInfoReport report;
  report.per_unit_marginal_entropy.resize(m);
  report.per_unit_conditional_entropy.resize(m);
  report.per_unit_mi.resize(m);
  for (Index i = 0; i < m; ++i) {
    const double marginal = probs.col(i).mean();
    double conditional = 0.0;
    for (Index r = 0; r < probs.rows(); ++r)
      conditional += binary_entropy(probs(r, i));
    conditional *= inv_count;
    report.per_unit_marginal_entropy[i] = binary_entropy(marginal);
    report.per_unit_conditional_entropy[i] = conditional;
    report.per_unit_mi[i] =
        std::max(0.0, report.per_unit_marginal_entropy[i] - conditional);
  }
  report.ami = report.per_unit_mi.sum();
  report.unit_order.resize(static_cast<std::size_t>(m));
  std::iota(report.unit_order.begin(), report.unit_order.end(), Index{0});
  std::stable_sort(report.unit_order.begin(), report.unit_order.end(),
                   [&](Index lhs, Index rhs) {
                     return report.per_unit_mi[lhs] < report.per_unit_mi[rhs];
                   });
  return report;
}

double ami(const GrbmParams& params, const Matrix& data) {
  return unit_mutual_information(params, data).ami;
}

std::vector<double> ami_bar(const AmiTrace& trace, double constant) {
  require(!trace.empty(), "ami_bar: empty trace");
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& entry : trace.entries()) out.push_back(-entry.ami + constant);
  return out;
}

AmiTrace smooth_trace(const AmiTrace& trace, int window) {
  require(window >= 1, "smooth_trace: window must be >= 1");
  if (window == 1) return trace;
  const auto& entries = trace.entries();
  const auto n = static_cast<Index>(entries.size());
  const Index half = window / 2;
  AmiTrace smoothed;
  for (Index i = 0; i < n; ++i) {
    const Index lo = std::max<Index>(0, i - half);
    const Index hi = std::min<Index>(n - 1, i + half);
    double acc = 0.0;
    for (Index j = lo; j <= hi; ++j)
      acc += entries[static_cast<std::size_t>(j)].ami;
    smoothed.push(entries[static_cast<std::size_t>(i)].epoch,
                  acc / static_cast<double>(hi - lo + 1),
                  entries[static_cast<std::size_t>(i)].checkpoint_id);
  }
  return smoothed;
}

Index select_stop_entry(const AmiTrace& trace, const StopCriterion& criterion) {
  require(!trace.empty(), "early stopping requires at least one trace entry");
  require_finite(criterion.theta, "StopCriterion::theta");
  const auto& entries = trace.entries();
  const double peak = trace.peak_value();
  const Index peak_idx = trace.peak_index();

  Index best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < static_cast<Index>(entries.size()); ++i) {
    const double loss = peak - entries[static_cast<std::size_t>(i)].ami;
    const double sign = i < peak_idx ? -1.0 : (i > peak_idx ? 1.0 : 0.0);
    const double distance = std::abs(loss * sign - criterion.theta);
    if (distance < best_distance) {
      best_distance = distance;
      best = i;
    }
  }
  return best;
}

StopDecision early_stop_index(const AmiTrace& trace,
                              const StopCriterion& criterion) {
  const Index idx = select_stop_entry(trace, criterion);
  const auto& entry = trace.entries()[static_cast<std::size_t>(idx)];
  if (entry.checkpoint_id.empty())
    throw ResolutionError(
        "no checkpoint recorded at selected epoch " +
        std::to_string(entry.epoch) +
        "; re-run training with denser checkpointing (checkpoint_every=1)");
  return {entry.epoch, entry.checkpoint_id};
}

GrbmParams select_parameters(const AmiTrace& trace,
                             const StopCriterion& criterion,
                             const CheckpointLoader& loader) {
  const StopDecision decision = early_stop_index(trace, criterion);
  return loader(decision.checkpoint_id);
}

}  // namespace grbm
