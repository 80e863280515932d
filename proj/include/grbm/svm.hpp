#ifndef GRBM_SVM_HPP
#define GRBM_SVM_HPP

#include <filesystem>
#include <functional>
#include <vector>

#include "grbm/data.hpp"

namespace grbm {

// One-vs-rest linear SVM with the squared hinge loss:
//   min_w 1/2 ||w||^2 + C sum_i max(0, 1 - y_i (w.x + b))^2
// Features are standardized per dimension before training; the stats
// live in the model so prediction sees the same scaling.
struct LinearSvmModel {
  Matrix weights;  // n_classes x feature_dim (standardized space)
  Vector biases;   // n_classes
  double C = 1.0;
  Vector feature_mean;
  Vector feature_std;
  Vector final_objectives;  // per-class solver objective at termination

  Index n_classes() const { return weights.rows(); }
  Index feature_dim() const { return weights.cols(); }
  void validate() const;
};

struct SvmSolverResult {
  Vector w;
  double bias = 0.0;
  double objective = 0.0;
  int iterations = 0;
};

double squared_hinge_objective(const Matrix& X, const Vector& y,
                               const Vector& w, double bias, double C);

// Deterministic batch gradient descent with backtracking line search;
// stops when the relative objective decrease falls below 1e-8 or after
// 10000 iterations. y entries must be +-1.
SvmSolverResult solve_squared_hinge(const Matrix& X, const Vector& y, double C);

LinearSvmModel train_l2svm(const Dataset& features, double C);

std::vector<int> predict(const LinearSvmModel& model, const Matrix& rows);

// Percent correct over the labeled rows.
double accuracy(const LinearSvmModel& model, const Dataset& features);

// "SVMM" container.
void save_svm(const std::filesystem::path& path, const LinearSvmModel& model);
LinearSvmModel load_svm(const std::filesystem::path& path);

struct CvPoint {
  double rho = 0.0;
  double lambda = 0.0;
  double c = 0.0;
  double threshold = 0.0;
};

struct CvGrid {
  std::vector<double> rho_values;
  std::vector<double> lambda_values;
  std::vector<double> c_values;
  std::vector<double> threshold_values;
  int folds = 5;

  void validate() const;
  // rho-major, then lambda, C, threshold; fixes tie-breaking order.
  std::vector<CvPoint> points() const;
};

struct CvFoldScore {
  int point_index = 0;
  int fold = 0;
  double accuracy = 0.0;
};

struct CvResult {
  CvPoint best;
  int best_index = 0;
  double best_mean_accuracy = 0.0;
  std::vector<CvFoldScore> table;  // folds x points rows, fixed order
};

// Trains on the training split and returns validation accuracy for one
// grid point. The hook owns the whole GRBM+encoder+SVM pipeline so
// cross_validate never sees model internals (and validation rows never
// leak into fitting).
using CvTrainEval = std::function<double(
    const Dataset& train, const Dataset& valid, const CvPoint& point)>;

CvResult cross_validate(const Dataset& data, const CvGrid& grid,
                        const CvTrainEval& evaluate, std::uint64_t seed,
                        int threads = 1);

}  // namespace grbm

#endif
