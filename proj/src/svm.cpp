#include "grbm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "grbm/binio.hpp"
#include "grbm/rng.hpp"

namespace grbm {

namespace {
constexpr double kSvmRelTol = 1e-8;
constexpr int kSvmMaxIter = 10000;
constexpr double kArmijo = 1e-4;
}  // namespace

void LinearSvmModel::validate() const {
  require(weights.rows() >= 1 && weights.cols() >= 1,
          "LinearSvmModel: empty weights");
  require(biases.size() == weights.rows(), "LinearSvmModel: bias count");
  require(feature_mean.size() == weights.cols() &&
              feature_std.size() == weights.cols(),
          "LinearSvmModel: scaling stats dimensions");
  require_finite(weights, "LinearSvmModel::weights");
  require_finite(biases, "LinearSvmModel::biases");
}

double squared_hinge_objective(const Matrix& X, const Vector& y,
                               const Vector& w, double bias, double C) {
  Vector scores = X * w;
  scores.array() += bias;
  const Vector margins = Vector::Ones(X.rows()) - y.cwiseProduct(scores);
  double loss = 0.0;
  for (Index i = 0; i < margins.size(); ++i)
    if (margins[i] > 0.0) loss += margins[i] * margins[i];
  return 0.5 * w.squaredNorm() + C * loss;
}

SvmSolverResult solve_squared_hinge(const Matrix& X, const Vector& y,
                                    double C) {
  require(X.rows() == y.size(), "solve_squared_hinge: label count");
  require(C > 0.0, "solve_squared_hinge: C must be > 0");

  SvmSolverResult result;
  result.w = Vector::Zero(X.cols());
  result.bias = 0.0;
  double objective = squared_hinge_objective(X, y, result.w, result.bias, C);
  double step = 1.0 / (1.0 + C * static_cast<double>(X.rows()));

  for (int iter = 0; iter < kSvmMaxIter; ++iter) {
    result.iterations = iter + 1;
    // Gradient of the smooth objective.
    Vector scores = X * result.w;
    scores.array() += result.bias;
    Vector margins = Vector::Ones(X.rows()) - y.cwiseProduct(scores);
    for (Index i = 0; i < margins.size(); ++i)
      if (margins[i] < 0.0) margins[i] = 0.0;
    const Vector coeff = margins.cwiseProduct(y);  // m_i y_i, zero if inactive
    Vector grad_w = result.w - 2.0 * C * (X.transpose() * coeff);
    const double grad_b = -2.0 * C * coeff.sum();
    const double grad_norm2 = grad_w.squaredNorm() + grad_b * grad_b;
    if (grad_norm2 < 1e-24) break;

    // Backtracking line search (Armijo).
    step *= 2.0;
    double next_objective = objective;
    Vector next_w;
    double next_bias = 0.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      next_w = result.w - step * grad_w;
      next_bias = result.bias - step * grad_b;
      next_objective = squared_hinge_objective(X, y, next_w, next_bias, C);
      if (next_objective <= objective - kArmijo * step * grad_norm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    result.w = std::move(next_w);
    result.bias = next_bias;
    const double decrease = objective - next_objective;
    objective = next_objective;
    if (decrease < kSvmRelTol * std::max(1.0, std::abs(objective))) break;
  }
  require_finite(result.w, "solve_squared_hinge weights");
  result.objective = objective;
  return result;
}

namespace {

int highest_class(const std::vector<int>& labels) {
  int top = 0;
  for (int label : labels) top = std::max(top, label);
  return top;
}

Matrix standardize(const Matrix& rows, const Vector& mean, const Vector& std) {
  Matrix out = rows.rowwise() - mean.transpose();
  for (Index c = 0; c < out.cols(); ++c) out.col(c) /= std[c];
  return out;
}

}  // namespace

LinearSvmModel train_l2svm(const Dataset& features, double C) {
  features.validate();
  require(features.labeled(), "train_l2svm: features must carry labels");
  require(features.count() >= 2, "train_l2svm: need at least two cases");
  require(C > 0.0, "train_l2svm: C must be > 0");
  const std::set<int> present(features.labels.begin(), features.labels.end());
  require(present.size() >= 2, "train_l2svm: need at least two classes");

  LinearSvmModel model;
  model.C = C;
  model.feature_mean = features.rows.colwise().mean();
  Vector variance = (features.rows.rowwise() - model.feature_mean.transpose())
                        .array()
                        .square()
                        .colwise()
                        .mean();
  model.feature_std = variance.array().sqrt().max(1e-8);
  const Matrix X =
      standardize(features.rows, model.feature_mean, model.feature_std);

  const int n_classes = highest_class(features.labels) + 1;
  model.weights.resize(n_classes, X.cols());
  model.biases.resize(n_classes);
  model.final_objectives.resize(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    Vector y(X.rows());
    for (Index i = 0; i < X.rows(); ++i)
      y[i] = features.labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
    const SvmSolverResult fit = solve_squared_hinge(X, y, C);
    model.weights.row(c) = fit.w.transpose();
    model.biases[c] = fit.bias;
    model.final_objectives[c] = fit.objective;
  }
  return model;
}

std::vector<int> predict(const LinearSvmModel& model, const Matrix& rows) {
  model.validate();
  require(rows.cols() == model.feature_dim(),
          "predict: feature dimension does not match model");
  const Matrix X = standardize(rows, model.feature_mean, model.feature_std);
  const Matrix scores =
      (X * model.weights.transpose()).rowwise() + model.biases.transpose();
  std::vector<int> labels(static_cast<std::size_t>(rows.rows()));
  for (Index r = 0; r < rows.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < scores.cols(); ++c)
      if (scores(r, c) > scores(r, best)) best = c;  // earliest class on ties
    labels[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return labels;
}

double accuracy(const LinearSvmModel& model, const Dataset& features) {
  require(features.labeled(), "accuracy: features must carry labels");
  require(features.count() >= 1, "accuracy: empty feature set");
  const std::vector<int> predicted = predict(model, features.rows);
  Index correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == features.labels[i]) ++correct;
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(features.count());
}

void save_svm(const std::filesystem::path& path, const LinearSvmModel& model) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write SVM model " + path.string());
  binio::write_magic(out, "SVMM");
  binio::write_u32(out, 1);
  binio::write_u32(out, static_cast<std::uint32_t>(model.n_classes()));
  binio::write_u32(out, static_cast<std::uint32_t>(model.feature_dim()));
  binio::write_f64(out, model.C);
  for (Index r = 0; r < model.weights.rows(); ++r)
    for (Index c = 0; c < model.weights.cols(); ++c)
      binio::write_f64(out, model.weights(r, c));
  for (Index r = 0; r < model.biases.size(); ++r)
    binio::write_f64(out, model.biases[r]);
  for (Index c = 0; c < model.feature_mean.size(); ++c)
    binio::write_f64(out, model.feature_mean[c]);
  for (Index c = 0; c < model.feature_std.size(); ++c)
    binio::write_f64(out, model.feature_std[c]);
  if (!out) throw IoError("failed while writing " + path.string());
}

LinearSvmModel load_svm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open SVM model " + path.string());
  binio::expect_magic(in, "SVMM", path.string());
  const std::uint32_t version = binio::read_u32(in, "SVMM version");
  if (version != 1)
    throw FormatError(path.string() + ": unsupported SVMM version " +
                      std::to_string(version));
  const auto classes = static_cast<Index>(binio::read_u32(in, "SVMM classes"));
  const auto dim = static_cast<Index>(binio::read_u32(in, "SVMM dim"));
  LinearSvmModel model;
  model.C = binio::read_f64(in, "SVMM C");
  model.weights.resize(classes, dim);
  model.biases.resize(classes);
  model.feature_mean.resize(dim);
  model.feature_std.resize(dim);
  model.final_objectives = Vector::Zero(classes);
  for (Index r = 0; r < classes; ++r)
    for (Index c = 0; c < dim; ++c)
      model.weights(r, c) = binio::read_f64(in, "SVMM weights");
  for (Index r = 0; r < classes; ++r)
    model.biases[r] = binio::read_f64(in, "SVMM biases");
  for (Index c = 0; c < dim; ++c)
    model.feature_mean[c] = binio::read_f64(in, "SVMM mean");
  for (Index c = 0; c < dim; ++c)
    model.feature_std[c] = binio::read_f64(in, "SVMM std");
  model.validate();
  return model;
}

void CvGrid::validate() const {
  require(folds >= 2, "CvGrid: folds must be >= 2");
  require(!rho_values.empty() && !lambda_values.empty() && !c_values.empty() &&
              !threshold_values.empty(),
          "CvGrid: all value lists must be non-empty");
}

std::vector<CvPoint> CvGrid::points() const {
  std::vector<CvPoint> out;
  out.reserve(rho_values.size() * lambda_values.size() * c_values.size() *
              threshold_values.size());
  for (double rho : rho_values)
    for (double lambda : lambda_values)
      for (double c : c_values)
        for (double threshold : threshold_values)
          out.push_back({rho, lambda, c, threshold});
  return out;
}

CvResult cross_validate(const Dataset& data, const CvGrid& grid,
                        const CvTrainEval& evaluate, std::uint64_t seed,
                        int threads) {
  grid.validate();
  data.validate();
  require(data.labeled(), "cross_validate: dataset must carry labels");
  require(threads >= 1, "cross_validate: threads must be >= 1");

  // Stratified fold assignment: shuffle within class, deal round-robin.
  const int n_classes = highest_class(data.labels) + 1;
  std::vector<std::vector<Index>> by_class(
      static_cast<std::size_t>(n_classes));
  for (Index r = 0; r < data.count(); ++r)
    by_class[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(r)])]
        .push_back(r);
  Rng rng = make_rng(seed);
  std::vector<int> fold_of(static_cast<std::size_t>(data.count()), 0);
  for (auto& members : by_class) {
    if (members.empty()) continue;
    if (static_cast<int>(members.size()) < grid.folds)
      throw StratificationError(
          "cross_validate: a class has fewer cases than folds; every fold "
          "would miss it");
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold_of[static_cast<std::size_t>(members[i])] =
          static_cast<int>(i % static_cast<std::size_t>(grid.folds));
  }

  std::vector<Dataset> train_split(static_cast<std::size_t>(grid.folds));
  std::vector<Dataset> valid_split(static_cast<std::size_t>(grid.folds));
  for (int f = 0; f < grid.folds; ++f) {
    std::vector<Index> train_rows;
    std::vector<Index> valid_rows;
    for (Index r = 0; r < data.count(); ++r)
      (fold_of[static_cast<std::size_t>(r)] == f ? valid_rows : train_rows)
          .push_back(r);
    const auto build = [&](const std::vector<Index>& rows) {
      Dataset split;
      split.kind = data.kind;
      split.rows.resize(static_cast<Index>(rows.size()), data.dim());
      split.labels.reserve(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        split.rows.row(static_cast<Index>(i)) = data.rows.row(rows[i]);
        split.labels.push_back(
            data.labels[static_cast<std::size_t>(rows[i])]);
      }
      return split;
    };
    train_split[static_cast<std::size_t>(f)] = build(train_rows);
    valid_split[static_cast<std::size_t>(f)] = build(valid_rows);
  }

  const std::vector<CvPoint> points = grid.points();
  CvResult result;
  result.table.resize(points.size() * static_cast<std::size_t>(grid.folds));
  const auto n_folds = static_cast<std::size_t>(grid.folds);
  const auto run_cell = [&](std::size_t cell) {
    const auto point_index = static_cast<int>(cell / n_folds);
    const auto fold = static_cast<int>(cell % n_folds);
    const double score =
        evaluate(train_split[static_cast<std::size_t>(fold)],
                 valid_split[static_cast<std::size_t>(fold)],
                 points[static_cast<std::size_t>(point_index)]);
    result.table[cell] = {point_index, fold, score};
  };
  const std::size_t cells = result.table.size();
  if (threads == 1 || cells < 2) {
    for (std::size_t cell = 0; cell < cells; ++cell) run_cell(cell);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk =
        (cells + static_cast<std::size_t>(threads) - 1) /
        static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      const std::size_t end = std::min(cells, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        for (std::size_t cell = begin; cell < end; ++cell) run_cell(cell);
      });
    }
    for (auto& worker : pool) worker.join();
  }

  result.best_index = 0;
  result.best_mean_accuracy = -1.0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    double mean = 0.0;
    for (int f = 0; f < grid.folds; ++f)
      mean += result.table[p * static_cast<std::size_t>(grid.folds) +
                           static_cast<std::size_t>(f)]
                  .accuracy;
    mean /= static_cast<double>(grid.folds);
    if (mean > result.best_mean_accuracy) {  // earliest point wins ties
      result.best_mean_accuracy = mean;
      result.best_index = static_cast<int>(p);
    }
  }
  result.best = points[static_cast<std::size_t>(result.best_index)];
  return result;
}

}  // namespace grbm
