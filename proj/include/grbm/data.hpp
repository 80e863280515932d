#ifndef GRBM_DATA_HPP
#define GRBM_DATA_HPP

#include <array>
#include <filesystem>
#include <vector>

#include "grbm/common.hpp"
#include "grbm/rng.hpp"

namespace grbm {

enum class DataKind { raw_pixels, patch, whitened_patch, feature };

struct Dataset {
  Matrix rows;              // cases x dim
  std::vector<int> labels;  // empty when unlabeled, else one id per row
  DataKind kind = DataKind::raw_pixels;

  Index count() const { return rows.rows(); }
  Index dim() const { return rows.cols(); }
  bool labeled() const { return !labels.empty(); }

  void validate(int n_classes = 0) const;
};

// CIFAR-10 geometry.
constexpr int kImageSide = 32;
constexpr int kImageChannels = 3;
constexpr int kImagePixels = kImageSide * kImageSide * kImageChannels;  // 3072
constexpr int kCifarRecordBytes = kImagePixels + 1;
constexpr int kCifarRecordsPerFile = 10000;

struct Cifar10 {
  Dataset train;  // 50000 x 3072
  Dataset test;   // 10000 x 3072
};

// Reads data_batch_1..5.bin and test_batch.bin; pixels mapped to [0, 1],
// channel planes kept in R,G,B order. Any file whose size is not
// 10000 x 3073 bytes is rejected with a FormatError naming it.
Cifar10 load_cifar10(const std::filesystem::path& directory);

// `count` patches of rf_size x rf_size x 3 (dim 3 w^2) at uniformly random
// (image, x, y) positions, sampled with replacement across images.
Dataset extract_patches(const Dataset& images, int rf_size, Index count,
                        std::uint64_t seed);

constexpr double kDefaultContrastEps = 10.0 / (255.0 * 255.0);
constexpr double kDefaultZcaEps = 0.01;

// Per row: subtract the row mean, divide by sqrt(row variance + eps).
Dataset contrast_normalize(const Dataset& patches, double eps);

// Fitted contrast-normalization/whitening parameters.
struct PreprocessModel {
  Vector patch_mean;        // column means of the fitting data
  Matrix whitening_matrix;  // U (Lambda + eps I)^{-1/2} U^T, symmetric
  double contrast_epsilon = kDefaultContrastEps;
  double zca_epsilon = kDefaultZcaEps;
  // Eigenvalues of the fitting covariance, descending (diagnostics).
  Vector eigenvalues;
  Matrix eigenvectors;  // columns match `eigenvalues`

  Index dim() const { return patch_mean.size(); }
  void validate() const;
};

// Fits mean + ZCA whitening on (already contrast-normalized) patches.
PreprocessModel zca_fit(const Dataset& patches, double eps,
                        double contrast_eps = kDefaultContrastEps);

// Centered rows multiplied by the whitening matrix.
Dataset zca_apply(const PreprocessModel& model, const Dataset& patches);

// contrast_normalize + zca_fit in one step, recording both epsilons.
PreprocessModel fit_preprocessing(const Dataset& raw_patches,
                                  double contrast_eps = kDefaultContrastEps,
                                  double zca_eps = kDefaultZcaEps);

// Full pipeline for a single raw patch: contrast-normalize, center, whiten.
Vector preprocess_patch(const PreprocessModel& model, const Vector& raw_patch);

// Same for a block of raw patches (rows).
Matrix preprocess_patches(const PreprocessModel& model, const Matrix& raw);

// Two-dimensional four-component Gaussian mixture of the filter-number
// adjustment experiment: one dense component and three sparse ones at
// equal distance from it.
struct ToyGmmSpec {
  std::array<double, 4> weights;
  std::array<Eigen::Vector2d, 4> means;
  std::array<Eigen::Matrix2d, 4> covariances;

  void validate() const;

  // Dense component: weight 0.7 at the origin, std 0.45. Sparse
  // components: weight 0.1 each at radius 3.0 (angles 90, 210, 330
  // degrees), std 0.2.
  static ToyGmmSpec defaults();
};

// n i.i.d. samples; labels give the generating component.
Dataset toy_gmm_generate(const ToyGmmSpec& spec, Index n, std::uint64_t seed);

// "DSET" container: magic, u32 version, u64 rows, u64 dim, row-major
// little-endian f64 payload, then an optional u32 labels block.
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

// "ZCAW" container for PreprocessModel.
void save_preprocess(const std::filesystem::path& path,
                     const PreprocessModel& model);
PreprocessModel load_preprocess(const std::filesystem::path& path);

}  // namespace grbm

#endif
