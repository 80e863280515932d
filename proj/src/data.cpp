#include "grbm/data.hpp"

#include <cmath>
#include <fstream>

#include "grbm/binio.hpp"

namespace grbm {

namespace fs = std::filesystem;

void Dataset::validate(int n_classes) const {
  require_finite(rows, "Dataset::rows");
  if (!labels.empty()) {
    require(static_cast<Index>(labels.size()) == rows.rows(),
            "Dataset: label count does not match row count");
    for (int label : labels) {
      require(label >= 0, "Dataset: negative class id");
      if (n_classes > 0)
        require(label < n_classes, "Dataset: class id out of range");
    }
  }
}

namespace {

void read_cifar_file(const fs::path& file, Matrix& out, Index row_offset,
                     std::vector<int>& labels) {
  std::error_code ec;
  const auto size = fs::file_size(file, ec);
  if (ec)
    throw IoError("CIFAR-10 file not found: " + file.string());
  constexpr std::uintmax_t expected =
      static_cast<std::uintmax_t>(kCifarRecordsPerFile) * kCifarRecordBytes;
  if (size != expected)
    throw FormatError("CIFAR-10 file " + file.string() + " has " +
                      std::to_string(size) + " bytes, expected " +
                      std::to_string(expected));
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<unsigned char> record(kCifarRecordBytes);
  for (int r = 0; r < kCifarRecordsPerFile; ++r) {
    in.read(reinterpret_cast<char*>(record.data()), kCifarRecordBytes);
    if (!in) throw FormatError("truncated CIFAR-10 file " + file.string());
    const int label = record[0];
    if (label > 9)
      throw FormatError("CIFAR-10 file " + file.string() +
                        ": label byte out of range 0..9");
    labels.push_back(label);
    for (int j = 0; j < kImagePixels; ++j)
      out(row_offset + r, j) = record[static_cast<std::size_t>(j) + 1] / 255.0;
  }
}

}  // namespace

Cifar10 load_cifar10(const fs::path& directory) {
  Cifar10 data;
  data.train.rows.resize(5 * kCifarRecordsPerFile, kImagePixels);
  data.train.labels.reserve(5 * kCifarRecordsPerFile);
  for (int batch = 1; batch <= 5; ++batch) {
    const fs::path file =
        directory / ("data_batch_" + std::to_string(batch) + ".bin");
    read_cifar_file(file, data.train.rows,
                    static_cast<Index>(batch - 1) * kCifarRecordsPerFile,
                    data.train.labels);
  }
  data.test.rows.resize(kCifarRecordsPerFile, kImagePixels);
  data.test.labels.reserve(kCifarRecordsPerFile);
  read_cifar_file(directory / "test_batch.bin", data.test.rows, 0,
                  data.test.labels);
  data.train.kind = DataKind::raw_pixels;
  data.test.kind = DataKind::raw_pixels;
  return data;
}

Dataset extract_patches(const Dataset& images, int rf_size, Index count,
                        std::uint64_t seed) {
  require(rf_size >= 1 && rf_size <= kImageSide,
          "extract_patches: rf_size must lie in [1, 32]");
  require(images.dim() == kImagePixels,
          "extract_patches: images must be 32x32x3 rows");
  require(count >= 0, "extract_patches: count must be >= 0");
  require(images.count() >= 1 || count == 0,
          "extract_patches: no images to sample from");

  const int dim = kImageChannels * rf_size * rf_size;
  Dataset patches;
  patches.kind = DataKind::patch;
  patches.rows.resize(count, dim);
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<Index> pick_image(0, images.count() - 1);
  std::uniform_int_distribution<int> pick_offset(0, kImageSide - rf_size);
  for (Index p = 0; p < count; ++p) {
    const Index img = pick_image(rng);
    const int x = pick_offset(rng);
    const int y = pick_offset(rng);
    for (int c = 0; c < kImageChannels; ++c)
      for (int dy = 0; dy < rf_size; ++dy)
        for (int dx = 0; dx < rf_size; ++dx)
          patches.rows(p, c * rf_size * rf_size + dy * rf_size + dx) =
              images.rows(img, c * kImageSide * kImageSide +
                                   (y + dy) * kImageSide + (x + dx));
  }
  return patches;
}

namespace {

void contrast_normalize_block(Matrix& block, double eps) {
  const Index dim = block.cols();
  for (Index r = 0; r < block.rows(); ++r) {
    const double mean = block.row(r).mean();
    block.row(r).array() -= mean;
    const double var =
        dim > 1 ? block.row(r).squaredNorm() / static_cast<double>(dim - 1)
                : 0.0;
    block.row(r) /= std::sqrt(var + eps);
  }
}

}  // namespace

Dataset contrast_normalize(const Dataset& patches, double eps) {
  require(patches.dim() >= 1, "contrast_normalize: zero-dimensional input");
  require(patches.count() >= 1, "contrast_normalize: empty input");
  require(eps > 0.0, "contrast_normalize: eps must be > 0");
  Dataset out = patches;
  contrast_normalize_block(out.rows, eps);
  return out;
}

void PreprocessModel::validate() const {
  const Index d = patch_mean.size();
  require(d >= 1, "PreprocessModel: zero-dimensional");
  require(whitening_matrix.rows() == d && whitening_matrix.cols() == d,
          "PreprocessModel: whitening matrix dimensions");
  require(contrast_epsilon > 0.0 && zca_epsilon > 0.0,
          "PreprocessModel: epsilons must be positive");
  require_finite(whitening_matrix, "PreprocessModel::whitening_matrix");
  const double asymmetry =
      (whitening_matrix - whitening_matrix.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12)
    throw ContractError("PreprocessModel: whitening matrix not symmetric");
}

PreprocessModel zca_fit(const Dataset& patches, double eps,
                        double contrast_eps) {
  require(patches.dim() >= 1, "zca_fit: zero-dimensional input");
  require(patches.count() >= 2, "zca_fit: need at least two rows");
  require(eps > 0.0, "zca_fit: eps must be > 0");

  PreprocessModel model;
  model.zca_epsilon = eps;
  model.contrast_epsilon = contrast_eps;
  model.patch_mean = patches.rows.colwise().mean();
  const Matrix centered = patches.rows.rowwise() - model.patch_mean.transpose();
  const Matrix covariance =
      centered.transpose() * centered / static_cast<double>(patches.count() - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
  require(solver.info() == Eigen::Success, "zca_fit: eigendecomposition failed");
  // Eigen returns ascending eigenvalues; keep them descending.
  const Index d = patches.dim();
  model.eigenvalues.resize(d);
  model.eigenvectors.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    model.eigenvalues[i] = solver.eigenvalues()[d - 1 - i];
    model.eigenvectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  const Vector scale =
      (model.eigenvalues.array() + eps).cwiseMax(eps * 1e-6).rsqrt();
  model.whitening_matrix =
      model.eigenvectors * scale.asDiagonal() * model.eigenvectors.transpose();
  // Symmetrize away rounding noise.
  model.whitening_matrix =
      0.5 * (model.whitening_matrix + model.whitening_matrix.transpose());
  return model;
}

Dataset zca_apply(const PreprocessModel& model, const Dataset& patches) {
  model.validate();
  require(patches.dim() == model.dim(),
          "zca_apply: patch dimension does not match fitted model");
  require(patches.count() >= 1, "zca_apply: empty input");
  Dataset out = patches;
  out.rows = (patches.rows.rowwise() - model.patch_mean.transpose()) *
             model.whitening_matrix;
  out.kind = DataKind::whitened_patch;
  return out;
}

PreprocessModel fit_preprocessing(const Dataset& raw_patches,
                                  double contrast_eps, double zca_eps) {
  const Dataset normalized = contrast_normalize(raw_patches, contrast_eps);
  return zca_fit(normalized, zca_eps, contrast_eps);
}

Matrix preprocess_patches(const PreprocessModel& model, const Matrix& raw) {
  require(raw.cols() == model.dim(),
          "preprocess_patches: dimension does not match fitted model");
  Matrix block = raw;
  contrast_normalize_block(block, model.contrast_epsilon);
  block.rowwise() -= model.patch_mean.transpose();
  return block * model.whitening_matrix;
}

Vector preprocess_patch(const PreprocessModel& model, const Vector& raw_patch) {
  return preprocess_patches(model, raw_patch.transpose()).row(0);
}

void ToyGmmSpec::validate() const {
  double total = 0.0;
  for (double w : weights) {
    require(w > 0.0, "ToyGmmSpec: component weights must be positive");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-9, "ToyGmmSpec: weights must sum to 1");
  for (const auto& cov : covariances) {
    Eigen::LLT<Eigen::Matrix2d> llt(cov);
    if (llt.info() != Eigen::Success)
      throw ContractError("ToyGmmSpec: covariance is not SPD");
  }
}

ToyGmmSpec ToyGmmSpec::defaults() {
  ToyGmmSpec spec;
  spec.weights = {0.7, 0.1, 0.1, 0.1};
  const double radius = 3.0;
  const double half_sqrt3 = std::sqrt(3.0) / 2.0;
  spec.means[0] = {0.0, 0.0};
  spec.means[1] = {0.0, radius};                            // 90 degrees
  spec.means[2] = {-radius * half_sqrt3, -radius * 0.5};    // 210 degrees
  spec.means[3] = {radius * half_sqrt3, -radius * 0.5};     // 330 degrees
  spec.covariances[0] = 0.45 * 0.45 * Eigen::Matrix2d::Identity();
  for (int c = 1; c < 4; ++c)
    spec.covariances[c] = 0.2 * 0.2 * Eigen::Matrix2d::Identity();
  return spec;
}

Dataset toy_gmm_generate(const ToyGmmSpec& spec, Index n, std::uint64_t seed) {
  spec.validate();
  require(n >= 1, "toy_gmm_generate: n must be >= 1");

  std::array<Eigen::Matrix2d, 4> chol;
  for (std::size_t c = 0; c < 4; ++c)
    chol[c] = Eigen::LLT<Eigen::Matrix2d>(spec.covariances[c]).matrixL();

  Dataset out;
  out.kind = DataKind::patch;
  out.rows.resize(n, 2);
  out.labels.resize(static_cast<std::size_t>(n));
  Rng rng = make_rng(seed);
  for (Index r = 0; r < n; ++r) {
    const double u = uniform01(rng);
    std::size_t component = 0;
    double acc = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      acc += spec.weights[c];
      if (u < acc) {
        component = c;
        break;
      }
      component = c;
    }
    const Eigen::Vector2d z(normal01(rng), normal01(rng));
    out.rows.row(r) =
        (spec.means[component] + chol[component] * z).transpose();
    out.labels[static_cast<std::size_t>(r)] = static_cast<int>(component);
  }
  return out;
}

void save_dataset(const fs::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset to " + path.string());
  binio::write_magic(out, "DSET");
  binio::write_u32(out, 1);
  binio::write_u64(out, static_cast<std::uint64_t>(dataset.count()));
  binio::write_u64(out, static_cast<std::uint64_t>(dataset.dim()));
  for (Index r = 0; r < dataset.count(); ++r)
    for (Index c = 0; c < dataset.dim(); ++c)
      binio::write_f64(out, dataset.rows(r, c));
  if (dataset.labeled())
    for (int label : dataset.labels)
      binio::write_u32(out, static_cast<std::uint32_t>(label));
  if (!out) throw IoError("failed while writing " + path.string());
}

Dataset load_dataset(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  binio::expect_magic(in, "DSET", path.string());
  const std::uint32_t version = binio::read_u32(in, "DSET version");
  if (version != 1)
    throw FormatError(path.string() + ": unsupported DSET version " +
                      std::to_string(version));
  const auto rows = static_cast<Index>(binio::read_u64(in, "DSET rows"));
  const auto dim = static_cast<Index>(binio::read_u64(in, "DSET dim"));
  Dataset out;
  out.rows.resize(rows, dim);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < dim; ++c)
      out.rows(r, c) = binio::read_f64(in, "DSET payload");
  // Optional trailing labels block.
  in.peek();
  if (!in.eof()) {
    out.labels.resize(static_cast<std::size_t>(rows));
    for (Index r = 0; r < rows; ++r)
      out.labels[static_cast<std::size_t>(r)] =
          static_cast<int>(binio::read_u32(in, "DSET labels"));
    in.peek();
    if (!in.eof())
      throw FormatError(path.string() + ": trailing bytes after labels block");
  }
  return out;
}

void save_preprocess(const fs::path& path, const PreprocessModel& model) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write preprocess model to " + path.string());
  binio::write_magic(out, "ZCAW");
  binio::write_u32(out, 1);
  binio::write_u32(out, static_cast<std::uint32_t>(model.dim()));
  binio::write_f64(out, model.contrast_epsilon);
  binio::write_f64(out, model.zca_epsilon);
  for (Index j = 0; j < model.dim(); ++j)
    binio::write_f64(out, model.patch_mean[j]);
  for (Index r = 0; r < model.dim(); ++r)
    for (Index c = 0; c < model.dim(); ++c)
      binio::write_f64(out, model.whitening_matrix(r, c));
  for (Index j = 0; j < model.eigenvalues.size(); ++j)
    binio::write_f64(out, model.eigenvalues[j]);
  if (!out) throw IoError("failed while writing " + path.string());
}

PreprocessModel load_preprocess(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open preprocess model " + path.string());
  binio::expect_magic(in, "ZCAW", path.string());
  const std::uint32_t version = binio::read_u32(in, "ZCAW version");
  if (version != 1)
    throw FormatError(path.string() + ": unsupported ZCAW version " +
                      std::to_string(version));
  const auto dim = static_cast<Index>(binio::read_u32(in, "ZCAW dim"));
  PreprocessModel model;
  model.contrast_epsilon = binio::read_f64(in, "ZCAW contrast epsilon");
  model.zca_epsilon = binio::read_f64(in, "ZCAW zca epsilon");
  model.patch_mean.resize(dim);
  for (Index j = 0; j < dim; ++j)
    model.patch_mean[j] = binio::read_f64(in, "ZCAW mean");
  model.whitening_matrix.resize(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c)
      model.whitening_matrix(r, c) = binio::read_f64(in, "ZCAW whitening");
  model.eigenvalues.resize(dim);
  for (Index j = 0; j < dim; ++j)
    model.eigenvalues[j] = binio::read_f64(in, "ZCAW eigenvalues");
  model.validate();
  return model;
}

}  // namespace grbm
