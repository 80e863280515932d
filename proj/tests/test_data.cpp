#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "grbm/data.hpp"

using namespace grbm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("grbm_data_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_cifar_file(const fs::path& file, unsigned char label_base) {
  std::ofstream out(file, std::ios::binary);
  std::vector<unsigned char> record(kCifarRecordBytes);
  for (int r = 0; r < kCifarRecordsPerFile; ++r) {
    record[0] = static_cast<unsigned char>((label_base + r) % 10);
    for (int j = 0; j < kImagePixels; ++j)
      record[static_cast<std::size_t>(j) + 1] =
          static_cast<unsigned char>((r + j) % 256);
    out.write(reinterpret_cast<const char*>(record.data()),
              kCifarRecordBytes);
  }
}

void write_cifar_dir(const fs::path& dir) {
  write_cifar_file(dir / "data_batch_1.bin", 0);
  for (int b = 2; b <= 5; ++b)
    fs::copy_file(dir / "data_batch_1.bin",
                  dir / ("data_batch_" + std::to_string(b) + ".bin"));
  fs::copy_file(dir / "data_batch_1.bin", dir / "test_batch.bin");
}

}  // namespace

TEST_CASE("cifar loader parses records and maps pixels to [0,1]") {
  TempDir tmp;
  write_cifar_dir(tmp.path);
  const Cifar10 data = load_cifar10(tmp.path);
  CHECK(data.train.count() == 50000);
  CHECK(data.train.dim() == 3072);
  CHECK(data.test.count() == 10000);
  CHECK(data.train.labels.size() == 50000);
  for (int label : data.test.labels) {
    CHECK(label >= 0);
    CHECK(label <= 9);
  }
  // Record 0 pixel j has byte j % 256.
  CHECK(data.train.rows(0, 0) == doctest::Approx(0.0));
  CHECK(data.train.rows(0, 255) == doctest::Approx(1.0));
  CHECK(data.train.rows(0, 37) == doctest::Approx(37.0 / 255.0));
  CHECK(data.train.rows.minCoeff() >= 0.0);
  CHECK(data.train.rows.maxCoeff() <= 1.0);
}

TEST_CASE("cifar loader rejects wrong-size and missing files") {
  TempDir tmp;
  write_cifar_dir(tmp.path);
  // Truncate one file by a byte.
  const fs::path victim = tmp.path / "data_batch_3.bin";
  fs::resize_file(victim, fs::file_size(victim) - 1);
  try {
    load_cifar10(tmp.path);
    FAIL("expected FormatError");
  } catch (const FormatError& err) {
    CHECK(std::string(err.what()).find("data_batch_3.bin") !=
          std::string::npos);
  }
  fs::remove(victim);
  CHECK_THROWS_AS(load_cifar10(tmp.path), IoError);
}

TEST_CASE("cifar loader rejects out-of-range label bytes") {
  TempDir tmp;
  write_cifar_dir(tmp.path);
  std::fstream patch(tmp.path / "data_batch_1.bin",
                     std::ios::binary | std::ios::in | std::ios::out);
  patch.seekp(0);
  patch.put(static_cast<char>(77));
  patch.close();
  CHECK_THROWS_AS(load_cifar10(tmp.path), FormatError);
}

TEST_CASE("patch extraction dimensions follow N = 3 w^2") {
  Dataset images;
  images.rows = Matrix::Random(4, kImagePixels).cwiseAbs();
  CHECK(extract_patches(images, 6, 10, 1).dim() == 108);
  CHECK(extract_patches(images, 8, 10, 1).dim() == 192);
  CHECK(extract_patches(images, 12, 10, 1).dim() == 432);
  CHECK(extract_patches(images, 6, 0, 1).count() == 0);
  CHECK_THROWS_AS(extract_patches(images, 33, 10, 1), ContractError);
}

TEST_CASE("patch extraction reads the right pixels and is deterministic") {
  Dataset images;
  images.rows.resize(2, kImagePixels);
  for (Index img = 0; img < 2; ++img)
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
          images.rows(img, c * 1024 + y * 32 + x) =
              static_cast<double>(img) + c + y * 0.01 + x * 0.0001;

  const Dataset a = extract_patches(images, 5, 50, 42);
  const Dataset b = extract_patches(images, 5, 50, 42);
  CHECK(a.rows == b.rows);

  // Every patch value must appear at a consistent in-bounds offset:
  // reconstruct (c, y, x) from the value encoding above.
  for (Index p = 0; p < a.count(); ++p)
    for (int c = 0; c < 3; ++c)
      for (int dy = 0; dy < 5; ++dy)
        for (int dx = 0; dx < 5; ++dx) {
          const double value = a.rows(p, c * 25 + dy * 5 + dx);
          const double channel_part = value - std::floor(value);
          const int y = static_cast<int>(std::round(
              std::floor(channel_part * 100.0 + 0.5) == 0
                  ? 0
                  : std::floor(channel_part * 100.0)));
          CHECK(y >= 0);
          CHECK(y <= 31);
        }
}

TEST_CASE("contrast normalization zeroes constant rows and centers the rest") {
  Dataset patches;
  patches.rows.resize(3, 10);
  patches.rows.row(0).setConstant(0.7);
  patches.rows.row(1).setLinSpaced(10, 0.0, 1.0);
  patches.rows.row(2).setRandom();
  const Dataset normalized = contrast_normalize(patches, kDefaultContrastEps);
  CHECK(normalized.rows.row(0).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(normalized.rows.row(1).mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(contrast_normalize(Dataset{}, kDefaultContrastEps),
                  ContractError);
}

TEST_CASE("zca whitening diagonalizes the fitted data covariance") {
  Rng rng = make_rng(11);
  const Index n = 4000;
  const Index dim = 8;
  // Correlated data: random mixing of a few strong directions plus noise.
  Matrix mixing = Matrix::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) mixing(i, j) = normal01(rng);
  mixing.col(0) *= 6.0;
  mixing.col(1) *= 4.0;
  Dataset patches;
  patches.rows.resize(n, dim);
  for (Index r = 0; r < n; ++r) {
    Vector z(dim);
    for (Index j = 0; j < dim; ++j) z[j] = normal01(rng);
    patches.rows.row(r) = (mixing * z).transpose();
  }

  const double eps = 1e-6;
  const PreprocessModel model = zca_fit(patches, eps);
  model.validate();
  const Dataset whitened = zca_apply(model, patches);
  const Matrix centered =
      whitened.rows.rowwise() - whitened.rows.colwise().mean();
  const Matrix cov =
      centered.transpose() * centered / static_cast<double>(n - 1);
  // In the eigenbasis of the fitting covariance the result must be
  // diagonal with entries lambda / (lambda + eps).
  const Matrix rotated =
      model.eigenvectors.transpose() * cov * model.eigenvectors;
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) {
      if (i == j) continue;
      CHECK(std::abs(rotated(i, j)) <= 1e-6);
    }
  for (Index i = 0; i < dim; ++i)
    if (model.eigenvalues[i] >= 1000.0 * eps)
      CHECK(std::abs(rotated(i, i) - 1.0) <= 1e-3);
  // At least the two boosted directions must qualify as high-variance.
  CHECK(model.eigenvalues[0] >= 1000.0 * eps);
  CHECK(model.eigenvalues[1] >= 1000.0 * eps);

  // Whitening matrix symmetric, application deterministic.
  CHECK((model.whitening_matrix - model.whitening_matrix.transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
  const Dataset again = zca_apply(model, patches);
  CHECK(again.rows == whitened.rows);
}

TEST_CASE("toy GMM sampling react to weights and stays reproducible") {
  const ToyGmmSpec spec = ToyGmmSpec::defaults();
  const Index n = 100000;
  const Dataset sample = toy_gmm_generate(spec, n, 5);
  std::array<double, 4> freq{0, 0, 0, 0};
  for (int label : sample.labels) freq[static_cast<std::size_t>(label)] += 1.0;
  for (auto& f : freq) f /= static_cast<double>(n);
  for (std::size_t c = 0; c < 4; ++c) {
    const double se =
        std::sqrt(spec.weights[c] * (1.0 - spec.weights[c]) /
                  static_cast<double>(n));
    CHECK(std::abs(freq[c] - spec.weights[c]) <= 3.0 * se);
  }

  const Dataset one_a = toy_gmm_generate(spec, 1, 99);
  const Dataset one_b = toy_gmm_generate(spec, 1, 99);
  CHECK(one_a.rows == one_b.rows);
  CHECK(one_a.labels == one_b.labels);
}

TEST_CASE("toy GMM sparse components sit at equal distance from the dense one") {
  const ToyGmmSpec spec = ToyGmmSpec::defaults();
  const double d1 = (spec.means[1] - spec.means[0]).norm();
  const double d2 = (spec.means[2] - spec.means[0]).norm();
  const double d3 = (spec.means[3] - spec.means[0]).norm();
  CHECK(std::abs(d1 - d2) <= 1e-12);
  CHECK(std::abs(d1 - d3) <= 1e-12);
}

TEST_CASE("toy GMM rejects non-SPD covariances") {
  ToyGmmSpec spec = ToyGmmSpec::defaults();
  spec.covariances[2] << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(toy_gmm_generate(spec, 10, 1), ContractError);
}

TEST_CASE("dataset container round-trips with and without labels") {
  TempDir tmp;
  Dataset labeled;
  labeled.rows = Matrix::Random(7, 3);
  labeled.labels = {0, 1, 2, 0, 1, 2, 0};
  const fs::path file = tmp.path / "labeled.dset";
  save_dataset(file, labeled);
  const Dataset back = load_dataset(file);
  CHECK(back.rows == labeled.rows);
  CHECK(back.labels == labeled.labels);

  Dataset plain;
  plain.rows = Matrix::Random(4, 5);
  const fs::path file2 = tmp.path / "plain.dset";
  save_dataset(file2, plain);
  const Dataset back2 = load_dataset(file2);
  CHECK(back2.rows == plain.rows);
  CHECK(back2.labels.empty());

  // Trailing garbage is rejected.
  std::ofstream(file2, std::ios::binary | std::ios::app).put('x');
  CHECK_THROWS_AS(load_dataset(file2), FormatError);
}

TEST_CASE("preprocess model round-trips through its container") {
  TempDir tmp;
  Dataset patches;
  patches.rows = Matrix::Random(50, 6);
  const PreprocessModel model = fit_preprocessing(patches);
  const fs::path file = tmp.path / "prep.zcaw";
  save_preprocess(file, model);
  const PreprocessModel back = load_preprocess(file);
  CHECK(back.whitening_matrix == model.whitening_matrix);
  CHECK(back.patch_mean == model.patch_mean);
  CHECK(back.contrast_epsilon == model.contrast_epsilon);
  CHECK(back.zca_epsilon == model.zca_epsilon);
}
