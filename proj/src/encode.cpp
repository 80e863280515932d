#include "grbm/encode.hpp"

#include <cmath>
#include <thread>

namespace grbm {

void EncoderConfig::validate() const {
  require(stride >= 1, "EncoderConfig: stride must be >= 1");
  require_finite(threshold, "EncoderConfig::threshold");
}

namespace {

// N = 3 w^2 determines the receptive-field side w.
int rf_side_from_dim(Index n) {
  const int w = static_cast<int>(std::lround(std::sqrt(n / 3.0)));
  require(w >= 1 && w <= kImageSide && 3 * w * w == n,
          "encoder: visible dimension is not 3*w^2 for a patch side w <= 32");
  return w;
}

Matrix responses(const GrbmParams& params, const Matrix& whitened,
                 const EncoderConfig& cfg) {
  if (cfg.scheme == EncoderScheme::conditional_expectation)
    return hidden_conditional_batch(params, whitened);
  Matrix r = whitened * params.W.transpose();
  return (r.array() - cfg.threshold).cwiseMax(0.0).matrix();
}

}  // namespace

Vector encode_patch(const GrbmParams& params, const PreprocessModel& preprocess,
                    const Vector& raw_patch, const EncoderConfig& cfg) {
  cfg.validate();
  require(raw_patch.size() == params.visible_units(),
          "encode_patch: patch dimension does not match N");
  require(preprocess.dim() == params.visible_units(),
          "encode_patch: preprocess model dimension does not match N");
  const Matrix whitened =
      preprocess_patches(preprocess, raw_patch.transpose());
  return responses(params, whitened, cfg).row(0);
}

Vector extract_image_features(const GrbmParams& params,
                              const PreprocessModel& preprocess,
                              const Vector& image, const EncoderConfig& cfg) {
  cfg.validate();
  require(image.size() == kImagePixels,
          "extract_image_features: image must be 32x32x3");
  const Index n = params.visible_units();
  require(preprocess.dim() == n,
          "extract_image_features: preprocess model dimension does not match N");
  const int w = rf_side_from_dim(n);
  const int per_axis = (kImageSide - w) / cfg.stride + 1;
  const Index positions = static_cast<Index>(per_axis) * per_axis;

  Matrix raw(positions, n);
  std::vector<int> quadrant(static_cast<std::size_t>(positions));
  const double midline = (kImageSide - 1) / 2.0;
  Index pos = 0;
  for (int y = 0; y + w <= kImageSide; y += cfg.stride)
    for (int x = 0; x + w <= kImageSide; x += cfg.stride, ++pos) {
      for (int c = 0; c < kImageChannels; ++c)
        for (int dy = 0; dy < w; ++dy)
          for (int dx = 0; dx < w; ++dx)
            raw(pos, c * w * w + dy * w + dx) =
                image[c * kImageSide * kImageSide + (y + dy) * kImageSide +
                      (x + dx)];
      const double cx = x + (w - 1) / 2.0;
      const double cy = y + (w - 1) / 2.0;
      const int qx = cx > midline ? 1 : 0;
      const int qy = cy > midline ? 1 : 0;
      quadrant[static_cast<std::size_t>(pos)] = 2 * qy + qx;
    }

  const Matrix whitened = preprocess_patches(preprocess, raw);
  const Matrix r = responses(params, whitened, cfg);

  const Index m = params.hidden_units();
  Vector features = Vector::Zero(4 * m);
  std::array<double, 4> counts{0.0, 0.0, 0.0, 0.0};
  for (Index p = 0; p < positions; ++p) {
    const int q = quadrant[static_cast<std::size_t>(p)];
    counts[static_cast<std::size_t>(q)] += 1.0;
    for (Index i = 0; i < m; ++i) features[4 * i + q] += r(p, i);
  }
  if (cfg.scheme == EncoderScheme::conditional_expectation)
    for (Index i = 0; i < m; ++i)
      for (int q = 0; q < 4; ++q)
        if (counts[static_cast<std::size_t>(q)] > 0.0)
          features[4 * i + q] /= counts[static_cast<std::size_t>(q)];
  return features;
}

Dataset extract_features(const GrbmParams& params,
                         const PreprocessModel& preprocess,
                         const Dataset& images, const EncoderConfig& cfg,
                         int threads) {
  cfg.validate();
  require(threads >= 1, "extract_features: threads must be >= 1");
  Dataset out;
  out.kind = DataKind::feature;
  out.labels = images.labels;
  out.rows.resize(images.count(), 4 * params.hidden_units());

  const auto work = [&](Index begin, Index end) {
    for (Index r = begin; r < end; ++r)
      out.rows.row(r) =
          extract_image_features(params, preprocess,
                                 images.rows.row(r).transpose(), cfg)
              .transpose();
  };
  if (threads == 1 || images.count() < 2 * threads) {
    work(0, images.count());
    return out;
  }
  std::vector<std::thread> pool;
  const Index chunk = (images.count() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const Index begin = t * chunk;
    const Index end = std::min<Index>(images.count(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
  for (auto& worker : pool) worker.join();
  return out;
}

}  // namespace grbm
