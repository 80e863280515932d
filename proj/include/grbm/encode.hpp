#ifndef GRBM_ENCODE_HPP
#define GRBM_ENCODE_HPP

#include "grbm/data.hpp"
#include "grbm/model.hpp"

namespace grbm {

enum class EncoderScheme { conditional_expectation, soft_threshold };

struct EncoderConfig {
  EncoderScheme scheme = EncoderScheme::soft_threshold;
  double threshold = 0.25;  // soft-threshold bias t
  int stride = 1;

  void validate() const;
};

// Per-unit response to one raw patch. The patch is contrast-normalized,
// centered and whitened with the fitted model first.
//   ConditionalExpectation: p(H_i = 1 | v_hat)
//   SoftThreshold:          max(0, w_i . v_hat - t)
Vector encode_patch(const GrbmParams& params, const PreprocessModel& preprocess,
                    const Vector& raw_patch, const EncoderConfig& cfg);

// Encodes every stride-spaced patch position of a 32x32x3 image and
// sum-pools responses over the four image quadrants (patch assigned by
// its center; exact midline goes to the lower-index quadrant).
// Conditional-expectation responses are divided by the quadrant's
// position count so entries stay in [0, 1]. Layout: unit-major, i.e.
// feature[4 i + q] is unit i pooled over quadrant q.
Vector extract_image_features(const GrbmParams& params,
                              const PreprocessModel& preprocess,
                              const Vector& image, const EncoderConfig& cfg);

// Feature rows for a whole image set; labels pass through.
Dataset extract_features(const GrbmParams& params,
                         const PreprocessModel& preprocess,
                         const Dataset& images, const EncoderConfig& cfg,
                         int threads = 1);

}  // namespace grbm

#endif
