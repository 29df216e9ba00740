#pragma once

#include "easeg/core/rng.hpp"
#include "easeg/vol/image_ops.hpp"
#include "easeg/vol/volume.hpp"

namespace easeg::vol {

struct AugmentConfig {
  double max_rotation_deg = 15.0;
  double min_scale = 1.0;
  double max_scale = 2.5;
};

struct AugmentedSlice {
  ImageF image;
  ImageB labels;
  ImageB weights;
};

// Deterministic core: identical geometric transform on all three planes.
// Image resamples bilinearly with fill 0; labels and weights use nearest
// neighbor, labels fill with background, weights with 0 (no supervision
// outside the source footprint).
inline AugmentedSlice augment_with(const ImageF& image, const ImageB& labels,
                                   const ImageB& weights, double angle_deg,
                                   double scale) {
  AugmentedSlice out;
  if (angle_deg == 0.0 && scale == 1.0) {
    out.image = image;
    out.labels = labels;
    out.weights = weights;
    return out;
  }
  out.image = warp_rotate_scale_bilinear(image, angle_deg, scale, 0.0f);
  out.labels = warp_rotate_scale_nearest(labels, angle_deg, scale,
                                         std::uint8_t{0});
  out.weights = warp_rotate_scale_nearest(weights, angle_deg, scale,
                                          std::uint8_t{0});
  return out;
}

inline AugmentedSlice augment(const ImageF& image, const ImageB& labels,
                              const ImageB& weights, const AugmentConfig& cfg,
                              Rng& rng) {
  double angle = rng.uniform(0.0, cfg.max_rotation_deg);
  double scale = rng.uniform(cfg.min_scale, cfg.max_scale);
  return augment_with(image, labels, weights, angle, scale);
}

}  // namespace easeg::vol
