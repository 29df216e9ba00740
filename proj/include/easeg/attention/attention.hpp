#pragma once

#include <functional>
#include <vector>

#include "easeg/core/types.hpp"
#include "easeg/vol/volume.hpp"

namespace easeg::attention {

struct AttentionMask {
  GridB weights;  // binary
  double sigma = 0.0;
  double rho = 0.0;
};

struct PseudoSpleenMask {
  GridB mask;  // binary
  int iteration = 0;
};

// Normalized 1D Gaussian taps, truncated at 4*sigma and renormalized to
// unit sum so the separable 2D kernel also sums to 1. With a unit-sum
// kernel the convolution response lies in [0,1] and rho reads as a
// fractional threshold.
std::vector<double> gaussian_taps(double sigma);

// Pre-threshold response (mask * N(sigma)) in double precision, separable
// passes, zero padding outside the grid.
Image<double> gaussian_response_2d(const ImageB& mask, double sigma);

// indicator[(mask * N(sigma)) >= rho], computed slice-wise in 2D.
// The input must be binary. Zero padding outside the grid.
ImageB expand_mask_2d(const ImageB& mask, double sigma, double rho);
GridB expand_mask(const GridB& mask, double sigma, double rho);

// 3D variant (separable x/y/z passes); off by default in the pipeline.
GridB expand_mask_3d(const GridB& mask, double sigma, double rho);

// Per-voxel class probabilities for one volume, channel-major.
// channels[c].slice(z)(y,x) = p(class c at voxel). Rows sum to 1.
struct ProbabilityVolume {
  std::vector<GridF> channels;
  Shape3 shape() const {
    return channels.empty() ? Shape3{} : channels[0].shape();
  }
};

// argmax over channels; ties break toward the lowest class index.
GridB argmax_classes(const ProbabilityVolume& probs);

// Stage-1 initialization: pseudo mask is the spleen channel of the argmax
// over the external space {background, spleen}; attention expands it.
// `spleen_probs` must have exactly 2 channels.
std::pair<PseudoSpleenMask, AttentionMask> init_attention(
    const ProbabilityVolume& spleen_probs, double sigma, double rho);

// Refinement round t >= 1: argmax over the union space {background,
// spleen, injury} (3 channels); the spleen channel of that argmax is the
// new pseudo mask and the attention is its expansion.
std::pair<PseudoSpleenMask, AttentionMask> refine_attention(
    const ProbabilityVolume& union_probs, double sigma, double rho, int t);

}  // namespace easeg::attention
