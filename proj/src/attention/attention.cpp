#include "easeg/attention/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace easeg::attention {

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
    taps[i + radius] = v;
    sum += v;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

namespace {

void require_binary(const ImageB& mask) {
  if ((mask > 1).any())
    throw std::invalid_argument("expand_mask: input mask must be binary");
}

// One separable pass along rows (axis=0) or columns (axis=1), zero padding.
Image<double> conv1d(const Image<double>& in, const std::vector<double>& taps,
                     int axis) {
  const int radius = (static_cast<int>(taps.size()) - 1) / 2;
  const int h = static_cast<int>(in.rows()), w = static_cast<int>(in.cols());
  Image<double> out = Image<double>::Zero(h, w);
  if (axis == 0) {
    for (int y = 0; y < h; ++y) {
      int k0 = std::max(-radius, -y), k1 = std::min(radius, h - 1 - y);
      for (int k = k0; k <= k1; ++k)
        out.row(y) += taps[k + radius] * in.row(y + k);
    }
  } else {
    for (int x = 0; x < w; ++x) {
      int k0 = std::max(-radius, -x), k1 = std::min(radius, w - 1 - x);
      for (int k = k0; k <= k1; ++k)
        out.col(x) += taps[k + radius] * in.col(x + k);
    }
  }
  return out;
}

}  // namespace

Image<double> gaussian_response_2d(const ImageB& mask, double sigma) {
  require_binary(mask);
  auto taps = gaussian_taps(sigma);
  Image<double> m = mask.cast<double>();
  return conv1d(conv1d(m, taps, 0), taps, 1);
}

ImageB expand_mask_2d(const ImageB& mask, double sigma, double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("rho must lie in (0,1)");
  Image<double> response = gaussian_response_2d(mask, sigma);
  return (response >= rho).cast<std::uint8_t>();
}

GridB expand_mask(const GridB& mask, double sigma, double rho) {
  GridB out(mask.shape());
  for (int z = 0; z < mask.shape().nz; ++z)
    out.slice(z) = expand_mask_2d(mask.slice(z), sigma, rho);
  return out;
}

GridB expand_mask_3d(const GridB& mask, double sigma, double rho) {
  for (const auto& sl : mask.slices()) require_binary(sl);
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("rho must lie in (0,1)");
  auto taps = gaussian_taps(sigma);
  const int radius = (static_cast<int>(taps.size()) - 1) / 2;
  const Shape3 s = mask.shape();

  Grid3<double> tmp(s);
  for (int z = 0; z < s.nz; ++z)
    tmp.slice(z) = conv1d(conv1d(mask.slice(z).cast<double>().eval(), taps, 0),
                          taps, 1);

  GridB out(s);
  for (int z = 0; z < s.nz; ++z) {
    Image<double> acc = Image<double>::Zero(s.ny, s.nx);
    int k0 = std::max(-radius, -z), k1 = std::min(radius, s.nz - 1 - z);
    for (int k = k0; k <= k1; ++k) acc += taps[k + radius] * tmp.slice(z + k);
    out.slice(z) = (acc >= rho).cast<std::uint8_t>();
  }
  return out;
}

GridB argmax_classes(const ProbabilityVolume& probs) {
  if (probs.channels.empty())
    throw std::invalid_argument("argmax_classes: no channels");
  const Shape3 s = probs.shape();
  for (const auto& ch : probs.channels)
    vol::require_aligned(ch.shape(), s, "argmax_classes");
  GridB out(s);
  for (int z = 0; z < s.nz; ++z) {
    auto& dst = out.slice(z);
    for (int y = 0; y < s.ny; ++y) {
      for (int x = 0; x < s.nx; ++x) {
        int best = 0;
        float best_p = probs.channels[0].slice(z)(y, x);
        for (std::size_t c = 1; c < probs.channels.size(); ++c) {
          float p = probs.channels[c].slice(z)(y, x);
          if (p > best_p) {  // strict: ties keep the lowest class index
            best_p = p;
            best = static_cast<int>(c);
          }
        }
        dst(y, x) = static_cast<std::uint8_t>(best);
      }
    }
  }
  return out;
}

namespace {

std::pair<PseudoSpleenMask, AttentionMask> spleen_mask_and_attention(
    const ProbabilityVolume& probs, double sigma, double rho, int iteration) {
  GridB classes = argmax_classes(probs);
  PseudoSpleenMask pseudo;
  pseudo.iteration = iteration;
  pseudo.mask = GridB(classes.shape());
  for (int z = 0; z < classes.shape().nz; ++z)
    pseudo.mask.slice(z) =
        (classes.slice(z) == static_cast<std::uint8_t>(vol::kSpleen))
            .cast<std::uint8_t>();
  AttentionMask att;
  att.sigma = sigma;
  att.rho = rho;
  att.weights = expand_mask(pseudo.mask, sigma, rho);
  return {std::move(pseudo), std::move(att)};
}

}  // namespace

std::pair<PseudoSpleenMask, AttentionMask> init_attention(
    const ProbabilityVolume& spleen_probs, double sigma, double rho) {
  if (spleen_probs.channels.size() != 2)
    throw std::invalid_argument(
        "init_attention: stage-1 model must emit 2 channels");
  return spleen_mask_and_attention(spleen_probs, sigma, rho, 0);
}

std::pair<PseudoSpleenMask, AttentionMask> refine_attention(
    const ProbabilityVolume& union_probs, double sigma, double rho, int t) {
  if (union_probs.channels.size() != 3)
    throw std::invalid_argument(
        "refine_attention: model must emit 3 channels over the union space");
  if (t < 1)
    throw std::invalid_argument("refine_attention: t must be >= 1");
  return spleen_mask_and_attention(union_probs, sigma, rho, t);
}

}  // namespace easeg::attention
