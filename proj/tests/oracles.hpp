// Test-only reference implementations, independent of the library's
// computation paths.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "easeg/core/types.hpp"

namespace easeg::test_oracles {

// Dense 2D Gaussian response: explicit double loop over kernel taps,
// truncated at ceil(4*sigma), kernel normalized to unit sum over the
// truncated square, zero padding outside the image.
inline Image<double> dense_gaussian_response(const ImageB& mask, double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  const int k = 2 * radius + 1;
  std::vector<double> kernel(static_cast<std::size_t>(k) * k);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i)
    for (int j = -radius; j <= radius; ++j) {
      double v = std::exp(-0.5 * (double(i) * i + double(j) * j) /
                          (sigma * sigma));
      kernel[(i + radius) * k + (j + radius)] = v;
      total += v;
    }
  for (auto& v : kernel) v /= total;

  const int h = static_cast<int>(mask.rows()), w = static_cast<int>(mask.cols());
  Image<double> out = Image<double>::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int sy = y + i;
        if (sy < 0 || sy >= h) continue;
        for (int j = -radius; j <= radius; ++j) {
          int sx = x + j;
          if (sx < 0 || sx >= w) continue;
          if (mask(sy, sx))
            acc += kernel[(i + radius) * k + (j + radius)];
        }
      }
      out(y, x) = acc;
    }
  return out;
}

inline ImageB dense_gaussian_threshold(const ImageB& mask, double sigma,
                                       double rho) {
  Image<double> r = dense_gaussian_response(mask, sigma);
  return (r >= rho).cast<std::uint8_t>();
}

// Set-cardinality DSC oracle on 16-bit encoded 4x4 masks.
inline double dsc_bits16(unsigned a, unsigned b) {
  int pa = __builtin_popcount(a & 0xffffu);
  int pb = __builtin_popcount(b & 0xffffu);
  int inter = __builtin_popcount(a & b & 0xffffu);
  if (pa + pb == 0) return 1.0;
  return 2.0 * inter / (pa + pb);
}

}  // namespace easeg::test_oracles
