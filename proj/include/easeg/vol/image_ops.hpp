#pragma once

#include <algorithm>
#include <cmath>

#include "easeg/core/types.hpp"

namespace easeg::vol {

// Pixel-center convention: output pixel o samples input at
// (o + 0.5) * in/out - 0.5, clamped at the borders.

template <typename T>
Image<T> resize_bilinear(const Image<T>& in, int out_h, int out_w) {
  const int ih = static_cast<int>(in.rows()), iw = static_cast<int>(in.cols());
  Image<T> out(out_h, out_w);
  const double sy = static_cast<double>(ih) / out_h;
  const double sx = static_cast<double>(iw) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y0c = std::clamp(y0, 0, ih - 1), y1c = std::clamp(y0 + 1, 0, ih - 1);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x0c = std::clamp(x0, 0, iw - 1), x1c = std::clamp(x0 + 1, 0, iw - 1);
      double v = (1 - wy) * ((1 - wx) * in(y0c, x0c) + wx * in(y0c, x1c)) +
                 wy * ((1 - wx) * in(y1c, x0c) + wx * in(y1c, x1c));
      out(y, x) = static_cast<T>(v);
    }
  }
  return out;
}

template <typename T>
Image<T> resize_nearest(const Image<T>& in, int out_h, int out_w) {
  const int ih = static_cast<int>(in.rows()), iw = static_cast<int>(in.cols());
  Image<T> out(out_h, out_w);
  const double sy = static_cast<double>(ih) / out_h;
  const double sx = static_cast<double>(iw) / out_w;
  for (int y = 0; y < out_h; ++y) {
    int sy_i = std::clamp(static_cast<int>(std::floor((y + 0.5) * sy)), 0, ih - 1);
    for (int x = 0; x < out_w; ++x) {
      int sx_i =
          std::clamp(static_cast<int>(std::floor((x + 0.5) * sx)), 0, iw - 1);
      out(y, x) = in(sy_i, sx_i);
    }
  }
  return out;
}

// Rotation by `angle_deg` about the slice center combined with a zoom by
// `scale` (>1 zooms in), output size unchanged. Inverse-warp sampling;
// out-of-bounds reads take `fill`.
template <typename T>
Image<T> warp_rotate_scale_bilinear(const Image<T>& in, double angle_deg,
                                    double scale, T fill) {
  const int h = static_cast<int>(in.rows()), w = static_cast<int>(in.cols());
  Image<T> out(h, w);
  const double a = angle_deg * 3.14159265358979323846 / 180.0;
  const double ca = std::cos(a), sa = std::sin(a);
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx = (x - cx) / scale, dy = (y - cy) / scale;
      double sx = ca * dx + sa * dy + cx;
      double sy = -sa * dx + ca * dy + cy;
      int x0 = static_cast<int>(std::floor(sx));
      int y0 = static_cast<int>(std::floor(sy));
      if (x0 < -1 || y0 < -1 || x0 > w - 1 || y0 > h - 1) {
        out(y, x) = fill;
        continue;
      }
      double wx = sx - x0, wy = sy - y0;
      auto sample = [&](int yy, int xx) -> double {
        if (xx < 0 || yy < 0 || xx >= w || yy >= h)
          return static_cast<double>(fill);
        return static_cast<double>(in(yy, xx));
      };
      double v = (1 - wy) * ((1 - wx) * sample(y0, x0) + wx * sample(y0, x0 + 1)) +
                 wy * ((1 - wx) * sample(y0 + 1, x0) + wx * sample(y0 + 1, x0 + 1));
      out(y, x) = static_cast<T>(v);
    }
  }
  return out;
}

template <typename T>
Image<T> warp_rotate_scale_nearest(const Image<T>& in, double angle_deg,
                                   double scale, T fill) {
  const int h = static_cast<int>(in.rows()), w = static_cast<int>(in.cols());
  Image<T> out(h, w);
  const double a = angle_deg * 3.14159265358979323846 / 180.0;
  const double ca = std::cos(a), sa = std::sin(a);
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx = (x - cx) / scale, dy = (y - cy) / scale;
      double sx = ca * dx + sa * dy + cx;
      double sy = -sa * dx + ca * dy + cy;
      int xi = static_cast<int>(std::lround(sx));
      int yi = static_cast<int>(std::lround(sy));
      out(y, x) = (xi < 0 || yi < 0 || xi >= w || yi >= h) ? fill : in(yi, xi);
    }
  }
  return out;
}

}  // namespace easeg::vol
