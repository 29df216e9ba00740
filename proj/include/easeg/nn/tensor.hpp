#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

#include "easeg/core/types.hpp"

namespace easeg::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Feature map of one sample: rows are channels, column p is the pixel
// (y, x) with p = y*w + x.
template <typename T>
struct Tensor {
  int c = 0, h = 0, w = 0;
  Matrix<T> m;

  Tensor() = default;
  Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_) {
    m.setZero(c_, static_cast<Eigen::Index>(h_) * w_);
  }

  int pixels() const { return h * w; }

  T& at(int ch, int y, int x) { return m(ch, y * w + x); }
  T at(int ch, int y, int x) const { return m(ch, y * w + x); }

  static Tensor from_image(const Image<T>& img) {
    Tensor t(1, static_cast<int>(img.rows()), static_cast<int>(img.cols()));
    for (int y = 0; y < t.h; ++y)
      for (int x = 0; x < t.w; ++x) t.m(0, y * t.w + x) = img(y, x);
    return t;
  }

  Image<T> channel_image(int ch) const {
    Image<T> img(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img(y, x) = m(ch, y * w + x);
    return img;
  }
};

template <typename T>
inline void require_shape(const Tensor<T>& t, int c, const char* what) {
  if (t.c != c)
    throw std::invalid_argument(std::string(what) + ": channel mismatch (got " +
                                std::to_string(t.c) + ", want " +
                                std::to_string(c) + ")");
}

}  // namespace easeg::nn
