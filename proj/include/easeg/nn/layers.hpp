#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "easeg/core/rng.hpp"
#include "easeg/nn/tensor.hpp"

namespace easeg::nn {

template <typename T>
struct Param {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// 3x3 (or 1x1) convolution, stride 1, zero padding that preserves the
// spatial size. Weight layout: (out_channels, k*k*in_channels) with column
// tap*in_channels + c; im2col keeps each tap as a contiguous row block so
// both directions are plain GEMMs.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_ch, int out_ch, int ksize, Rng& rng)
      : in_ch_(in_ch), out_ch_(out_ch), k_(ksize) {
    weight_.name = name + ".weight";
    bias_.name = name + ".bias";
    const int fan_in = k_ * k_ * in_ch_;
    weight_.value.resize(out_ch_, fan_in);
    const double std = std::sqrt(2.0 / fan_in);
    for (Eigen::Index i = 0; i < weight_.value.size(); ++i)
      weight_.value.data()[i] = static_cast<T>(rng.normal(0.0, std));
    bias_.value = Matrix<T>::Zero(out_ch_, 1);
    weight_.zero_grad();
    bias_.zero_grad();
  }

  Tensor<T> forward(const Tensor<T>& x) {
    require_shape(x, in_ch_, "Conv2d");
    h_ = x.h;
    w_ = x.w;
    im2col(x);
    Tensor<T> y(out_ch_, x.h, x.w);
    y.m.noalias() = weight_.value * cols_;
    y.m.colwise() += bias_.value.col(0);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    weight_.grad.noalias() += dy.m * cols_.transpose();
    bias_.grad.col(0) += dy.m.rowwise().sum();
    Matrix<T> dcols = weight_.value.transpose() * dy.m;
    Tensor<T> dx(in_ch_, h_, w_);
    col2im(dcols, dx);
    return dx;
  }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  const Param<T>& weight() const { return weight_; }
  const Param<T>& bias() const { return bias_; }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }
  int ksize() const { return k_; }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

 private:
  void im2col(const Tensor<T>& x) {
    const int pad = k_ / 2;
    cols_.setZero(static_cast<Eigen::Index>(k_) * k_ * in_ch_,
                  static_cast<Eigen::Index>(h_) * w_);
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        const int dy = ky - pad, dx = kx - pad;
        const int tap = ky * k_ + kx;
        const int x0 = std::max(0, -dx);
        const int len = w_ - std::abs(dx);
        if (len <= 0) continue;
        for (int y = 0; y < h_; ++y) {
          const int sy = y + dy;
          if (sy < 0 || sy >= h_) continue;
          cols_.block(static_cast<Eigen::Index>(tap) * in_ch_,
                      static_cast<Eigen::Index>(y) * w_ + x0, in_ch_, len) =
              x.m.block(0, static_cast<Eigen::Index>(sy) * w_ + x0 + dx, in_ch_,
                        len);
        }
      }
    }
  }

  void col2im(const Matrix<T>& dcols, Tensor<T>& dx) const {
    const int pad = k_ / 2;
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        const int dy = ky - pad, dxo = kx - pad;
        const int tap = ky * k_ + kx;
        const int x0 = std::max(0, -dxo);
        const int len = w_ - std::abs(dxo);
        if (len <= 0) continue;
        for (int y = 0; y < h_; ++y) {
          const int sy = y + dy;
          if (sy < 0 || sy >= h_) continue;
          dx.m.block(0, static_cast<Eigen::Index>(sy) * w_ + x0 + dxo, in_ch_,
                     len) +=
              dcols.block(static_cast<Eigen::Index>(tap) * in_ch_,
                          static_cast<Eigen::Index>(y) * w_ + x0, in_ch_, len);
        }
      }
    }
  }

  int in_ch_ = 0, out_ch_ = 0, k_ = 3;
  int h_ = 0, w_ = 0;
  Param<T> weight_;
  Param<T> bias_;
  Matrix<T> cols_;
};

template <typename T>
class Relu {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    mask_ = (x.m.array() > T(0)).template cast<T>();
    Tensor<T> y = x;
    y.m.array() *= mask_.array();
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx = dy;
    dx.m.array() *= mask_.array();
    return dx;
  }

 private:
  Matrix<T> mask_;
};

template <typename T>
class Tanh {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> y = x;
    y.m = x.m.array().tanh().matrix();
    out_ = y.m;
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx = dy;
    dx.m.array() *= (T(1) - out_.array().square());
    return dx;
  }

 private:
  Matrix<T> out_;
};

// 2x2 average pooling, stride 2. Spatial dims must be even.
template <typename T>
class AvgPool2 {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    if (x.h % 2 != 0 || x.w % 2 != 0)
      throw std::invalid_argument("AvgPool2: odd spatial size");
    h_ = x.h;
    w_ = x.w;
    c_ = x.c;
    Tensor<T> y(x.c, x.h / 2, x.w / 2);
    for (int yy = 0; yy < y.h; ++yy)
      for (int xx = 0; xx < y.w; ++xx)
        y.m.col(yy * y.w + xx) =
            T(0.25) * (x.m.col((2 * yy) * x.w + 2 * xx) +
                       x.m.col((2 * yy) * x.w + 2 * xx + 1) +
                       x.m.col((2 * yy + 1) * x.w + 2 * xx) +
                       x.m.col((2 * yy + 1) * x.w + 2 * xx + 1));
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(c_, h_, w_);
    for (int yy = 0; yy < dy.h; ++yy)
      for (int xx = 0; xx < dy.w; ++xx) {
        auto g = (T(0.25) * dy.m.col(yy * dy.w + xx)).eval();
        dx.m.col((2 * yy) * w_ + 2 * xx) = g;
        dx.m.col((2 * yy) * w_ + 2 * xx + 1) = g;
        dx.m.col((2 * yy + 1) * w_ + 2 * xx) = g;
        dx.m.col((2 * yy + 1) * w_ + 2 * xx + 1) = g;
      }
    return dx;
  }

 private:
  int h_ = 0, w_ = 0, c_ = 0;
};

// Nearest-neighbor 2x upsampling.
template <typename T>
class Upsample2 {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    h_ = x.h;
    w_ = x.w;
    c_ = x.c;
    Tensor<T> y(x.c, x.h * 2, x.w * 2);
    for (int yy = 0; yy < x.h; ++yy)
      for (int xx = 0; xx < x.w; ++xx) {
        auto src = x.m.col(yy * x.w + xx);
        y.m.col((2 * yy) * y.w + 2 * xx) = src;
        y.m.col((2 * yy) * y.w + 2 * xx + 1) = src;
        y.m.col((2 * yy + 1) * y.w + 2 * xx) = src;
        y.m.col((2 * yy + 1) * y.w + 2 * xx + 1) = src;
      }
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(c_, h_, w_);
    for (int yy = 0; yy < h_; ++yy)
      for (int xx = 0; xx < w_; ++xx)
        dx.m.col(yy * w_ + xx) = dy.m.col((2 * yy) * dy.w + 2 * xx) +
                                 dy.m.col((2 * yy) * dy.w + 2 * xx + 1) +
                                 dy.m.col((2 * yy + 1) * dy.w + 2 * xx) +
                                 dy.m.col((2 * yy + 1) * dy.w + 2 * xx + 1);
    return dx;
  }

 private:
  int h_ = 0, w_ = 0, c_ = 0;
};

template <typename T>
inline Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.h != b.h || a.w != b.w)
    throw std::invalid_argument("concat_channels: spatial mismatch");
  Tensor<T> y(a.c + b.c, a.h, a.w);
  y.m.topRows(a.c) = a.m;
  y.m.bottomRows(b.c) = b.m;
  return y;
}

template <typename T>
inline std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& y,
                                                      int c_top) {
  Tensor<T> a(c_top, y.h, y.w), b(y.c - c_top, y.h, y.w);
  a.m = y.m.topRows(c_top);
  b.m = y.m.bottomRows(y.c - c_top);
  return {std::move(a), std::move(b)};
}

// Column-wise (per-pixel) numerically stable softmax.
template <typename T>
inline Matrix<T> softmax_columns(const Matrix<T>& logits) {
  Matrix<T> p = logits;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    auto col = p.col(j).array();
    T m = col.maxCoeff();
    p.col(j) = (col - m).exp();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

}  // namespace easeg::nn
