#pragma once

#include <cmath>
#include <vector>

#include "easeg/nn/layers.hpp"

namespace easeg::gan {

using nn::Conv2d;
using nn::Matrix;
using nn::Param;
using nn::Relu;
using nn::Tensor;

// Image-to-image generator: conv stem, residual blocks, conv head whose
// output is added to the input before the final tanh. The global residual
// biases the mapping toward structure-preserving intensity remaps, which
// keeps cycle-consistent inversions out of the hypothesis space in
// practice. Works in the [-1,1] range; translate() wraps [0,255].
template <typename T>
class Generator {
 public:
  Generator() = default;
  Generator(std::string name, int width, int n_blocks, Rng& rng)
      : width_(width), n_blocks_(n_blocks) {
    stem_ = Conv2d<T>(name + ".stem", 1, width, 3, rng);
    for (int b = 0; b < n_blocks; ++b) {
      block_a_.emplace_back(name + ".res" + std::to_string(b) + "a", width,
                            width, 3, rng);
      block_b_.emplace_back(name + ".res" + std::to_string(b) + "b", width,
                            width, 3, rng);
    }
    block_ra_.resize(n_blocks);
    block_rb_.resize(n_blocks);
    head_ = Conv2d<T>(name + ".head", width, 1, 3, rng);
  }

  // x in [-1,1], single channel
  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> h = stem_r_.forward(stem_.forward(x));
    for (int b = 0; b < n_blocks_; ++b) {
      Tensor<T> r = block_rb_[b].forward(block_b_[b].forward(
          block_ra_[b].forward(block_a_[b].forward(h))));
      r.m += h.m;  // residual skip
      h = std::move(r);
    }
    Tensor<T> delta = head_.forward(h);
    delta.m += x.m;  // global residual
    return tanh_.forward(delta);
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dpre = tanh_.backward(dy);  // gradient wrt x + delta
    Tensor<T> dh = head_.backward(dpre);
    for (int b = n_blocks_ - 1; b >= 0; --b) {
      Tensor<T> dres = block_a_[b].backward(block_ra_[b].backward(
          block_b_[b].backward(block_rb_[b].backward(dh))));
      dh.m += dres.m;  // skip gradient
    }
    Tensor<T> dx = stem_.backward(stem_r_.backward(dh));
    dx.m += dpre.m;  // direct path through the global residual
    return dx;
  }

  // [0,255] -> [0,255]; tanh keeps the output inside the range.
  Image<T> translate(const Image<T>& slice) {
    Tensor<T> x = Tensor<T>::from_image(slice);
    x.m = (x.m.array() - T(127.5)) / T(127.5);
    Tensor<T> y = forward(x);
    y.m = y.m.array() * T(127.5) + T(127.5);
    return y.channel_image(0);
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    stem_.collect(out);
    for (int b = 0; b < n_blocks_; ++b) {
      block_a_[b].collect(out);
      block_b_[b].collect(out);
    }
    head_.collect(out);
    return out;
  }

  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }

 private:
  int width_ = 0, n_blocks_ = 0;
  Conv2d<T> stem_, head_;
  Relu<T> stem_r_;
  std::vector<Conv2d<T>> block_a_, block_b_;
  std::vector<Relu<T>> block_ra_, block_rb_;
  nn::Tanh<T> tanh_;
};

// Patch-style convolutional scorer pooled to one realness logit per image.
// D(x) = sigmoid(mean patch logit), so outputs live in (0,1).
template <typename T>
class Critic {
 public:
  Critic() = default;
  Critic(std::string name, int width, Rng& rng) {
    c0_ = Conv2d<T>(name + ".c0", 1, width, 3, rng);
    c1_ = Conv2d<T>(name + ".c1", width, 2 * width, 3, rng);
    c2_ = Conv2d<T>(name + ".c2", 2 * width, 1, 3, rng);
  }

  // x in [-1,1]; returns the scalar logit
  T forward(const Tensor<T>& x) {
    Tensor<T> h = r0_.forward(c0_.forward(x));
    h = p0_.forward(h);
    h = r1_.forward(c1_.forward(h));
    h = p1_.forward(h);
    patch_ = c2_.forward(h);
    return patch_.m.mean();
  }

  // gradient wrt the input given d(loss)/d(logit)
  Tensor<T> backward(T dlogit) {
    Tensor<T> dpatch = patch_;
    dpatch.m.setConstant(dlogit / static_cast<T>(patch_.m.size()));
    Tensor<T> dh = c2_.backward(dpatch);
    dh = p1_.backward(dh);
    dh = c1_.backward(r1_.backward(dh));
    dh = p0_.backward(dh);
    return c0_.backward(r0_.backward(dh));
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    c0_.collect(out);
    c1_.collect(out);
    c2_.collect(out);
    return out;
  }

  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }

 private:
  Conv2d<T> c0_, c1_, c2_;
  Relu<T> r0_, r1_;
  nn::AvgPool2<T> p0_, p1_;
  Tensor<T> patch_;
};

template <typename T>
inline T sigmoid(T z) {
  return z >= T(0) ? T(1) / (T(1) + std::exp(-z))
                   : std::exp(z) / (T(1) + std::exp(z));
}

// g: arterial -> venous, h: venous -> arterial.
template <typename T>
struct TranslatorT {
  Generator<T> g;
  Generator<T> h;
};

using Translator = TranslatorT<float>;

}  // namespace easeg::gan
