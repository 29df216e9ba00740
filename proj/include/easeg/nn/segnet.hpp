#pragma once

#include <memory>
#include <vector>

#include "easeg/nn/layers.hpp"

namespace easeg::nn {

// Small 4-level encoder-decoder with skip connections. Input is a single
// [0,255] intensity channel (scaled internally); output is one logit map
// per class at input resolution. Spatial dims must be divisible by 8.
//
// Channel widths are width * {1,2,4,8}; width 16 gives ~0.5M parameters.
template <typename T>
class SegNet {
 public:
  SegNet() = default;

  SegNet(int n_classes, int width, std::uint64_t seed)
      : n_classes_(n_classes), width_(width) {
    Rng rng(seed);
    int w0 = width, w1 = 2 * width, w2 = 4 * width, w3 = 8 * width;
    enc0a_ = Conv2d<T>("enc0a", 1, w0, 3, rng);
    enc0b_ = Conv2d<T>("enc0b", w0, w0, 3, rng);
    enc1a_ = Conv2d<T>("enc1a", w0, w1, 3, rng);
    enc1b_ = Conv2d<T>("enc1b", w1, w1, 3, rng);
    enc2a_ = Conv2d<T>("enc2a", w1, w2, 3, rng);
    enc2b_ = Conv2d<T>("enc2b", w2, w2, 3, rng);
    enc3a_ = Conv2d<T>("enc3a", w2, w3, 3, rng);
    enc3b_ = Conv2d<T>("enc3b", w3, w3, 3, rng);
    dec2a_ = Conv2d<T>("dec2a", w3 + w2, w2, 3, rng);
    dec2b_ = Conv2d<T>("dec2b", w2, w2, 3, rng);
    dec1a_ = Conv2d<T>("dec1a", w2 + w1, w1, 3, rng);
    dec1b_ = Conv2d<T>("dec1b", w1, w1, 3, rng);
    dec0a_ = Conv2d<T>("dec0a", w1 + w0, w0, 3, rng);
    dec0b_ = Conv2d<T>("dec0b", w0, w0, 3, rng);
    head_ = Conv2d<T>("head", w0, n_classes, 1, rng);
  }

  int n_classes() const { return n_classes_; }
  int width() const { return width_; }

  // Logits per class. Caches activations for one backward pass.
  Tensor<T> forward(const Tensor<T>& image) {
    Tensor<T> x = image;
    x.m *= T(1.0 / 255.0);
    Tensor<T> e0 = r0b_.forward(enc0b_.forward(r0a_.forward(enc0a_.forward(x))));
    Tensor<T> e1 = r1b_.forward(
        enc1b_.forward(r1a_.forward(enc1a_.forward(pool1_.forward(e0)))));
    Tensor<T> e2 = r2b_.forward(
        enc2b_.forward(r2a_.forward(enc2a_.forward(pool2_.forward(e1)))));
    Tensor<T> e3 = r3b_.forward(
        enc3b_.forward(r3a_.forward(enc3a_.forward(pool3_.forward(e2)))));
    Tensor<T> d2 = rd2b_.forward(dec2b_.forward(rd2a_.forward(
        dec2a_.forward(concat_channels(up2_.forward(e3), e2)))));
    Tensor<T> d1 = rd1b_.forward(dec1b_.forward(rd1a_.forward(
        dec1a_.forward(concat_channels(up1_.forward(d2), e1)))));
    Tensor<T> d0 = rd0b_.forward(dec0b_.forward(rd0a_.forward(
        dec0a_.forward(concat_channels(up0_.forward(d1), e0)))));
    return head_.forward(d0);
  }

  // Accumulates parameter gradients; expects the caches of the most recent
  // forward().
  void backward(const Tensor<T>& dlogits) {
    Tensor<T> dd0 = head_.backward(dlogits);
    Tensor<T> dcat0 =
        dec0a_.backward(rd0a_.backward(dec0b_.backward(rd0b_.backward(dd0))));
    auto [dup0, de0_skip] = split_channels(dcat0, 2 * width_);
    Tensor<T> dd1 = up0_.backward(dup0);
    Tensor<T> dcat1 =
        dec1a_.backward(rd1a_.backward(dec1b_.backward(rd1b_.backward(dd1))));
    auto [dup1, de1_skip] = split_channels(dcat1, 4 * width_);
    Tensor<T> dd2 = up1_.backward(dup1);
    Tensor<T> dcat2 =
        dec2a_.backward(rd2a_.backward(dec2b_.backward(rd2b_.backward(dd2))));
    auto [dup2, de2_skip] = split_channels(dcat2, 8 * width_);
    Tensor<T> de3 = up2_.backward(dup2);
    Tensor<T> de2 = pool3_.backward(
        enc3a_.backward(r3a_.backward(enc3b_.backward(r3b_.backward(de3)))));
    de2.m += de2_skip.m;
    Tensor<T> de1 = pool2_.backward(
        enc2a_.backward(r2a_.backward(enc2b_.backward(r2b_.backward(de2)))));
    de1.m += de1_skip.m;
    Tensor<T> de0 = pool1_.backward(
        enc1a_.backward(r1a_.backward(enc1b_.backward(r1b_.backward(de1)))));
    de0.m += de0_skip.m;
    enc0a_.backward(r0a_.backward(enc0b_.backward(r0b_.backward(de0))));
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    for (Conv2d<T>* c : convs()) c->collect(out);
    return out;
  }

  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }

  // Warm start: copy every shared layer from a trained model with fewer
  // output classes; the new class rows of the head start at zero logits.
  static SegNet widen_classes(const SegNet& src, int new_n_classes) {
    if (new_n_classes < src.n_classes_)
      throw std::invalid_argument("widen_classes: cannot shrink classes");
    SegNet dst(new_n_classes, src.width_, 0);
    auto sc = src.convs();
    auto dc = dst.convs();
    for (std::size_t i = 0; i < sc.size(); ++i) {
      if (dc[i]->weight().value.rows() == sc[i]->weight().value.rows()) {
        dc[i]->weight().value = sc[i]->weight().value;
        dc[i]->bias().value = sc[i]->bias().value;
      } else {
        dc[i]->weight().value.setZero();
        dc[i]->bias().value.setZero();
        dc[i]->weight().value.topRows(sc[i]->weight().value.rows()) =
            sc[i]->weight().value;
        dc[i]->bias().value.topRows(sc[i]->bias().value.rows()) =
            sc[i]->bias().value;
      }
    }
    return dst;
  }

  std::vector<Conv2d<T>*> convs() {
    return {&enc0a_, &enc0b_, &enc1a_, &enc1b_, &enc2a_, &enc2b_, &enc3a_,
            &enc3b_, &dec2a_, &dec2b_, &dec1a_, &dec1b_, &dec0a_, &dec0b_,
            &head_};
  }

  std::vector<const Conv2d<T>*> convs() const {
    return {&enc0a_, &enc0b_, &enc1a_, &enc1b_, &enc2a_, &enc2b_, &enc3a_,
            &enc3b_, &dec2a_, &dec2b_, &dec1a_, &dec1b_, &dec0a_, &dec0b_,
            &head_};
  }

 private:
  int n_classes_ = 0, width_ = 0;
  Conv2d<T> enc0a_, enc0b_, enc1a_, enc1b_, enc2a_, enc2b_, enc3a_, enc3b_;
  Conv2d<T> dec2a_, dec2b_, dec1a_, dec1b_, dec0a_, dec0b_, head_;
  Relu<T> r0a_, r0b_, r1a_, r1b_, r2a_, r2b_, r3a_, r3b_;
  Relu<T> rd2a_, rd2b_, rd1a_, rd1b_, rd0a_, rd0b_;
  AvgPool2<T> pool1_, pool2_, pool3_;
  Upsample2<T> up0_, up1_, up2_;
};

}  // namespace easeg::nn
