#pragma once

#include <vector>

#include "easeg/nn/segnet.hpp"
#include "easeg/vol/image_ops.hpp"

namespace easeg::nn {

// Per-class probability images for one slice (softmax of the logits).
template <typename T>
std::vector<Image<T>> forward_probs(SegNet<T>& model, const Image<T>& slice) {
  Tensor<T> logits = model.forward(Tensor<T>::from_image(slice));
  Matrix<T> probs = softmax_columns(logits.m);
  std::vector<Image<T>> out;
  out.reserve(model.n_classes());
  Tensor<T> pt = logits;
  pt.m = probs;
  for (int c = 0; c < model.n_classes(); ++c)
    out.push_back(pt.channel_image(c));
  return out;
}

// Multi-scale test-time fusion: forward at each scale (sizes snapped to
// multiples of 8), resize the probability maps back to native resolution,
// average, renormalize per pixel.
template <typename T>
std::vector<Image<T>> multiscale_fuse(SegNet<T>& model, const Image<T>& slice,
                                      const std::vector<double>& scales) {
  if (scales.empty())
    throw std::invalid_argument("multiscale_fuse: empty scale list");
  const int h = static_cast<int>(slice.rows());
  const int w = static_cast<int>(slice.cols());
  auto snap8 = [](double v) {
    int r = static_cast<int>(std::lround(v / 8.0)) * 8;
    return std::max(8, r);
  };
  // Accumulate in double: summing k identical float maps and dividing by k
  // is then exact, so repeated scales reproduce the single-scale output.
  std::vector<Image<double>> acc(static_cast<std::size_t>(model.n_classes()),
                                 Image<double>::Zero(h, w));
  for (double s : scales) {
    if (!(s > 0)) throw std::invalid_argument("multiscale_fuse: scale <= 0");
    int sh = snap8(h * s), sw = snap8(w * s);
    Image<T> scaled =
        (sh == h && sw == w) ? slice : vol::resize_bilinear(slice, sh, sw);
    auto probs = forward_probs(model, scaled);
    for (int c = 0; c < model.n_classes(); ++c) {
      Image<T> back = (sh == h && sw == w)
                          ? probs[c]
                          : vol::resize_bilinear(probs[c], h, w);
      acc[c] += back.template cast<double>();
    }
  }
  Image<double> total = Image<double>::Zero(h, w);
  for (auto& a : acc) {
    a /= static_cast<double>(scales.size());
    total += a;
  }
  std::vector<Image<T>> out;
  out.reserve(acc.size());
  for (auto& a : acc) out.push_back((a / total).template cast<T>());
  return out;
}

}  // namespace easeg::nn
