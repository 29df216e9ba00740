#include "easeg/train/inference.hpp"

namespace easeg::train {

attention::ProbabilityVolume infer_probs(nn::SegNet<float>& model,
                                         const vol::Volume& v,
                                         const std::vector<double>& scales) {
  attention::ProbabilityVolume probs;
  probs.channels.assign(static_cast<std::size_t>(model.n_classes()),
                        GridF(v.shape()));
  const bool single = scales.size() == 1 && scales[0] == 1.0;
  for (int z = 0; z < v.shape().nz; ++z) {
    std::vector<ImageF> ch =
        single ? nn::forward_probs(model, v.data.slice(z))
               : nn::multiscale_fuse(model, v.data.slice(z), scales);
    for (int c = 0; c < model.n_classes(); ++c)
      probs.channels[c].slice(z) = ch[c];
  }
  return probs;
}

GridB predict_injury(nn::SegNet<float>& model, const vol::Volume& v,
                     const std::vector<double>& scales) {
  attention::ProbabilityVolume probs = infer_probs(model, v, scales);
  GridB classes = attention::argmax_classes(probs);
  const std::uint8_t injury_class =
      model.n_classes() == 3 ? vol::kInjury : std::uint8_t{1};
  GridB out(classes.shape());
  for (int z = 0; z < classes.shape().nz; ++z)
    out.slice(z) = (classes.slice(z) == injury_class).cast<std::uint8_t>();
  return out;
}

}  // namespace easeg::train
