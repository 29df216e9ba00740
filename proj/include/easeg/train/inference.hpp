#pragma once

#include <vector>

#include "easeg/attention/attention.hpp"
#include "easeg/nn/fuse.hpp"
#include "easeg/nn/segnet.hpp"
#include "easeg/vol/volume.hpp"

namespace easeg::train {

// Slice-wise class probabilities for a whole volume (every slice; the
// test-time path never filters).
attention::ProbabilityVolume infer_probs(nn::SegNet<float>& model,
                                         const vol::Volume& v,
                                         const std::vector<double>& scales = {
                                             1.0});

// argmax prediction of the injury class as a binary volume.
GridB predict_injury(nn::SegNet<float>& model, const vol::Volume& v,
                     const std::vector<double>& scales = {1.0});

}  // namespace easeg::train
