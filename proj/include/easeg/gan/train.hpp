#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "easeg/gan/objectives.hpp"
#include "easeg/gan/translator.hpp"
#include "easeg/vol/volume.hpp"

namespace easeg::gan {

struct TranslationConfig {
  double lambda = 10.0;
  double learning_rate = 0.0004;
  int epochs = 50;
  int batch_size = 2;
  int width = 8;       // generator/critic channel width
  int res_blocks = 2;  // generator residual blocks
  std::uint64_t seed = 0;
  // < 0: derive steps from epochs * slices / batch; >= 0: exact step count
  long max_steps = -1;
};

struct TranslatorTraining {
  Translator translator;
  double final_gen_loss = 0.0;
  double final_critic_loss = 0.0;
  long steps = 0;
};

// Unpaired training on normalized [0,255] slices from each phase.
// Deterministic given config.seed. Alternates one generator update and one
// critic update per step; Adam with linear learning-rate decay.
TranslatorTraining train_translator(const std::vector<ImageF>& slices_a,
                                    const std::vector<ImageF>& slices_v,
                                    const TranslationConfig& config,
                                    std::function<void(long, double, double)>
                                        on_step = nullptr);

// Slice-wise application of g (arterial input) or h (venous input).
// Labels are not carried over: synthetic phases get pseudo-labels later.
vol::Volume synthesize_phase(Translator& t, const vol::Volume& v);

// External -> internal appearance translation; the spleen label map is
// carried over unchanged by the caller (geometry is preserved).
vol::Volume domain_translate(Translator& t, const vol::Volume& external_case);

void save_translator(const std::filesystem::path& path, const Translator& t,
                     const TranslationConfig& config);
Translator load_translator(const std::filesystem::path& path,
                           TranslationConfig* config_out = nullptr);

}  // namespace easeg::gan
