#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "easeg/core/ini.hpp"
#include "easeg/vol/augment.hpp"

namespace easeg::train {

// Hyper-parameters of the two-stage training procedure. Defaults are the
// published operating point; desk-scale runs override the schedule sizes
// through the config file.
struct TrainConfig {
  // attention transform
  double sigma = 32.0;  // Gaussian std-dev, voxels
  double rho = 0.005;   // binarization threshold
  bool attention_3d = false;

  // loss weights and refinement schedule
  double alpha = 0.5;
  double beta = 0.2;
  int refinement_rounds = 2;  // T

  // optimization
  double base_lr = 0.08;
  double lr_power = 0.9;
  double momentum = 0.9;
  long stage1_iters = 50000;
  long stage2_iters_per_update = 40000;
  long warmup_iters = -1;  // <0: same as stage2_iters_per_update
  int batch_size = 16;
  std::uint64_t seed = 0;

  // backbone
  std::string arch = "small-unet";
  int width = 16;

  // test-time fusion
  std::vector<double> fusion_scales = {1.0, 1.5, 2.0, 2.5};

  // data handling
  double train_fraction = 0.7;
  bool augment_enabled = true;
  vol::AugmentConfig augment;

  // real phases to train and evaluate on; "separate" runs restrict this
  // to a single phase
  std::vector<vol::PhaseTag> phases = {vol::PhaseTag::arterial,
                                       vol::PhaseTag::venous};

  // component switches (the ablation axes)
  bool use_synthetic = true;
  bool use_external = true;
  bool use_attention = true;
  bool self_learning = true;

  bool snapshot_dsc = true;

  long effective_warmup_iters() const {
    return warmup_iters < 0 ? stage2_iters_per_update : warmup_iters;
  }

  int n_classes() const { return use_attention ? 3 : 2; }

  // alpha only balances real vs synthetic when synthetic phases are in
  // play; beta only matters with an external source.
  double effective_alpha() const { return use_synthetic ? alpha : 1.0; }
  double effective_beta() const { return use_external ? beta : 0.0; }

  void validate() const;

  static TrainConfig from_ini(const Ini& ini);
  void to_ini(Ini& ini) const;

  // Applies one component flag from the ablation vocabulary. "separate"
  // additionally restricts training to a single phase via `phases`.
  void apply_component(const std::string& flag);
};

TrainConfig default_train_config();

}  // namespace easeg::train
