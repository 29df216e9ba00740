#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "easeg/loss/losses.hpp"
#include "easeg/nn/checkpoint.hpp"
#include "easeg/nn/optim.hpp"
#include "easeg/nn/segnet.hpp"
#include "easeg/train/config.hpp"
#include "easeg/vol/preprocess.hpp"

namespace easeg::train {

struct InternalCaseData {
  std::string id;
  std::string patient_id;
  std::map<vol::PhaseTag, vol::Volume> volumes;
  std::map<vol::PhaseTag, GridB> injury;  // annotation per real phase
  // per-round state, kept only for training-split cases
  std::map<vol::PhaseTag, GridB> pseudo;     // union-space classes
  std::map<vol::PhaseTag, GridB> attention;  // binary weights
};

struct ExternalCaseData {
  std::string id;
  vol::Volume volume;
  GridB spleen;
};

struct TrainerPaths {
  std::filesystem::path internal_dir;
  std::filesystem::path synthetic_dir;   // optional
  std::filesystem::path external_dir;    // optional
  std::filesystem::path translated_dir;  // optional
  std::filesystem::path stage1_checkpoint;  // required with attention on
  std::filesystem::path run_dir;
  std::filesystem::path resume_checkpoint;  // optional
};

struct TrainerData {
  std::vector<InternalCaseData> internal_cases;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  std::vector<ExternalCaseData> external_cases;  // external + translated
  std::vector<vol::PhaseTag> synthetic_phases;   // loaded synthetic tags
};

TrainerData load_trainer_data(const TrainerPaths& paths,
                              const TrainConfig& config);

// ---------------------------------------------------------------------------

// Stage 1: spleen model on the external set (original union translated).
nn::SegNet<float> stage1_pretrain(
    const std::vector<ExternalCaseData>& externals, const TrainConfig& config,
    const std::filesystem::path& run_dir);

struct RoundSnapshot {
  int round = 0;
  double attention_recall = -1.0;  // mean over training cases; -1 = n/a
  std::map<std::string, double> dsc_per_phase;  // test split, single scale
};

struct Stage2Result {
  std::vector<RoundSnapshot> snapshots;
  loss::LossStats loss_stats;
  std::filesystem::path final_checkpoint;
};

// Stage 2 / plain internal training, depending on the component switches.
// Writes metrics.csv, rounds.csv, per-round checkpoints and state, and the
// test-split predictions under run_dir.
Stage2Result stage2_train(TrainerData& data, const TrainConfig& config,
                          const TrainerPaths& paths);

// Segmentation checkpoint helpers (model + optimizer state + round).
void save_segnet_checkpoint(const std::filesystem::path& path,
                            nn::SegNet<float>& model, const TrainConfig& config,
                            int round,
                            const nn::SgdMomentum<float>* optimizer);
nn::SegNet<float> load_segnet_checkpoint(const std::filesystem::path& path,
                                         int* round_out = nullptr,
                                         nn::SgdMomentum<float>* optimizer =
                                             nullptr);

}  // namespace easeg::train
