#include "easeg/train/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "easeg/attention/attention.hpp"
#include "easeg/core/fs.hpp"
#include "easeg/eval/metrics.hpp"
#include "easeg/nn/schedule.hpp"
#include "easeg/train/inference.hpp"
#include "easeg/train/scheduler.hpp"
#include "easeg/vol/augment.hpp"

namespace easeg::train {

namespace fs = std::filesystem;
using vol::PhaseTag;

namespace {

constexpr const char* kSegArch = "small-unet";

vol::PhaseTag source_phase_of(PhaseTag synth) {
  // synthetic venous is rendered from the arterial volume and vice versa
  if (synth == PhaseTag::synthetic_venous) return PhaseTag::arterial;
  if (synth == PhaseTag::synthetic_arterial) return PhaseTag::venous;
  throw std::invalid_argument("source_phase_of: not a synthetic tag");
}

GridB binary_labels(const vol::LabelMap& l) {
  GridB out(l.shape());
  for (int z = 0; z < l.shape().nz; ++z)
    out.slice(z) = (l.labels.slice(z) > 0).cast<std::uint8_t>();
  return out;
}

GridB ones_like(const Shape3& shape) {
  GridB g(shape);
  for (auto& s : g.slices()) s.setConstant(1);
  return g;
}

bool grid_any(const GridB& g) {
  for (const auto& s : g.slices())
    if ((s != 0).any()) return true;
  return false;
}

}  // namespace

TrainerData load_trainer_data(const TrainerPaths& paths,
                              const TrainConfig& config) {
  TrainerData data;
  if (paths.internal_dir.empty() || !fs::exists(paths.internal_dir))
    throw std::runtime_error("internal data directory not found: " +
                             paths.internal_dir.string());

  for (const auto& name : list_subdirs(paths.internal_dir)) {
    fs::path dir = paths.internal_dir / name;
    InternalCaseData c;
    c.id = name;
    for (PhaseTag p : config.phases) {
      if (!vol::has_volume(dir, p))
        throw std::runtime_error("case " + name + " misses phase " +
                                 vol::to_string(p));
      c.volumes[p] = vol::read_volume(dir, p);
      c.injury[p] = binary_labels(vol::read_labels(dir, p));
      c.patient_id = c.volumes[p].patient_id;
    }
    if (config.use_synthetic && !paths.synthetic_dir.empty() &&
        fs::exists(paths.synthetic_dir / name)) {
      for (PhaseTag sp :
           {PhaseTag::synthetic_arterial, PhaseTag::synthetic_venous}) {
        if (!vol::has_volume(paths.synthetic_dir / name, sp)) continue;
        // keep only synthetic phases whose source phase is trained
        PhaseTag src = source_phase_of(sp);
        if (std::find(config.phases.begin(), config.phases.end(), src) ==
            config.phases.end())
          continue;
        c.volumes[sp] = vol::read_volume(paths.synthetic_dir / name, sp);
        if (std::find(data.synthetic_phases.begin(),
                      data.synthetic_phases.end(),
                      sp) == data.synthetic_phases.end())
          data.synthetic_phases.push_back(sp);
      }
    }
    data.internal_cases.push_back(std::move(c));
  }
  if (data.internal_cases.empty())
    throw std::runtime_error("no internal cases found in " +
                             paths.internal_dir.string());
  if (config.use_synthetic && config.alpha < 1.0 &&
      data.synthetic_phases.empty())
    throw std::runtime_error(
        "synthetic phases requested (alpha < 1) but none found under " +
        paths.synthetic_dir.string());

  std::vector<std::string> patient_ids;
  for (const auto& c : data.internal_cases) patient_ids.push_back(c.patient_id);
  auto [train_idx, test_idx] =
      vol::split_patient_ids(patient_ids, config.train_fraction, config.seed);
  data.train_idx = std::move(train_idx);
  data.test_idx = std::move(test_idx);

  if (config.use_external) {
    auto load_external_dir = [&](const fs::path& dir, PhaseTag tag) {
      if (dir.empty() || !fs::exists(dir)) return;
      for (const auto& name : list_subdirs(dir)) {
        if (!vol::has_volume(dir / name, tag)) continue;
        ExternalCaseData e;
        e.id = name + (tag == PhaseTag::external_translated ? "/translated"
                                                            : "");
        e.volume = vol::read_volume(dir / name, tag);
        e.spleen = binary_labels(vol::read_labels(dir / name, tag));
        data.external_cases.push_back(std::move(e));
      }
    };
    load_external_dir(paths.external_dir, PhaseTag::external);
    load_external_dir(paths.translated_dir, PhaseTag::external_translated);
    if (data.external_cases.empty())
      throw std::runtime_error("external source enabled but no cases found");
  }
  return data;
}

// ---------------------------------------------------------------------------
// sample assembly
// ---------------------------------------------------------------------------

namespace {

struct Ref {
  std::size_t case_idx;
  PhaseTag phase;
  int z;
};

struct Sample {
  nn::Tensor<float> image;
  std::vector<int> targets;
  nn::Vector<float> weights;
  float weight_sum = 0.f;
};

Sample assemble(const ImageF& image, const ImageB& target_classes,
                const ImageB& weights, bool augment_on,
                const vol::AugmentConfig& acfg, Rng& rng) {
  ImageF img = image;
  ImageB tgt = target_classes;
  ImageB w = weights;
  if (augment_on) {
    auto aug = vol::augment(img, tgt, w, acfg, rng);
    img = std::move(aug.image);
    tgt = std::move(aug.labels);
    w = std::move(aug.weights);
  }
  Sample s;
  s.image = nn::Tensor<float>::from_image(img);
  const auto n = static_cast<std::size_t>(tgt.size());
  s.targets.resize(n);
  s.weights.resize(static_cast<Eigen::Index>(n));
  const std::uint8_t* tp = tgt.data();
  const std::uint8_t* wp = w.data();
  // tgt/w are row-major like the tensor's pixel order
  for (std::size_t i = 0; i < n; ++i) {
    s.targets[i] = tp[i];
    s.weights(static_cast<Eigen::Index>(i)) = static_cast<float>(wp[i]);
    s.weight_sum += static_cast<float>(wp[i]);
  }
  return s;
}

ImageB merge_real_targets(const InternalCaseData& c, PhaseTag phase, int z,
                          int n_classes) {
  const ImageB& inj = c.injury.at(phase).slice(z);
  ImageB out;
  if (n_classes == 3) {
    out = c.pseudo.at(phase).slice(z);  // {0 bg, 1 spleen}
    out = (inj > 0).select(ImageB::Constant(out.rows(), out.cols(),
                                            std::uint8_t(vol::kInjury)),
                           out);
  } else {
    out = inj;  // {0,1} injury space
  }
  return out;
}

ImageB synth_targets(const InternalCaseData& c, PhaseTag phase, int z,
                     int n_classes) {
  const ImageB& pseudo = c.pseudo.at(phase).slice(z);  // union classes
  if (n_classes == 3) return pseudo;
  return (pseudo == std::uint8_t(vol::kInjury)).cast<std::uint8_t>();
}

ImageB weight_slice(const InternalCaseData& c, PhaseTag phase, int z) {
  return c.attention.at(phase).slice(z);
}

}  // namespace

// ---------------------------------------------------------------------------
// stage 1
// ---------------------------------------------------------------------------

namespace {

void require_bundled_arch(const TrainConfig& config) {
  if (config.arch != "small-unet")
    throw std::runtime_error("backbone '" + config.arch +
                             "' is a plug-in point; this build bundles "
                             "'small-unet' only");
}

}  // namespace

nn::SegNet<float> stage1_pretrain(
    const std::vector<ExternalCaseData>& externals, const TrainConfig& config,
    const fs::path& run_dir) {
  require_bundled_arch(config);
  if (externals.empty())
    throw std::invalid_argument("stage1_pretrain: external set is empty");

  std::vector<Ref> pool;
  for (std::size_t i = 0; i < externals.size(); ++i) {
    const auto& e = externals[i];
    for (int z = 0; z < e.volume.shape().nz; ++z)
      if ((e.spleen.slice(z) != 0).any()) pool.push_back({i, e.volume.phase, z});
  }
  if (pool.empty())
    throw std::invalid_argument(
        "stage1_pretrain: no spleen-containing slices in the external set");

  nn::SegNet<float> model(2, config.width,
                          derive_seed(config.seed, "stage1-init"));
  nn::SgdMomentum<float> optimizer(config.momentum);
  auto params = model.params();

  BatchScheduler scheduler({{"external", pool.size(), config.batch_size}},
                           derive_seed(config.seed, "stage1"), 0);
  Rng aug_rng(derive_seed(config.seed, "stage1-augment"));

  fs::create_directories(run_dir);
  std::ofstream metrics(run_dir / "stage1_metrics.csv");
  metrics << "step,loss\n";

  for (long step = 0; step < config.stage1_iters; ++step) {
    auto draws = scheduler.next_step()[0];
    std::vector<Sample> batch;
    float norm = 0.f;
    for (auto idx : draws) {
      const Ref& r = pool[idx];
      const auto& e = externals[r.case_idx];
      ImageB tgt = e.spleen.slice(r.z);  // class 1 = spleen in the 2-class net
      ImageB w = ImageB::Constant(tgt.rows(), tgt.cols(), 1);
      batch.push_back(assemble(e.volume.data.slice(r.z), tgt, w,
                               config.augment_enabled, config.augment,
                               aug_rng));
      norm += static_cast<float>(batch.back().image.pixels());
    }
    model.zero_grad();
    double loss_sum = 0.0;
    for (auto& s : batch) {
      nn::Tensor<float> logits = model.forward(s.image);
      auto ce = loss::softmax_ce_grad(logits.m, s.targets, s.weights, norm);
      loss_sum += ce.weighted_sum;
      nn::Tensor<float> dlogits = logits;
      dlogits.m = std::move(ce.dlogits);
      model.backward(dlogits);
    }
    optimizer.step(params,
                   nn::poly_lr(step, config.stage1_iters, config.base_lr,
                               config.lr_power));
    char line[64];
    std::snprintf(line, sizeof(line), "%ld,%.6f\n", step, loss_sum / norm);
    metrics << line;
  }
  return model;
}

// ---------------------------------------------------------------------------
// checkpoints
// ---------------------------------------------------------------------------

void save_segnet_checkpoint(const fs::path& path, nn::SegNet<float>& model,
                            const TrainConfig& config, int round,
                            const nn::SgdMomentum<float>* optimizer) {
  nn::Checkpoint ckpt;
  ckpt.architecture_id = kSegArch;
  ckpt.seed = config.seed;
  ckpt.epoch = round;
  ckpt.meta["width"] = std::to_string(model.width());
  ckpt.meta["n_classes"] = std::to_string(model.n_classes());
  ckpt.meta["round"] = std::to_string(round);
  for (auto* p : model.params()) ckpt.tensors[p->name] = p->value;
  if (optimizer)
    for (const auto& [name, v] : optimizer->state())
      ckpt.tensors["opt/" + name] = v;
  ckpt.save(path);
}

nn::SegNet<float> load_segnet_checkpoint(const fs::path& path, int* round_out,
                                         nn::SgdMomentum<float>* optimizer) {
  nn::Checkpoint ckpt = nn::Checkpoint::load(path);
  if (ckpt.architecture_id != kSegArch)
    throw std::runtime_error("not a segmentation checkpoint: " + path.string());
  int width = std::stoi(ckpt.meta_or("width", "16"));
  int n_classes = std::stoi(ckpt.meta_or("n_classes", "2"));
  nn::SegNet<float> model(n_classes, width, 0);
  for (auto* p : model.params()) {
    auto it = ckpt.tensors.find(p->name);
    if (it == ckpt.tensors.end())
      throw std::runtime_error("checkpoint missing tensor " + p->name);
    if (it->second.rows() != p->value.rows() ||
        it->second.cols() != p->value.cols())
      throw std::runtime_error("checkpoint tensor shape mismatch: " + p->name);
    p->value = it->second;
  }
  if (optimizer) {
    optimizer->state().clear();
    for (const auto& [name, m] : ckpt.tensors)
      if (name.rfind("opt/", 0) == 0)
        optimizer->state()[name.substr(4)] = m;
  }
  if (round_out) *round_out = std::stoi(ckpt.meta_or("round", "0"));
  return model;
}

// ---------------------------------------------------------------------------
// stage 2
// ---------------------------------------------------------------------------

namespace {

// Round-boundary state recomputation (Eq. 10/11 and the real-phase
// re-estimation rule), plus the plain self-learning variant without
// attention.
void recompute_state(TrainerData& data, nn::SegNet<float>& model,
                     const TrainConfig& config) {
  for (auto idx : data.train_idx) {
    auto& c = data.internal_cases[idx];
    for (auto& [phase, volume] : c.volumes) {
      const bool synthetic = vol::is_synthetic(phase);
      if (config.use_attention) {
        attention::ProbabilityVolume probs = infer_probs(model, volume);
        GridB pseudo(volume.shape());
        if (synthetic) {
          GridB classes = attention::argmax_classes(probs);
          if (config.self_learning) {
            pseudo = classes;
          } else {
            // keep the model's spleen estimate, pin injury to the source
            // phase annotation
            const GridB& src_injury = c.injury.at(source_phase_of(phase));
            for (int z = 0; z < classes.shape().nz; ++z) {
              auto cls = classes.slice(z);
              auto inj = src_injury.slice(z);
              pseudo.slice(z) =
                  (inj > 0)
                      .select(ImageB::Constant(cls.rows(), cls.cols(),
                                               std::uint8_t(vol::kInjury)),
                              (cls == std::uint8_t(vol::kSpleen))
                                  .cast<std::uint8_t>());
            }
          }
        } else {
          // real phase: annotation overrides, spleen wins on p_s > p_b
          const GridB& inj = c.injury.at(phase);
          for (int z = 0; z < volume.shape().nz; ++z) {
            const auto& ps = probs.channels[vol::kSpleen].slice(z);
            const auto& pb = probs.channels[vol::kBackground].slice(z);
            auto spleen = (ps > pb).cast<std::uint8_t>().eval();
            pseudo.slice(z) =
                (inj.slice(z) > 0)
                    .select(ImageB::Constant(spleen.rows(), spleen.cols(),
                                             std::uint8_t(vol::kInjury)),
                            spleen);
          }
        }
        c.pseudo[phase] = pseudo;
        GridB spleen_mask(pseudo.shape());
        for (int z = 0; z < pseudo.shape().nz; ++z)
          spleen_mask.slice(z) =
              (pseudo.slice(z) == std::uint8_t(vol::kSpleen))
                  .cast<std::uint8_t>();
        c.attention[phase] =
            config.attention_3d
                ? attention::expand_mask_3d(spleen_mask, config.sigma,
                                            config.rho)
                : attention::expand_mask(spleen_mask, config.sigma, config.rho);
      } else if (synthetic && config.self_learning) {
        // 2-class self-learning: pseudo injury from the current model
        GridB injury = predict_injury(model, volume);
        GridB pseudo(volume.shape());
        for (int z = 0; z < injury.shape().nz; ++z)
          pseudo.slice(z) =
              (injury.slice(z) * std::uint8_t(vol::kInjury)).eval();
        c.pseudo[phase] = pseudo;
      }
    }
  }
}

void init_state(TrainerData& data, const TrainConfig& config,
                nn::SegNet<float>* stage1_model) {
  for (auto idx : data.train_idx) {
    auto& c = data.internal_cases[idx];
    for (auto& [phase, volume] : c.volumes) {
      const Shape3& shape = volume.shape();
      if (config.use_attention) {
        attention::ProbabilityVolume probs = infer_probs(*stage1_model, volume);
        auto [pseudo_mask, att] =
            attention::init_attention(probs, config.sigma, config.rho);
        GridB pseudo(shape);
        for (int z = 0; z < shape.nz; ++z)
          pseudo.slice(z) =
              (pseudo_mask.mask.slice(z) * std::uint8_t(vol::kSpleen)).eval();
        c.pseudo[phase] = std::move(pseudo);
        c.attention[phase] = std::move(att.weights);
      } else {
        c.attention[phase] = ones_like(shape);
        if (vol::is_synthetic(phase)) {
          GridB pseudo(shape);
          if (!config.self_learning) {
            const GridB& src = c.injury.at(source_phase_of(phase));
            for (int z = 0; z < shape.nz; ++z)
              pseudo.slice(z) =
                  (src.slice(z) * std::uint8_t(vol::kInjury)).eval();
          }
          c.pseudo[phase] = std::move(pseudo);
        }
      }
    }
  }
}

std::vector<Ref> build_real_pool(const TrainerData& data,
                                 const TrainConfig& config) {
  std::vector<Ref> pool;
  for (auto idx : data.train_idx) {
    const auto& c = data.internal_cases[idx];
    for (PhaseTag p : config.phases) {
      const auto& inj = c.injury.at(p);
      for (int z = 0; z < inj.shape().nz; ++z)
        if ((inj.slice(z) != 0).any()) pool.push_back({idx, p, z});
    }
  }
  return pool;
}

std::vector<Ref> build_synth_pool(const TrainerData& data,
                                  const TrainConfig& config) {
  std::vector<Ref> pool;
  if (!config.use_synthetic) return pool;
  for (auto idx : data.train_idx) {
    const auto& c = data.internal_cases[idx];
    for (PhaseTag sp : data.synthetic_phases) {
      if (!c.volumes.count(sp) || !c.pseudo.count(sp)) continue;
      const auto& pseudo = c.pseudo.at(sp);
      std::vector<int> zs;
      for (int z = 0; z < pseudo.shape().nz; ++z)
        if ((pseudo.slice(z) != 0).any()) zs.push_back(z);
      if (zs.empty()) {
        // fall back to the source phase's annotated slices
        const auto& src_inj = c.injury.at(source_phase_of(sp));
        for (int z = 0; z < src_inj.shape().nz; ++z)
          if ((src_inj.slice(z) != 0).any()) zs.push_back(z);
      }
      for (int z : zs) pool.push_back({idx, sp, z});
    }
  }
  return pool;
}

std::vector<Ref> build_ext_pool(const TrainerData& data) {
  std::vector<Ref> pool;
  for (std::size_t i = 0; i < data.external_cases.size(); ++i) {
    const auto& e = data.external_cases[i];
    for (int z = 0; z < e.volume.shape().nz; ++z)
      if ((e.spleen.slice(z) != 0).any())
        pool.push_back({i, e.volume.phase, z});
  }
  return pool;
}

double mean_attention_recall(const TrainerData& data,
                             const TrainConfig& config) {
  double sum = 0.0;
  long n = 0;
  for (auto idx : data.train_idx) {
    const auto& c = data.internal_cases[idx];
    for (PhaseTag p : config.phases) {
      if (!c.attention.count(p) || !grid_any(c.injury.at(p))) continue;
      sum += eval::attention_recall(c.attention.at(p), c.injury.at(p));
      ++n;
    }
  }
  return n > 0 ? sum / n : -1.0;
}

std::map<std::string, double> test_dsc(TrainerData& data,
                                       nn::SegNet<float>& model,
                                       const TrainConfig& config) {
  std::map<std::string, std::pair<double, long>> acc;
  for (auto idx : data.test_idx) {
    auto& c = data.internal_cases[idx];
    for (PhaseTag p : config.phases) {
      GridB pred = predict_injury(model, c.volumes.at(p));
      double d = eval::dsc(pred, c.injury.at(p));
      auto& a = acc[vol::to_string(p)];
      a.first += d;
      ++a.second;
    }
  }
  std::map<std::string, double> out;
  for (auto& [phase, a] : acc) out[phase] = a.first / a.second;
  return out;
}

void save_state(const TrainerData& data, const fs::path& dir, int round) {
  fs::path state_dir = dir / "state" / ("round_" + std::to_string(round));
  for (auto idx : data.train_idx) {
    const auto& c = data.internal_cases[idx];
    for (const auto& [phase, pseudo] : c.pseudo) {
      fs::create_directories(state_dir / c.id);
      vol::write_mask(state_dir / c.id /
                          (std::string(vol::to_string(phase)) + ".pseudo"),
                      pseudo);
    }
    for (const auto& [phase, att] : c.attention) {
      fs::create_directories(state_dir / c.id);
      vol::write_mask(state_dir / c.id /
                          (std::string(vol::to_string(phase)) + ".attention"),
                      att);
    }
  }
}

void load_state(TrainerData& data, const fs::path& dir, int round) {
  fs::path state_dir = dir / "state" / ("round_" + std::to_string(round));
  if (!fs::exists(state_dir))
    throw std::runtime_error("resume: state directory missing: " +
                             state_dir.string());
  for (auto idx : data.train_idx) {
    auto& c = data.internal_cases[idx];
    for (auto& [phase, volume] : c.volumes) {
      fs::path base = state_dir / c.id / vol::to_string(phase);
      if (fs::exists(base.string() + ".pseudo.msk"))
        c.pseudo[phase] = vol::read_mask(base.string() + ".pseudo");
      if (fs::exists(base.string() + ".attention.msk"))
        c.attention[phase] = vol::read_mask(base.string() + ".attention");
      else
        c.attention[phase] = ones_like(volume.shape());
    }
  }
}

}  // namespace

Stage2Result stage2_train(TrainerData& data, const TrainConfig& config,
                          const TrainerPaths& paths) {
  config.validate();
  require_bundled_arch(config);
  Stage2Result result;
  fs::create_directories(paths.run_dir);

  // --- model + state initialization ---------------------------------------
  nn::SgdMomentum<float> optimizer(config.momentum);
  nn::SegNet<float> model;
  int start_round = 0;
  bool resumed = false;

  if (!paths.resume_checkpoint.empty()) {
    model = load_segnet_checkpoint(paths.resume_checkpoint, &start_round,
                                   &optimizer);
    if (model.n_classes() != config.n_classes())
      throw std::runtime_error("resume checkpoint class count mismatch");
    load_state(data, paths.run_dir, start_round);
    resumed = true;
  } else if (config.use_attention) {
    if (paths.stage1_checkpoint.empty())
      throw std::runtime_error(
          "external attention requires a stage-1 spleen checkpoint");
    nn::SegNet<float> stage1 = load_segnet_checkpoint(paths.stage1_checkpoint);
    if (stage1.n_classes() != 2)
      throw std::runtime_error("stage-1 checkpoint must be a 2-class model");
    if (stage1.width() != config.width)
      throw std::runtime_error("stage-1 checkpoint width mismatch");
    model = nn::SegNet<float>::widen_classes(stage1, 3);
    init_state(data, config, &stage1);
  } else {
    model =
        nn::SegNet<float>(2, config.width, derive_seed(config.seed, "model-init"));
    init_state(data, config, nullptr);
  }
  auto params = model.params();

  std::ofstream metrics(paths.run_dir / "metrics.csv",
                        resumed ? std::ios::app : std::ios::out);
  std::ofstream rounds_csv(paths.run_dir / "rounds.csv",
                           resumed ? std::ios::app : std::ios::out);
  if (!resumed) {
    metrics << "step,loss_real,loss_syn,loss_ext,total\n";
    rounds_csv << "round,recall,";
    for (std::size_t i = 0; i < config.phases.size(); ++i)
      rounds_csv << "dsc_" << vol::to_string(config.phases[i])
                 << (i + 1 < config.phases.size() ? "," : "\n");
  }

  auto write_snapshot = [&](int round) {
    RoundSnapshot snap;
    snap.round = round;
    if (config.use_attention)
      snap.attention_recall = mean_attention_recall(data, config);
    if (config.snapshot_dsc) snap.dsc_per_phase = test_dsc(data, model, config);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d,%.6f", round, snap.attention_recall);
    rounds_csv << buf;
    for (PhaseTag p : config.phases) {
      auto it = snap.dsc_per_phase.find(vol::to_string(p));
      std::snprintf(buf, sizeof(buf), ",%.6f",
                    it == snap.dsc_per_phase.end() ? -1.0 : it->second);
      rounds_csv << buf;
    }
    rounds_csv << "\n";
    rounds_csv.flush();
    result.snapshots.push_back(std::move(snap));
  };

  long global_step = 0;

  // one optimization runlet (warmup or one refinement round)
  auto run_steps = [&](long n_steps, long lr_step0, long lr_total,
                       bool with_synth, bool with_ext, long round_tag) {
    std::vector<Ref> real_pool = build_real_pool(data, config);
    std::vector<Ref> synth_pool =
        with_synth ? build_synth_pool(data, config) : std::vector<Ref>{};
    std::vector<Ref> ext_pool =
        with_ext ? build_ext_pool(data) : std::vector<Ref>{};

    std::vector<BatchScheduler::Source> sources;
    sources.push_back({"real", real_pool.size(), 0});
    if (config.use_synthetic) sources.push_back({"synthetic", synth_pool.size(), 0});
    if (config.use_external) sources.push_back({"external", ext_pool.size(), 0});
    auto shares = BatchScheduler::equal_shares(config.batch_size,
                                               static_cast<int>(sources.size()));
    for (std::size_t i = 0; i < sources.size(); ++i) sources[i].share = shares[i];
    BatchScheduler scheduler(sources, config.seed, round_tag);

    std::map<std::string, Rng> aug_rngs;
    for (const auto& s : sources)
      aug_rngs.emplace(s.name,
                       Rng(derive_seed(config.seed, "augment/" + s.name,
                                       static_cast<std::uint64_t>(round_tag))));

    const double a = config.effective_alpha();
    const double b = config.effective_beta();

    for (long step = 0; step < n_steps; ++step) {
      auto draws = scheduler.next_step();
      model.zero_grad();

      double l_real = 0.0, l_syn = 0.0, l_ext = 0.0;
      for (std::size_t si = 0; si < sources.size(); ++si) {
        const std::string& name = sources[si].name;
        const double coeff = name == "real"        ? a
                             : name == "synthetic" ? 1.0 - a
                                                   : b;
        if (draws[si].empty()) continue;
        if (coeff == 0.0) continue;  // zero-coefficient sources are skipped

        // assemble the sub-batch first: the loss normalizer spans it
        std::vector<Sample> batch;
        float norm = 0.f;
        Rng& aug_rng = aug_rngs.at(name);
        for (auto pool_idx : draws[si]) {
          const Ref& r = name == "real"        ? real_pool[pool_idx]
                         : name == "synthetic" ? synth_pool[pool_idx]
                                               : ext_pool[pool_idx];
          ImageF img;
          ImageB tgt, w;
          if (name == "external") {
            const auto& e = data.external_cases[r.case_idx];
            img = e.volume.data.slice(r.z);
            tgt = (e.spleen.slice(r.z) * std::uint8_t(vol::kSpleen)).eval();
            w = ImageB::Constant(img.rows(), img.cols(), 1);
          } else {
            const auto& c = data.internal_cases[r.case_idx];
            img = c.volumes.at(r.phase).data.slice(r.z);
            tgt = name == "real"
                      ? merge_real_targets(c, r.phase, r.z, config.n_classes())
                      : synth_targets(c, r.phase, r.z, config.n_classes());
            w = weight_slice(c, r.phase, r.z);
          }
          batch.push_back(assemble(img, tgt, w, config.augment_enabled,
                                   config.augment, aug_rng));
          if (name == "external")
            norm += static_cast<float>(batch.back().image.pixels());
          else
            norm += batch.back().weight_sum;
        }
        if (norm == 0.f) {
          ++result.loss_stats.zero_weight_batches;
          continue;
        }
        double weighted_sum = 0.0;
        for (auto& s : batch) {
          nn::Tensor<float> logits = model.forward(s.image);
          auto ce = loss::softmax_ce_grad(logits.m, s.targets, s.weights, norm);
          weighted_sum += ce.weighted_sum;
          nn::Tensor<float> dlogits = logits;
          dlogits.m = std::move(ce.dlogits);
          dlogits.m *= static_cast<float>(coeff);
          model.backward(dlogits);
        }
        const double value = weighted_sum / norm;
        if (name == "real")
          l_real = value;
        else if (name == "synthetic")
          l_syn = value;
        else
          l_ext = value;
      }

      optimizer.step(params, nn::poly_lr(lr_step0 + step, lr_total,
                                         config.base_lr, config.lr_power));
      double total = loss::loss_total(l_real, l_syn, l_ext,
                                      {a, config.use_external ? b : 0.0});
      char line[160];
      std::snprintf(line, sizeof(line), "%ld,%.6f,%.6f,%.6f,%.6f\n",
                    global_step, l_real, l_syn, l_ext, total);
      metrics << line;
      ++global_step;
    }
  };

  const int total_rounds = config.refinement_rounds;
  const long warmup = config.use_attention ? 0 : config.effective_warmup_iters();

  if (!resumed) {
    if (warmup > 0) {
      // warmup trains on annotated real slices only
      run_steps(warmup, 0, warmup, /*with_synth=*/false, /*with_ext=*/false,
                /*round_tag=*/0);
      global_step = warmup;
    }
    // self-learning needs a first pseudo-label pass from the warmed model
    if (!config.use_attention && config.use_synthetic && config.self_learning)
      recompute_state(data, model, config);
    write_snapshot(0);
    save_state(data, paths.run_dir, 0);
    save_segnet_checkpoint(paths.run_dir / "ckpt_round_0.ckpt", model, config,
                           0, &optimizer);
  } else {
    global_step = warmup + static_cast<long>(start_round) *
                               config.stage2_iters_per_update;
  }

  const long stage2_total =
      std::max<long>(1, total_rounds * config.stage2_iters_per_update);
  for (int t = start_round + 1; t <= total_rounds; ++t) {
    run_steps(config.stage2_iters_per_update,
              static_cast<long>(t - 1) * config.stage2_iters_per_update,
              stage2_total, /*with_synth=*/true, /*with_ext=*/true,
              /*round_tag=*/t);
    recompute_state(data, model, config);
    write_snapshot(t);
    save_state(data, paths.run_dir, t);
    save_segnet_checkpoint(
        paths.run_dir / ("ckpt_round_" + std::to_string(t) + ".ckpt"), model,
        config, t, &optimizer);
  }

  // --- test-split predictions ----------------------------------------------
  for (auto idx : data.test_idx) {
    auto& c = data.internal_cases[idx];
    for (PhaseTag p : config.phases) {
      GridB pred = predict_injury(model, c.volumes.at(p), config.fusion_scales);
      vol::LabelMap out;
      out.labels = std::move(pred);
      out.space = vol::LabelSpace::internal;
      vol::write_labels(paths.run_dir / "predictions" / c.id, p, out,
                        c.patient_id);
    }
  }

  result.final_checkpoint =
      paths.run_dir / ("ckpt_round_" + std::to_string(total_rounds) + ".ckpt");
  if (total_rounds == 0)
    result.final_checkpoint = paths.run_dir / "ckpt_round_0.ckpt";
  return result;
}

}  // namespace easeg::train
