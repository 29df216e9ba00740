#include "easeg/train/config.hpp"

#include <sstream>
#include <stdexcept>

namespace easeg::train {

void TrainConfig::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("trainer.sigma must be > 0");
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("trainer.rho must lie in (0,1)");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("trainer.alpha must lie in [0,1]");
  if (!(beta >= 0.0)) throw std::invalid_argument("trainer.beta must be >= 0");
  if (refinement_rounds < 0)
    throw std::invalid_argument("trainer.T must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("trainer.batch_size < 1");
  if (width < 1) throw std::invalid_argument("backbone.width < 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("trainer.train_fraction must lie in (0,1)");
  if (fusion_scales.empty())
    throw std::invalid_argument("backbone.fusion_scales must not be empty");
  if (arch != "small-unet" && arch != "deeplab")
    throw std::invalid_argument("backbone.arch must be small-unet or deeplab");
  if (phases.empty())
    throw std::invalid_argument("trainer.phases must not be empty");
  for (auto p : phases)
    if (!vol::is_real_internal(p))
      throw std::invalid_argument("trainer.phases must list real phases");
}

TrainConfig TrainConfig::from_ini(const Ini& ini) {
  TrainConfig c;
  c.sigma = ini.get_double("attention.sigma", c.sigma);
  c.rho = ini.get_double("attention.rho", c.rho);
  c.attention_3d = ini.get_bool("attention.expand_3d", c.attention_3d);

  c.alpha = ini.get_double("trainer.alpha", c.alpha);
  c.beta = ini.get_double("trainer.beta", c.beta);
  c.refinement_rounds = ini.get_int("trainer.T", c.refinement_rounds);
  c.base_lr = ini.get_double("trainer.base_lr", c.base_lr);
  c.lr_power = ini.get_double("trainer.lr_power", c.lr_power);
  c.momentum = ini.get_double("trainer.momentum", c.momentum);
  c.stage1_iters = ini.get_int64("trainer.stage1_iters", c.stage1_iters);
  c.stage2_iters_per_update =
      ini.get_int64("trainer.stage2_iters_per_update", c.stage2_iters_per_update);
  c.warmup_iters = ini.get_int64("trainer.warmup_iters", c.warmup_iters);
  c.batch_size = ini.get_int("trainer.batch_size", c.batch_size);
  c.seed = static_cast<std::uint64_t>(ini.get_int64("trainer.seed", 0));
  c.train_fraction = ini.get_double("trainer.train_fraction", c.train_fraction);
  c.augment_enabled = ini.get_bool("trainer.augment", c.augment_enabled);
  c.augment.max_rotation_deg =
      ini.get_double("trainer.augment_max_rotation", c.augment.max_rotation_deg);
  c.augment.min_scale =
      ini.get_double("trainer.augment_min_scale", c.augment.min_scale);
  c.augment.max_scale =
      ini.get_double("trainer.augment_max_scale", c.augment.max_scale);
  c.use_synthetic = ini.get_bool("trainer.use_synthetic", c.use_synthetic);
  c.use_external = ini.get_bool("trainer.use_external", c.use_external);
  c.use_attention = ini.get_bool("trainer.use_attention", c.use_attention);
  c.self_learning = ini.get_bool("trainer.self_learning", c.self_learning);
  c.snapshot_dsc = ini.get_bool("trainer.snapshot_dsc", c.snapshot_dsc);

  c.arch = ini.get_string("backbone.arch", c.arch);
  c.width = ini.get_int("backbone.width", c.width);
  c.fusion_scales = ini.get_doubles("backbone.fusion_scales", c.fusion_scales);

  if (auto v = ini.get("trainer.phases")) {
    c.phases.clear();
    for (const auto& tok : split_csv(*v)) {
      if (tok == "A" || tok == "arterial")
        c.phases.push_back(vol::PhaseTag::arterial);
      else if (tok == "V" || tok == "venous")
        c.phases.push_back(vol::PhaseTag::venous);
      else
        throw std::invalid_argument("trainer.phases: unknown phase " + tok);
    }
  }

  c.validate();
  return c;
}

void TrainConfig::to_ini(Ini& ini) const {
  auto put_d = [&](const std::string& k, double v) {
    std::ostringstream ss;
    ss << v;
    ini.set(k, ss.str());
  };
  put_d("attention.sigma", sigma);
  put_d("attention.rho", rho);
  ini.set("attention.expand_3d", attention_3d ? "true" : "false");
  put_d("trainer.alpha", alpha);
  put_d("trainer.beta", beta);
  ini.set("trainer.T", std::to_string(refinement_rounds));
  put_d("trainer.base_lr", base_lr);
  put_d("trainer.lr_power", lr_power);
  put_d("trainer.momentum", momentum);
  ini.set("trainer.stage1_iters", std::to_string(stage1_iters));
  ini.set("trainer.stage2_iters_per_update",
          std::to_string(stage2_iters_per_update));
  ini.set("trainer.warmup_iters", std::to_string(warmup_iters));
  ini.set("trainer.batch_size", std::to_string(batch_size));
  ini.set("trainer.seed", std::to_string(seed));
  put_d("trainer.train_fraction", train_fraction);
  ini.set("trainer.augment", augment_enabled ? "true" : "false");
  put_d("trainer.augment_max_rotation", augment.max_rotation_deg);
  put_d("trainer.augment_min_scale", augment.min_scale);
  put_d("trainer.augment_max_scale", augment.max_scale);
  ini.set("trainer.use_synthetic", use_synthetic ? "true" : "false");
  ini.set("trainer.use_external", use_external ? "true" : "false");
  ini.set("trainer.use_attention", use_attention ? "true" : "false");
  ini.set("trainer.self_learning", self_learning ? "true" : "false");
  ini.set("trainer.snapshot_dsc", snapshot_dsc ? "true" : "false");
  ini.set("backbone.arch", arch);
  ini.set("backbone.width", std::to_string(width));
  {
    std::ostringstream ss;
    for (std::size_t i = 0; i < fusion_scales.size(); ++i)
      ss << (i ? "," : "") << fusion_scales[i];
    ini.set("backbone.fusion_scales", ss.str());
  }
  {
    std::ostringstream ss;
    for (std::size_t i = 0; i < phases.size(); ++i)
      ss << (i ? "," : "") << vol::to_string(phases[i]);
    ini.set("trainer.phases", ss.str());
  }
}

void TrainConfig::apply_component(const std::string& flag) {
  if (flag == "separate" || flag == "joint") {
    use_synthetic = false;
    use_external = false;
    use_attention = false;
    self_learning = false;
  } else if (flag == "synphaseaug") {
    use_synthetic = true;
    use_external = false;
    use_attention = false;
    self_learning = true;
  } else if (flag == "synphaseaug_no_selflearn") {
    use_synthetic = true;
    use_external = false;
    use_attention = false;
    self_learning = false;
  } else if (flag == "ext_attention_no_syn") {
    use_synthetic = false;
    use_external = true;
    use_attention = true;
    self_learning = false;
  } else if (flag == "ext_attention") {
    use_synthetic = true;
    use_external = true;
    use_attention = true;
    self_learning = true;
  } else {
    throw std::invalid_argument("unknown component flag: " + flag);
  }
}

TrainConfig default_train_config() { return TrainConfig{}; }

}  // namespace easeg::train
