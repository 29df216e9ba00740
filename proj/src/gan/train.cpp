#include "easeg/gan/train.hpp"

#include "easeg/nn/checkpoint.hpp"
#include "easeg/nn/optim.hpp"
#include "easeg/nn/schedule.hpp"

namespace easeg::gan {

namespace {

using nn::Tensor;

Tensor<float> to_internal(const ImageF& slice) {
  Tensor<float> x = Tensor<float>::from_image(slice);
  x.m = (x.m.array() - 127.5f) / 127.5f;
  return x;
}

// epoch-shuffled index stream
class IndexStream {
 public:
  IndexStream(std::size_t n, Rng rng) : rng_(rng), order_(n) {
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
    rng_.shuffle(order_);
  }
  std::size_t next() {
    if (pos_ >= order_.size()) {
      pos_ = 0;
      rng_.shuffle(order_);
    }
    return order_[pos_++];
  }

 private:
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

float mean_abs_sign(const Tensor<float>& diff, Tensor<float>& dsign) {
  dsign = diff;
  float s = 0.f;
  const float inv = 1.0f / static_cast<float>(diff.m.size());
  for (Eigen::Index i = 0; i < diff.m.size(); ++i) {
    float d = diff.m.data()[i];
    s += std::abs(d);
    dsign.m.data()[i] = (d > 0.f ? 1.f : d < 0.f ? -1.f : 0.f) * inv;
  }
  return s * inv;
}

}  // namespace

TranslatorTraining train_translator(
    const std::vector<ImageF>& slices_a, const std::vector<ImageF>& slices_v,
    const TranslationConfig& config,
    std::function<void(long, double, double)> on_step) {
  if (slices_a.empty() || slices_v.empty())
    throw std::invalid_argument(
        "train_translator: both phase sets must be non-empty");

  Rng init_rng(derive_seed(config.seed, "gan-init"));
  TranslatorTraining out;
  out.translator.g = Generator<float>("g", config.width, config.res_blocks,
                                      init_rng);
  out.translator.h = Generator<float>("h", config.width, config.res_blocks,
                                      init_rng);
  Critic<float> critic_v("d_v", config.width, init_rng);
  Critic<float> critic_a("d_a", config.width, init_rng);

  auto& g = out.translator.g;
  auto& h = out.translator.h;

  long total_steps = config.max_steps;
  if (total_steps < 0) {
    auto per_epoch = static_cast<long>(
        (slices_a.size() + slices_v.size()) / (2 * config.batch_size));
    total_steps = config.epochs * std::max<long>(1, per_epoch);
  }

  IndexStream stream_a(slices_a.size(), Rng(derive_seed(config.seed, "gan-a")));
  IndexStream stream_v(slices_v.size(), Rng(derive_seed(config.seed, "gan-v")));

  nn::Adam<float> opt_gen(0.5), opt_critic(0.5);
  auto gen_params = g.params();
  {
    auto hp = h.params();
    gen_params.insert(gen_params.end(), hp.begin(), hp.end());
  }
  auto critic_params = critic_v.params();
  {
    auto cp = critic_a.params();
    critic_params.insert(critic_params.end(), cp.begin(), cp.end());
  }

  const float lambda = static_cast<float>(config.lambda);
  for (long step = 0; step < total_steps; ++step) {
    const double lr = nn::linear_lr(step, total_steps, config.learning_rate);

    std::vector<Tensor<float>> batch_a, batch_v;
    for (int i = 0; i < config.batch_size; ++i) {
      batch_a.push_back(to_internal(slices_a[stream_a.next()]));
      batch_v.push_back(to_internal(slices_v[stream_v.next()]));
    }

    // Keep detached fakes for the critic update.
    std::vector<Tensor<float>> fakes_v, fakes_a;

    // --- generator update -------------------------------------------------
    g.zero_grad();
    h.zero_grad();
    critic_v.zero_grad();  // clobbered by the pass, stepped separately
    critic_a.zero_grad();
    double gen_loss = 0.0;
    const float inv_b = 1.0f / static_cast<float>(config.batch_size);

    for (const auto& a : batch_a) {
      // forward a -> fake_v -> rec_a; both backward passes run before g or
      // h is reused so layer caches stay valid
      Tensor<float> fake_v = g.forward(a);
      fakes_v.push_back(fake_v);
      Tensor<float> rec_a = h.forward(fake_v);

      Tensor<float> diff = rec_a;
      diff.m -= a.m;
      Tensor<float> dsign;
      float cyc = mean_abs_sign(diff, dsign);
      dsign.m *= lambda * inv_b;
      Tensor<float> dfake_from_cycle = h.backward(dsign);

      float z = critic_v.forward(fake_v);
      float d = sigmoid(z);
      // d/dz of -log sigmoid(z) = sigmoid(z) - 1
      Tensor<float> dfake_from_adv = critic_v.backward((d - 1.0f) * inv_b);

      dfake_from_cycle.m += dfake_from_adv.m;
      g.backward(dfake_from_cycle);

      gen_loss += -loss::clamped_log(static_cast<double>(d)) + lambda * cyc;
    }
    for (const auto& v : batch_v) {
      Tensor<float> fake_a = h.forward(v);
      fakes_a.push_back(fake_a);
      Tensor<float> rec_v = g.forward(fake_a);

      Tensor<float> diff = rec_v;
      diff.m -= v.m;
      Tensor<float> dsign;
      float cyc = mean_abs_sign(diff, dsign);
      dsign.m *= lambda * inv_b;
      Tensor<float> dfake_from_cycle = g.backward(dsign);

      float z = critic_a.forward(fake_a);
      float d = sigmoid(z);
      Tensor<float> dfake_from_adv = critic_a.backward((d - 1.0f) * inv_b);

      dfake_from_cycle.m += dfake_from_adv.m;
      h.backward(dfake_from_cycle);

      gen_loss += -loss::clamped_log(static_cast<double>(d)) + lambda * cyc;
    }
    opt_gen.step(gen_params, lr);

    // --- critic update -----------------------------------------------------
    critic_v.zero_grad();
    critic_a.zero_grad();
    double critic_loss = 0.0;
    // minimize -[log D(real) + log(1 - D(fake))]
    for (const auto& v : batch_v) {
      float d = sigmoid(critic_v.forward(v));
      critic_v.backward((d - 1.0f) * inv_b);  // d/dz of -log sigmoid
      critic_loss += -loss::clamped_log(static_cast<double>(d));
    }
    for (const auto& fv : fakes_v) {
      float d = sigmoid(critic_v.forward(fv));
      critic_v.backward(d * inv_b);  // d/dz of -log(1 - sigmoid)
      critic_loss += -loss::clamped_log(1.0 - static_cast<double>(d));
    }
    for (const auto& a : batch_a) {
      float d = sigmoid(critic_a.forward(a));
      critic_a.backward((d - 1.0f) * inv_b);
      critic_loss += -loss::clamped_log(static_cast<double>(d));
    }
    for (const auto& fa : fakes_a) {
      float d = sigmoid(critic_a.forward(fa));
      critic_a.backward(d * inv_b);
      critic_loss += -loss::clamped_log(1.0 - static_cast<double>(d));
    }
    opt_critic.step(critic_params, lr);

    out.final_gen_loss = gen_loss / (2.0 * config.batch_size);
    out.final_critic_loss = critic_loss / (2.0 * config.batch_size);
    out.steps = step + 1;
    if (on_step) on_step(step, out.final_gen_loss, out.final_critic_loss);
  }
  return out;
}

vol::Volume synthesize_phase(Translator& t, const vol::Volume& v) {
  using vol::PhaseTag;
  PhaseTag out_tag;
  Generator<float>* gen = nullptr;
  if (v.phase == PhaseTag::arterial) {
    gen = &t.g;
    out_tag = PhaseTag::synthetic_venous;
  } else if (v.phase == PhaseTag::venous) {
    gen = &t.h;
    out_tag = PhaseTag::synthetic_arterial;
  } else {
    throw std::invalid_argument(
        "synthesize_phase: input must be tagged arterial or venous");
  }
  vol::Volume out = v;
  out.phase = out_tag;
  for (int z = 0; z < v.shape().nz; ++z)
    out.data.slice(z) =
        gen->translate(v.data.slice(z)).min(255.0f).max(0.0f);
  return out;
}

vol::Volume domain_translate(Translator& t, const vol::Volume& external_case) {
  if (external_case.phase != vol::PhaseTag::external)
    throw std::invalid_argument(
        "domain_translate: input must be tagged external");
  vol::Volume out = external_case;
  out.phase = vol::PhaseTag::external_translated;
  for (int z = 0; z < out.shape().nz; ++z)
    out.data.slice(z) =
        t.g.translate(external_case.data.slice(z)).min(255.0f).max(0.0f);
  return out;
}

void save_translator(const std::filesystem::path& path, const Translator& t,
                     const TranslationConfig& config) {
  nn::Checkpoint ckpt;
  ckpt.architecture_id = "resnet-translator";
  ckpt.seed = config.seed;
  ckpt.epoch = config.epochs;
  ckpt.meta["width"] = std::to_string(config.width);
  ckpt.meta["res_blocks"] = std::to_string(config.res_blocks);
  ckpt.meta["lambda"] = std::to_string(config.lambda);
  auto& g = const_cast<Translator&>(t).g;
  auto& h = const_cast<Translator&>(t).h;
  for (auto* p : g.params()) ckpt.tensors[p->name] = p->value;
  for (auto* p : h.params()) ckpt.tensors[p->name] = p->value;
  ckpt.save(path);
}

Translator load_translator(const std::filesystem::path& path,
                           TranslationConfig* config_out) {
  nn::Checkpoint ckpt = nn::Checkpoint::load(path);
  if (ckpt.architecture_id != "resnet-translator")
    throw std::runtime_error("not a translator checkpoint: " + path.string());
  TranslationConfig cfg;
  cfg.width = std::stoi(ckpt.meta_or("width", "8"));
  cfg.res_blocks = std::stoi(ckpt.meta_or("res_blocks", "2"));
  cfg.seed = ckpt.seed;
  Rng rng(0);
  Translator t;
  t.g = Generator<float>("g", cfg.width, cfg.res_blocks, rng);
  t.h = Generator<float>("h", cfg.width, cfg.res_blocks, rng);
  for (auto* p : t.g.params()) {
    auto it = ckpt.tensors.find(p->name);
    if (it == ckpt.tensors.end())
      throw std::runtime_error("translator checkpoint missing tensor " +
                               p->name);
    p->value = it->second;
  }
  for (auto* p : t.h.params()) {
    auto it = ckpt.tensors.find(p->name);
    if (it == ckpt.tensors.end())
      throw std::runtime_error("translator checkpoint missing tensor " +
                               p->name);
    p->value = it->second;
  }
  if (config_out) *config_out = cfg;
  return t;
}

}  // namespace easeg::gan
