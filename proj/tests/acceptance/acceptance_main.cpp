// Acceptance suite: one pass/fail line per criterion. Criteria 1-4 and 9
// run in-process; criteria 5-8 drive the command-line binary through the
// full phantom pipeline.

#include <cstdarg>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "easeg/attention/attention.hpp"
#include "easeg/core/fs.hpp"
#include "easeg/core/rng.hpp"
#include "easeg/eval/metrics.hpp"
#include "easeg/gan/objectives.hpp"
#include "easeg/gan/train.hpp"
#include "easeg/loss/losses.hpp"
#include "easeg/nn/layers.hpp"
#include "easeg/phantom/phantom.hpp"
#include "easeg/train/config.hpp"
#include "easeg/train/trainer.hpp"
#include "easeg/vol/preprocess.hpp"
#include "../oracles.hpp"

namespace fs = std::filesystem;
using namespace easeg;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: attention transform vs dense-convolution oracle
// ---------------------------------------------------------------------------

void criterion_1() {
  auto t0 = Clock::now();
  const double sigma = 2.0, rho = 0.005;
  bool ok = true;
  double max_pre = 0.0;

  ImageB single = ImageB::Zero(33, 33);
  single(16, 16) = 1;
  {
    Image<double> response = attention::gaussian_response_2d(single, sigma);
    Image<double> oracle = test_oracles::dense_gaussian_response(single, sigma);
    max_pre = std::max(max_pre, (response - oracle).abs().maxCoeff());
    ImageB ours = attention::expand_mask_2d(single, sigma, rho);
    ImageB want = (oracle >= rho).cast<std::uint8_t>();
    ok = ok && (ours == want).all();
  }

  Rng rng(2024);
  for (int trial = 0; trial < 100 && ok; ++trial) {
    ImageB mask(32, 32);
    double density = 0.05 + 0.9 * rng.uniform();
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) mask(y, x) = rng.uniform() < density;
    Image<double> response = attention::gaussian_response_2d(mask, sigma);
    Image<double> oracle = test_oracles::dense_gaussian_response(mask, sigma);
    max_pre = std::max(max_pre, (response - oracle).abs().maxCoeff());
    ImageB ours = attention::expand_mask_2d(mask, sigma, rho);
    ImageB want = (oracle >= rho).cast<std::uint8_t>();
    ok = ok && (ours == want).all();
  }
  double dt = seconds_since(t0);
  ok = ok && max_pre < 1e-6 && dt < 10.0;
  report(1, ok,
         fmt("expand_mask vs dense oracle: max pre-threshold dev %.2e, "
             "post-threshold bit-exact on 100 random masks + single voxel, "
             "%.1f s (< 10 s)",
             max_pre, dt));
}

// ---------------------------------------------------------------------------
// criterion 2: DSC vs set-cardinality oracle, exhaustive 4x4 sweep
// ---------------------------------------------------------------------------

void criterion_2() {
  auto t0 = Clock::now();
  // the flat-buffer dsc entry point runs the exhaustive sweep; the grid
  // entry point is tied to it on a dense lattice plus the empty corners
  std::vector<std::uint8_t> bufs(std::size_t(1 << 16) * 16);
  for (unsigned m = 0; m < (1u << 16); ++m)
    for (int i = 0; i < 16; ++i)
      bufs[std::size_t(m) * 16 + i] = (m >> i) & 1u;

  bool ok = true;
  for (unsigned a = 0; a < (1u << 16) && ok; ++a) {
    const std::uint8_t* pa = &bufs[std::size_t(a) * 16];
    int pa_count = __builtin_popcount(a);
    for (unsigned b = 0; b < (1u << 16); ++b) {
      double got = eval::dsc_flat(pa, &bufs[std::size_t(b) * 16], 16);
      int inter = __builtin_popcount(a & b);
      int denom = pa_count + __builtin_popcount(b);
      double want = denom == 0 ? 1.0 : 2.0 * inter / denom;
      if (got != want) {
        ok = false;
        break;
      }
    }
  }

  GridB ga({4, 4, 1}), gb({4, 4, 1});
  for (unsigned a = 0; a < (1u << 16) && ok; a += 251) {
    for (unsigned b = 0; b < (1u << 16); b += 239) {
      for (int i = 0; i < 16; ++i) {
        ga.at(i % 4, i / 4, 0) = (a >> i) & 1u;
        gb.at(i % 4, i / 4, 0) = (b >> i) & 1u;
      }
      if (eval::dsc(ga, gb) !=
          eval::dsc_flat(&bufs[std::size_t(a) * 16],
                         &bufs[std::size_t(b) * 16], 16)) {
        ok = false;
        break;
      }
    }
  }
  ga = GridB({4, 4, 1});
  gb = GridB({4, 4, 1});
  ok = ok && eval::dsc(ga, gb) == 1.0;
  ga.at(0, 0, 0) = 1;
  ok = ok && eval::dsc(ga, gb) == 0.0;

  double dt = seconds_since(t0);
  ok = ok && dt < 60.0;
  report(2, ok,
         fmt("dsc vs set-cardinality oracle: all 2^32 4x4 mask pairs "
             "(incl. empty conventions), %.1f s (< 60 s)",
             dt));
}

// ---------------------------------------------------------------------------
// criterion 3: gradient checks for every objective
// ---------------------------------------------------------------------------

double rel_err(double a, double b) {
  double denom = std::max({std::abs(a), std::abs(b), 1e-10});
  return std::abs(a - b) / denom;
}

double max_grad_err(nn::Matrix<double>& x, const nn::Matrix<double>& analytic,
                    const std::function<double()>& eval, double step) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double saved = x.data()[i];
    x.data()[i] = saved + step;
    double up = eval();
    x.data()[i] = saved - step;
    double down = eval();
    x.data()[i] = saved;
    worst = std::max(worst, rel_err(analytic.data()[i],
                                    (up - down) / (2 * step)));
  }
  return worst;
}

void criterion_3() {
  auto t0 = Clock::now();
  Rng rng(77);
  double worst_loss = 0.0, worst_net = 0.0;
  const int n = 48;  // 4x4x3 voxels

  auto random_logits = [&](int classes) {
    nn::Matrix<double> m(classes, n);
    for (Eigen::Index i = 0; i < m.size(); ++i)
      m.data()[i] = rng.uniform(-1.5, 1.5);
    return m;
  };

  {  // external pretraining loss (2-class cross-entropy)
    nn::Matrix<double> logits = random_logits(2);
    std::vector<std::uint8_t> labels(n);
    std::vector<int> targets(n);
    for (int j = 0; j < n; ++j)
      targets[j] = labels[j] = std::uint8_t(rng.uniform_int(2));
    nn::Vector<double> w = nn::Vector<double>::Ones(n);
    auto ce = loss::softmax_ce_grad(logits, targets, w, double(n));
    auto eval_fn = [&] {
      return loss::loss_external_pretrain(nn::softmax_columns(logits), labels);
    };
    worst_loss = std::max(worst_loss,
                          max_grad_err(logits, ce.dlogits, eval_fn, 1e-4));
  }
  {  // attention-weighted real loss
    nn::Matrix<double> logits = random_logits(3);
    std::vector<std::uint8_t> injury(n), weights(n);
    for (int j = 0; j < n; ++j) {
      injury[j] = rng.uniform() < 0.3;
      weights[j] = rng.uniform() < 0.7;
    }
    auto pseudo = loss::reestimate_real_pseudo(nn::softmax_columns(logits),
                                               injury);
    std::vector<int> targets(n);
    nn::Vector<double> w(n);
    double norm = 0;
    for (int j = 0; j < n; ++j) {
      targets[j] = injury[j] ? vol::kInjury : pseudo[j];
      w(j) = weights[j];
      norm += weights[j];
    }
    auto ce = loss::softmax_ce_grad(logits, targets, w, norm);
    auto eval_fn = [&] {
      return loss::loss_real(nn::softmax_columns(logits), injury, pseudo,
                             weights);
    };
    worst_loss = std::max(worst_loss,
                          max_grad_err(logits, ce.dlogits, eval_fn, 1e-4));
  }
  {  // synthetic-phase loss
    nn::Matrix<double> logits = random_logits(3);
    std::vector<std::uint8_t> ps(n), pi(n), weights(n);
    for (int j = 0; j < n; ++j) {
      double u = rng.uniform();
      ps[j] = u < 0.3;
      pi[j] = u >= 0.3 && u < 0.5;
      weights[j] = rng.uniform() < 0.8;
    }
    std::vector<int> targets(n);
    nn::Vector<double> w(n);
    double norm = 0;
    for (int j = 0; j < n; ++j) {
      targets[j] = pi[j] ? vol::kInjury : ps[j] ? vol::kSpleen : 0;
      w(j) = weights[j];
      norm += weights[j];
    }
    auto ce = loss::softmax_ce_grad(logits, targets, w, norm);
    auto eval_fn = [&] {
      return loss::loss_synthetic(nn::softmax_columns(logits), ps, pi,
                                  weights);
    };
    worst_loss = std::max(worst_loss,
                          max_grad_err(logits, ce.dlogits, eval_fn, 1e-4));
  }
  {  // external joint loss
    nn::Matrix<double> logits = random_logits(3);
    std::vector<std::uint8_t> labels(n);
    std::vector<int> targets(n);
    for (int j = 0; j < n; ++j) {
      labels[j] = std::uint8_t(rng.uniform_int(2));
      targets[j] = labels[j] ? vol::kSpleen : vol::kBackground;
    }
    nn::Vector<double> w = nn::Vector<double>::Ones(n);
    auto ce = loss::softmax_ce_grad(logits, targets, w, double(n));
    auto eval_fn = [&] {
      return loss::loss_external_joint(nn::softmax_columns(logits), labels);
    };
    worst_loss = std::max(worst_loss,
                          max_grad_err(logits, ce.dlogits, eval_fn, 1e-4));
  }
  {  // adversarial terms wrt the critic logit, cycle L1 wrt pixels
    for (int trial = 0; trial < 25; ++trial) {
      double z = rng.uniform(-3, 3);
      double h = 1e-5;
      double gen_grad = gan::sigmoid(z) - 1.0;
      double gen_num = (-std::log(gan::sigmoid(z + h)) +
                        std::log(gan::sigmoid(z - h))) /
                       (2 * h);
      worst_loss = std::max(worst_loss, rel_err(gen_grad, gen_num));
      double critic_grad = gan::sigmoid(z);
      double critic_num = (-std::log(1 - gan::sigmoid(z + h)) +
                           std::log(1 - gan::sigmoid(z - h))) /
                          (2 * h);
      worst_loss = std::max(worst_loss, rel_err(critic_grad, critic_num));
    }
    nn::Matrix<double> rec(1, 25), target(1, 25);
    for (int j = 0; j < 25; ++j) {
      target(0, j) = rng.uniform(-1, 1);
      rec(0, j) = target(0, j) +
                  (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.05, 0.5);
    }
    nn::Matrix<double> analytic(1, 25);
    for (int j = 0; j < 25; ++j)
      analytic(0, j) = (rec(0, j) > target(0, j) ? 1.0 : -1.0) / 25.0;
    auto eval_fn = [&] { return (rec - target).cwiseAbs().sum() / 25.0; };
    worst_loss = std::max(worst_loss,
                          max_grad_err(rec, analytic, eval_fn, 1e-5));
  }
  {  // micro-backbone: conv-relu-conv through the weighted loss
    nn::Conv2d<double> c1("c1", 1, 3, 3, rng);
    nn::Relu<double> r1;
    nn::Conv2d<double> c2("c2", 3, 2, 1, rng);
    nn::Tensor<double> x(1, 6, 6);
    for (Eigen::Index i = 0; i < x.m.size(); ++i)
      x.m.data()[i] = rng.uniform(0, 1);
    std::vector<int> targets(36);
    for (int j = 0; j < 36; ++j) targets[j] = int(rng.uniform_int(2));
    nn::Vector<double> w(36);
    for (int j = 0; j < 36; ++j) w(j) = rng.uniform() < 0.8 ? 1.0 : 0.0;
    double norm = w.sum();
    auto eval_fn = [&] {
      nn::Tensor<double> h = r1.forward(c1.forward(x));
      nn::Tensor<double> logits = c2.forward(h);
      return loss::softmax_ce_grad(logits.m, targets, w, norm).weighted_sum /
             norm;
    };
    c1.weight().zero_grad();
    c1.bias().zero_grad();
    c2.weight().zero_grad();
    c2.bias().zero_grad();
    nn::Tensor<double> h = r1.forward(c1.forward(x));
    nn::Tensor<double> logits = c2.forward(h);
    auto ce = loss::softmax_ce_grad(logits.m, targets, w, norm);
    nn::Tensor<double> dl = logits;
    dl.m = ce.dlogits;
    c1.backward(r1.backward(c2.backward(dl)));
    worst_net = std::max(worst_net,
                         max_grad_err(c1.weight().value, c1.weight().grad,
                                      eval_fn, 1e-5));
    worst_net = std::max(worst_net,
                         max_grad_err(c2.weight().value, c2.weight().grad,
                                      eval_fn, 1e-5));
  }
  {  // tiny translator (< 100 parameters): adversarial + cycle through nets
    gan::Generator<double> g("g", 1, 1, rng);
    gan::Generator<double> h2("h", 1, 1, rng);
    gan::Critic<double> critic("d", 1, rng);
    // evaluate at a differentiable point: zero biases put relu kinks
    // exactly at the origin on dead patches
    auto jitter_biases = [&](std::vector<nn::Param<double>*> ps) {
      for (auto* p : ps)
        if (p->name.find("bias") != std::string::npos)
          for (Eigen::Index i = 0; i < p->value.size(); ++i)
            p->value.data()[i] = rng.uniform(-0.05, 0.05);
    };
    jitter_biases(g.params());
    jitter_biases(h2.params());
    jitter_biases(critic.params());
    nn::Tensor<double> a(1, 8, 8);
    for (Eigen::Index i = 0; i < a.m.size(); ++i)
      a.m.data()[i] = rng.uniform(-0.9, 0.9);
    const double lambda = 10.0;
    auto eval_fn = [&] {
      nn::Tensor<double> fake = g.forward(a);
      nn::Tensor<double> rec = h2.forward(fake);
      double cyc = (rec.m - a.m).cwiseAbs().mean();
      double z = critic.forward(fake);
      return -std::log(gan::sigmoid(z)) + lambda * cyc;
    };
    for (auto* p : g.params()) p->zero_grad();
    for (auto* p : h2.params()) p->zero_grad();
    for (auto* p : critic.params()) p->zero_grad();
    {
      nn::Tensor<double> fake = g.forward(a);
      nn::Tensor<double> rec = h2.forward(fake);
      nn::Tensor<double> dsign = rec;
      for (Eigen::Index i = 0; i < dsign.m.size(); ++i) {
        double d = rec.m.data()[i] - a.m.data()[i];
        dsign.m.data()[i] =
            lambda * (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) / double(a.m.size());
      }
      nn::Tensor<double> dfake = h2.backward(dsign);
      double z = critic.forward(fake);
      nn::Tensor<double> dadv = critic.backward(gan::sigmoid(z) - 1.0);
      dfake.m += dadv.m;
      g.backward(dfake);
    }
    int n_params = 0;
    for (auto* p : g.params()) n_params += int(p->value.size());
    if (n_params >= 100) worst_net = 1.0;  // contract: tiny translator
    for (auto* p : g.params())
      worst_net = std::max(worst_net,
                           max_grad_err(p->value, p->grad, eval_fn, 1e-5));
    for (auto* p : h2.params())
      worst_net = std::max(worst_net,
                           max_grad_err(p->value, p->grad, eval_fn, 1e-5));
  }

  double dt = seconds_since(t0);
  bool ok = worst_loss < 1e-4 && worst_net < 1e-3 && dt < 120.0;
  report(3, ok,
         fmt("finite differences: loss-level max rel err %.2e (< 1e-4), "
             "through-network %.2e (< 1e-3), %.1f s (< 2 min)",
             worst_loss, worst_net, dt));
}

void criterion_4();
void criterion_9();
void pipeline_criteria();

}  // namespace

int main() {
  std::printf("== acceptance suite ==\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_9();
  pipeline_criteria();
  std::printf("== %d criterion(s) failed ==\n", g_failures);
  return g_failures;
}

#include "acceptance_pipeline.inc"
