// Finite-difference checks for every training objective, both at the loss
// level (with respect to probability-map logits) and through micro
// networks built from the real layers.
#include <doctest.h>

#include <functional>

#include "easeg/gan/objectives.hpp"
#include "easeg/gan/translator.hpp"
#include "easeg/loss/losses.hpp"
#include "easeg/nn/layers.hpp"

using namespace easeg;
using nn::Matrix;
using nn::Tensor;
using nn::Vector;

namespace {

double rel_err(double a, double b) {
  double denom = std::max({std::abs(a), std::abs(b), 1e-10});
  return std::abs(a - b) / denom;
}

// central differences over every entry of `x`
void check_gradient(Matrix<double>& x, const Matrix<double>& analytic,
                    const std::function<double()>& eval, double step,
                    double tol) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double saved = x.data()[i];
    x.data()[i] = saved + step;
    double up = eval();
    x.data()[i] = saved - step;
    double down = eval();
    x.data()[i] = saved;
    double numeric = (up - down) / (2 * step);
    INFO("entry ", i, ": analytic=", analytic.data()[i],
         " numeric=", numeric);
    CHECK(rel_err(analytic.data()[i], numeric) < tol);
  }
}

Matrix<double> random_logits(int classes, int n, Rng& rng) {
  Matrix<double> m(classes, n);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = rng.uniform(-1.5, 1.5);
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("gradients");

TEST_CASE("external pretraining loss gradient (2-class cross-entropy)") {
  Rng rng(101);
  const int n = 48;  // 4x4x3 voxels
  Matrix<double> logits = random_logits(2, n, rng);
  std::vector<std::uint8_t> labels(n);
  std::vector<int> targets(n);
  for (int j = 0; j < n; ++j) {
    labels[j] = static_cast<std::uint8_t>(rng.uniform_int(2));
    targets[j] = labels[j];
  }
  Vector<double> w = Vector<double>::Ones(n);

  auto ce = loss::softmax_ce_grad(logits, targets, w, double(n));
  double value = ce.weighted_sum / n;
  // consistency with the probability-level definition
  CHECK(rel_err(value, loss::loss_external_pretrain(
                           nn::softmax_columns(logits), labels)) < 1e-12);
  auto eval = [&] {
    return loss::loss_external_pretrain(nn::softmax_columns(logits), labels);
  };
  check_gradient(logits, ce.dlogits, eval, 1e-4, 1e-4);
}

TEST_CASE("attention-weighted real loss gradient") {
  Rng rng(102);
  const int n = 48;
  Matrix<double> logits = random_logits(3, n, rng);
  std::vector<std::uint8_t> injury(n), weights(n), pseudo(n);
  for (int j = 0; j < n; ++j) {
    injury[j] = rng.uniform() < 0.25 ? 1 : 0;
    weights[j] = rng.uniform() < 0.7 ? 1 : 0;
  }
  // pseudo labels from the current probabilities (annotation overrides)
  Matrix<double> probs = nn::softmax_columns(logits);
  pseudo = loss::reestimate_real_pseudo(probs, injury);

  std::vector<int> targets(n);
  Vector<double> w(n);
  double norm = 0;
  for (int j = 0; j < n; ++j) {
    targets[j] = injury[j] ? vol::kInjury : pseudo[j];
    w(j) = weights[j];
    norm += weights[j];
  }
  auto ce = loss::softmax_ce_grad(logits, targets, w, norm);
  CHECK(rel_err(ce.weighted_sum / norm,
                loss::loss_real(probs, injury, pseudo, weights)) < 1e-12);

  // hold the pseudo labels fixed while differentiating, as during a round
  auto eval = [&] {
    return loss::loss_real(nn::softmax_columns(logits), injury, pseudo,
                           weights);
  };
  check_gradient(logits, ce.dlogits, eval, 1e-4, 1e-4);
}

TEST_CASE("synthetic-phase loss gradient") {
  Rng rng(103);
  const int n = 48;
  Matrix<double> logits = random_logits(3, n, rng);
  std::vector<std::uint8_t> ps(n), pi(n), weights(n);
  for (int j = 0; j < n; ++j) {
    double u = rng.uniform();
    ps[j] = u < 0.3 ? 1 : 0;
    pi[j] = (u >= 0.3 && u < 0.5) ? 1 : 0;
    weights[j] = rng.uniform() < 0.8 ? 1 : 0;
  }
  std::vector<int> targets(n);
  Vector<double> w(n);
  double norm = 0;
  for (int j = 0; j < n; ++j) {
    targets[j] = pi[j] ? vol::kInjury : ps[j] ? vol::kSpleen : vol::kBackground;
    w(j) = weights[j];
    norm += weights[j];
  }
  auto ce = loss::softmax_ce_grad(logits, targets, w, norm);
  auto eval = [&] {
    return loss::loss_synthetic(nn::softmax_columns(logits), ps, pi, weights);
  };
  CHECK(rel_err(ce.weighted_sum / norm, eval()) < 1e-12);
  check_gradient(logits, ce.dlogits, eval, 1e-4, 1e-4);
}

TEST_CASE("external joint loss gradient") {
  Rng rng(104);
  const int n = 48;
  Matrix<double> logits = random_logits(3, n, rng);
  std::vector<std::uint8_t> labels(n);
  std::vector<int> targets(n);
  for (int j = 0; j < n; ++j) {
    labels[j] = static_cast<std::uint8_t>(rng.uniform_int(2));
    targets[j] = labels[j] ? vol::kSpleen : vol::kBackground;
  }
  Vector<double> w = Vector<double>::Ones(n);
  auto ce = loss::softmax_ce_grad(logits, targets, w, double(n));
  auto eval = [&] {
    return loss::loss_external_joint(nn::softmax_columns(logits), labels);
  };
  CHECK(rel_err(ce.weighted_sum / n, eval()) < 1e-12);
  check_gradient(logits, ce.dlogits, eval, 1e-4, 1e-4);
}

TEST_CASE("adversarial loss gradient with respect to the critic logit") {
  Rng rng(105);
  for (int trial = 0; trial < 20; ++trial) {
    double z = rng.uniform(-3.0, 3.0);
    double d = gan::sigmoid(z);
    // generator term -log D: d/dz = sigmoid(z) - 1
    {
      double analytic = d - 1.0;
      double h = 1e-5;
      double up = -std::log(gan::sigmoid(z + h));
      double down = -std::log(gan::sigmoid(z - h));
      CHECK(rel_err(analytic, (up - down) / (2 * h)) < 1e-4);
    }
    // critic fake term -log(1 - D): d/dz = sigmoid(z)
    {
      double analytic = d;
      double h = 1e-5;
      double up = -std::log(1.0 - gan::sigmoid(z + h));
      double down = -std::log(1.0 - gan::sigmoid(z - h));
      CHECK(rel_err(analytic, (up - down) / (2 * h)) < 1e-4);
    }
  }
}

TEST_CASE("cycle loss L1 subgradient away from zero") {
  Rng rng(106);
  const int n = 25;
  Matrix<double> rec(1, n), target(1, n);
  for (int j = 0; j < n; ++j) {
    target(0, j) = rng.uniform(-1, 1);
    // keep |diff| away from the kink so central differences are valid
    rec(0, j) = target(0, j) + (rng.uniform() < 0.5 ? -1 : 1) *
                                   rng.uniform(0.05, 0.5);
  }
  Matrix<double> analytic(1, n);
  for (int j = 0; j < n; ++j)
    analytic(0, j) =
        (rec(0, j) > target(0, j) ? 1.0 : -1.0) / static_cast<double>(n);
  auto eval = [&] { return (rec - target).cwiseAbs().sum() / n; };
  check_gradient(rec, analytic, eval, 1e-5, 1e-4);
}

TEST_CASE("micro-backbone end-to-end gradient (conv-relu-conv + loss)") {
  Rng rng(107);
  nn::Conv2d<double> c1("c1", 1, 3, 3, rng);
  nn::Relu<double> r1;
  nn::Conv2d<double> c2("c2", 3, 2, 1, rng);

  Tensor<double> x(1, 6, 6);
  for (Eigen::Index i = 0; i < x.m.size(); ++i)
    x.m.data()[i] = rng.uniform(0, 1);
  std::vector<int> targets(36);
  std::vector<std::uint8_t> tmask(36);
  for (int j = 0; j < 36; ++j) targets[j] = int(rng.uniform_int(2));
  Vector<double> w(36);
  for (int j = 0; j < 36; ++j) w(j) = rng.uniform() < 0.8 ? 1.0 : 0.0;
  double norm = w.sum();

  auto eval = [&] {
    Tensor<double> h = r1.forward(c1.forward(x));
    Tensor<double> logits = c2.forward(h);
    auto ce = loss::softmax_ce_grad(logits.m, targets, w, norm);
    return ce.weighted_sum / norm;
  };

  // analytic gradients for every parameter
  c1.weight().zero_grad();
  c1.bias().zero_grad();
  c2.weight().zero_grad();
  c2.bias().zero_grad();
  Tensor<double> h = r1.forward(c1.forward(x));
  Tensor<double> logits = c2.forward(h);
  auto ce = loss::softmax_ce_grad(logits.m, targets, w, norm);
  Tensor<double> dlogits = logits;
  dlogits.m = ce.dlogits;
  c1.backward(r1.backward(c2.backward(dlogits)));

  check_gradient(c1.weight().value, c1.weight().grad, eval, 1e-5, 1e-3);
  check_gradient(c1.bias().value, c1.bias().grad, eval, 1e-5, 1e-3);
  check_gradient(c2.weight().value, c2.weight().grad, eval, 1e-5, 1e-3);
  check_gradient(c2.bias().value, c2.bias().grad, eval, 1e-5, 1e-3);
}

TEST_CASE("tiny translator: cycle + adversarial gradients through networks") {
  Rng rng(108);
  // < 100 parameters: width 1 generator with 1 residual block
  gan::Generator<double> g("g", 1, 1, rng);
  gan::Generator<double> h("h", 1, 1, rng);
  gan::Critic<double> critic("d", 1, rng);
  // zero biases park relu kinks exactly at the evaluation point (dead
  // patches make conv outputs exactly 0); check at a differentiable point
  for (auto* net_params : {&g, &h}) {
    for (auto* p : net_params->params())
      if (p->name.find("bias") != std::string::npos)
        for (Eigen::Index i = 0; i < p->value.size(); ++i)
          p->value.data()[i] = rng.uniform(-0.05, 0.05);
  }
  for (auto* p : critic.params())
    if (p->name.find("bias") != std::string::npos)
      for (Eigen::Index i = 0; i < p->value.size(); ++i)
        p->value.data()[i] = rng.uniform(-0.05, 0.05);

  Tensor<double> a(1, 8, 8);
  for (Eigen::Index i = 0; i < a.m.size(); ++i)
    a.m.data()[i] = rng.uniform(-0.9, 0.9);

  const double lambda = 10.0;
  auto eval = [&] {
    Tensor<double> fake = g.forward(a);
    Tensor<double> rec = h.forward(fake);
    double cyc = (rec.m - a.m).cwiseAbs().mean();
    double z = critic.forward(fake);
    return -std::log(gan::sigmoid(z)) + lambda * cyc;
  };

  for (auto* p : g.params()) p->zero_grad();
  for (auto* p : h.params()) p->zero_grad();
  for (auto* p : critic.params()) p->zero_grad();
  {
    Tensor<double> fake = g.forward(a);
    Tensor<double> rec = h.forward(fake);
    Tensor<double> dsign = rec;
    for (Eigen::Index i = 0; i < dsign.m.size(); ++i) {
      double d = rec.m.data()[i] - a.m.data()[i];
      dsign.m.data()[i] =
          lambda * (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) / double(a.m.size());
    }
    Tensor<double> dfake_cycle = h.backward(dsign);
    double z = critic.forward(fake);
    Tensor<double> dfake_adv = critic.backward(gan::sigmoid(z) - 1.0);
    dfake_cycle.m += dfake_adv.m;
    g.backward(dfake_cycle);
  }

  int n_params = 0;
  for (auto* p : g.params()) n_params += int(p->value.size());
  CHECK(n_params < 100);

  for (auto* p : g.params())
    check_gradient(p->value, p->grad, eval, 1e-5, 1e-3);
  for (auto* p : h.params())
    check_gradient(p->value, p->grad, eval, 1e-5, 1e-3);
}

TEST_CASE("attention annihilation: zero-weight voxels cannot move the loss") {
  Rng rng(109);
  const int n = 30;
  Matrix<double> logits = random_logits(3, n, rng);
  std::vector<std::uint8_t> injury(n, 0), weights(n), pseudo(n, 0);
  for (int j = 0; j < n; ++j) weights[j] = j % 3 == 0 ? 1 : 0;
  Matrix<double> probs = nn::softmax_columns(logits);
  pseudo = loss::reestimate_real_pseudo(probs, injury);
  double before = loss::loss_real(probs, injury, pseudo, weights);
  // scramble probabilities at every zero-weight voxel
  Matrix<double> scrambled = probs;
  for (int j = 0; j < n; ++j)
    if (!weights[j]) {
      scrambled(0, j) = 0.98;
      scrambled(1, j) = 0.01;
      scrambled(2, j) = 0.01;
    }
  double after = loss::loss_real(scrambled, injury, pseudo, weights);
  CHECK(before == doctest::Approx(after).epsilon(1e-12));
}

TEST_SUITE_END();
