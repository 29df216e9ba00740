#include <doctest.h>

#include <cmath>

#include "easeg/core/rng.hpp"
#include "easeg/loss/losses.hpp"

using namespace easeg;
using nn::Matrix;

namespace {

Matrix<double> one_hot(const std::vector<int>& classes, int n_classes) {
  Matrix<double> p = Matrix<double>::Zero(n_classes, classes.size());
  for (std::size_t j = 0; j < classes.size(); ++j) p(classes[j], j) = 1.0;
  return p;
}

Matrix<double> uniform_probs(int n_classes, int n) {
  return Matrix<double>::Constant(n_classes, n, 1.0 / n_classes);
}

}  // namespace

TEST_SUITE_BEGIN("losses");

TEST_CASE("external pretraining loss examples") {
  SUBCASE("one-hot correct predictions give ~0") {
    std::vector<std::uint8_t> y = {0, 1, 1, 0};
    Matrix<double> p = one_hot({0, 1, 1, 0}, 2);
    CHECK(loss::loss_external_pretrain(p, y) ==
          doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("uniform 2-class probabilities cost ln 2 per voxel") {
    std::vector<std::uint8_t> y = {0, 1, 0};
    CHECK(loss::loss_external_pretrain(uniform_probs(2, 3), y) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("a single voxel with p_true = 0.25 costs -ln 0.25") {
    Matrix<double> p(2, 1);
    p << 0.75, 0.25;
    std::vector<std::uint8_t> y = {1};
    CHECK(loss::loss_external_pretrain(p, y) ==
          doctest::Approx(-std::log(0.25)).epsilon(1e-12));
    CHECK(loss::loss_external_pretrain(p, y) ==
          doctest::Approx(1.3863).epsilon(1e-4));
  }
  SUBCASE("labels outside the external space are rejected") {
    std::vector<std::uint8_t> y = {2};
    Matrix<double> p = uniform_probs(2, 1);
    CHECK_THROWS_AS(loss::loss_external_pretrain(p, y), std::invalid_argument);
  }
}

TEST_CASE("pseudo-label re-estimation on real phases") {
  Matrix<double> p(3, 3);
  // columns: (p_b, p_s, p_i)
  p << 0.4, 0.5, 0.1,   // background row
       0.6, 0.5, 0.2,   // spleen row
       0.0, 0.0, 0.7;   // injury row
  SUBCASE("non-injury voxel with p_s > p_b becomes spleen") {
    std::vector<std::uint8_t> injury = {0, 0, 0};
    auto out = loss::reestimate_real_pseudo(p, injury);
    CHECK(out[0] == vol::kSpleen);   // 0.6 > 0.4
  }
  SUBCASE("exact tie goes to background (strict inequality)") {
    std::vector<std::uint8_t> injury = {0, 0, 0};
    auto out = loss::reestimate_real_pseudo(p, injury);
    CHECK(out[1] == vol::kBackground);  // 0.5 == 0.5
  }
  SUBCASE("annotated injury voxels always stay injury") {
    std::vector<std::uint8_t> injury = {1, 1, 1};
    auto out = loss::reestimate_real_pseudo(p, injury);
    for (auto v : out) CHECK(v == vol::kInjury);
  }
  SUBCASE("re-estimation never alters annotated injury voxels (property)") {
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
      int n = 20;
      Matrix<double> probs(3, n);
      std::vector<std::uint8_t> injury(n);
      for (int j = 0; j < n; ++j) {
        double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
        double s = a + b + c;
        probs(0, j) = a / s;
        probs(1, j) = b / s;
        probs(2, j) = c / s;
        injury[j] = rng.uniform() < 0.3 ? 1 : 0;
      }
      auto out = loss::reestimate_real_pseudo(probs, injury);
      for (int j = 0; j < n; ++j) {
        if (injury[j]) CHECK(out[j] == vol::kInjury);
        else CHECK(out[j] != vol::kInjury);
      }
    }
  }
}

TEST_CASE("attention-weighted real loss examples") {
  SUBCASE("all-zero attention annihilates the loss and counts a warning") {
    Matrix<double> p = uniform_probs(3, 4);
    std::vector<std::uint8_t> injury = {1, 0, 1, 0};
    std::vector<std::uint8_t> pseudo = {2, 0, 2, 1};
    std::vector<std::uint8_t> w = {0, 0, 0, 0};
    loss::LossStats stats;
    CHECK(loss::loss_real(p, injury, pseudo, w, &stats) == 0.0);
    CHECK(stats.zero_weight_batches == 1);
  }
  SUBCASE("all-one attention with one-hot correct predictions gives 0") {
    std::vector<std::uint8_t> injury = {1, 0, 0};
    std::vector<std::uint8_t> pseudo = {2, 1, 0};
    Matrix<double> p = one_hot({2, 1, 0}, 3);
    std::vector<std::uint8_t> w = {1, 1, 1};
    CHECK(loss::loss_real(p, injury, pseudo, w) ==
          doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("two voxels, w=(1,0), injury voxel at p_i=0.5 costs ln 2") {
    Matrix<double> p(3, 2);
    p << 0.25, 0.3, 0.25, 0.3, 0.5, 0.4;
    std::vector<std::uint8_t> injury = {1, 0};
    std::vector<std::uint8_t> pseudo = {2, 0};
    std::vector<std::uint8_t> w = {1, 0};
    CHECK(loss::loss_real(p, injury, pseudo, w) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("synthetic-phase loss examples") {
  SUBCASE("pseudo labels equal to a one-hot prediction cost 0") {
    Matrix<double> p = one_hot({1, 2, 0}, 3);
    std::vector<std::uint8_t> ps = {1, 0, 0};
    std::vector<std::uint8_t> pi = {0, 1, 0};
    std::vector<std::uint8_t> w = {1, 1, 1};
    CHECK(loss::loss_synthetic(p, ps, pi, w) ==
          doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("all-zero attention gives 0") {
    Matrix<double> p = uniform_probs(3, 2);
    std::vector<std::uint8_t> ps = {1, 0}, pi = {0, 1}, w = {0, 0};
    CHECK(loss::loss_synthetic(p, ps, pi, w) == 0.0);
  }
  SUBCASE("uniform 3-class probabilities cost ln 3") {
    Matrix<double> p = uniform_probs(3, 4);
    std::vector<std::uint8_t> ps = {1, 0, 0, 0}, pi = {0, 1, 0, 0},
                              w = {1, 1, 1, 1};
    CHECK(loss::loss_synthetic(p, ps, pi, w) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
  }
  SUBCASE("a voxel labeled both spleen and injury is rejected") {
    Matrix<double> p = uniform_probs(3, 1);
    std::vector<std::uint8_t> ps = {1}, pi = {1}, w = {1};
    CHECK_THROWS_AS(loss::loss_synthetic(p, ps, pi, w), std::invalid_argument);
  }
}

TEST_CASE("external joint loss examples") {
  SUBCASE("one-hot correct costs 0") {
    Matrix<double> p = one_hot({1, 0}, 3);
    std::vector<std::uint8_t> y = {1, 0};
    CHECK(loss::loss_external_joint(p, y) ==
          doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("uniform over the union classes costs ln 3 on spleen voxels") {
    Matrix<double> p = uniform_probs(3, 3);
    std::vector<std::uint8_t> y = {1, 1, 1};
    CHECK(loss::loss_external_joint(p, y) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
  }
  SUBCASE("mixed 3-voxel batch matches a direct summation oracle") {
    Matrix<double> p(3, 3);
    p << 0.5, 0.2, 0.3,
         0.3, 0.7, 0.3,
         0.2, 0.1, 0.4;
    std::vector<std::uint8_t> y = {0, 1, 1};
    double oracle = -(std::log(0.5) + std::log(0.7) + std::log(0.3)) / 3.0;
    CHECK(loss::loss_external_joint(p, y) ==
          doctest::Approx(oracle).epsilon(1e-12));
  }
  SUBCASE("injury labels on external data are rejected") {
    Matrix<double> p = uniform_probs(3, 1);
    std::vector<std::uint8_t> y = {2};
    CHECK_THROWS_AS(loss::loss_external_joint(p, y), std::invalid_argument);
  }
}

TEST_CASE("weighted total loss") {
  SUBCASE("alpha = 1 removes the synthetic term") {
    CHECK(loss::loss_total(3.0, 100.0, 0.0, {1.0, 0.0}) ==
          doctest::Approx(3.0));
  }
  SUBCASE("published example: 0.5*2 + 0.5*4 + 0.2*5 = 4") {
    CHECK(loss::loss_total(2.0, 4.0, 5.0, {0.5, 0.2}) == doctest::Approx(4.0));
  }
  SUBCASE("beta = 0 reduces to the internal-only loss") {
    CHECK(loss::loss_total(2.0, 4.0, 123.0, {0.5, 0.0}) ==
          doctest::Approx(3.0));
  }
  SUBCASE("invalid weights are rejected") {
    CHECK_THROWS_AS(loss::loss_total(1.0, 1.0, 1.0, {1.5, 0.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(loss::loss_total(1.0, 1.0, 1.0, {0.5, -0.1}),
                    std::invalid_argument);
  }
}

TEST_CASE("total loss is affine in each component (sampled property)") {
  Rng rng(66);
  for (int trial = 0; trial < 40; ++trial) {
    double a = rng.uniform(), b = rng.uniform(0.0, 0.6);
    double lr = rng.uniform(0, 5), ls = rng.uniform(0, 5),
           le = rng.uniform(0, 5);
    double base = loss::loss_total(lr, ls, le, {a, b});
    double dr = rng.uniform(0, 2);
    CHECK(loss::loss_total(lr + dr, ls, le, {a, b}) ==
          doctest::Approx(base + a * dr).epsilon(1e-9));
    CHECK(loss::loss_total(lr, ls + dr, le, {a, b}) ==
          doctest::Approx(base + (1 - a) * dr).epsilon(1e-9));
    CHECK(loss::loss_total(lr, ls, le + dr, {a, b}) ==
          doctest::Approx(base + b * dr).epsilon(1e-9));
  }
}

TEST_SUITE_END();
