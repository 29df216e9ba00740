#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "easeg/core/types.hpp"
#include "easeg/loss/losses.hpp"

namespace easeg::gan {

enum class Direction { a_to_v, v_to_a };

struct AdversarialTerms {
  // What the generator minimizes (non-saturating form: -E[log D(fake)]).
  double gen_term = 0.0;
  // What the critic maximizes: E[log D(real)] + E[log(1 - D(fake))].
  double critic_term = 0.0;
};

// `critic` maps an image to a realness probability in (0,1).
template <typename CriticFn, typename T>
AdversarialTerms adversarial_loss(Direction, const std::vector<Image<T>>& real,
                                  const std::vector<Image<T>>& fake,
                                  CriticFn&& critic) {
  if (real.empty() || fake.empty())
    throw std::invalid_argument("adversarial_loss: empty batch");
  AdversarialTerms t;
  for (const auto& x : real)
    t.critic_term += loss::clamped_log(static_cast<double>(critic(x)));
  t.critic_term /= static_cast<double>(real.size());
  double fake_term = 0.0, gen = 0.0;
  for (const auto& x : fake) {
    double d = static_cast<double>(critic(x));
    fake_term += loss::clamped_log(1.0 - d);
    gen -= loss::clamped_log(d);
  }
  t.critic_term += fake_term / static_cast<double>(fake.size());
  t.gen_term = gen / static_cast<double>(fake.size());
  return t;
}

// E||h(g(x_A)) - x_A||_1 + E||g(h(x_V)) - x_V||_1, per-pixel mean L1.
template <typename G, typename H, typename T>
double cycle_loss(G&& g, H&& h, const std::vector<Image<T>>& batch_a,
                  const std::vector<Image<T>>& batch_v) {
  auto mean_l1 = [](const Image<T>& a, const Image<T>& b) {
    return (a.template cast<double>() - b.template cast<double>())
        .abs()
        .mean();
  };
  double total = 0.0;
  if (!batch_a.empty()) {
    double s = 0.0;
    for (const auto& x : batch_a) s += mean_l1(h(g(x)), x);
    total += s / static_cast<double>(batch_a.size());
  }
  if (!batch_v.empty()) {
    double s = 0.0;
    for (const auto& x : batch_v) s += mean_l1(g(h(x)), x);
    total += s / static_cast<double>(batch_v.size());
  }
  return total;
}

// L_{A->V} + L_{V->A} + lambda * L_cyc
inline double translation_objective(double adv_av, double adv_va, double cyc,
                                    double lambda) {
  if (!(lambda >= 0.0))
    throw std::invalid_argument("translation_objective: lambda must be >= 0");
  return adv_av + adv_va + lambda * cyc;
}

}  // namespace easeg::gan
