#pragma once

#include <cmath>
#include <stdexcept>

namespace easeg::nn {

// poly policy: base_lr * (1 - step/total)^power
inline double poly_lr(long step, long total_steps, double base_lr,
                      double power = 0.9) {
  if (step < 0 || step > total_steps)
    throw std::invalid_argument("poly_lr: step outside [0, total_steps]");
  if (total_steps <= 0) throw std::invalid_argument("poly_lr: empty schedule");
  return base_lr *
         std::pow(1.0 - static_cast<double>(step) / total_steps, power);
}

// linear decay to zero, used by the translation stage
inline double linear_lr(long step, long total_steps, double base_lr) {
  if (step < 0 || step > total_steps)
    throw std::invalid_argument("linear_lr: step outside [0, total_steps]");
  return base_lr * (1.0 - static_cast<double>(step) / total_steps);
}

}  // namespace easeg::nn
