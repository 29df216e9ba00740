#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "easeg/nn/layers.hpp"

namespace easeg::nn {

// SGD with classic momentum: v <- mu*v - lr*g; theta <- theta + v.
template <typename T>
class SgdMomentum {
 public:
  explicit SgdMomentum(double momentum = 0.9) : momentum_(momentum) {}

  void step(const std::vector<Param<T>*>& params, double lr) {
    for (auto* p : params) {
      auto& v = velocity_[p->name];
      if (v.size() == 0) v = Matrix<T>::Zero(p->value.rows(), p->value.cols());
      v = static_cast<T>(momentum_) * v - static_cast<T>(lr) * p->grad;
      p->value += v;
    }
  }

  std::map<std::string, Matrix<T>>& state() { return velocity_; }
  const std::map<std::string, Matrix<T>>& state() const { return velocity_; }

 private:
  double momentum_;
  std::map<std::string, Matrix<T>> velocity_;
};

template <typename T>
class Adam {
 public:
  Adam(double beta1 = 0.5, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Param<T>*>& params, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (auto* p : params) {
      auto& s = state_[p->name];
      if (s.m.size() == 0) {
        s.m = Matrix<T>::Zero(p->value.rows(), p->value.cols());
        s.v = Matrix<T>::Zero(p->value.rows(), p->value.cols());
      }
      s.m = static_cast<T>(beta1_) * s.m + static_cast<T>(1 - beta1_) * p->grad;
      s.v = (static_cast<T>(beta2_) * s.v.array() +
             static_cast<T>(1 - beta2_) * p->grad.array().square())
                .matrix();
      auto mhat = (s.m.array() / static_cast<T>(bc1)).eval();
      auto vhat = (s.v.array() / static_cast<T>(bc2)).eval();
      p->value.array() -=
          static_cast<T>(lr) * mhat / (vhat.sqrt() + static_cast<T>(eps_));
    }
  }

 private:
  struct Moments {
    Matrix<T> m, v;
  };
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace easeg::nn
