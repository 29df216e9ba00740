#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "easeg/nn/layers.hpp"
#include "easeg/vol/volume.hpp"

namespace easeg::loss {

using nn::Matrix;
using nn::Vector;

// Probabilities below this are clamped before the log so saturated
// predictions stay finite.
inline constexpr double kLogClamp = 1e-8;

template <typename T>
inline T clamped_log(T p) {
  return std::log(std::max(p, static_cast<T>(kLogClamp)));
}

struct LossWeights {
  double alpha = 0.5;  // real vs synthetic balance, in [0,1]
  double beta = 0.2;   // external weight, >= 0

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw std::invalid_argument("alpha must lie in [0,1]");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  }
};

// Counters surfaced in logs; zero-weight batches are legal but worth
// noticing.
struct LossStats {
  long zero_weight_batches = 0;
};

// ---------------------------------------------------------------------------
// Probability-level objectives. `probs` is (classes x voxels) with columns
// on the simplex. Labels are stored values of the stated label space.
// ---------------------------------------------------------------------------

// External pretraining objective: plain cross-entropy over {background,
// spleen}, voxel-mean normalized.
template <typename T>
T loss_external_pretrain(const Matrix<T>& probs,
                         const std::vector<std::uint8_t>& labels) {
  if (probs.rows() != 2)
    throw std::invalid_argument("loss_external_pretrain: expected 2 classes");
  if (static_cast<Eigen::Index>(labels.size()) != probs.cols())
    throw std::invalid_argument("loss_external_pretrain: size mismatch");
  T sum = 0;
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    if (labels[j] > 1)
      throw std::invalid_argument(
          "loss_external_pretrain: label outside the external space");
    sum -= clamped_log(probs(labels[j], j));
  }
  return sum / static_cast<T>(probs.cols());
}

// Pseudo-label re-estimation for annotated (real) phases: injury voxels
// keep the annotation; elsewhere spleen wins only on a strict p_s > p_b.
// Returns union-space classes {0 background, 1 spleen, 2 injury}.
template <typename T>
std::vector<std::uint8_t> reestimate_real_pseudo(
    const Matrix<T>& union_probs, const std::vector<std::uint8_t>& injury) {
  if (union_probs.rows() != 3)
    throw std::invalid_argument(
        "reestimate_real_pseudo: expected union-space probabilities");
  if (static_cast<Eigen::Index>(injury.size()) != union_probs.cols())
    throw std::invalid_argument("reestimate_real_pseudo: size mismatch");
  std::vector<std::uint8_t> out(injury.size());
  for (Eigen::Index j = 0; j < union_probs.cols(); ++j) {
    if (injury[j]) {
      out[j] = vol::kInjury;
    } else {
      out[j] = union_probs(vol::kSpleen, j) > union_probs(vol::kBackground, j)
                   ? vol::kSpleen
                   : vol::kBackground;
    }
  }
  return out;
}

// Attention-weighted cross-entropy on real phases. `pseudo` holds the
// merged union-space targets from reestimate_real_pseudo; `injury` repeats
// the annotation so the precondition (annotation overrides) is checkable.
// Normalized by the total attention weight; 0 when no voxel has weight.
template <typename T>
T loss_real(const Matrix<T>& union_probs,
            const std::vector<std::uint8_t>& injury,
            const std::vector<std::uint8_t>& pseudo,
            const std::vector<std::uint8_t>& weights,
            LossStats* stats = nullptr) {
  if (union_probs.rows() != 3)
    throw std::invalid_argument("loss_real: expected union-space probabilities");
  const auto n = union_probs.cols();
  if (static_cast<Eigen::Index>(injury.size()) != n ||
      static_cast<Eigen::Index>(pseudo.size()) != n ||
      static_cast<Eigen::Index>(weights.size()) != n)
    throw std::invalid_argument("loss_real: size mismatch");
  T sum = 0, wsum = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    int target = injury[j] ? vol::kInjury : pseudo[j];
    if (injury[j] == 0 && target == vol::kInjury)
      throw std::invalid_argument(
          "loss_real: pseudo label assigns injury to an unannotated voxel");
    T w = static_cast<T>(weights[j]);
    wsum += w;
    sum -= w * clamped_log(union_probs(target, j));
  }
  if (wsum == T(0)) {
    if (stats) ++stats->zero_weight_batches;
    return T(0);
  }
  return sum / wsum;
}

// Self-learning objective on synthetic phases: same weighted form with
// pseudo labels for every class. Spleen and injury pseudo masks must be
// disjoint (the background indicator is 1 - s - i).
template <typename T>
T loss_synthetic(const Matrix<T>& union_probs,
                 const std::vector<std::uint8_t>& pseudo_spleen,
                 const std::vector<std::uint8_t>& pseudo_injury,
                 const std::vector<std::uint8_t>& weights,
                 LossStats* stats = nullptr) {
  if (union_probs.rows() != 3)
    throw std::invalid_argument(
        "loss_synthetic: expected union-space probabilities");
  const auto n = union_probs.cols();
  if (static_cast<Eigen::Index>(pseudo_spleen.size()) != n ||
      static_cast<Eigen::Index>(pseudo_injury.size()) != n ||
      static_cast<Eigen::Index>(weights.size()) != n)
    throw std::invalid_argument("loss_synthetic: size mismatch");
  T sum = 0, wsum = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (pseudo_spleen[j] && pseudo_injury[j])
      throw std::invalid_argument(
          "loss_synthetic: voxel labeled both spleen and injury");
    int target = pseudo_injury[j] ? vol::kInjury
                 : pseudo_spleen[j] ? vol::kSpleen
                                    : vol::kBackground;
    T w = static_cast<T>(weights[j]);
    wsum += w;
    sum -= w * clamped_log(union_probs(target, j));
  }
  if (wsum == T(0)) {
    if (stats) ++stats->zero_weight_batches;
    return T(0);
  }
  return sum / wsum;
}

// External loss during joint training: unweighted, voxel-mean normalized,
// reads only the spleen and background channels of the union-space map.
// External labels are stored values of the external space {0,1}.
template <typename T>
T loss_external_joint(const Matrix<T>& union_probs,
                      const std::vector<std::uint8_t>& labels_ext) {
  if (union_probs.rows() != 3)
    throw std::invalid_argument(
        "loss_external_joint: expected union-space probabilities");
  if (static_cast<Eigen::Index>(labels_ext.size()) != union_probs.cols())
    throw std::invalid_argument("loss_external_joint: size mismatch");
  T sum = 0;
  for (Eigen::Index j = 0; j < union_probs.cols(); ++j) {
    if (labels_ext[j] > 1)
      throw std::invalid_argument(
          "loss_external_joint: injury labels are not defined on external data");
    int target = labels_ext[j] ? vol::kSpleen : vol::kBackground;
    sum -= clamped_log(union_probs(target, j));
  }
  return sum / static_cast<T>(union_probs.cols());
}

// Weighted total: alpha*L_real + (1-alpha)*L_syn + beta*L_ext.
template <typename T>
T loss_total(T l_real, T l_syn, T l_ext, const LossWeights& weights) {
  weights.validate();
  return static_cast<T>(weights.alpha) * l_real +
         static_cast<T>(1.0 - weights.alpha) * l_syn +
         static_cast<T>(weights.beta) * l_ext;
}

// ---------------------------------------------------------------------------
// Fused softmax + cross-entropy used by the optimization path. Target -1
// marks an ignored voxel (zero weight). The normalizer is supplied by the
// caller because Eq-style losses normalize over the whole sub-batch, not
// per slice.
// ---------------------------------------------------------------------------

template <typename T>
struct CeResult {
  T weighted_sum = 0;    // -sum_j w_j log p(t_j)  (caller divides)
  Matrix<T> dlogits;     // gradient of weighted_sum / normalizer
};

template <typename T>
CeResult<T> softmax_ce_grad(const Matrix<T>& logits,
                            const std::vector<int>& targets,
                            const Vector<T>& weights, T normalizer) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.cols() ||
      weights.size() != logits.cols())
    throw std::invalid_argument("softmax_ce_grad: size mismatch");
  Matrix<T> probs = nn::softmax_columns(logits);
  CeResult<T> res;
  res.dlogits = Matrix<T>::Zero(logits.rows(), logits.cols());
  const T inv_norm = normalizer > T(0) ? T(1) / normalizer : T(0);
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const int t = targets[j];
    const T w = weights(j);
    if (t < 0 || w == T(0)) continue;
    res.weighted_sum -= w * clamped_log(probs(t, j));
    res.dlogits.col(j) = (w * inv_norm) * probs.col(j);
    res.dlogits(t, j) -= w * inv_norm;
  }
  return res;
}

}  // namespace easeg::loss
