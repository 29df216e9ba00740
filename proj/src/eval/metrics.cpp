#include "easeg/eval/metrics.hpp"

namespace easeg::eval {

double dsc_flat(const std::uint8_t* pred, const std::uint8_t* truth,
                std::size_t n) {
  std::size_t p = 0, t = 0, both = 0;
  for (std::size_t i = 0; i < n; ++i) {
    p += pred[i] != 0;
    t += truth[i] != 0;
    both += (pred[i] != 0) & (truth[i] != 0);
  }
  if (p + t == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + t);
}

double dsc(const GridB& pred, const GridB& truth) {
  vol::require_aligned(pred.shape(), truth.shape(), "dsc");
  std::size_t p = 0, t = 0, both = 0;
  for (int z = 0; z < pred.shape().nz; ++z) {
    const auto& ps = pred.slice(z);
    const auto& ts = truth.slice(z);
    for (Eigen::Index i = 0; i < ps.size(); ++i) {
      bool pv = ps.data()[i] != 0, tv = ts.data()[i] != 0;
      p += pv;
      t += tv;
      both += pv & tv;
    }
  }
  if (p + t == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + t);
}

double attention_recall(const GridB& attention, const GridB& injury_truth) {
  vol::require_aligned(attention.shape(), injury_truth.shape(),
                       "attention_recall");
  std::size_t truth = 0, covered = 0;
  for (int z = 0; z < attention.shape().nz; ++z) {
    const auto& as = attention.slice(z);
    const auto& ts = injury_truth.slice(z);
    for (Eigen::Index i = 0; i < as.size(); ++i) {
      if (ts.data()[i] != 0) {
        ++truth;
        covered += as.data()[i] != 0;
      }
    }
  }
  if (truth == 0)
    throw std::invalid_argument(
        "attention_recall: undefined for an empty injury truth mask");
  return static_cast<double>(covered) / static_cast<double>(truth);
}

}  // namespace easeg::eval
