#include "easeg/vol/preprocess.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "easeg/core/rng.hpp"

namespace easeg::vol {

Volume window_and_normalize(const Volume& v, Window window) {
  if (!(window.hi > window.lo))
    throw std::invalid_argument("window: hi must exceed lo");
  Volume out = v;
  const float lo = static_cast<float>(window.lo);
  const float hi = static_cast<float>(window.hi);
  const float scale = 255.0f / (hi - lo);
  const auto& shape = v.shape();
  for (int z = 0; z < shape.nz; ++z) {
    const auto& in = v.data.slice(z);
    if (!in.isFinite().all()) {
      std::ostringstream msg;
      msg << "window_and_normalize: non-finite intensity in slice " << z
          << " (patient " << v.patient_id << ")";
      throw std::invalid_argument(msg.str());
    }
    out.data.slice(z) = (in.min(hi).max(lo) - lo) * scale;
  }
  return out;
}

SliceBatch extract_labeled_slices(const Volume& v, const LabelMap& l,
                                  int target_class) {
  require_aligned(v.shape(), l.shape(), "extract_labeled_slices");
  if (!space_contains(l.space, target_class))
    throw std::invalid_argument("target class outside label space");
  SliceBatch batch;
  const auto& shape = v.shape();
  for (int z = 0; z < shape.nz; ++z) {
    const auto& lbl = l.labels.slice(z);
    if ((lbl == static_cast<std::uint8_t>(target_class)).any()) {
      batch.images.push_back(v.data.slice(z));
      batch.labels.push_back(lbl);
      batch.weights.push_back(ImageB::Constant(shape.ny, shape.nx, 1));
      batch.phases.push_back(v.phase);
      batch.slice_indices.push_back(z);
    }
  }
  return batch;
}

SliceBatch all_slices(const Volume& v) {
  SliceBatch batch;
  const auto& shape = v.shape();
  for (int z = 0; z < shape.nz; ++z) {
    batch.images.push_back(v.data.slice(z));
    batch.labels.push_back(ImageB::Zero(shape.ny, shape.nx));
    batch.weights.push_back(ImageB::Constant(shape.ny, shape.nx, 1));
    batch.phases.push_back(v.phase);
    batch.slice_indices.push_back(z);
  }
  return batch;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_patient_ids(const std::vector<std::string>& patient_ids,
                  double train_fraction, std::uint64_t seed) {
  // case index per patient, patients ordered by first appearance of their id
  std::map<std::string, std::vector<std::size_t>> by_patient;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < patient_ids.size(); ++i) {
    auto [it, inserted] = by_patient.try_emplace(patient_ids[i]);
    it->second.push_back(i);
    if (inserted) order.push_back(patient_ids[i]);
  }
  if (order.size() < 2)
    throw std::invalid_argument("split_by_patient: need at least 2 patients");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split_by_patient: fraction must be in (0,1)");

  std::sort(order.begin(), order.end());
  Rng rng(derive_seed(seed, "patient-split"));
  rng.shuffle(order);

  auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(order.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, order.size() - 1);

  std::vector<std::size_t> train, test;
  for (std::size_t p = 0; p < order.size(); ++p) {
    auto& dst = p < n_train ? train : test;
    for (auto idx : by_patient[order[p]]) dst.push_back(idx);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_by_patient(const std::vector<Case>& cases, double train_fraction,
                 std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(cases.size());
  for (const auto& c : cases) ids.push_back(c.volume.patient_id);
  return split_patient_ids(ids, train_fraction, seed);
}

}  // namespace easeg::vol
