#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "easeg/vol/volume.hpp"

namespace easeg::vol {

struct Window {
  double lo = -125.0;
  double hi = 275.0;
};

// Clip to [lo, hi] then map linearly onto [0, 255]. Rejects non-finite
// voxels. Shape, spacing, phase, patient id are preserved.
Volume window_and_normalize(const Volume& v, Window window = {});

struct SliceBatch {
  std::vector<ImageF> images;
  std::vector<ImageB> labels;
  std::vector<ImageB> weights;  // attention slices, values in {0,1}
  std::vector<PhaseTag> phases;
  std::vector<int> slice_indices;  // axial index in the source volume

  std::size_t size() const { return images.size(); }
};

// Training-time selection: exactly the axial slices where `target_class`
// (stored value in l.space) has at least one voxel. Weights default to 1.
SliceBatch extract_labeled_slices(const Volume& v, const LabelMap& l,
                                  int target_class);

// Test-time path: every slice, no filtering.
SliceBatch all_slices(const Volume& v);

struct Case {
  Volume volume;
  LabelMap labels;
};

// Patient-disjoint deterministic split. Returns index lists into `cases`.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_by_patient(const std::vector<Case>& cases, double train_fraction,
                 std::uint64_t seed);

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_patient_ids(const std::vector<std::string>& patient_ids,
                  double train_fraction, std::uint64_t seed);

}  // namespace easeg::vol
