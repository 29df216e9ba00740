#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "easeg/core/types.hpp"

namespace easeg::vol {

enum class PhaseTag {
  arterial,
  venous,
  synthetic_arterial,
  synthetic_venous,
  external,
  external_translated,
};

const char* to_string(PhaseTag tag);
PhaseTag phase_from_string(const std::string& s);
bool is_synthetic(PhaseTag tag);
bool is_real_internal(PhaseTag tag);

// Which classes a label map may contain. Class indices are global:
// background = 0, spleen = 1, injury = 2. The internal space stores injury
// as value 1 on disk; to_union_class maps stored values to global indices.
enum class LabelSpace { internal, external, union_space };

const char* to_string(LabelSpace space);
LabelSpace label_space_from_string(const std::string& s);
int n_classes(LabelSpace space);
bool space_contains(LabelSpace space, int stored_value);
// stored label value -> {0 background, 1 spleen, 2 injury}
int to_union_class(LabelSpace space, int stored_value);

inline constexpr int kBackground = 0;
inline constexpr int kSpleen = 1;
inline constexpr int kInjury = 2;

struct Volume {
  GridF data;
  Spacing spacing;
  PhaseTag phase = PhaseTag::venous;
  std::string patient_id;

  const Shape3& shape() const { return data.shape(); }
};

struct LabelMap {
  GridB labels;
  LabelSpace space = LabelSpace::internal;

  const Shape3& shape() const { return labels.shape(); }
  void validate() const;  // every stored value must be a member of `space`
};

void require_aligned(const Shape3& a, const Shape3& b, const char* what);

// --- volume store -----------------------------------------------------------
//
// Layout: <case_id>/<phase>.vol (raw little-endian float32, x fastest, then
// y, then z) + <case_id>/<phase>.meta sidecar; label maps as <phase>.lbl
// (raw uint8) + <phase>.lbl.meta.

void write_volume(const std::filesystem::path& case_dir, const Volume& v);
Volume read_volume(const std::filesystem::path& case_dir, PhaseTag phase);
void write_labels(const std::filesystem::path& case_dir, PhaseTag phase,
                  const LabelMap& l, const std::string& patient_id);
LabelMap read_labels(const std::filesystem::path& case_dir, PhaseTag phase);
bool has_volume(const std::filesystem::path& case_dir, PhaseTag phase);
bool has_labels(const std::filesystem::path& case_dir, PhaseTag phase);

// Masks reuse the uint8 raw + sidecar format under an explicit filename.
void write_mask(const std::filesystem::path& path_base, const GridB& mask);
GridB read_mask(const std::filesystem::path& path_base);

// Optional ingestion path: minimal single-file NIfTI-1 reader (.nii,
// uncompressed; uint8/int16/int32/float32/float64, scl_slope applied).
Volume read_nifti(const std::filesystem::path& path);

}  // namespace easeg::vol
