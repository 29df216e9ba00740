#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "easeg/vol/volume.hpp"

namespace easeg::phantom {

struct Ellipsoid {
  std::array<double, 3> center{32, 32, 16};  // x, y, z voxels
  std::array<double, 3> radii{12, 13, 9};
};

struct InjuryBlob {
  std::array<double, 3> center{32, 32, 16};
  double radius = 3.0;
  bool exterior = false;  // boundary-exterior vs interior
};

struct PhaseMeans {
  double background = 30.0;
  double spleen = 95.0;
  double injury = 130.0;
};

// Everything needed to render one deterministic multi-phase case in HU.
struct PhantomSpec {
  Shape3 shape{64, 64, 32};
  Spacing spacing{1.5, 1.5, 3.0};
  Ellipsoid spleen;
  std::vector<InjuryBlob> injuries;
  PhaseMeans arterial{30.0, 115.0, 225.0};
  PhaseMeans venous{30.0, 95.0, 130.0};
  double noise_std = 10.0;
  // appearance curve on the [-125,275] window, 1.0 = identity; external
  // cases carry a different gamma to create the domain gap
  double gamma = 1.0;
  std::uint64_t seed = 0;
  bool lobulated = false;  // robustness option, off for acceptance runs
  std::string patient_id;

  void validate() const;
};

struct PhantomCase {
  vol::Volume arterial;
  vol::Volume venous;
  vol::LabelMap spleen;  // external space {background, spleen}
  vol::LabelMap injury;  // internal space {background, injury}
};

PhantomCase generate_case(const PhantomSpec& spec);

// Voxel membership helpers (also the shape oracles used by tests).
bool inside_ellipsoid(const Ellipsoid& e, int x, int y, int z);
bool inside_blob(const InjuryBlob& b, bool lobulated, int x, int y, int z);
long discretized_ball_count(const InjuryBlob& b, const Shape3& shape);

struct CorpusConfig {
  int n_internal = 20;
  int n_external = 10;
  std::uint64_t seed = 7;
  Shape3 shape{64, 64, 32};
  double noise_std = 9.0;
  double external_gamma = 1.30;
  bool lobulated = false;
};

// Internal cases keep only injury labels (per phase); external cases keep
// only spleen labels. Uses the volume-store layout; intensities are HU.
// Byte-identical for a fixed config.
void generate_corpus(const CorpusConfig& config,
                     const std::filesystem::path& out_dir);

// The per-case spec the corpus generator would draw (exposed for tests).
PhantomSpec internal_case_spec(const CorpusConfig& config, int index);
PhantomSpec external_case_spec(const CorpusConfig& config, int index);

}  // namespace easeg::phantom
