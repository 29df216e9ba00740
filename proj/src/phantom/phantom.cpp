#include "easeg/phantom/phantom.hpp"

#include <cmath>
#include <cstdio>

#include "easeg/core/rng.hpp"

namespace easeg::phantom {

namespace {

double normalized_radial(const Ellipsoid& e, double x, double y, double z) {
  double dx = (x - e.center[0]) / e.radii[0];
  double dy = (y - e.center[1]) / e.radii[1];
  double dz = (z - e.center[2]) / e.radii[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// the second lobe of a lobulated blob sits at a fixed offset
InjuryBlob second_lobe(const InjuryBlob& b) {
  InjuryBlob lobe = b;
  lobe.center[0] += 0.9 * b.radius;
  lobe.center[1] += 0.5 * b.radius;
  lobe.radius = 0.75 * b.radius;
  return lobe;
}

bool inside_ball(const InjuryBlob& b, int x, int y, int z) {
  double dx = x - b.center[0], dy = y - b.center[1], dz = z - b.center[2];
  return dx * dx + dy * dy + dz * dz <= b.radius * b.radius;
}

// gamma curve on the soft-tissue window, mapped back to HU
float apply_gamma(float hu, double gamma) {
  if (gamma == 1.0) return hu;
  double w = (static_cast<double>(hu) + 125.0) / 400.0;
  w = std::clamp(w, 0.0, 1.0);
  return static_cast<float>(400.0 * std::pow(w, gamma) - 125.0);
}

}  // namespace

bool inside_ellipsoid(const Ellipsoid& e, int x, int y, int z) {
  return normalized_radial(e, x, y, z) <= 1.0;
}

bool inside_blob(const InjuryBlob& b, bool lobulated, int x, int y, int z) {
  if (inside_ball(b, x, y, z)) return true;
  return lobulated && inside_ball(second_lobe(b), x, y, z);
}

long discretized_ball_count(const InjuryBlob& b, const Shape3& shape) {
  long count = 0;
  for (int z = 0; z < shape.nz; ++z)
    for (int y = 0; y < shape.ny; ++y)
      for (int x = 0; x < shape.nx; ++x) count += inside_ball(b, x, y, z);
  return count;
}

void PhantomSpec::validate() const {
  if (shape.nx < 8 || shape.ny < 8 || shape.nz < 1)
    throw std::invalid_argument("phantom: volume shape too small");
  for (int d = 0; d < 3; ++d) {
    double lo = spleen.center[d] - spleen.radii[d];
    double hi = spleen.center[d] + spleen.radii[d];
    double bound = d == 0 ? shape.nx : d == 1 ? shape.ny : shape.nz;
    if (lo < 0.0 || hi > bound - 1.0)
      throw std::invalid_argument("phantom: spleen outside volume bounds");
  }
  for (const auto& b : injuries) {
    for (int d = 0; d < 3; ++d) {
      double bound = d == 0 ? shape.nx : d == 1 ? shape.ny : shape.nz;
      if (b.center[d] - b.radius < 0.0 || b.center[d] + b.radius > bound - 1.0)
        throw std::invalid_argument("phantom: injury blob outside bounds");
    }
    // anatomy constraint: the blob must sit within or near the spleen
    double f = normalized_radial(spleen, b.center[0], b.center[1], b.center[2]);
    double min_radius =
        std::min({spleen.radii[0], spleen.radii[1], spleen.radii[2]});
    if ((f - 1.0) * min_radius > b.radius + 2.0)
      throw std::invalid_argument(
          "phantom: injury blob neither inside nor abutting the spleen");
  }
  if (noise_std < 0.0) throw std::invalid_argument("phantom: negative noise");
}

PhantomCase generate_case(const PhantomSpec& spec) {
  spec.validate();
  PhantomCase out;
  out.arterial.data = GridF(spec.shape);
  out.venous.data = GridF(spec.shape);
  out.arterial.spacing = out.venous.spacing = spec.spacing;
  out.arterial.phase = vol::PhaseTag::arterial;
  out.venous.phase = vol::PhaseTag::venous;
  out.arterial.patient_id = out.venous.patient_id = spec.patient_id;
  out.spleen.labels = GridB(spec.shape);
  out.spleen.space = vol::LabelSpace::external;
  out.injury.labels = GridB(spec.shape);
  out.injury.space = vol::LabelSpace::internal;

  Rng noise_a(derive_seed(spec.seed, "phantom-noise-arterial"));
  Rng noise_v(derive_seed(spec.seed, "phantom-noise-venous"));

  for (int z = 0; z < spec.shape.nz; ++z) {
    auto& sa = out.arterial.data.slice(z);
    auto& sv = out.venous.data.slice(z);
    auto& spl = out.spleen.labels.slice(z);
    auto& inj = out.injury.labels.slice(z);
    for (int y = 0; y < spec.shape.ny; ++y) {
      for (int x = 0; x < spec.shape.nx; ++x) {
        bool in_spleen = inside_ellipsoid(spec.spleen, x, y, z);
        bool in_injury = false;
        for (const auto& b : spec.injuries)
          if (inside_blob(b, spec.lobulated, x, y, z)) {
            in_injury = true;
            break;
          }
        spl(y, x) = in_spleen ? 1 : 0;
        inj(y, x) = in_injury ? 1 : 0;
        double ma = in_injury   ? spec.arterial.injury
                    : in_spleen ? spec.arterial.spleen
                                : spec.arterial.background;
        double mv = in_injury   ? spec.venous.injury
                    : in_spleen ? spec.venous.spleen
                                : spec.venous.background;
        float va = static_cast<float>(
            spec.noise_std > 0.0 ? noise_a.normal(ma, spec.noise_std) : ma);
        float vv = static_cast<float>(
            spec.noise_std > 0.0 ? noise_v.normal(mv, spec.noise_std) : mv);
        sa(y, x) = apply_gamma(va, spec.gamma);
        sv(y, x) = apply_gamma(vv, spec.gamma);
      }
    }
  }
  return out;
}

namespace {

PhantomSpec draw_case_spec(const CorpusConfig& config, std::uint64_t seed,
                           bool external, const std::string& patient_id) {
  Rng rng(seed);
  PhantomSpec spec;
  spec.shape = config.shape;
  spec.seed = seed;
  spec.noise_std = config.noise_std;
  spec.lobulated = config.lobulated;
  spec.patient_id = patient_id;
  spec.gamma = external ? config.external_gamma : 1.0;

  const double nx = config.shape.nx, ny = config.shape.ny,
               nz = config.shape.nz;
  spec.spleen.radii = {rng.uniform(0.17, 0.23) * nx, rng.uniform(0.18, 0.24) * ny,
                       rng.uniform(0.25, 0.32) * nz};
  // keep the ellipsoid well inside the volume even for tiny grids
  for (int d = 0; d < 3; ++d) {
    double bound = d == 0 ? nx : d == 1 ? ny : nz;
    spec.spleen.radii[d] = std::min(spec.spleen.radii[d], (bound - 3.0) / 2.0);
  }
  auto center_in = [&](int d, double margin) {
    double bound = d == 0 ? nx : d == 1 ? ny : nz;
    double lo = spec.spleen.radii[d] + margin;
    double hi = bound - 1.0 - margin - spec.spleen.radii[d];
    if (hi <= lo) return (lo + hi) / 2.0;
    return rng.uniform(lo, hi);
  };
  spec.spleen.center = {center_in(0, 2.0), center_in(1, 2.0), center_in(2, 0.5)};

  double bg = rng.uniform(25.0, 38.0);
  double spleen_v = rng.uniform(88.0, 102.0);
  double spleen_a = spleen_v + rng.uniform(15.0, 25.0);
  double contrast_v = rng.uniform(38.0, 62.0);
  double contrast_a = rng.uniform(85.0, 130.0);
  spec.venous = {bg, spleen_v, spleen_v + contrast_v};
  spec.arterial = {bg, spleen_a, spleen_a + contrast_a};

  if (!external) {
    int n_blobs = 1 + static_cast<int>(rng.uniform_int(3));
    const double max_radius =
        std::max(1.0, (std::min({nx, ny, nz}) - 2.0) / 2.0);
    for (int b = 0; b < n_blobs; ++b) {
      InjuryBlob blob;
      blob.radius = std::min(rng.uniform(3.0, 5.0), max_radius);
      blob.exterior = rng.uniform() < 0.4;
      // draw a direction, place the center at an interior or boundary
      // radius of the spleen ellipsoid
      for (int attempt = 0; attempt < 64; ++attempt) {
        double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        double u = rng.uniform(-1.0, 1.0);
        double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        double dir[3] = {s * std::cos(theta), s * std::sin(theta), u};
        double f = blob.exterior ? rng.uniform(0.92, 1.10)
                                 : rng.uniform(0.30, 0.75);
        blob.center = {spec.spleen.center[0] + f * spec.spleen.radii[0] * dir[0],
                       spec.spleen.center[1] + f * spec.spleen.radii[1] * dir[1],
                       spec.spleen.center[2] + f * spec.spleen.radii[2] * dir[2]};
        bool ok = true;
        for (int d = 0; d < 3; ++d) {
          double bound = d == 0 ? nx : d == 1 ? ny : nz;
          if (blob.center[d] - blob.radius < 0.0 ||
              blob.center[d] + blob.radius > bound - 1.0)
            ok = false;
        }
        if (ok) break;
        // shrink toward the interior and retry
        blob.exterior = false;
        if (attempt == 63) blob.center = spec.spleen.center;  // always valid
      }
      spec.injuries.push_back(blob);
    }
  }
  return spec;
}

}  // namespace

PhantomSpec internal_case_spec(const CorpusConfig& config, int index) {
  char pid[32];
  std::snprintf(pid, sizeof(pid), "P%03d", index);
  return draw_case_spec(config,
                        derive_seed(config.seed, "phantom-internal", index),
                        false, pid);
}

PhantomSpec external_case_spec(const CorpusConfig& config, int index) {
  char pid[32];
  std::snprintf(pid, sizeof(pid), "E%03d", index);
  return draw_case_spec(config,
                        derive_seed(config.seed, "phantom-external", index),
                        true, pid);
}

void generate_corpus(const CorpusConfig& config,
                     const std::filesystem::path& out_dir) {
  if (config.n_internal < 1 || config.n_external < 1)
    throw std::invalid_argument("generate_corpus: need at least 1 case each");
  namespace fs = std::filesystem;
  for (int i = 0; i < config.n_internal; ++i) {
    PhantomSpec spec = internal_case_spec(config, i);
    PhantomCase c = generate_case(spec);
    char name[32];
    std::snprintf(name, sizeof(name), "case_%03d", i);
    fs::path dir = out_dir / "internal" / name;
    vol::write_volume(dir, c.arterial);
    vol::write_volume(dir, c.venous);
    // injury-only supervision, one label map per phase
    vol::write_labels(dir, vol::PhaseTag::arterial, c.injury, spec.patient_id);
    vol::write_labels(dir, vol::PhaseTag::venous, c.injury, spec.patient_id);
  }
  for (int i = 0; i < config.n_external; ++i) {
    PhantomSpec spec = external_case_spec(config, i);
    PhantomCase c = generate_case(spec);
    char name[32];
    std::snprintf(name, sizeof(name), "ext_%03d", i);
    fs::path dir = out_dir / "external" / name;
    vol::Volume ext = c.venous;  // external scans are venous-protocol
    ext.phase = vol::PhaseTag::external;
    vol::write_volume(dir, ext);
    vol::write_labels(dir, vol::PhaseTag::external, c.spleen, spec.patient_id);
  }
}

}  // namespace easeg::phantom
