#include <doctest.h>

#include <filesystem>

#include "easeg/core/fs.hpp"
#include "easeg/eval/metrics.hpp"
#include "easeg/phantom/phantom.hpp"
#include "easeg/vol/preprocess.hpp"

using namespace easeg;
using namespace easeg::phantom;

namespace {

PhantomSpec small_spec() {
  PhantomSpec spec;
  spec.shape = {32, 32, 16};
  spec.spleen.center = {16, 16, 8};
  spec.spleen.radii = {7, 8, 5};
  InjuryBlob blob;
  blob.center = {18, 16, 8};
  blob.radius = 2.5;
  spec.injuries = {blob};
  spec.noise_std = 0.0;
  spec.seed = 5;
  spec.patient_id = "T0";
  return spec;
}

std::uint64_t digest_tree(const std::filesystem::path& root) {
  std::uint64_t acc = 0xcbf29ce484222325ull;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    acc ^= digest_file(f);
    acc *= 0x100000001b3ull;
  }
  return acc;
}

}  // namespace

TEST_SUITE_BEGIN("phantom");

TEST_CASE("zero noise renders exactly the configured class means") {
  PhantomSpec spec = small_spec();
  PhantomCase c = generate_case(spec);
  bool saw_injury = false, saw_spleen = false, saw_bg = false;
  for (int z = 0; z < spec.shape.nz; ++z)
    for (int y = 0; y < spec.shape.ny; ++y)
      for (int x = 0; x < spec.shape.nx; ++x) {
        float a = c.arterial.data.at(x, y, z);
        float v = c.venous.data.at(x, y, z);
        if (c.injury.labels.at(x, y, z)) {
          CHECK(a == doctest::Approx(spec.arterial.injury));
          CHECK(v == doctest::Approx(spec.venous.injury));
          saw_injury = true;
        } else if (c.spleen.labels.at(x, y, z)) {
          CHECK(a == doctest::Approx(spec.arterial.spleen));
          CHECK(v == doctest::Approx(spec.venous.spleen));
          saw_spleen = true;
        } else {
          CHECK(a == doctest::Approx(spec.arterial.background));
          CHECK(v == doctest::Approx(spec.venous.background));
          saw_bg = true;
        }
      }
  CHECK(saw_injury);
  CHECK(saw_spleen);
  CHECK(saw_bg);
}

TEST_CASE("injury contrast between phases is the configured difference") {
  PhantomSpec spec = small_spec();
  PhantomCase c = generate_case(spec);
  double sum_a = 0, sum_v = 0;
  long n = 0;
  c.injury.labels.for_each([&](int x, int y, int z, std::uint8_t v) {
    if (v) {
      sum_a += c.arterial.data.at(x, y, z);
      sum_v += c.venous.data.at(x, y, z);
      ++n;
    }
  });
  REQUIRE(n > 0);
  CHECK(sum_a / n - sum_v / n ==
        doctest::Approx(spec.arterial.injury - spec.venous.injury));
}

TEST_CASE("same seed renders a bit-identical case") {
  PhantomSpec spec = small_spec();
  spec.noise_std = 9.0;
  PhantomCase a = generate_case(spec);
  PhantomCase b = generate_case(spec);
  for (int z = 0; z < spec.shape.nz; ++z) {
    CHECK((a.arterial.data.slice(z) == b.arterial.data.slice(z)).all());
    CHECK((a.venous.data.slice(z) == b.venous.data.slice(z)).all());
  }
  spec.seed = 6;
  PhantomCase c = generate_case(spec);
  bool differs = false;
  for (int z = 0; z < spec.shape.nz && !differs; ++z)
    differs = !(a.arterial.data.slice(z) == c.arterial.data.slice(z)).all();
  CHECK(differs);
}

TEST_CASE("injury voxel count equals the voxel-enumeration oracle") {
  PhantomSpec spec = small_spec();
  spec.injuries.clear();
  InjuryBlob blob;
  blob.center = {14.5, 16.0, 8.0};
  blob.radius = 3.2;
  spec.injuries = {blob};
  PhantomCase c = generate_case(spec);
  long count = 0;
  c.injury.labels.for_each([&](int, int, int, std::uint8_t v) { count += v; });
  CHECK(count == discretized_ball_count(blob, spec.shape));
}

TEST_CASE("geometry violations are rejected") {
  PhantomSpec spec = small_spec();
  SUBCASE("spleen outside bounds") {
    spec.spleen.center = {2, 16, 8};
    CHECK_THROWS_AS(generate_case(spec), std::invalid_argument);
  }
  SUBCASE("injury blob outside bounds") {
    spec.injuries[0].center = {31, 31, 15};
    CHECK_THROWS_AS(generate_case(spec), std::invalid_argument);
  }
  SUBCASE("injury far from the spleen violates the anatomy constraint") {
    spec.injuries[0].center = {28, 4, 3};
    CHECK_THROWS_AS(generate_case(spec), std::invalid_argument);
  }
}

TEST_CASE("corpus layout keeps the partially-supervised label split") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "easeg_phantom_corpus";
  fs::remove_all(dir);
  CorpusConfig cfg;
  cfg.n_internal = 2;
  cfg.n_external = 2;
  cfg.seed = 13;
  cfg.shape = {32, 32, 8};
  generate_corpus(cfg, dir);

  auto internal = list_subdirs(dir / "internal");
  auto external = list_subdirs(dir / "external");
  REQUIRE(internal.size() == 2);
  REQUIRE(external.size() == 2);

  // internal cases carry only injury labels in the internal space
  for (const auto& name : internal) {
    vol::LabelMap l =
        vol::read_labels(dir / "internal" / name, vol::PhaseTag::venous);
    CHECK(l.space == vol::LabelSpace::internal);
    CHECK(vol::has_volume(dir / "internal" / name, vol::PhaseTag::arterial));
    CHECK(!vol::has_labels(dir / "internal" / name, vol::PhaseTag::external));
  }
  // external cases carry only spleen labels in the external space
  for (const auto& name : external) {
    vol::LabelMap l =
        vol::read_labels(dir / "external" / name, vol::PhaseTag::external);
    CHECK(l.space == vol::LabelSpace::external);
    CHECK(!vol::has_volume(dir / "external" / name, vol::PhaseTag::arterial));
  }

  // regeneration with the same seed is byte-identical
  std::uint64_t d1 = digest_tree(dir);
  fs::remove_all(dir);
  generate_corpus(cfg, dir);
  CHECK(digest_tree(dir) == d1);

  fs::remove_all(dir);
}

TEST_CASE("ground truth survives the io round-trip with DSC 1") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "easeg_phantom_roundtrip";
  fs::remove_all(dir);
  PhantomSpec spec = small_spec();
  PhantomCase c = generate_case(spec);
  vol::write_labels(dir / "case", vol::PhaseTag::venous, c.injury, "T0");
  vol::LabelMap restored = vol::read_labels(dir / "case", vol::PhaseTag::venous);
  GridB a(c.injury.shape()), b(restored.shape());
  for (int z = 0; z < a.shape().nz; ++z) {
    a.slice(z) = (c.injury.labels.slice(z) > 0).cast<std::uint8_t>();
    b.slice(z) = (restored.labels.slice(z) > 0).cast<std::uint8_t>();
  }
  CHECK(eval::dsc(a, b) == doctest::Approx(1.0));
  fs::remove_all(dir);
}

TEST_CASE("external cases differ from internal by the gamma curve") {
  CorpusConfig cfg;
  cfg.seed = 21;
  cfg.shape = {32, 32, 8};
  cfg.noise_std = 0.0;
  PhantomSpec internal = internal_case_spec(cfg, 0);
  PhantomSpec external = external_case_spec(cfg, 0);
  CHECK(internal.gamma == doctest::Approx(1.0));
  CHECK(external.gamma == doctest::Approx(cfg.external_gamma));
  CHECK(external.injuries.empty());  // normal scans only
  CHECK(!internal.injuries.empty());
}

TEST_SUITE_END();
