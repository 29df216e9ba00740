#include <doctest.h>

#include <filesystem>

#include "easeg/core/fs.hpp"
#include "easeg/core/ini.hpp"
#include "easeg/core/rng.hpp"

using namespace easeg;

TEST_SUITE_BEGIN("core");

TEST_CASE("ini parses sections, comments, and typed values") {
  Ini ini = Ini::parse(
      "# comment\n"
      "[trainer]\n"
      "alpha = 0.5\n"
      "T = 2\n"
      "augment = true\n"
      "[backbone]\n"
      "fusion_scales = 1.0, 1.5, 2.0, 2.5\n"
      "arch = small-unet  # trailing comment\n");
  CHECK(ini.get_double("trainer.alpha", 0) == doctest::Approx(0.5));
  CHECK(ini.get_int("trainer.T", -1) == 2);
  CHECK(ini.get_bool("trainer.augment", false));
  CHECK(ini.get_string("backbone.arch", "") == "small-unet");
  auto scales = ini.get_doubles("backbone.fusion_scales", {});
  REQUIRE(scales.size() == 4);
  CHECK(scales[1] == doctest::Approx(1.5));
}

TEST_CASE("ini missing keys are enumerated in one pass") {
  Ini ini = Ini::parse("[data]\ninternal = /x\n");
  ini.require_string("data.internal");
  ini.require_string("data.external");
  ini.require_string("data.stage1_checkpoint");
  REQUIRE(ini.missing().size() == 2);
  CHECK(ini.missing()[0] == "data.external");
  CHECK_THROWS_WITH_AS(ini.check_complete(),
                       "missing config keys: data.external "
                       "data.stage1_checkpoint",
                       std::runtime_error);
}

TEST_CASE("ini round-trips through serialize") {
  Ini a = Ini::parse("[s]\nk = v\nn = 3\n[t]\nx = 1.5\n");
  Ini b = Ini::parse(a.serialize());
  CHECK(a.entries() == b.entries());
}

TEST_CASE("derived seeds differ per tag and index") {
  auto s1 = derive_seed(42, "scheduler/real");
  auto s2 = derive_seed(42, "scheduler/synthetic");
  auto s3 = derive_seed(43, "scheduler/real");
  CHECK(s1 != s2);
  CHECK(s1 != s3);
  CHECK(derive_seed(42, "x", 0) != derive_seed(42, "x", 1));
  CHECK(derive_seed(42, "scheduler/real") == s1);  // stable
}

TEST_CASE("rng streams are deterministic and in range") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) {
    double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng c(9);
  for (int i = 0; i < 100; ++i) {
    auto v = c.uniform_int(13);
    CHECK(v < 13);
  }
}

TEST_CASE("rng normal has roughly unit moments") {
  Rng rng(11);
  double sum = 0, sum2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("dir lock blocks a second run and releases on destruction") {
  auto dir = std::filesystem::temp_directory_path() / "easeg_lock_test";
  std::filesystem::remove_all(dir);
  {
    DirLock lock(dir);
    CHECK_THROWS_AS(DirLock{dir}, std::runtime_error);
  }
  DirLock relock(dir);  // released, can lock again
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
