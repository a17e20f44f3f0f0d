#include <doctest.h>

#include "loopsched/platform.hpp"
#include "test_util.hpp"

using namespace loopsched;

TEST_CASE("minimal platform file parses") {
  auto path = testutil::write_temp("plat_min.txt",
                                   "# two identical hosts\n"
                                   "host a c0 1e9\n"
                                   "host b c0 1e9\n"
                                   "link a 1e9 1e-6\n"
                                   "link b 1e9 1e-6\n"
                                   "master a\n");
  Platform p = load_platform(path);
  CHECK(p.pe_count() == 2);
  CHECK(p.hosts[0].core_speed == 1e9);
  CHECK(p.hosts[1].core_speed == 1e9);
  CHECK(p.master_host_index == 0);
}

TEST_CASE("miniHPC fixtures") {
  Platform p128 = load_platform(testutil::fixtures_dir() + "/miniHPC_128.platform");
  CHECK(p128.pe_count() == 128);
  int broadwell = 0, knl = 0;
  for (const auto& h : p128.hosts) {
    if (h.core_class == "broadwell") ++broadwell;
    if (h.core_class == "knl") ++knl;
  }
  CHECK(broadwell == 64);
  CHECK(knl == 64);

  // pairwise-normalized relative core weights
  auto w = relative_core_weights(p128);
  double wb = 0, wk = 0;
  for (int i = 0; i < 128; ++i) (p128.hosts[i].core_class == "broadwell" ? wb : wk) = w[i];
  CHECK(wb / (wb + wk) == doctest::Approx(0.817).epsilon(0.001));
  CHECK(wk / (wb + wk) == doctest::Approx(0.183).epsilon(0.005));

  Platform p416 = load_platform(testutil::fixtures_dir() + "/miniHPC_416.platform");
  CHECK(p416.pe_count() == 416);
  broadwell = knl = 0;
  for (const auto& h : p416.hosts) {
    if (h.core_class == "broadwell") ++broadwell;
    if (h.core_class == "knl") ++knl;
  }
  CHECK(broadwell == 352);
  CHECK(knl == 64);
}

TEST_CASE("relative core weights") {
  SUBCASE("homogeneous is all ones") {
    auto p = testutil::make_homogeneous(4, 2.5e9);
    auto w = relative_core_weights(p);
    for (double x : w) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("4:1 pair") {
    auto p = testutil::make_platform(1, 1);
    auto w = relative_core_weights(p);
    CHECK(w[0] == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("weights sum to P") {
    Platform p = load_platform(testutil::fixtures_dir() + "/miniHPC_128.platform");
    auto w = relative_core_weights(p);
    double sum = 0;
    for (double x : w) sum += x;
    CHECK(sum == doctest::Approx(128.0).epsilon(1e-9));
  }
  SUBCASE("scale invariance") {
    auto p = testutil::make_platform(3, 2);
    auto w1 = relative_core_weights(p);
    for (auto& h : p.hosts) h.core_speed *= 7.31;
    auto w2 = relative_core_weights(p);
    for (std::size_t i = 0; i < w1.size(); ++i) CHECK(w2[i] == doctest::Approx(w1[i]).epsilon(1e-12));
  }
}

TEST_CASE("store/load round trip is byte identical for canonical files") {
  auto p = testutil::make_platform(2, 3, 2e-6, 1.25e10);
  auto path = testutil::write_temp("plat_rt.txt", platform_to_string(p));
  Platform loaded = load_platform(path);
  CHECK(platform_to_string(loaded) == testutil::read_file(path));
}

TEST_CASE("platform errors carry the offending line") {
  SUBCASE("nonpositive speed") {
    auto path = testutil::write_temp("plat_bad1.txt", "host a c 0\n");
    CHECK_THROWS_WITH_AS(load_platform(path), doctest::Contains(":1"), std::runtime_error);
  }
  SUBCASE("duplicate host") {
    auto path = testutil::write_temp("plat_bad2.txt", "host a c 1\nhost a c 1\n");
    CHECK_THROWS_WITH_AS(load_platform(path), doctest::Contains("duplicate host"), std::runtime_error);
  }
  SUBCASE("missing master") {
    auto path = testutil::write_temp("plat_bad3.txt",
                                     "host a c 1\nhost b c 1\nlink a 1 0\nlink b 1 0\n");
    CHECK_THROWS_WITH_AS(load_platform(path), doctest::Contains("master"), std::runtime_error);
  }
  SUBCASE("missing link") {
    auto path = testutil::write_temp("plat_bad4.txt", "host a c 1\nhost b c 1\nlink a 1 0\nmaster a\n");
    CHECK_THROWS_WITH_AS(load_platform(path), doctest::Contains("missing link"), std::runtime_error);
  }
  SUBCASE("link before host") {
    auto path = testutil::write_temp("plat_bad5.txt", "link a 1 0\nhost a c 1\nmaster a\n");
    CHECK_THROWS_WITH_AS(load_platform(path), doctest::Contains("unknown host"), std::runtime_error);
  }
}
