#include <doctest.h>

#include <cmath>

#include "loopsched/perturbation.hpp"
#include "test_util.hpp"

using namespace loopsched;

namespace {

PerturbationSpec pea_cm() {
  PerturbationSpec s;
  s.target = PerturbTarget::Availability;
  s.distribution = PerturbationSpec::Distribution::Constant;
  s.mean_factor = 0.75;
  s.onset = 50;
  s.period = 100;
  s.duty = 0.5;
  return s;
}

}  // namespace

TEST_CASE("factor_at windows") {
  auto s = pea_cm();
  CHECK(s.factor_at(60) == 0.75);   // active half
  CHECK(s.factor_at(20) == 1.0);    // before onset
  CHECK(s.factor_at(110) == 1.0);   // inactive half
  CHECK(s.factor_at(50) == 0.75);   // window start
  CHECK(s.factor_at(150) == 0.75);  // next period
  CHECK(s.factor_at(100) == 1.0);
}

TEST_CASE("factor_at is piecewise constant between breakpoints") {
  auto s = pea_cm();
  s.distribution = PerturbationSpec::Distribution::Exponential;
  s.mean_factor = 0.31;
  s.seed = 77;
  double t = 0;
  for (int i = 0; i < 200; ++i) {
    const double bp = s.next_breakpoint(t);
    REQUIRE(bp > t);
    const double f0 = s.factor_at(t);
    // sample strictly inside the window
    for (double frac : {0.25, 0.5, 0.99}) {
      const double u = t + (bp - t) * frac;
      if (u >= bp) continue;
      REQUIRE(s.factor_at(u) == f0);
    }
    t = bp;
  }
}

TEST_CASE("exponential draws are deterministic and clamped") {
  auto s = pea_cm();
  s.distribution = PerturbationSpec::Distribution::Exponential;
  s.seed = 42;
  for (int k = 0; k < 1000; ++k) {
    const double t = 50 + 100.0 * k + 10.0;
    const double f = s.factor_at(t);
    REQUIRE(f > 0);
    REQUIRE(f <= 1.0);
    REQUIRE(f == s.factor_at(t + 5));  // same period, same draw
  }
  PerturbationSpec s2 = s;
  CHECK(s.factor_at(60) == s2.factor_at(60));
  s2.seed = 43;
  bool any_diff = false;
  for (int k = 0; k < 10; ++k) any_diff |= s.factor_at(60 + 100 * k) != s2.factor_at(60 + 100 * k);
  CHECK(any_diff);
}

TEST_CASE("standard catalog") {
  auto cat = standard_scenarios();
  CHECK(cat.size() == 17);  // np + {pea,bw,lat,all} x {cm,cs,em,es}

  auto np = scenario_by_name("np");
  CHECK(np.specs.empty());

  auto pea_es = scenario_by_name("pea-es");
  REQUIRE(pea_es.specs.size() == 1);
  CHECK(pea_es.specs[0].distribution == PerturbationSpec::Distribution::Exponential);
  CHECK(pea_es.specs[0].mean_factor == 0.31);
  CHECK(pea_es.specs[0].onset == 50.0);

  auto all_em = scenario_by_name("all-em");
  REQUIRE(all_em.specs.size() == 3);
  // union of the three single-target -em scenarios
  auto pea_em = scenario_by_name("pea-em");
  auto bw_em = scenario_by_name("bw-em");
  auto lat_em = scenario_by_name("lat-em");
  CHECK(all_em.spec_for(PerturbTarget::Availability)->mean_factor == pea_em.specs[0].mean_factor);
  CHECK(all_em.spec_for(PerturbTarget::Bandwidth)->mean_factor == bw_em.specs[0].mean_factor);
  CHECK(all_em.spec_for(PerturbTarget::Latency)->mean_factor == lat_em.specs[0].mean_factor);

  // network perturbations commence with the execution; availability at 50 s
  CHECK(bw_em.specs[0].onset == 0.0);
  CHECK(lat_em.specs[0].onset == 0.0);
  for (const auto& scen : cat) {
    for (const auto& sp : scen.specs) {
      CHECK(sp.period == 100.0);
      CHECK(sp.duty == 0.5);
    }
  }
}

TEST_CASE("effective quantities") {
  Host h{"x", 1e9, "c"};
  Link l{"x", 1e10, 2e-6};

  SUBCASE("np leaves nominals unchanged") {
    auto np = scenario_by_name("np");
    CHECK(effective_speed(h, np, 123.0) == 1e9);
    CHECK(effective_bandwidth(l, np, 123.0) == 1e10);
    CHECK(effective_latency(l, np, 123.0) == 2e-6);
  }
  SUBCASE("pea-cs active window quarters the speed") {
    auto s = scenario_by_name("pea-cs");
    CHECK(effective_speed(h, s, 60.0) == 0.25e9);
    CHECK(effective_speed(h, s, 120.0) == 1e9);
  }
  SUBCASE("latency factors divide") {
    auto cs = scenario_by_name("lat-cs");
    auto cm = scenario_by_name("lat-cm");
    const double active = 10.0;  // network onset 0, duty 0.5
    CHECK(effective_latency(l, cs, active) == doctest::Approx(2e-6 / 1e-9));  // 2e3 s scale
    CHECK(effective_latency(l, cs, active) >= effective_latency(l, cm, active));
  }
  SUBCASE("severity ordering for constant scenarios") {
    auto cs = scenario_by_name("pea-cs");
    auto cm = scenario_by_name("pea-cm");
    for (double t : {55.0, 75.0, 99.0, 155.0}) {
      CHECK(effective_speed(h, cs, t) <= effective_speed(h, cm, t));
    }
  }
}

TEST_CASE("scenario file override") {
  auto path = testutil::write_temp("s1.scen",
                                   "# custom scenario\n"
                                   "perturb availability constant 0.5 0 10 40 0.25\n"
                                   "perturb latency exponential 0.001 0.001 0 100 0.5\n");
  Scenario s = load_scenario_file(path);
  CHECK(s.name == "s1");
  REQUIRE(s.specs.size() == 2);
  CHECK(s.spec_for(PerturbTarget::Availability)->mean_factor == 0.5);
  CHECK(s.spec_for(PerturbTarget::Availability)->factor_at(15) == 0.5);
  CHECK(s.spec_for(PerturbTarget::Availability)->factor_at(25) == 1.0);
  CHECK(s.spec_for(PerturbTarget::Latency)->distribution == PerturbationSpec::Distribution::Exponential);

  auto bad = testutil::write_temp("s2.scen", "perturb availability constant 0.5\n");
  CHECK_THROWS_WITH_AS(load_scenario_file(bad), doctest::Contains(":1"), std::runtime_error);
}

TEST_CASE("breakpoints bracket every factor change") {
  auto s = pea_cm();
  // breakpoints only at onset + k*period and onset + (k+duty)*period
  CHECK(s.next_breakpoint(0) == 50);
  CHECK(s.next_breakpoint(50) == 100);
  CHECK(s.next_breakpoint(99.999) == 100);
  CHECK(s.next_breakpoint(100) == 150);
  CHECK(s.next_breakpoint(150) == 200);
}
