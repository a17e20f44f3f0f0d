#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "integral_oracle.hpp"
#include "loopsched/simcore.hpp"
#include "test_util.hpp"

using namespace loopsched;

namespace {

Scenario np() { return Scenario{"np", {}}; }

SimInput base_input(const Platform& p, const Workload& w, const Scenario& s, Technique t) {
  SimInput in;
  in.platform = &p;
  in.workload = &w;
  in.scenario = &s;
  in.technique = t;
  return in;
}

Workload constant_workload(i64 n, double flop) {
  Workload w;
  w.flops.assign(static_cast<std::size_t>(n), flop);
  w.rebuild_prefix();
  return w;
}

}  // namespace

TEST_CASE("SS on two identical hosts with a zero-cost network is exact") {
  auto plat = testutil::make_homogeneous(2, 1e9, 0.0);
  auto work = constant_workload(100, 1e9);
  auto scen = np();
  auto in = base_input(plat, work, scen, Technique::SS);
  in.request_msg_bytes = 0;
  in.reply_msg_bytes = 0;
  SimOutcome out = simulate(in);
  CHECK(out.finished_tasks == 100);
  CHECK(std::abs(out.sim_time - 50.0) <= 50.0 * 1e-9);
  CHECK(out.per_pe_finish[0] == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(out.per_pe_finish[1] == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("SS on a 4:1 pair splits 100 tasks 80/20 and ends at 20 s") {
  auto plat = testutil::make_platform(1, 1, 0.0);
  auto work = constant_workload(100, 1e9);
  auto scen = np();
  auto in = base_input(plat, work, scen, Technique::SS);
  in.request_msg_bytes = 0;
  in.reply_msg_bytes = 0;
  SimOutcome out = simulate(in);
  CHECK(out.finished_tasks == 100);
  CHECK(out.sim_time == doctest::Approx(20.0).epsilon(1e-9));
  i64 fast = 0, slow = 0;
  for (const auto& c : out.chunk_log) (c.pe == 0 ? fast : slow) += c.size;
  CHECK(fast == 80);
  CHECK(slow == 20);
}

TEST_CASE("task conservation and disjoint chunk spans") {
  auto plat = testutil::make_platform(2, 2, 1e-5);
  Workload work = generate_workload(workload_preset("gamma", 8), 3000);
  auto scen = scenario_by_name("pea-cm");
  for (Technique t : {Technique::GSS, Technique::FAC, Technique::AWF_B, Technique::AF}) {
    CAPTURE(to_string(t));
    auto in = base_input(plat, work, scen, t);
    SimOutcome out = simulate(in);
    REQUIRE(out.finished_tasks == 3000);
    std::vector<char> seen(3000, 0);
    for (const auto& c : out.chunk_log) {
      REQUIRE(c.completed);
      for (i64 i = c.start; i < c.start + c.size; ++i) {
        REQUIRE(!seen[static_cast<std::size_t>(i)]);
        seen[static_cast<std::size_t>(i)] = 1;
      }
    }
    for (char s : seen) REQUIRE(s);
  }
}

TEST_CASE("causality: execution starts after request plus both message costs") {
  auto plat = testutil::make_homogeneous(3, 1e9, 1e-3, 1e6);
  auto work = constant_workload(60, 1e8);
  auto scen = np();
  auto in = base_input(plat, work, scen, Technique::SS);
  in.request_msg_bytes = 32;
  in.reply_msg_bytes = 32;
  SimOutcome out = simulate(in);
  const double per_msg = 1e-3 + 32.0 / 1e6;
  for (const auto& c : out.chunk_log) {
    if (c.pe == plat.master_host_index) continue;
    CHECK(c.exec_start >= c.request_time + 2 * per_msg - 1e-12);
  }
  // per-PE finish equals the max execution end per PE
  std::vector<double> maxend(3, 0.0);
  for (const auto& c : out.chunk_log) maxend[static_cast<std::size_t>(c.pe)] =
      std::max(maxend[static_cast<std::size_t>(c.pe)], c.exec_end);
  for (int pe = 0; pe < 3; ++pe) CHECK(out.per_pe_finish[static_cast<std::size_t>(pe)] ==
                                       doctest::Approx(maxend[static_cast<std::size_t>(pe)]));
}

TEST_CASE("closed-form chunk timing matches numeric integration") {
  auto pea_cs = scenario_by_name("pea-cs");
  auto pea_es = scenario_by_name("pea-es");
  const auto* a1 = pea_cs.spec_for(PerturbTarget::Availability);
  const auto* a2 = pea_es.spec_for(PerturbTarget::Availability);
  int checked = 0;
  for (const auto* avail : {a1, a2}) {
    for (double t0 : {0.0, 49.5, 60.0, 99.99, 123.4}) {
      for (double flops : {1e8, 5e9, 4e10, 3e11}) {
        const double speed = 1e9;
        const double closed = chunk_finish_time(speed, avail, t0, flops);
        const double numeric = testutil::numeric_finish_time(speed, avail, t0, flops, 1e-3);
        REQUIRE(std::abs(closed - numeric) <= 1e-9 * std::max(1.0, numeric));
        ++checked;
      }
    }
  }
  CHECK(checked == 40);
}

TEST_CASE("perturbed chunk slowdown is consistent with the active factor") {
  auto plat = testutil::make_homogeneous(4, 1e9, 0.0);
  auto work = constant_workload(40, 2e10);  // 20 s per chunk unperturbed
  auto scen = scenario_by_name("pea-cs");
  auto in = base_input(plat, work, scen, Technique::STATIC);
  in.request_msg_bytes = 0;
  in.reply_msg_bytes = 0;
  SimOutcome out = simulate(in);
  for (const auto& c : out.chunk_log) {
    const double numeric = testutil::numeric_finish_time(1e9, scen.spec_for(PerturbTarget::Availability),
                                                         c.exec_start, c.flops, 1e-3);
    CHECK(std::abs(c.exec_end - numeric) <= 1e-6 * numeric);
  }
}

TEST_CASE("monotone degradation with availability severity") {
  auto plat = testutil::make_platform(2, 2, 1e-6);
  auto work = constant_workload(2000, 2.3e8);
  double t_np, t_cm, t_cs;
  {
    auto s = np();
    t_np = simulate(base_input(plat, work, s, Technique::GSS)).sim_time;
  }
  {
    auto s = scenario_by_name("pea-cm");
    t_cm = simulate(base_input(plat, work, s, Technique::GSS)).sim_time;
  }
  {
    auto s = scenario_by_name("pea-cs");
    t_cs = simulate(base_input(plat, work, s, Technique::GSS)).sim_time;
  }
  CHECK(t_np <= t_cm);
  CHECK(t_cm <= t_cs);
}

TEST_CASE("cutoff returns partial progress") {
  auto plat = testutil::make_homogeneous(2, 1e9, 0.0);
  auto work = constant_workload(100, 1e9);
  auto scen = np();
  auto in = base_input(plat, work, scen, Technique::SS);
  in.max_sim_time = 10.0;
  SimOutcome out = simulate(in);
  CHECK(out.cut_off);
  CHECK(out.sim_time == 10.0);
  CHECK(out.finished_tasks < 100);
  CHECK(out.finished_tasks >= 18);  // ~2 tasks/s
}

TEST_CASE("determinism: identical inputs, identical outcomes") {
  auto plat = testutil::make_platform(3, 5, 2e-6);
  Workload work = generate_workload(workload_preset("exponential", 17), 4000);
  auto scen = scenario_by_name("all-es");
  auto in = base_input(plat, work, scen, Technique::AWF_C);
  SimOutcome a = simulate(in);
  SimOutcome b = simulate(in);
  REQUIRE(a.sim_time == b.sim_time);
  REQUIRE(a.finished_tasks == b.finished_tasks);
  REQUIRE(a.per_pe_finish == b.per_pe_finish);
  REQUIRE(a.chunk_log.size() == b.chunk_log.size());
  for (std::size_t i = 0; i < a.chunk_log.size(); ++i) {
    REQUIRE(a.chunk_log[i].time_issued == b.chunk_log[i].time_issued);
    REQUIRE(a.chunk_log[i].pe == b.chunk_log[i].pe);
    REQUIRE(a.chunk_log[i].start == b.chunk_log[i].start);
    REQUIRE(a.chunk_log[i].size == b.chunk_log[i].size);
    REQUIRE(a.chunk_log[i].exec_end == b.chunk_log[i].exec_end);
  }
}

TEST_CASE("start_task resumes mid-loop") {
  auto plat = testutil::make_homogeneous(2, 1e9, 0.0);
  auto work = constant_workload(100, 1e9);
  auto scen = np();
  auto in = base_input(plat, work, scen, Technique::SS);
  in.start_task = 60;
  in.start_time = 100.0;
  SimOutcome out = simulate(in);
  CHECK(out.finished_tasks == 40);
  CHECK(out.sim_time == doctest::Approx(120.0));
  for (const auto& c : out.chunk_log) CHECK(c.start >= 60);
}

TEST_CASE("master poll interval batches request service") {
  auto plat = testutil::make_homogeneous(3, 1e9, 0.0);
  auto work = constant_workload(30, 1e9);
  auto scen = np();
  auto in = base_input(plat, work, scen, Technique::SS);
  in.request_msg_bytes = 0;
  in.reply_msg_bytes = 0;
  in.master_poll_interval = 0.5;
  SimOutcome out = simulate(in);
  CHECK(out.finished_tasks == 30);
  // worker chunks are only issued on poll boundaries
  for (const auto& c : out.chunk_log) {
    if (c.pe == plat.master_host_index) continue;
    const double phase = std::fmod(c.time_issued, 0.5);
    CHECK((phase < 1e-9 || phase > 0.5 - 1e-9));
  }
}

TEST_CASE("time stepping") {
  SUBCASE("constant homogeneous SS is linear in steps") {
    auto plat = testutil::make_homogeneous(2, 1e9, 0.0);
    Workload step = constant_workload(100, 1e9);
    TimeSteppingInput in;
    in.platform = &plat;
    auto scen = np();
    in.scenario = &scen;
    for (int i = 0; i < 10; ++i) in.step_workloads.push_back(&step);
    in.technique = Technique::SS;
    in.request_msg_bytes = 0;
    in.reply_msg_bytes = 0;
    auto outs = simulate_time_stepping(in);
    REQUIRE(outs.size() == 10);
    CHECK(outs.back().sim_time == doctest::Approx(10 * 50.0).epsilon(1e-9));
    for (std::size_t k = 0; k < outs.size(); ++k) {
      CHECK(outs[k].sim_time == doctest::Approx(50.0 * static_cast<double>(k + 1)).epsilon(1e-9));
      CHECK(outs[k].finished_tasks == 100);
    }
  }
  SUBCASE("AWF-B carries weights into step 2") {
    auto plat = testutil::make_platform(1, 1, 0.0);
    Workload step = constant_workload(4000, 1e9);
    TimeSteppingInput in;
    in.platform = &plat;
    auto scen = np();
    in.scenario = &scen;
    in.step_workloads = {&step, &step};
    in.technique = Technique::AWF_B;
    in.carry_weights = true;
    in.request_msg_bytes = 0;
    in.reply_msg_bytes = 0;
    auto outs = simulate_time_stepping(in);
    REQUIRE(outs.size() == 2);
    // first batch of step 2 is already weighted ~[1.6, 0.4]
    const double step2_start = outs[0].sim_time;
    std::vector<i64> first_sizes(2, 0);
    for (const auto& c : outs[1].chunk_log) {
      if (first_sizes[static_cast<std::size_t>(c.pe)] == 0) first_sizes[static_cast<std::size_t>(c.pe)] = c.size;
    }
    (void)step2_start;
    CHECK(first_sizes[0] == doctest::Approx(1.6 * 1000).epsilon(0.01));
    CHECK(first_sizes[1] == doctest::Approx(0.4 * 1000).epsilon(0.01));
  }
}

TEST_CASE("percent error") {
  CHECK(percent_error(100, 100) == 0.0);
  CHECK(percent_error(100, 97) == 3.0);
  CHECK_THROWS_AS(percent_error(0, 1), std::runtime_error);
  CHECK_THROWS_AS(percent_error(-5, 1), std::runtime_error);
}

TEST_CASE("network costs enter total chunk time, not iterate time") {
  auto plat = testutil::make_homogeneous(2, 1e9, 1e-3, 1e6);
  auto work = constant_workload(10, 1e9);
  auto scen = np();
  auto in = base_input(plat, work, scen, Technique::AWF_E);
  SimOutcome out = simulate(in);
  CHECK(out.finished_tasks == 10);
  // worker chunks pay two messages
  for (const auto& c : out.chunk_log) {
    if (c.pe == plat.master_host_index) continue;
    const double msg = 1e-3 + 32.0 / 1e6;
    CHECK(c.exec_start == doctest::Approx(c.request_time + 2 * msg).epsilon(1e-9));
  }
}
