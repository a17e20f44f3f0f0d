#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "loopsched/sweep.hpp"
#include "loopsched/rng.hpp"

namespace fs = std::filesystem;
using namespace loopsched;

namespace {

struct SimulateArgs {
  std::string platform_path;
  std::string workload_path;
  std::string gen_spec;
  i64 n = 400000;
  std::string dls;
  std::string scenario = "np";
  std::string scenario_file;
  double max_sim_time = kInf;
  double h = 1e-3;
  double sigma = -1;
  std::string weights_csv;
  std::string out_dir = "sim_out";
  u64 seed = 42;
  int timesteps = 1;
  std::string portfolio_csv;
  double poll = 5;
  double resim = 50;
  bool oracle = false;
  std::string default_dls;
};

DistributionSpec parse_gen(const std::string& spec, u64 seed) {
  auto f = split_char(spec, ',');
  if (f.size() == 1) return workload_preset(f[0], seed);
  const std::string ctx = "--gen";
  DistributionSpec d;
  d.kind = DistributionSpec::kind_from_string(f[0]);
  using K = DistributionSpec::Kind;
  auto need = [&](std::size_t n) {
    if (f.size() != n) throw std::runtime_error("--gen " + f[0] + ": expected " + num_str(static_cast<i64>(n - 1)) + " parameters");
  };
  switch (d.kind) {
    case K::Constant:
      need(3);
      d.value = parse_num(f[1], ctx);
      d.seed = parse_u64(f[2], ctx);
      break;
    case K::Uniform:
      need(4);
      d.lo = parse_num(f[1], ctx);
      d.hi = parse_num(f[2], ctx);
      d.seed = parse_u64(f[3], ctx);
      break;
    case K::Normal:
      need(6);
      d.mean = parse_num(f[1], ctx);
      d.stddev = parse_num(f[2], ctx);
      d.lo = parse_num(f[3], ctx);
      d.hi = parse_num(f[4], ctx);
      d.seed = parse_u64(f[5], ctx);
      break;
    case K::Exponential:
      need(5);
      d.rate = parse_num(f[1], ctx);
      d.lo = parse_num(f[2], ctx);
      d.hi = parse_num(f[3], ctx);
      d.seed = parse_u64(f[4], ctx);
      break;
    case K::Gamma:
      need(6);
      d.shape = parse_num(f[1], ctx);
      d.scale = parse_num(f[2], ctx);
      d.lo = parse_num(f[3], ctx);
      d.hi = parse_num(f[4], ctx);
      d.seed = parse_u64(f[5], ctx);
      break;
  }
  return d;
}

int cmd_simulate(const SimulateArgs& a) {
  // flag validation first: anything wrong here is a usage error (exit 2)
  if (a.platform_path.empty()) {
    std::cerr << "simulate: --platform is required\n";
    return 2;
  }
  if (a.workload_path.empty() == a.gen_spec.empty()) {
    std::cerr << "simulate: exactly one of --workload / --gen is required\n";
    return 2;
  }
  if (a.dls.empty()) {
    std::cerr << "simulate: --dls is required\n";
    return 2;
  }
  JobSpec spec;
  spec.technique = a.dls;
  try {
    if (a.dls != "SIMAS") (void)technique_from_string(a.dls);
    spec.simas.portfolio =
        a.portfolio_csv.empty() ? SimasConfig::default_portfolio() : [&] {
          std::vector<Technique> v;
          for (const auto& name : split_char(a.portfolio_csv, ','))
            if (!name.empty()) v.push_back(technique_from_string(name));
          return v;
        }();
    if (!a.default_dls.empty()) spec.simas.default_technique = technique_from_string(a.default_dls);
    else if (a.timesteps > 1) spec.simas.default_technique = Technique::WF;
    spec.simas.poll_interval = a.poll;
    spec.simas.resim_interval = a.resim;
    spec.simas.oracle_mode = a.oracle;
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return 2;
  }

  try {
    spec.platform = std::make_shared<Platform>(load_platform(a.platform_path));
    if (!a.workload_path.empty()) {
      auto w = std::make_shared<Workload>(load_flop_file(a.workload_path));
      for (int s = 0; s < a.timesteps; ++s) spec.step_workloads.push_back(w);
    } else {
      for (int s = 0; s < a.timesteps; ++s) {
        u64 seed = a.timesteps == 1 ? a.seed : splitmix64(a.seed ^ static_cast<u64>(s));
        DistributionSpec d = parse_gen(a.gen_spec, seed);
        spec.step_workloads.push_back(std::make_shared<Workload>(generate_workload(d, a.n)));
      }
    }
    spec.scenario = a.scenario_file.empty() ? scenario_by_name(a.scenario, a.seed)
                                            : load_scenario_file(a.scenario_file, a.seed);
    spec.dls.overhead_h = a.h;
    spec.dls.sigma = a.sigma >= 0 ? a.sigma : -1;
    if (spec.dls.sigma < 0) {
      double mean_speed = 0;
      for (const auto& h : spec.platform->hosts) mean_speed += h.core_speed;
      mean_speed /= spec.platform->pe_count();
      spec.dls.sigma = workload_sigma(*spec.step_workloads[0], mean_speed);
    }
    if (!a.weights_csv.empty()) {
      for (const auto& w : split_char(a.weights_csv, ','))
        if (!w.empty()) spec.dls.static_weights.push_back(parse_num(w, "--weights"));
    }
    spec.max_sim_time = a.max_sim_time;
    spec.record_chunks = true;

    JobResult r = run_job(spec);
    write_job_outputs(r, a.out_dir, true);
    std::cout << "sim_time,finished_tasks\n"
              << num_str(r.outcome.sim_time) << "," << num_str(r.outcome.finished_tasks) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator for dynamic loop self-scheduling under perturbations"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print help");  // frees -h/--h for the FSC overhead flag

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run one simulation");
  sim->set_help_flag("--help", "Print help");
  sim->add_option("--platform", sa.platform_path, "Platform file");
  sim->add_option("--workload", sa.workload_path, "FLOP-per-iteration file");
  sim->add_option("--gen", sa.gen_spec,
                  "Generated workload: preset name, or KIND,PARAMS...,SEED "
                  "(constant,V,S | uniform,LO,HI,S | normal,MU,SIGMA,LO,HI,S | "
                  "exponential,RATE,LO,HI,S | gamma,K,THETA,LO,HI,S)");
  sim->add_option("--n", sa.n, "Iteration count for generated workloads");
  sim->add_option("--dls", sa.dls, "Technique name or SIMAS");
  sim->add_option("--scenario", sa.scenario, "Scenario name from the built-in catalog");
  sim->add_option("--scenario-file", sa.scenario_file, "Scenario override file");
  sim->add_option("--max-sim-time", sa.max_sim_time, "Simulated-time cutoff, s");
  sim->add_option("--h", sa.h, "Scheduling overhead for FSC, s");
  sim->add_option("--sigma", sa.sigma, "Iteration-time stddev for FSC, s (default: from workload)");
  sim->add_option("--weights", sa.weights_csv, "Per-PE weights for WF (CSV; default: relative core weights)");
  sim->add_option("--out", sa.out_dir, "Output directory");
  sim->add_option("--seed", sa.seed, "Seed for scenario draws and workload presets");
  sim->add_option("--timesteps", sa.timesteps, "Number of time steps");
  sim->add_option("--portfolio", sa.portfolio_csv, "SIMAS technique portfolio (CSV)");
  sim->add_option("--poll", sa.poll, "SIMAS prediction-check interval, s");
  sim->add_option("--resim", sa.resim, "SIMAS minimum spacing between prediction launches, s");
  sim->add_flag("--oracle", sa.oracle, "SIMAS predictions see the true future traces");
  sim->add_option("--default-dls", sa.default_dls, "SIMAS default technique");

  std::string sweep_manifest, sweep_out = "sweep_out";
  int sweep_workers = 0;
  auto* sw = app.add_subcommand("sweep", "Run a factorial sweep from a manifest");
  sw->add_option("manifest", sweep_manifest, "Manifest file")->required();
  sw->add_option("--out", sweep_out, "Results directory");
  sw->add_option("--workers", sweep_workers, "Concurrent cells (default: LOOPSCHED_WORKERS or cores)");

  std::string report_dir, report_out;
  auto* rp = app.add_subcommand("report", "Aggregate a sweep results directory");
  rp->add_option("results", report_dir, "Sweep results directory")->required();
  rp->add_option("--out", report_out, "Report directory (default: <results>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sim->parsed()) return cmd_simulate(sa);

  if (sw->parsed()) {
    try {
      SweepManifest m = SweepManifest::load(sweep_manifest);
      std::ifstream in(sweep_manifest);
      std::stringstream ss;
      ss << in.rdbuf();
      run_sweep(m, ss.str(), sweep_out, sweep_workers);
      std::cout << "results: " << sweep_out << "\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "sweep: " << e.what() << "\n";
      return 3;
    }
  }

  if (rp->parsed()) {
    try {
      write_report(report_dir, report_out.empty() ? report_dir + "/report" : report_out);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "report: " << e.what() << "\n";
      return 3;
    }
  }
  return 2;
}
