#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "loopsched/metrics.hpp"
#include "loopsched/simas.hpp"
#include "loopsched/simcore.hpp"

namespace loopsched {

/// One simulation job: a single technique or SIMAS, single-sweep or time-stepping.
struct JobSpec {
  std::shared_ptr<const Platform> platform;
  std::vector<std::shared_ptr<const Workload>> step_workloads;  // one entry unless time-stepping
  Scenario scenario;
  std::string technique;  // technique name or "SIMAS"
  DlsConfig dls;          // h/sigma/weights; iteration counts come from the workloads
  SimasConfig simas;
  double max_sim_time = kInf;
  double request_msg_bytes = 32;
  double reply_msg_bytes = 32;
  bool record_chunks = false;
};

struct JobResult {
  bool is_simas = false;
  SimOutcome outcome;
  std::vector<SimOutcome> step_outcomes;
  std::vector<SelectionEvent> selections;
  std::vector<Technique> portfolio;
  double prediction_cost_seconds = 0;
  double overhead_pct = 0;
};

JobResult run_job(const JobSpec& spec);

/// Write summary.csv, per_pe.csv and, when requested, chunks.csv /
/// selections.csv / steps.csv into `dir`.
void write_job_outputs(const JobResult& r, const std::string& dir, bool chunks);

/// Line-oriented manifest: `axis <name> <values...>`, '#' comments.
/// Multi-valued axes: workload, platform, scenario, technique.
/// Single-valued: n, repetitions, seed, timesteps, max-sim-time, h, sigma,
/// portfolio, poll, resim, oracle.
struct SweepManifest {
  std::vector<std::string> workloads;
  std::vector<std::string> platforms;
  std::vector<std::string> scenarios;
  std::vector<std::string> techniques;
  i64 n = 400000;
  int repetitions = 1;
  u64 seed = 42;
  int timesteps = 1;
  double max_sim_time = kInf;
  double overhead_h = 1e-3;
  double sigma = -1;  // negative: derive from the workload at the mean core speed
  std::string portfolio;
  bool oracle = false;
  double poll = 5;
  double resim = 50;

  static SweepManifest load(const std::string& path);
  void validate() const;
};

/// Execute the full cross product; cells run concurrently up to `workers`
/// (0: use LOOPSCHED_WORKERS or the hardware concurrency). Failed cells are
/// recorded and skipped.
void run_sweep(const SweepManifest& m, const std::string& manifest_text, const std::string& out_dir,
               int workers = 0);

/// Aggregate a sweep results directory into report/heatmap/selection tables,
/// normalized to the STATIC t_par under np per (workload, platform).
void write_report(const std::string& results_dir, const std::string& out_dir);

std::string sanitize_name(const std::string& s);
double median(std::vector<double> v);

}  // namespace loopsched
