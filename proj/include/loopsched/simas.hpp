#pragma once

#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "loopsched/simcore.hpp"

namespace loopsched {

struct SimasConfig {
  std::vector<Technique> portfolio = default_portfolio();
  Technique default_technique = Technique::AWF_B;
  double poll_interval = 5.0;    // spacing between prediction checks, simulated s
  double resim_interval = 50.0;  // minimum spacing between prediction launches
  double prediction_horizon = kInf;  // max_sim_time granted to sub-simulations
  i64 min_remaining = 0;         // below this, no new batch starts; 0 means P
  bool oracle_mode = false;      // sub-simulations see the true future traces
  double estimate_window = 0;    // chunk-log window for state estimation; 0 means resim_interval

  /// All techniques except GSS, TSS and FAC, which schedule poorly on
  /// heterogeneous systems and only slow the prediction batches down.
  static std::vector<Technique> default_portfolio();
  void validate() const;
};

struct TechPrediction {
  Technique technique = Technique::SS;
  double sim_time = 0;
  i64 finished_tasks = 0;
  bool failed = false;
};

struct SelectionEvent {
  double time = 0;
  Technique chosen = Technique::SS;
  Technique previous = Technique::SS;
  std::string reason;  // "default", "switch" or "keep"
  std::vector<TechPrediction> predictions;
};

/// Index of the winning prediction: most finished tasks, then shortest time,
/// ties broken by portfolio order. Returns -1 when every prediction failed.
int rank_predictions(const std::vector<TechPrediction>& preds);

/// Per-PE delivered-speed factors reconstructed from completed chunks within
/// (now - window, now]; PEs without a completed chunk keep factor 1.
std::vector<double> estimate_pe_factors(const std::deque<RecentChunk>& recent, const Platform& platform,
                                        double now, double window);

struct SimasResult {
  SimOutcome outcome;
  std::vector<SimOutcome> step_outcomes;  // time-stepping mode only
  std::vector<SelectionEvent> selections;
  int batches_launched = 0;
  u64 prediction_events = 0;
  /// Deterministic prediction-cost model: simulation events over a fixed
  /// reference rate. Wall-clock time is measured separately and not written
  /// into canonical outputs, which must be byte-stable.
  double prediction_cost_seconds = 0;
  double prediction_wall_seconds = 0;
};

/// Reference event rate for the deterministic prediction-cost model.
inline constexpr double kPredictionEventRate = 2e7;

/// Drive a simulation whose live technique starts at the configured default
/// and is switched by concurrent what-if sub-simulations.
SimasResult run_with_simas(const SimInput& base, const SimasConfig& cfg);

/// Time-stepping variant: a fresh prediction batch starts at each step
/// boundary; the live technique resets to the default until it resolves.
SimasResult run_with_simas_time_stepping(const TimeSteppingInput& base, const SimasConfig& cfg);

}  // namespace loopsched
