#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loopsched/common.hpp"
#include "loopsched/platform.hpp"

namespace loopsched {

enum class PerturbTarget { Availability, Bandwidth, Latency };

const char* to_string(PerturbTarget t);
PerturbTarget perturb_target_from_string(const std::string& s);

/// Periodic piecewise-constant degradation of one system quantity.
/// Active during the first `duty` fraction of each period after `onset`;
/// outside active windows the factor is 1. For the exponential distribution
/// one value is drawn per period from the seeded stream and held constant
/// over the active window, clamped into (1e-9, 1].
struct PerturbationSpec {
  PerturbTarget target = PerturbTarget::Availability;
  enum class Distribution { Constant, Exponential } distribution = Distribution::Constant;
  double mean_factor = 1.0;   // fraction of nominal
  double sigma_factor = 0.0;  // recorded metadata; an exponential's sigma equals its mean
  double onset = 0.0;         // s
  double period = 100.0;      // s
  double duty = 0.5;          // fraction of period
  u64 seed = 0;

  void validate() const;
  double factor_at(double t) const;
  /// Smallest factor breakpoint strictly greater than t (kInf if none, i.e. never).
  double next_breakpoint(double t) const;
};

struct Scenario {
  std::string name;
  std::vector<PerturbationSpec> specs;  // at most one per target

  const PerturbationSpec* spec_for(PerturbTarget t) const;
  void validate() const;
};

/// Built-in catalog: np; pea-/bw-/lat-/all- x {cm,cs,em,es}.
/// Availability perturbations set in at 50 s; network perturbations start at 0.
std::vector<Scenario> standard_scenarios(u64 seed_base = 0);
Scenario scenario_by_name(const std::string& name, u64 seed_base = 0);

/// One `perturb <target> <constant|exponential> <mean> <sigma> <onset> <period> <duty>` per line.
Scenario load_scenario_file(const std::string& path, u64 seed_base = 0);

double effective_speed(const Host& h, const Scenario& s, double t);
double effective_bandwidth(const Link& l, const Scenario& s, double t);
/// Latency factors divide: delivered latency = nominal / factor.
double effective_latency(const Link& l, const Scenario& s, double t);

}  // namespace loopsched
