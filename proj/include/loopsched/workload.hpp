#pragma once

#include <string>
#include <vector>

#include "loopsched/common.hpp"

namespace loopsched {

/// FLOP count per loop iteration; iteration id = index.
struct Workload {
  std::vector<double> flops;
  std::vector<double> prefix;  // prefix[i] = sum of flops[0..i)

  i64 n() const { return static_cast<i64>(flops.size()); }

  void rebuild_prefix();

  /// Total FLOP of iterations [start, start+size).
  double range_flops(i64 start, i64 size) const { return prefix[start + size] - prefix[start]; }

  void validate() const;
};

struct DistributionSpec {
  enum class Kind { Constant, Uniform, Normal, Exponential, Gamma };

  Kind kind = Kind::Constant;
  double value = 0;            // constant
  double lo = 0, hi = kInf;    // uniform range / truncation bounds
  double mean = 0, stddev = 0; // normal
  double rate = 0;             // exponential (mean = 1/rate)
  double shape = 0, scale = 0; // gamma
  u64 seed = 0;

  void validate() const;
  static Kind kind_from_string(const std::string& s);
  std::string to_string() const;
};

/// Deterministic for a fixed (spec, n); truncation by rejection resampling.
Workload generate_workload(const DistributionSpec& spec, i64 n);

Workload load_flop_file(const std::string& path);
void store_flop_file(const Workload& w, const std::string& path);

/// Population standard deviation of per-iteration times flops_i / speed.
double workload_sigma(const Workload& w, double speed);

/// The five synthetic workload presets (constant, uniform, normal, exponential, gamma).
DistributionSpec workload_preset(const std::string& name, u64 seed);
bool is_workload_preset(const std::string& name);

}  // namespace loopsched
