#pragma once

#include <vector>

#include "loopsched/common.hpp"

namespace loopsched {

struct ImbalanceReport {
  double cov = 0;       // population sigma / mean of PE finishing times
  double mean_max = 1;  // mean / max, 1 = perfect balance
  double t_par = 0;     // parallel loop time = max PE finish
};

ImbalanceReport imbalance(const std::vector<double>& per_pe_finish);

/// Percent of baseline: 100 = baseline, > 100 degraded, < 100 improved.
double normalize_to_baseline(double t_par, double baseline);

}  // namespace loopsched
