#include "loopsched/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loopsched {

ImbalanceReport imbalance(const std::vector<double>& per_pe_finish) {
  if (per_pe_finish.size() < 2) throw std::runtime_error("imbalance: needs at least 2 finish times");
  double mean = 0;
  double maxv = 0;
  for (double f : per_pe_finish) {
    if (!(f > 0)) throw std::runtime_error("imbalance: finish times must be > 0");
    mean += f;
    maxv = std::max(maxv, f);
  }
  mean /= static_cast<double>(per_pe_finish.size());
  double ss = 0;
  for (double f : per_pe_finish) {
    double d = f - mean;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss / static_cast<double>(per_pe_finish.size()));
  ImbalanceReport r;
  r.cov = sigma / mean;
  r.mean_max = mean / maxv;
  r.t_par = maxv;
  return r;
}

double normalize_to_baseline(double t_par, double baseline) {
  if (!(baseline > 0)) throw std::runtime_error("normalize: baseline must be > 0");
  return 100.0 * t_par / baseline;
}

}  // namespace loopsched
