#include "loopsched/workload.hpp"

#include <cmath>
#include <fstream>

#include "loopsched/rng.hpp"

namespace loopsched {

void Workload::rebuild_prefix() {
  prefix.assign(flops.size() + 1, 0.0);
  for (std::size_t i = 0; i < flops.size(); ++i) prefix[i + 1] = prefix[i] + flops[i];
}

void Workload::validate() const {
  if (flops.empty()) throw std::runtime_error("workload: empty");
  for (std::size_t i = 0; i < flops.size(); ++i) {
    if (!(flops[i] > 0)) {
      throw std::runtime_error("workload: nonpositive FLOP count at iteration " + num_str(static_cast<i64>(i)));
    }
  }
}

DistributionSpec::Kind DistributionSpec::kind_from_string(const std::string& s) {
  if (s == "constant") return Kind::Constant;
  if (s == "uniform") return Kind::Uniform;
  if (s == "normal") return Kind::Normal;
  if (s == "exponential") return Kind::Exponential;
  if (s == "gamma") return Kind::Gamma;
  throw std::runtime_error("unknown distribution kind '" + s + "'");
}

std::string DistributionSpec::to_string() const {
  switch (kind) {
    case Kind::Constant: return "constant(" + num_str(value) + ")";
    case Kind::Uniform: return "uniform[" + num_str(lo) + "," + num_str(hi) + "]";
    case Kind::Normal:
      return "normal(mu=" + num_str(mean) + ",sigma=" + num_str(stddev) + ")[" + num_str(lo) + "," + num_str(hi) + "]";
    case Kind::Exponential:
      return "exponential(rate=" + num_str(rate) + ")[" + num_str(lo) + "," + num_str(hi) + "]";
    case Kind::Gamma:
      return "gamma(k=" + num_str(shape) + ",theta=" + num_str(scale) + ")[" + num_str(lo) + "," + num_str(hi) + "]";
  }
  return "?";
}

void DistributionSpec::validate() const {
  auto bounds_ok = [&] {
    if (!(lo >= 0)) throw std::runtime_error("distribution: lo must be >= 0");
    if (!(lo < hi)) throw std::runtime_error("distribution: lo must be < hi");
  };
  switch (kind) {
    case Kind::Constant:
      if (!(value > 0)) throw std::runtime_error("distribution: constant value must be > 0");
      break;
    case Kind::Uniform:
      if (!(lo > 0)) throw std::runtime_error("distribution: uniform lo must be > 0");
      if (!(lo < hi) || !std::isfinite(hi)) throw std::runtime_error("distribution: uniform needs 0 < lo < hi");
      break;
    case Kind::Normal:
      if (!(mean > 0) || !(stddev > 0)) throw std::runtime_error("distribution: normal needs mu > 0, sigma > 0");
      bounds_ok();
      break;
    case Kind::Exponential:
      if (!(rate > 0)) throw std::runtime_error("distribution: exponential rate must be > 0");
      bounds_ok();
      break;
    case Kind::Gamma:
      if (!(shape > 0) || !(scale > 0)) throw std::runtime_error("distribution: gamma needs k > 0, theta > 0");
      bounds_ok();
      break;
  }
}

Workload generate_workload(const DistributionSpec& spec, i64 n) {
  spec.validate();
  if (n < 1) throw std::runtime_error("generate_workload: n must be >= 1");

  Workload w;
  w.flops.reserve(static_cast<std::size_t>(n));

  if (spec.kind == DistributionSpec::Kind::Constant) {
    w.flops.assign(static_cast<std::size_t>(n), spec.value);
    w.rebuild_prefix();
    return w;
  }

  SampleStream rng(spec.seed);
  constexpr int kMaxAttempts = 100000;
  for (i64 i = 0; i < n; ++i) {
    double x = 0;
    int attempts = 0;
    for (;;) {
      switch (spec.kind) {
        case DistributionSpec::Kind::Uniform: x = rng.uniform(spec.lo, spec.hi); break;
        case DistributionSpec::Kind::Normal: x = rng.normal(spec.mean, spec.stddev); break;
        case DistributionSpec::Kind::Exponential: x = rng.exponential(1.0 / spec.rate); break;
        case DistributionSpec::Kind::Gamma: x = rng.gamma(spec.shape, spec.scale); break;
        default: break;
      }
      if (x > 0 && x >= spec.lo && x <= spec.hi) break;
      if (++attempts > kMaxAttempts) {
        throw std::runtime_error("generate_workload: truncation bounds reject too many samples for " +
                                 spec.to_string());
      }
    }
    w.flops.push_back(x);
  }
  w.rebuild_prefix();
  return w;
}

Workload load_flop_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open FLOP file " + path);
  Workload w;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string where = path + ":" + num_str(static_cast<i64>(lineno));
    if (tok.size() != 1) throw std::runtime_error(where + ": expected one number per line");
    double v = parse_num(tok[0], where);
    if (!(v > 0)) throw std::runtime_error(where + ": nonpositive FLOP count");
    w.flops.push_back(v);
  }
  if (w.flops.empty()) throw std::runtime_error(path + ": empty FLOP file");
  w.rebuild_prefix();
  return w;
}

void store_flop_file(const Workload& w, const std::string& path) {
  w.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write FLOP file " + path);
  for (double v : w.flops) out << num_str(v) << "\n";
}

double workload_sigma(const Workload& w, double speed) {
  if (!(speed > 0)) throw std::runtime_error("workload_sigma: speed must be > 0");
  w.validate();
  const double n = static_cast<double>(w.n());
  double mean = 0;
  for (double v : w.flops) mean += v;
  mean /= n;
  double ss = 0;
  for (double v : w.flops) {
    double d = v - mean;
    ss += d * d;
  }
  return std::sqrt(ss / n) / speed;
}

bool is_workload_preset(const std::string& name) {
  return name == "constant" || name == "uniform" || name == "normal" || name == "exponential" ||
         name == "gamma";
}

DistributionSpec workload_preset(const std::string& name, u64 seed) {
  DistributionSpec s;
  s.seed = seed;
  if (name == "constant") {
    s.kind = DistributionSpec::Kind::Constant;
    s.value = 2.3e8;
  } else if (name == "uniform") {
    s.kind = DistributionSpec::Kind::Uniform;
    s.lo = 1e3;
    s.hi = 7e8;
  } else if (name == "normal") {
    s.kind = DistributionSpec::Kind::Normal;
    s.mean = 9.5e8;
    s.stddev = 7e7;
    s.lo = 6e8;
    s.hi = 1.3e9;
  } else if (name == "exponential") {
    s.kind = DistributionSpec::Kind::Exponential;
    s.rate = 1.0 / 3e8;
    s.lo = 9.48e2;
    s.hi = 4.5e9;
  } else if (name == "gamma") {
    s.kind = DistributionSpec::Kind::Gamma;
    s.shape = 2.0;
    s.scale = 1e8;
    s.lo = 4.1e6;
    s.hi = 2.7e9;
  } else {
    throw std::runtime_error("unknown workload preset '" + name + "'");
  }
  return s;
}

}  // namespace loopsched
