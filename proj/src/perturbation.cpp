#include "loopsched/perturbation.hpp"

#include <cmath>
#include <fstream>

#include "loopsched/rng.hpp"

namespace loopsched {

const char* to_string(PerturbTarget t) {
  switch (t) {
    case PerturbTarget::Availability: return "availability";
    case PerturbTarget::Bandwidth: return "bandwidth";
    case PerturbTarget::Latency: return "latency";
  }
  return "?";
}

PerturbTarget perturb_target_from_string(const std::string& s) {
  if (s == "availability") return PerturbTarget::Availability;
  if (s == "bandwidth") return PerturbTarget::Bandwidth;
  if (s == "latency") return PerturbTarget::Latency;
  throw std::runtime_error("unknown perturbation target '" + s + "'");
}

void PerturbationSpec::validate() const {
  if (!(mean_factor > 0 && mean_factor <= 1)) throw std::runtime_error("perturbation: mean factor must be in (0,1]");
  if (!(sigma_factor >= 0)) throw std::runtime_error("perturbation: sigma factor must be >= 0");
  if (!(period > 0)) throw std::runtime_error("perturbation: period must be > 0");
  if (!(duty > 0 && duty <= 1)) throw std::runtime_error("perturbation: duty must be in (0,1]");
  if (!(onset >= 0)) throw std::runtime_error("perturbation: onset must be >= 0");
}

double PerturbationSpec::factor_at(double t) const {
  if (t < onset) return 1.0;
  const double rel = t - onset;
  const double k = std::floor(rel / period);
  const double frac = rel - k * period;
  if (frac >= duty * period) return 1.0;
  if (distribution == Distribution::Constant) return mean_factor;
  // one draw per period, memoized via a counter-based stream
  const u64 bits = splitmix64(seed + 0x9e3779b97f4a7c15ull * (static_cast<u64>(k) + 1));
  double x = -mean_factor * std::log(1.0 - unit_double(bits));
  if (x > 1.0) x = 1.0;
  if (x < 1e-9) x = 1e-9;
  return x;
}

double PerturbationSpec::next_breakpoint(double t) const {
  if (t < onset) return onset;
  const double rel = t - onset;
  const double k = std::floor(rel / period);
  const double frac = rel - k * period;
  if (frac < duty * period) return onset + k * period + duty * period;
  return onset + (k + 1) * period;
}

const PerturbationSpec* Scenario::spec_for(PerturbTarget t) const {
  for (const auto& s : specs) {
    if (s.target == t) return &s;
  }
  return nullptr;
}

void Scenario::validate() const {
  int count[3] = {0, 0, 0};
  for (const auto& s : specs) {
    s.validate();
    ++count[static_cast<int>(s.target)];
  }
  for (int c : count) {
    if (c > 1) throw std::runtime_error("scenario " + name + ": more than one spec per target");
  }
}

namespace {

PerturbationSpec make_spec(PerturbTarget target, PerturbationSpec::Distribution dist, double mean,
                           double sigma, u64 seed_base, const std::string& scenario_name) {
  PerturbationSpec s;
  s.target = target;
  s.distribution = dist;
  s.mean_factor = mean;
  s.sigma_factor = sigma;
  s.onset = (target == PerturbTarget::Availability) ? 50.0 : 0.0;
  s.period = 100.0;
  s.duty = 0.5;
  s.seed = splitmix64(seed_base ^ fnv1a64(scenario_name + "/" + to_string(target)));
  return s;
}

}  // namespace

std::vector<Scenario> standard_scenarios(u64 seed_base) {
  using D = PerturbationSpec::Distribution;
  std::vector<Scenario> out;
  out.push_back({"np", {}});

  struct Entry {
    const char* suffix;
    D dist;
    double pea_mu, pea_sigma;
    double bw_mu, bw_sigma;
    double lat_mu, lat_sigma;
  };
  // Means and sigmas as fractions of nominal.
  const Entry entries[] = {
      {"cm", D::Constant, 0.75, 0.0, 1e-7, 0.0, 1e-7, 0.0},
      {"cs", D::Constant, 0.25, 0.0, 1e-9, 0.0, 1e-9, 0.0},
      {"em", D::Exponential, 0.78, 2.4e-4, 1.1e-3, 9e-4, 1.2e-7, 1.5e-7},
      {"es", D::Exponential, 0.31, 8.9e-4, 2.3e-3, 1.9e-3, 2.9e-9, 1.8e-9},
  };

  for (const auto& e : entries) {
    std::string sfx = e.suffix;
    Scenario pea{"pea-" + sfx, {}};
    pea.specs.push_back(make_spec(PerturbTarget::Availability, e.dist, e.pea_mu, e.pea_sigma, seed_base, pea.name));
    Scenario bw{"bw-" + sfx, {}};
    bw.specs.push_back(make_spec(PerturbTarget::Bandwidth, e.dist, e.bw_mu, e.bw_sigma, seed_base, bw.name));
    Scenario lat{"lat-" + sfx, {}};
    lat.specs.push_back(make_spec(PerturbTarget::Latency, e.dist, e.lat_mu, e.lat_sigma, seed_base, lat.name));
    Scenario all{"all-" + sfx, {}};
    all.specs = {pea.specs[0], bw.specs[0], lat.specs[0]};
    out.push_back(std::move(pea));
    out.push_back(std::move(bw));
    out.push_back(std::move(lat));
    out.push_back(std::move(all));
  }
  for (auto& s : out) s.validate();
  return out;
}

Scenario scenario_by_name(const std::string& name, u64 seed_base) {
  for (auto& s : standard_scenarios(seed_base)) {
    if (s.name == name) return s;
  }
  throw std::runtime_error("unknown scenario '" + name + "'");
}

Scenario load_scenario_file(const std::string& path, u64 seed_base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  Scenario scen;
  auto slash = path.find_last_of('/');
  std::string stem = (slash == std::string::npos) ? path : path.substr(slash + 1);
  auto dot = stem.find_last_of('.');
  if (dot != std::string::npos) stem.erase(dot);
  scen.name = stem;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string where = path + ":" + num_str(static_cast<i64>(lineno));
    if (tok[0] != "perturb" || tok.size() != 8) {
      throw std::runtime_error(where + ": expected 'perturb <target> <constant|exponential> "
                               "<mean_factor> <sigma_factor> <onset_s> <period_s> <duty>'");
    }
    PerturbationSpec s;
    s.target = perturb_target_from_string(tok[1]);
    if (tok[2] == "constant") {
      s.distribution = PerturbationSpec::Distribution::Constant;
    } else if (tok[2] == "exponential") {
      s.distribution = PerturbationSpec::Distribution::Exponential;
    } else {
      throw std::runtime_error(where + ": unknown distribution '" + tok[2] + "'");
    }
    s.mean_factor = parse_num(tok[3], where);
    s.sigma_factor = parse_num(tok[4], where);
    s.onset = parse_num(tok[5], where);
    s.period = parse_num(tok[6], where);
    s.duty = parse_num(tok[7], where);
    s.seed = splitmix64(seed_base ^ fnv1a64(scen.name + "/" + to_string(s.target)));
    s.validate();
    scen.specs.push_back(s);
  }
  scen.validate();
  return scen;
}

double effective_speed(const Host& h, const Scenario& s, double t) {
  const auto* spec = s.spec_for(PerturbTarget::Availability);
  return spec ? h.core_speed * spec->factor_at(t) : h.core_speed;
}

double effective_bandwidth(const Link& l, const Scenario& s, double t) {
  const auto* spec = s.spec_for(PerturbTarget::Bandwidth);
  return spec ? l.bandwidth * spec->factor_at(t) : l.bandwidth;
}

double effective_latency(const Link& l, const Scenario& s, double t) {
  const auto* spec = s.spec_for(PerturbTarget::Latency);
  return spec ? l.latency / spec->factor_at(t) : l.latency;
}

}  // namespace loopsched
