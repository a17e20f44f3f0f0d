#include "loopsched/sweep.hpp"

#include "loopsched/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace loopsched {

std::string sanitize_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::runtime_error("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

JobResult run_job(const JobSpec& spec) {
  if (spec.step_workloads.empty()) throw std::runtime_error("job: no workload");
  JobResult res;
  const bool timestepping = spec.step_workloads.size() > 1;

  if (spec.technique == "SIMAS") {
    res.is_simas = true;
    res.portfolio = spec.simas.portfolio;
    if (timestepping) {
      TimeSteppingInput in;
      in.platform = spec.platform.get();
      in.scenario = &spec.scenario;
      for (const auto& w : spec.step_workloads) in.step_workloads.push_back(w.get());
      in.dls = spec.dls;
      in.max_sim_time = spec.max_sim_time;
      in.request_msg_bytes = spec.request_msg_bytes;
      in.reply_msg_bytes = spec.reply_msg_bytes;
      SimasResult r = run_with_simas_time_stepping(in, spec.simas);
      res.outcome = std::move(r.outcome);
      res.step_outcomes = std::move(r.step_outcomes);
      res.selections = std::move(r.selections);
      res.prediction_cost_seconds = r.prediction_cost_seconds;
    } else {
      SimInput in;
      in.platform = spec.platform.get();
      in.workload = spec.step_workloads[0].get();
      in.scenario = &spec.scenario;
      in.dls = spec.dls;
      in.max_sim_time = spec.max_sim_time;
      in.request_msg_bytes = spec.request_msg_bytes;
      in.reply_msg_bytes = spec.reply_msg_bytes;
      in.record_chunk_log = spec.record_chunks;
      SimasResult r = run_with_simas(in, spec.simas);
      res.outcome = std::move(r.outcome);
      res.selections = std::move(r.selections);
      res.prediction_cost_seconds = r.prediction_cost_seconds;
    }
    const double span = res.outcome.sim_time;
    res.overhead_pct = span > 0 ? 100.0 * res.prediction_cost_seconds / span : 0.0;
    return res;
  }

  const Technique tech = technique_from_string(spec.technique);
  if (timestepping) {
    TimeSteppingInput in;
    in.platform = spec.platform.get();
    in.scenario = &spec.scenario;
    for (const auto& w : spec.step_workloads) in.step_workloads.push_back(w.get());
    in.technique = tech;
    in.dls = spec.dls;
    in.max_sim_time = spec.max_sim_time;
    in.request_msg_bytes = spec.request_msg_bytes;
    in.reply_msg_bytes = spec.reply_msg_bytes;
    res.step_outcomes = simulate_time_stepping(in);
    res.outcome = res.step_outcomes.back();
    res.outcome.finished_tasks = 0;
    res.outcome.chunk_log.clear();
    for (const auto& s : res.step_outcomes) {
      res.outcome.finished_tasks += s.finished_tasks;
      if (spec.record_chunks) {
        res.outcome.chunk_log.insert(res.outcome.chunk_log.end(), s.chunk_log.begin(), s.chunk_log.end());
      }
    }
  } else {
    SimInput in;
    in.platform = spec.platform.get();
    in.workload = spec.step_workloads[0].get();
    in.scenario = &spec.scenario;
    in.technique = tech;
    in.dls = spec.dls;
    in.max_sim_time = spec.max_sim_time;
    in.request_msg_bytes = spec.request_msg_bytes;
    in.reply_msg_bytes = spec.reply_msg_bytes;
    in.record_chunk_log = spec.record_chunks;
    res.outcome = simulate(in);
  }
  return res;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace

void write_job_outputs(const JobResult& r, const std::string& dir, bool chunks) {
  fs::create_directories(dir);

  std::string summary = "sim_time,finished_tasks\n";
  summary += num_str(r.outcome.sim_time) + "," + num_str(r.outcome.finished_tasks) + "\n";
  write_file(dir + "/summary.csv", summary);

  std::string per_pe = "pe,finish_time\n";
  for (std::size_t i = 0; i < r.outcome.per_pe_finish.size(); ++i) {
    per_pe += num_str(static_cast<i64>(i)) + "," + num_str(r.outcome.per_pe_finish[i]) + "\n";
  }
  write_file(dir + "/per_pe.csv", per_pe);

  if (chunks) {
    std::string log = "time_issued,pe,start,size,technique\n";
    for (const auto& c : r.outcome.chunk_log) {
      log += num_str(c.time_issued) + "," + num_str(static_cast<i64>(c.pe)) + "," + num_str(c.start) +
             "," + num_str(c.size) + "," + to_string(c.technique) + "\n";
    }
    write_file(dir + "/chunks.csv", log);
  }

  if (!r.step_outcomes.empty()) {
    std::string steps = "step,sim_time,finished_tasks\n";
    for (std::size_t i = 0; i < r.step_outcomes.size(); ++i) {
      steps += num_str(static_cast<i64>(i)) + "," + num_str(r.step_outcomes[i].sim_time) + "," +
               num_str(r.step_outcomes[i].finished_tasks) + "\n";
    }
    write_file(dir + "/steps.csv", steps);
  }

  if (r.is_simas) {
    std::string sel = "time,chosen,previous,reason";
    for (Technique t : r.portfolio) {
      sel += std::string(",pred_") + to_string(t) + "_time,pred_" + to_string(t) + "_tasks";
    }
    sel += "\n";
    for (const auto& e : r.selections) {
      sel += num_str(e.time) + "," + to_string(e.chosen) + "," + to_string(e.previous) + "," + e.reason;
      if (e.predictions.empty()) {
        for (std::size_t i = 0; i < r.portfolio.size(); ++i) sel += ",,";
      } else {
        for (const auto& p : e.predictions) {
          if (p.failed) {
            sel += ",,";
          } else {
            sel += "," + num_str(p.sim_time) + "," + num_str(p.finished_tasks);
          }
        }
      }
      sel += "\n";
    }
    sel += "# prediction_cost_seconds=" + num_str(r.prediction_cost_seconds) +
           " overhead_pct=" + num_str(r.overhead_pct) + "\n";
    write_file(dir + "/selections.csv", sel);
  }
}

void SweepManifest::validate() const {
  if (workloads.empty() || platforms.empty() || scenarios.empty() || techniques.empty()) {
    throw std::runtime_error("manifest: workload, platform, scenario and technique axes must be non-empty");
  }
  if (repetitions < 1) throw std::runtime_error("manifest: repetitions must be >= 1");
  if (n < 1) throw std::runtime_error("manifest: n must be >= 1");
  if (timesteps < 1) throw std::runtime_error("manifest: timesteps must be >= 1");
}

SweepManifest SweepManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  SweepManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string where = path + ":" + num_str(static_cast<i64>(lineno));
    if (tok[0] != "axis" || tok.size() < 3) throw std::runtime_error(where + ": expected 'axis <name> <values...>'");
    const std::string& name = tok[1];
    std::vector<std::string> vals(tok.begin() + 2, tok.end());
    if (name == "workload") m.workloads = vals;
    else if (name == "platform") m.platforms = vals;
    else if (name == "scenario") m.scenarios = vals;
    else if (name == "technique") m.techniques = vals;
    else if (name == "n") m.n = parse_int(vals[0], where);
    else if (name == "repetitions") m.repetitions = static_cast<int>(parse_int(vals[0], where));
    else if (name == "seed") m.seed = parse_u64(vals[0], where);
    else if (name == "timesteps") m.timesteps = static_cast<int>(parse_int(vals[0], where));
    else if (name == "max-sim-time") m.max_sim_time = parse_num(vals[0], where);
    else if (name == "h") m.overhead_h = parse_num(vals[0], where);
    else if (name == "sigma") m.sigma = parse_num(vals[0], where);
    else if (name == "portfolio") m.portfolio = vals[0];
    else if (name == "oracle") m.oracle = parse_int(vals[0], where) != 0;
    else if (name == "poll") m.poll = parse_num(vals[0], where);
    else if (name == "resim") m.resim = parse_num(vals[0], where);
    else throw std::runtime_error(where + ": unknown axis '" + name + "'");
  }
  m.validate();
  return m;
}

namespace {

struct CellRow {
  std::string workload, platform, scenario, technique;
  int rep = 0;
  bool failed = false;
  std::string error;
  double t_par = 0;
  i64 finished = 0;
  double cov = 0;
  double mean_max = 0;
  double overhead_pct = -1;
};

std::string platform_stem(const std::string& path) {
  fs::path p(path);
  return p.stem().string();
}

double mean_core_speed(const Platform& p) {
  double s = 0;
  for (const auto& h : p.hosts) s += h.core_speed;
  return s / static_cast<double>(p.pe_count());
}

std::vector<Technique> parse_portfolio(const std::string& csv) {
  if (csv.empty()) return SimasConfig::default_portfolio();
  std::vector<Technique> out;
  for (const auto& name : split_char(csv, ',')) {
    if (!name.empty()) out.push_back(technique_from_string(name));
  }
  if (out.empty()) throw std::runtime_error("empty portfolio");
  return out;
}

}  // namespace

void run_sweep(const SweepManifest& m, const std::string& manifest_text, const std::string& out_dir,
               int workers) {
  m.validate();
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/cells");
  write_file(out_dir + "/manifest.txt", manifest_text);

  // shared immutable inputs, prepared up front
  std::map<std::string, std::shared_ptr<const Platform>> platforms;
  for (const auto& p : m.platforms) {
    platforms[p] = std::make_shared<Platform>(load_platform(p));
  }
  std::map<std::pair<std::string, int>, std::vector<std::shared_ptr<const Workload>>> workloads;
  for (const auto& w : m.workloads) {
    for (int rep = 0; rep < m.repetitions; ++rep) {
      std::vector<std::shared_ptr<const Workload>> steps;
      if (is_workload_preset(w)) {
        for (int step = 0; step < m.timesteps; ++step) {
          u64 seed = m.timesteps == 1 ? m.seed + static_cast<u64>(rep)
                                      : splitmix64((m.seed + static_cast<u64>(rep)) ^ static_cast<u64>(step));
          steps.push_back(std::make_shared<Workload>(generate_workload(workload_preset(w, seed), m.n)));
        }
      } else {
        auto loaded = std::make_shared<Workload>(load_flop_file(w));
        for (int step = 0; step < m.timesteps; ++step) steps.push_back(loaded);
      }
      workloads[{w, rep}] = std::move(steps);
    }
  }

  struct Cell {
    std::string workload, platform, scenario, technique;
    int rep;
  };
  std::vector<Cell> cells;
  for (const auto& w : m.workloads)
    for (const auto& p : m.platforms)
      for (const auto& s : m.scenarios)
        for (const auto& t : m.techniques)
          for (int rep = 0; rep < m.repetitions; ++rep) cells.push_back(Cell{w, p, s, t, rep});

  std::vector<CellRow> rows(cells.size());

  int nworkers = workers;
  if (nworkers <= 0) {
    if (const char* env = std::getenv("LOOPSCHED_WORKERS")) nworkers = std::atoi(env);
    if (nworkers <= 0) nworkers = static_cast<int>(std::thread::hardware_concurrency());
    if (nworkers <= 0) nworkers = 1;
  }

  std::atomic<std::size_t> next{0};
  auto worker_fn = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& c = cells[i];
      CellRow row;
      row.workload = c.workload;
      row.platform = platform_stem(c.platform);
      row.scenario = c.scenario;
      row.technique = c.technique;
      row.rep = c.rep;
      try {
        JobSpec spec;
        spec.platform = platforms.at(c.platform);
        spec.step_workloads = workloads.at({c.workload, c.rep});
        spec.scenario = scenario_by_name(c.scenario, m.seed + static_cast<u64>(c.rep));
        spec.technique = c.technique;
        spec.dls.overhead_h = m.overhead_h;
        spec.dls.sigma = m.sigma >= 0
                             ? m.sigma
                             : workload_sigma(*spec.step_workloads[0], mean_core_speed(*spec.platform));
        spec.max_sim_time = m.max_sim_time;
        spec.simas.portfolio = parse_portfolio(m.portfolio);
        spec.simas.oracle_mode = m.oracle;
        spec.simas.poll_interval = m.poll;
        spec.simas.resim_interval = m.resim;
        if (m.timesteps > 1) spec.simas.default_technique = Technique::WF;

        JobResult r = run_job(spec);
        const std::string cell_dir = out_dir + "/cells/" + sanitize_name(c.workload) + "__" +
                                     sanitize_name(row.platform) + "__" + sanitize_name(c.scenario) +
                                     "__" + sanitize_name(c.technique) + "__r" + num_str(static_cast<i64>(c.rep));
        write_job_outputs(r, cell_dir, false);

        row.t_par = r.outcome.sim_time;
        row.finished = r.outcome.finished_tasks;
        auto imb = imbalance(r.outcome.per_pe_finish);
        row.cov = imb.cov;
        row.mean_max = imb.mean_max;
        if (r.is_simas) row.overhead_pct = r.overhead_pct;
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
      rows[i] = std::move(row);
    }
  };

  std::vector<std::thread> pool;
  for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker_fn);
  for (auto& t : pool) t.join();

  std::string results = "workload,platform,scenario,technique,rep,t_par,finished,cov,mean_max,simas_overhead_pct\n";
  std::string failures;
  for (const auto& r : rows) {
    if (r.failed) {
      failures += r.workload + "__" + r.platform + "__" + r.scenario + "__" + r.technique + "__r" +
                  num_str(static_cast<i64>(r.rep)) + "," + r.error + "\n";
      continue;
    }
    results += r.workload + "," + r.platform + "," + r.scenario + "," + r.technique + "," +
               num_str(static_cast<i64>(r.rep)) + "," + num_str(r.t_par) + "," + num_str(r.finished) +
               "," + num_str(r.cov) + "," + num_str(r.mean_max) + "," +
               (r.overhead_pct >= 0 ? num_str(r.overhead_pct) : std::string()) + "\n";
  }
  write_file(out_dir + "/sweep_results.csv", results);
  if (!failures.empty()) write_file(out_dir + "/failures.csv", "cell,error\n" + failures);
}

namespace {

struct ResultKey {
  std::string workload, platform, scenario, technique;
  bool operator<(const ResultKey& o) const {
    return std::tie(workload, platform, scenario, technique) <
           std::tie(o.workload, o.platform, o.scenario, o.technique);
  }
};

struct Agg {
  std::vector<double> t_par, cov, mean_max, overhead;
};

}  // namespace

void write_report(const std::string& results_dir, const std::string& out_dir) {
  std::ifstream in(results_dir + "/sweep_results.csv");
  if (!in) throw std::runtime_error("cannot open " + results_dir + "/sweep_results.csv");

  std::map<ResultKey, Agg> agg;
  std::vector<ResultKey> order;  // first-seen order, for deterministic output
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_char(line, ',');
    if (f.size() < 10) throw std::runtime_error("malformed sweep_results row: " + line);
    ResultKey key{f[0], f[1], f[2], f[3]};
    auto it = agg.find(key);
    if (it == agg.end()) {
      order.push_back(key);
      it = agg.emplace(key, Agg{}).first;
    }
    it->second.t_par.push_back(parse_num(f[5], "t_par"));
    it->second.cov.push_back(parse_num(f[7], "cov"));
    it->second.mean_max.push_back(parse_num(f[8], "mean_max"));
    if (!f[9].empty()) it->second.overhead.push_back(parse_num(f[9], "overhead"));
  }

  fs::create_directories(out_dir);

  // group keys per (workload, platform)
  std::vector<std::pair<std::string, std::string>> groups;
  for (const auto& k : order) {
    std::pair<std::string, std::string> g{k.workload, k.platform};
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }

  for (const auto& [wl, plat] : groups) {
    auto in_group = [&](const ResultKey& k) { return k.workload == wl && k.platform == plat; };

    double baseline = -1;
    for (const auto& k : order) {
      if (in_group(k) && k.technique == "STATIC" && k.scenario == "np") {
        baseline = median(agg.at(k).t_par);
      }
    }
    if (baseline <= 0) {
      throw std::runtime_error("report: missing STATIC/np baseline cell for " + wl + " on " + plat);
    }

    std::string report = "scenario,technique,t_par,cov,mean_max,normalized_pct\n";
    std::vector<std::string> scen_order, tech_order;
    for (const auto& k : order) {
      if (!in_group(k)) continue;
      const Agg& a = agg.at(k);
      const double t_par = median(a.t_par);
      report += k.scenario + "," + k.technique + "," + num_str(t_par) + "," + num_str(median(a.cov)) +
                "," + num_str(median(a.mean_max)) + "," +
                num_str(normalize_to_baseline(t_par, baseline)) + "\n";
      if (std::find(scen_order.begin(), scen_order.end(), k.scenario) == scen_order.end())
        scen_order.push_back(k.scenario);
      if (std::find(tech_order.begin(), tech_order.end(), k.technique) == tech_order.end())
        tech_order.push_back(k.technique);
    }
    const std::string suffix = sanitize_name(wl) + "_" + sanitize_name(plat);
    write_file(out_dir + "/report_" + suffix + ".csv", report);

    std::string heat = "technique";
    for (const auto& s : scen_order) heat += "," + s;
    heat += "\n";
    for (const auto& t : tech_order) {
      heat += t;
      for (const auto& s : scen_order) {
        ResultKey k{wl, plat, s, t};
        auto it = agg.find(k);
        heat += ",";
        if (it != agg.end()) heat += num_str(normalize_to_baseline(median(it->second.t_par), baseline));
      }
      heat += "\n";
    }
    write_file(out_dir + "/heatmap_" + suffix + ".csv", heat);

    // selection frequencies for SIMAS cells, aggregated over repetitions
    std::string freq = "scenario,technique,selected_pct,overhead_pct\n";
    bool any_simas = false;
    for (const auto& s : scen_order) {
      ResultKey k{wl, plat, s, "SIMAS"};
      auto it = agg.find(k);
      if (it == agg.end()) continue;
      any_simas = true;
      std::map<std::string, i64> counts;
      i64 total = 0;
      for (std::size_t rep = 0;; ++rep) {
        const std::string sel_path = results_dir + "/cells/" + sanitize_name(wl) + "__" +
                                     sanitize_name(plat) + "__" + sanitize_name(s) + "__SIMAS__r" +
                                     num_str(static_cast<i64>(rep)) + "/selections.csv";
        std::ifstream sin(sel_path);
        if (!sin) break;
        std::string sl;
        std::getline(sin, sl);  // header
        while (std::getline(sin, sl)) {
          if (sl.empty() || sl[0] == '#') continue;
          auto sf = split_char(sl, ',');
          if (sf.size() >= 2) {
            ++counts[sf[1]];
            ++total;
          }
        }
      }
      const double overhead = it->second.overhead.empty() ? 0.0 : median(it->second.overhead);
      for (const auto& [tech, cnt] : counts) {
        freq += s + "," + tech + "," + num_str(100.0 * static_cast<double>(cnt) / static_cast<double>(total)) +
                "," + num_str(overhead) + "\n";
      }
    }
    if (any_simas) write_file(out_dir + "/selection_frequency_" + suffix + ".csv", freq);
  }
}

}  // namespace loopsched
