#include "loopsched/simas.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <iostream>

namespace loopsched {

std::vector<Technique> SimasConfig::default_portfolio() {
  std::vector<Technique> v;
  for (Technique t : all_techniques()) {
    if (t == Technique::GSS || t == Technique::TSS || t == Technique::FAC) continue;
    v.push_back(t);
  }
  return v;
}

void SimasConfig::validate() const {
  if (portfolio.empty()) throw std::runtime_error("simas: portfolio must not be empty");
  if (!(poll_interval > 0)) throw std::runtime_error("simas: poll interval must be > 0");
  if (!(resim_interval >= poll_interval)) throw std::runtime_error("simas: poll interval must not exceed resim interval");
  if (!(prediction_horizon > 0)) throw std::runtime_error("simas: prediction horizon must be > 0");
  if (min_remaining < 0) throw std::runtime_error("simas: min remaining must be >= 0");
}

int rank_predictions(const std::vector<TechPrediction>& preds) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(preds.size()); ++i) {
    if (preds[i].failed) continue;
    if (best < 0) {
      best = i;
      continue;
    }
    const auto& a = preds[i];
    const auto& b = preds[best];
    if (a.finished_tasks > b.finished_tasks ||
        (a.finished_tasks == b.finished_tasks && a.sim_time < b.sim_time)) {
      best = i;
    }
  }
  return best;
}

std::vector<double> estimate_pe_factors(const std::deque<RecentChunk>& recent, const Platform& platform,
                                        double now, double window) {
  std::vector<double> flops(platform.hosts.size(), 0.0);
  std::vector<double> time(platform.hosts.size(), 0.0);
  for (const auto& c : recent) {
    if (c.end_time <= now - window || c.end_time > now) continue;
    flops[static_cast<std::size_t>(c.pe)] += c.flops;
    time[static_cast<std::size_t>(c.pe)] += c.compute_duration;
  }
  std::vector<double> factors(platform.hosts.size(), 1.0);
  for (std::size_t i = 0; i < platform.hosts.size(); ++i) {
    if (time[i] <= 0) continue;
    double f = (flops[i] / time[i]) / platform.hosts[i].core_speed;
    factors[i] = std::clamp(f, 1e-9, 1.5);
  }
  return factors;
}

namespace {

struct SubOutcome {
  double sim_time = 0;
  i64 finished = 0;
  u64 events = 0;
  double wall_seconds = 0;
  bool failed = false;
};

/// Snapshot shared by one prediction batch; keeps estimator overrides alive
/// while the sub-simulations run.
struct BatchContext {
  std::shared_ptr<Platform> platform_override;
  std::shared_ptr<Scenario> scenario_override;
  std::vector<PeSchedStats> stats;
};

class SimasController : public Controller {
 public:
  SimasController(const SimInput& base, const SimasConfig& cfg, SimasResult* out)
      : base_(base), cfg_(cfg), out_(out) {
    window_ = cfg_.estimate_window > 0 ? cfg_.estimate_window : cfg_.resim_interval;
  }

  void at_start(double now, Engine& engine) override {
    discard_pending();
    setup_consumed_ = false;
    last_check_ = -kInf;
    out_->selections.push_back(SelectionEvent{now, engine.current_technique(),
                                              engine.current_technique(), "default", {}});
    launch(now, engine);
  }

  void at_service(double now, Engine& engine) override {
    const bool first = !setup_consumed_ && pending_ && now > launch_time_;
    if (!(first || now >= last_check_ + cfg_.poll_interval)) return;
    last_check_ = now;
    if (pending_ && now > launch_time_) consume(now, engine);
    if (!pending_ && now - last_launch_ >= cfg_.resim_interval &&
        engine.remaining() > min_remaining(engine)) {
      launch(now, engine);
    }
  }

  void finalize() { discard_pending(); }

 private:
  i64 min_remaining(const Engine& engine) const {
    (void)engine;
    return cfg_.min_remaining > 0 ? cfg_.min_remaining : base_.platform->pe_count();
  }

  void launch(double now, Engine& engine) {
    const i64 start_task = engine.scheduled_global();
    if (base_.workload->n() - start_task <= 0) return;

    auto ctx = std::make_shared<BatchContext>();
    ctx->stats = engine.stats_snapshot();
    if (!cfg_.oracle_mode) {
      auto factors = estimate_pe_factors(engine.recent_chunks(), *base_.platform, now, window_);
      auto plat = std::make_shared<Platform>(*base_.platform);
      for (std::size_t i = 0; i < plat->hosts.size(); ++i) plat->hosts[i].core_speed *= factors[i];
      ctx->platform_override = std::move(plat);
      ctx->scenario_override = std::make_shared<Scenario>(Scenario{"np", {}});
    }

    futures_.clear();
    for (Technique t : cfg_.portfolio) {
      SimInput sub = base_;
      sub.technique = t;
      sub.start_task = start_task;
      sub.start_time = now;
      sub.max_sim_time = cfg_.prediction_horizon == kInf
                             ? base_.max_sim_time
                             : std::min(base_.max_sim_time, now + cfg_.prediction_horizon);
      sub.dls.total_iterations = 0;  // filled from the workload tail
      sub.record_chunk_log = false;
      sub.carried_stats = ctx->stats;
      if (ctx->platform_override) sub.platform = ctx->platform_override.get();
      if (ctx->scenario_override) sub.scenario = ctx->scenario_override.get();
      futures_.push_back(std::async(std::launch::async, [sub, ctx]() {
        SubOutcome r;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          SimOutcome o = simulate(sub);
          r.sim_time = o.sim_time;
          r.finished = o.finished_tasks;
          r.events = o.event_count;
        } catch (const std::exception& e) {
          std::cerr << "simas: prediction failed: " << e.what() << "\n";
          r.failed = true;
        }
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
      }));
    }
    pending_ = true;
    launch_time_ = now;
    last_launch_ = now;
    ++out_->batches_launched;
  }

  std::vector<TechPrediction> collect() {
    std::vector<TechPrediction> preds;
    preds.reserve(futures_.size());
    for (std::size_t i = 0; i < futures_.size(); ++i) {
      SubOutcome r = futures_[i].get();
      out_->prediction_events += r.events;
      out_->prediction_wall_seconds += r.wall_seconds;
      preds.push_back(TechPrediction{cfg_.portfolio[i], r.sim_time, r.finished, r.failed});
    }
    futures_.clear();
    pending_ = false;
    return preds;
  }

  void consume(double now, Engine& engine) {
    auto preds = collect();
    setup_consumed_ = true;
    const int best = rank_predictions(preds);
    if (best < 0) return;  // every sub-simulation failed; keep the current technique
    const Technique winner = cfg_.portfolio[static_cast<std::size_t>(best)];
    const Technique prev = engine.current_technique();
    out_->selections.push_back(
        SelectionEvent{now, winner, prev, winner == prev ? "keep" : "switch", std::move(preds)});
    if (winner != prev) engine.switch_technique(winner);
  }

  void discard_pending() {
    if (!pending_) return;
    (void)collect();
  }

  const SimInput& base_;
  const SimasConfig& cfg_;
  SimasResult* out_;
  double window_ = 0;

  std::vector<std::future<SubOutcome>> futures_;
  bool pending_ = false;
  bool setup_consumed_ = true;
  double launch_time_ = 0;
  double last_launch_ = -kInf;
  double last_check_ = -kInf;
};

}  // namespace

SimasResult run_with_simas(const SimInput& base, const SimasConfig& cfg) {
  cfg.validate();
  SimasResult res;
  SimInput input = base;
  input.technique = cfg.default_technique;
  SimasController ctl(input, cfg, &res);
  Engine engine(input, &ctl);
  if (!cfg.oracle_mode) {
    engine.set_recent_window(cfg.estimate_window > 0 ? cfg.estimate_window : cfg.resim_interval);
  }
  res.outcome = engine.run();
  ctl.finalize();
  res.prediction_cost_seconds = static_cast<double>(res.prediction_events) / kPredictionEventRate;
  return res;
}

SimasResult run_with_simas_time_stepping(const TimeSteppingInput& base, const SimasConfig& cfg) {
  cfg.validate();
  if (base.step_workloads.empty()) throw std::runtime_error("time stepping: needs at least one step");
  SimasResult res;
  double t = base.start_time;
  std::vector<PeSchedStats> carried;

  for (const Workload* w : base.step_workloads) {
    if (t >= base.max_sim_time) break;
    SimInput step;
    step.platform = base.platform;
    step.workload = w;
    step.scenario = base.scenario;
    step.technique = cfg.default_technique;
    step.dls = base.dls;
    step.dls.total_iterations = 0;
    step.start_time = t;
    step.max_sim_time = base.max_sim_time;
    step.request_msg_bytes = base.request_msg_bytes;
    step.reply_msg_bytes = base.reply_msg_bytes;
    if (base.carry_weights) step.carried_stats = carried;

    SimasController ctl(step, cfg, &res);
    Engine engine(step, &ctl);
    if (!cfg.oracle_mode) {
      engine.set_recent_window(cfg.estimate_window > 0 ? cfg.estimate_window : cfg.resim_interval);
    }
    SimOutcome out = engine.run();
    ctl.finalize();
    t = out.sim_time;
    carried = out.final_stats;
    const bool cut = out.cut_off;
    res.step_outcomes.push_back(std::move(out));
    if (cut) break;
  }

  // aggregate view: final time, total finished work, per-step logs concatenated
  res.outcome = res.step_outcomes.back();
  res.outcome.finished_tasks = 0;
  res.outcome.chunk_log.clear();
  for (const auto& s : res.step_outcomes) {
    res.outcome.finished_tasks += s.finished_tasks;
    res.outcome.chunk_log.insert(res.outcome.chunk_log.end(), s.chunk_log.begin(), s.chunk_log.end());
  }
  res.prediction_cost_seconds = static_cast<double>(res.prediction_events) / kPredictionEventRate;
  return res;
}

}  // namespace loopsched
