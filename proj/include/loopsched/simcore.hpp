#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "loopsched/dls.hpp"
#include "loopsched/perturbation.hpp"
#include "loopsched/platform.hpp"
#include "loopsched/workload.hpp"

namespace loopsched {

struct SimInput {
  const Platform* platform = nullptr;
  const Workload* workload = nullptr;
  const Scenario* scenario = nullptr;
  Technique technique = Technique::SS;
  DlsConfig dls;  // total_iterations/pe_count filled from workload/platform if zero

  i64 start_task = 0;
  double start_time = 0;
  double max_sim_time = kInf;
  double request_msg_bytes = 32;
  double reply_msg_bytes = 32;
  double master_poll_interval = 0;  // 0: serve work requests on arrival

  bool record_chunk_log = true;
  std::vector<PeSchedStats> carried_stats;  // optional adaptive-state seed

  void validate() const;
};

struct ChunkRecord {
  double time_issued = 0;
  int pe = 0;
  i64 start = 0;
  i64 size = 0;
  Technique technique = Technique::SS;
  double request_time = 0;
  double exec_start = 0;
  double exec_end = 0;
  double flops = 0;
  bool completed = false;
};

struct SimOutcome {
  double sim_time = 0;
  i64 finished_tasks = 0;
  bool cut_off = false;
  std::vector<double> per_pe_finish;
  std::vector<ChunkRecord> chunk_log;
  std::vector<PeSchedStats> final_stats;
  u64 event_count = 0;
};

/// Completed-chunk summary kept for system-state estimation.
struct RecentChunk {
  int pe;
  double flops;
  double compute_duration;
  double end_time;
};

class Engine;

/// Hook driven by the engine at startup and at every work-request service point.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void at_start(double now, Engine& engine) { (void)now; (void)engine; }
  virtual void at_service(double now, Engine& engine) { (void)now; (void)engine; }
};

class Engine {
 public:
  Engine(const SimInput& input, Controller* controller = nullptr);
  SimOutcome run();

  double now() const { return now_; }
  Technique current_technique() const { return dls_.technique(); }
  i64 remaining() const { return dls_.remaining(); }
  /// First not-yet-scheduled iteration index (absolute).
  i64 scheduled_global() const { return base_task_ + dls_.scheduled(); }
  std::vector<PeSchedStats> stats_snapshot() const { return dls_.stats(); }
  const DlsState& dls() const { return dls_; }

  /// Non-preemptive technique switch: in-flight chunks finish under the old
  /// technique; the remainder is rescheduled by the new one with carried
  /// adaptive statistics.
  void switch_technique(Technique t);

  void set_recent_window(double seconds) { recent_window_ = seconds; }
  const std::deque<RecentChunk>& recent_chunks() const { return recent_; }

 private:
  struct Event {
    double t;
    u64 seq;
    int kind;  // 0 request-arrive, 1 reply-arrive, 2 chunk-done, 3 master-poll
    int pe;
  };
  struct EventCmp {
    bool operator()(const Event& a, const Event& b) const {
      return a.t > b.t || (a.t == b.t && a.seq > b.seq);
    }
  };
  struct PeRt {
    double request_sent = 0;
    double issue_time = 0;
    double exec_start = 0;
    i64 cur_start = 0;
    i64 cur_size = 0;
    double cur_flops = 0;
    std::size_t log_index = 0;
    bool has_chunk = false;
  };

  void push(double t, int kind, int pe);
  double msg_cost(double t, double bytes, int pe) const;
  double finish_time(int pe, double t0, double flops) const;
  void service_request(int pe);
  void begin_compute(int pe);
  void on_chunk_done(int pe);
  void send_request(int pe);

  SimInput in_;
  Controller* controller_ = nullptr;
  const PerturbationSpec* avail_ = nullptr;
  const PerturbationSpec* bw_ = nullptr;
  const PerturbationSpec* lat_ = nullptr;

  DlsState dls_;
  i64 base_task_ = 0;
  i64 total_tasks_ = 0;
  int master_ = 0;

  double now_ = 0;
  u64 seq_ = 0;
  u64 events_ = 0;
  bool cut_off_ = false;
  std::vector<Event> heap_;
  std::vector<PeRt> pes_;
  std::vector<double> finish_;
  std::vector<std::pair<double, int>> poll_queue_;  // (arrival, pe) when master_poll_interval > 0
  i64 finished_tasks_ = 0;
  std::vector<ChunkRecord> log_;

  double recent_window_ = 0;
  std::deque<RecentChunk> recent_;
};

SimOutcome simulate(const SimInput& input);

/// Closed-form chunk finish time: solves the work integral over the
/// piecewise-constant availability trace.
double chunk_finish_time(double nominal_speed, const PerturbationSpec* availability, double t0,
                         double flops);

struct TimeSteppingInput {
  const Platform* platform = nullptr;
  const Scenario* scenario = nullptr;
  std::vector<const Workload*> step_workloads;
  Technique technique = Technique::SS;
  DlsConfig dls;
  bool carry_weights = true;
  double start_time = 0;
  double max_sim_time = kInf;
  double request_msg_bytes = 32;
  double reply_msg_bytes = 32;
};

std::vector<SimOutcome> simulate_time_stepping(const TimeSteppingInput& input);

/// Eq. percent error between native and simulated times: (1 - t_sim/t_native) * 100.
double percent_error(double t_native, double t_sim);

}  // namespace loopsched
