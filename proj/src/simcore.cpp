#include "loopsched/simcore.hpp"

#include <algorithm>
#include <cmath>

namespace loopsched {

void SimInput::validate() const {
  if (!platform || !workload || !scenario) throw std::runtime_error("sim: platform, workload, scenario required");
  platform->validate();
  workload->validate();
  scenario->validate();
  if (start_task < 0 || start_task >= workload->n()) throw std::runtime_error("sim: start task out of range");
  if (!(start_time >= 0)) throw std::runtime_error("sim: start time must be >= 0");
  if (!(max_sim_time > start_time)) throw std::runtime_error("sim: max sim time must exceed start time");
  if (!(request_msg_bytes >= 0 && reply_msg_bytes >= 0)) throw std::runtime_error("sim: message sizes must be >= 0");
  if (!(master_poll_interval >= 0)) throw std::runtime_error("sim: master poll interval must be >= 0");
}

double chunk_finish_time(double nominal_speed, const PerturbationSpec* availability, double t0,
                         double flops) {
  if (!availability) return t0 + flops / nominal_speed;
  double t = t0;
  double rem = flops;
  for (;;) {
    const double rate = nominal_speed * availability->factor_at(t);
    const double bp = availability->next_breakpoint(t);
    const double dt = rem / rate;
    if (t + dt <= bp) return t + dt;
    rem -= rate * (bp - t);
    t = bp;
    if (rem <= 0) return t;
  }
}

Engine::Engine(const SimInput& input, Controller* controller) : in_(input), controller_(controller) {
  in_.validate();
  const int p = in_.platform->pe_count();
  if (in_.dls.pe_count == 0) in_.dls.pe_count = p;
  if (in_.dls.pe_count != p) throw std::runtime_error("sim: DLS PE count must match the platform");
  total_tasks_ = in_.workload->n() - in_.start_task;
  if (in_.dls.total_iterations == 0) in_.dls.total_iterations = total_tasks_;
  if (in_.dls.total_iterations != total_tasks_) {
    throw std::runtime_error("sim: DLS iteration count must match the unexecuted workload tail");
  }
  if (in_.dls.static_weights.empty()) in_.dls.static_weights = relative_core_weights(*in_.platform);

  avail_ = in_.scenario->spec_for(PerturbTarget::Availability);
  bw_ = in_.scenario->spec_for(PerturbTarget::Bandwidth);
  lat_ = in_.scenario->spec_for(PerturbTarget::Latency);

  dls_ = DlsState::init(in_.technique, in_.dls);
  if (!in_.carried_stats.empty()) dls_.seed_stats(in_.carried_stats);
  base_task_ = in_.start_task;
  master_ = in_.platform->master_host_index;
  now_ = in_.start_time;
  pes_.assign(static_cast<std::size_t>(p), PeRt{});
  finish_.assign(static_cast<std::size_t>(p), in_.start_time);
  if (in_.record_chunk_log) log_.reserve(1024);
}

void Engine::push(double t, int kind, int pe) {
  heap_.push_back(Event{t, seq_++, kind, pe});
  std::push_heap(heap_.begin(), heap_.end(), EventCmp{});
}

double Engine::msg_cost(double t, double bytes, int pe) const {
  const Link& link = in_.platform->links[static_cast<std::size_t>(pe)];
  const double latency = lat_ ? link.latency / lat_->factor_at(t) : link.latency;
  const double bandwidth = bw_ ? link.bandwidth * bw_->factor_at(t) : link.bandwidth;
  return latency + bytes / bandwidth;
}

double Engine::finish_time(int pe, double t0, double flops) const {
  return chunk_finish_time(in_.platform->hosts[static_cast<std::size_t>(pe)].core_speed, avail_, t0, flops);
}

void Engine::switch_technique(Technique t) {
  if (t == dls_.technique()) return;
  if (dls_.remaining() == 0) return;
  auto stats = dls_.stats();
  DlsConfig cfg = in_.dls;
  cfg.total_iterations = dls_.remaining();
  base_task_ += dls_.scheduled();
  dls_ = DlsState::init(t, cfg);
  dls_.seed_stats(stats);
}

void Engine::send_request(int pe) {
  pes_[static_cast<std::size_t>(pe)].request_sent = now_;
  push(now_ + msg_cost(now_, in_.request_msg_bytes, pe), 0, pe);
}

void Engine::service_request(int pe) {
  if (controller_) controller_->at_service(now_, *this);
  auto upe = static_cast<std::size_t>(pe);
  auto chunk = dls_.next_chunk(pe, now_);
  if (!chunk) return;  // idle PE stays idle; its finish time is already recorded

  PeRt& rt = pes_[upe];
  rt.has_chunk = true;
  rt.issue_time = now_;
  rt.cur_start = base_task_ + chunk->start;
  rt.cur_size = chunk->size;
  rt.cur_flops = in_.workload->range_flops(rt.cur_start, rt.cur_size);
  if (in_.record_chunk_log) {
    rt.log_index = log_.size();
    ChunkRecord rec;
    rec.time_issued = now_;
    rec.pe = pe;
    rec.start = rt.cur_start;
    rec.size = rt.cur_size;
    rec.technique = dls_.technique();
    rec.request_time = rt.request_sent;
    rec.flops = rt.cur_flops;
    log_.push_back(rec);
  }
  if (pe == master_) {
    begin_compute(pe);
  } else {
    push(now_ + msg_cost(now_, in_.reply_msg_bytes, pe), 1, pe);
  }
}

void Engine::begin_compute(int pe) {
  PeRt& rt = pes_[static_cast<std::size_t>(pe)];
  rt.exec_start = now_;
  push(finish_time(pe, now_, rt.cur_flops), 2, pe);
}

void Engine::on_chunk_done(int pe) {
  auto upe = static_cast<std::size_t>(pe);
  PeRt& rt = pes_[upe];
  rt.has_chunk = false;
  finished_tasks_ += rt.cur_size;
  finish_[upe] = now_;
  const double iter_time = now_ - rt.exec_start;
  const double total_time = now_ - (pe == master_ ? rt.issue_time : rt.request_sent);
  dls_.update_stats(pe, rt.cur_size, iter_time, total_time);
  if (in_.record_chunk_log) {
    ChunkRecord& rec = log_[rt.log_index];
    rec.exec_start = rt.exec_start;
    rec.exec_end = now_;
    rec.completed = true;
  }
  if (recent_window_ > 0) {
    recent_.push_back(RecentChunk{pe, rt.cur_flops, iter_time, now_});
    while (!recent_.empty() && recent_.front().end_time < now_ - recent_window_) recent_.pop_front();
  }
  if (pe == master_) {
    service_request(pe);
  } else {
    send_request(pe);
  }
}

SimOutcome Engine::run() {
  if (controller_) controller_->at_start(now_, *this);
  // the master fetches its own work locally; workers request over their links
  for (int pe = 0; pe < in_.platform->pe_count(); ++pe) {
    if (pe == master_) {
      service_request(pe);
    } else {
      send_request(pe);
    }
  }
  if (in_.master_poll_interval > 0) push(now_ + in_.master_poll_interval, 3, master_);

  while (!heap_.empty()) {
    const Event ev = heap_.front();
    if (ev.t > in_.max_sim_time) {
      cut_off_ = true;
      break;
    }
    std::pop_heap(heap_.begin(), heap_.end(), EventCmp{});
    heap_.pop_back();
    now_ = ev.t;
    ++events_;
    switch (ev.kind) {
      case 0:  // work request arrived at the master
        if (in_.master_poll_interval > 0) {
          poll_queue_.emplace_back(now_, ev.pe);
        } else {
          service_request(ev.pe);
        }
        break;
      case 1:  // reply with a chunk arrived at a worker
        begin_compute(ev.pe);
        break;
      case 2: on_chunk_done(ev.pe); break;
      case 3:  // master poll: drain queued requests in arrival order, PE index ties
        std::stable_sort(poll_queue_.begin(), poll_queue_.end());
        for (const auto& [t, pe] : poll_queue_) service_request(pe);
        poll_queue_.clear();
        if (finished_tasks_ < total_tasks_) push(now_ + in_.master_poll_interval, 3, master_);
        break;
    }
  }

  SimOutcome out;
  out.cut_off = cut_off_;
  if (cut_off_) {
    out.sim_time = in_.max_sim_time;
  } else {
    double maxf = in_.start_time;
    for (double f : finish_) maxf = std::max(maxf, f);
    out.sim_time = maxf;
  }
  out.finished_tasks = finished_tasks_;
  out.per_pe_finish = finish_;
  out.chunk_log = std::move(log_);
  out.final_stats = dls_.stats();
  out.event_count = events_;
  return out;
}

SimOutcome simulate(const SimInput& input) {
  Engine e(input);
  return e.run();
}

std::vector<SimOutcome> simulate_time_stepping(const TimeSteppingInput& input) {
  if (input.step_workloads.empty()) throw std::runtime_error("time stepping: needs at least one step");
  std::vector<SimOutcome> outcomes;
  double t = input.start_time;
  std::vector<PeSchedStats> carried;
  for (const Workload* w : input.step_workloads) {
    if (t >= input.max_sim_time) break;
    SimInput step;
    step.platform = input.platform;
    step.workload = w;
    step.scenario = input.scenario;
    step.technique = input.technique;
    step.dls = input.dls;
    step.dls.total_iterations = 0;  // filled from the step workload
    step.start_time = t;
    step.max_sim_time = input.max_sim_time;
    step.request_msg_bytes = input.request_msg_bytes;
    step.reply_msg_bytes = input.reply_msg_bytes;
    if (input.carry_weights && is_adaptive(input.technique)) step.carried_stats = carried;
    SimOutcome out = simulate(step);
    t = out.sim_time;
    carried = out.final_stats;
    const bool cut = out.cut_off;
    outcomes.push_back(std::move(out));
    if (cut) break;
  }
  return outcomes;
}

double percent_error(double t_native, double t_sim) {
  if (!(t_native > 0)) throw std::runtime_error("percent_error: native time must be > 0");
  // algebraically (1 - t_sim/t_native) * 100, ordered so integral inputs stay exact
  return (t_native - t_sim) * 100.0 / t_native;
}

}  // namespace loopsched
