#include "loopsched/dls.hpp"

#include <algorithm>
#include <cmath>

namespace loopsched {

const std::vector<Technique>& all_techniques() {
  static const std::vector<Technique> v = {
      Technique::STATIC, Technique::SS,    Technique::FSC,   Technique::mFSC, Technique::GSS,
      Technique::TSS,    Technique::FAC,   Technique::WF,    Technique::AWF_B,
      Technique::AWF_C,  Technique::AWF_D, Technique::AWF_E, Technique::AF};
  return v;
}

const char* to_string(Technique t) {
  switch (t) {
    case Technique::STATIC: return "STATIC";
    case Technique::SS: return "SS";
    case Technique::FSC: return "FSC";
    case Technique::mFSC: return "mFSC";
    case Technique::GSS: return "GSS";
    case Technique::TSS: return "TSS";
    case Technique::FAC: return "FAC";
    case Technique::WF: return "WF";
    case Technique::AWF_B: return "AWF-B";
    case Technique::AWF_C: return "AWF-C";
    case Technique::AWF_D: return "AWF-D";
    case Technique::AWF_E: return "AWF-E";
    case Technique::AF: return "AF";
  }
  return "?";
}

Technique technique_from_string(const std::string& name) {
  std::string up;
  for (char c : name) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Technique t : all_techniques()) {
    std::string cand = to_string(t);
    std::string cand_up;
    for (char c : cand) cand_up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    std::string cand_us = cand_up;
    std::replace(cand_us.begin(), cand_us.end(), '-', '_');
    std::string name_us = up;
    std::replace(name_us.begin(), name_us.end(), '-', '_');
    if (name_us == cand_us) return t;
  }
  throw std::runtime_error("unknown technique '" + name + "'");
}

bool is_adaptive(Technique t) {
  switch (t) {
    case Technique::AWF_B:
    case Technique::AWF_C:
    case Technique::AWF_D:
    case Technique::AWF_E:
    case Technique::AF: return true;
    default: return false;
  }
}

void DlsConfig::validate_for(Technique t) const {
  if (total_iterations < 1) throw std::runtime_error("dls: N must be >= 1");
  if (pe_count < 1) throw std::runtime_error("dls: P must be >= 1");
  if (t == Technique::FSC) {
    if (!(overhead_h > 0)) throw std::runtime_error("dls: FSC requires overhead h > 0");
    if (!(sigma >= 0)) throw std::runtime_error("dls: FSC requires sigma >= 0");
  }
  if (t == Technique::WF) {
    if (static_weights.size() != static_cast<std::size_t>(pe_count)) {
      throw std::runtime_error("dls: WF requires one weight per PE");
    }
    double sum = 0;
    for (double w : static_weights) {
      if (!(w > 0)) throw std::runtime_error("dls: WF weights must be > 0");
      sum += w;
    }
    if (std::abs(sum - pe_count) > 1e-6 * pe_count) {
      throw std::runtime_error("dls: WF weights must sum to P");
    }
  }
}

i64 fac_chunk_count(i64 n, int p) {
  if (n < 1 || p < 1) throw std::runtime_error("fac_chunk_count: N, P must be >= 1");
  i64 remaining = n;
  i64 count = 0;
  while (remaining > 0) {
    const i64 chunk = ceil_div(remaining, 2 * static_cast<i64>(p));
    for (int k = 0; k < p && remaining > 0; ++k) {
      remaining -= std::min(chunk, remaining);
      ++count;
    }
  }
  return count;
}

DlsState DlsState::init(Technique t, const DlsConfig& cfg) {
  cfg.validate_for(t);
  DlsState s;
  s.technique_ = t;
  s.config_ = cfg;
  s.stats_.assign(static_cast<std::size_t>(cfg.pe_count), PeSchedStats{});
  s.done_.assign(static_cast<std::size_t>(cfg.pe_count), false);
  s.static_served_.assign(static_cast<std::size_t>(cfg.pe_count), false);
  s.last_batch_.assign(static_cast<std::size_t>(cfg.pe_count), -1);

  const double n = static_cast<double>(cfg.total_iterations);
  const double p = static_cast<double>(cfg.pe_count);

  if (t == Technique::TSS) {
    const double first = std::ceil(n / (2.0 * p));
    const double last = 1.0;
    const double c = std::ceil(2.0 * n / (first + last));
    s.tss_chunk_ = first;
    s.tss_delta_ = (c > 1.0) ? (first - last) / (c - 1.0) : 0.0;
  } else if (t == Technique::FSC) {
    if (cfg.sigma > 0 && cfg.pe_count >= 2) {
      const double num = std::sqrt(2.0) * n * cfg.overhead_h;
      const double den = cfg.sigma * p * std::sqrt(std::log(p));
      s.fixed_chunk_ = static_cast<i64>(std::ceil(std::pow(num / den, 2.0 / 3.0)));
    } else {
      // zero iteration-time variance: the optimal fixed chunk is unbounded
      s.fixed_chunk_ = cfg.total_iterations;
    }
    s.fixed_chunk_ = std::clamp<i64>(s.fixed_chunk_, 1, cfg.total_iterations);
  } else if (t == Technique::mFSC) {
    s.fixed_chunk_ = ceil_div(cfg.total_iterations, fac_chunk_count(cfg.total_iterations, cfg.pe_count));
  }
  return s;
}

std::vector<double> DlsState::weights() const {
  std::vector<double> w;
  w.reserve(stats_.size());
  for (const auto& s : stats_) w.push_back(s.weight);
  return w;
}

void DlsState::seed_stats(const std::vector<PeSchedStats>& carried) {
  if (carried.size() != stats_.size()) throw std::runtime_error("dls: carried stats size mismatch");
  stats_ = carried;
}

i64 DlsState::issue(int pe, i64 size) {
  size = std::clamp<i64>(size, 1, remaining());
  scheduled_ += size;
  (void)pe;
  return size;
}

i64 DlsState::batched_chunk(int pe) {
  if (batch_chunks_left_ == 0) {
    if (batch_id_ >= 0) batch_fully_issued_[batch_id_] = true;
    const i64 batch_iters = ceil_div(remaining(), 2);
    batch_unit_ = static_cast<double>(batch_iters) / static_cast<double>(config_.pe_count);
    batch_chunks_left_ = config_.pe_count;
    ++batch_id_;
    batch_outstanding_[batch_id_] = 0;
    batch_fully_issued_[batch_id_] = false;
  }
  double w = 1.0;
  switch (technique_) {
    case Technique::FAC: w = 1.0; break;
    case Technique::WF: w = config_.static_weights[static_cast<std::size_t>(pe)]; break;
    default: w = stats_[static_cast<std::size_t>(pe)].weight; break;  // AWF family
  }
  --batch_chunks_left_;
  last_batch_[static_cast<std::size_t>(pe)] = batch_id_;
  ++batch_outstanding_[batch_id_];
  // 1e-9 absorbs fp noise from weight products landing just above an integer
  return static_cast<i64>(std::ceil(w * batch_unit_ - 1e-9));
}

i64 DlsState::af_chunk(int pe) const {
  const auto& me = stats_[static_cast<std::size_t>(pe)];
  if (!me.measured || me.af_count == 0) {
    return ceil_div(config_.total_iterations, 4 * static_cast<i64>(config_.pe_count));
  }
  double d_sum = 0;
  double inv_mu_sum = 0;
  for (const auto& s : stats_) {
    if (!s.measured || s.af_count == 0) continue;
    const double mu = std::max(s.af_sum / static_cast<double>(s.af_count), 1e-12);
    const double var = std::max(s.af_sumsq / static_cast<double>(s.af_count) - mu * mu, 0.0);
    d_sum += var / mu;
    inv_mu_sum += 1.0 / mu;
  }
  const double t_est = static_cast<double>(remaining()) / inv_mu_sum;
  const double mu_i = std::max(me.af_sum / static_cast<double>(me.af_count), 1e-12);
  const double x =
      (d_sum + 2.0 * t_est * mu_i - std::sqrt(d_sum * d_sum + 4.0 * d_sum * t_est * mu_i)) / (2.0 * mu_i);
  return static_cast<i64>(std::ceil(x - 1e-9));
}

std::optional<Chunk> DlsState::next_chunk(int pe, double /*now*/) {
  if (pe < 0 || pe >= config_.pe_count) throw std::runtime_error("dls: PE index out of range");
  auto upe = static_cast<std::size_t>(pe);
  if (done_[upe]) return std::nullopt;

  if (remaining() == 0 || (technique_ == Technique::STATIC && static_served_[upe])) {
    done_[upe] = true;
    return std::nullopt;
  }

  i64 size = 0;
  switch (technique_) {
    case Technique::STATIC:
      size = ceil_div(config_.total_iterations, config_.pe_count);
      static_served_[upe] = true;
      break;
    case Technique::SS: size = 1; break;
    case Technique::FSC:
    case Technique::mFSC: size = fixed_chunk_; break;
    case Technique::GSS: size = ceil_div(remaining(), config_.pe_count); break;
    case Technique::TSS:
      size = static_cast<i64>(std::llround(tss_chunk_));
      tss_chunk_ = std::max(tss_chunk_ - tss_delta_, 1.0);
      break;
    case Technique::FAC:
    case Technique::WF:
    case Technique::AWF_B:
    case Technique::AWF_C:
    case Technique::AWF_D:
    case Technique::AWF_E: size = batched_chunk(pe); break;
    case Technique::AF: size = af_chunk(pe); break;
  }

  Chunk c;
  c.start = scheduled_;
  c.size = issue(pe, size);
  return c;
}

void DlsState::recompute_awf_weights() {
  const bool total_basis = technique_ == Technique::AWF_D || technique_ == Technique::AWF_E;
  double inv_sum = 0;
  int measured = 0;
  for (const auto& s : stats_) {
    if (!s.measured || s.iters == 0) continue;
    const double pi = std::max((total_basis ? s.total_time : s.iter_time) / static_cast<double>(s.iters), 1e-12);
    inv_sum += 1.0 / pi;
    ++measured;
  }
  if (measured == 0 || inv_sum <= 0) return;
  // normalize over the measured set; unmeasured PEs keep weight 1, so the
  // full set always sums to P
  for (auto& s : stats_) {
    if (!s.measured || s.iters == 0) continue;
    const double pi = std::max((total_basis ? s.total_time : s.iter_time) / static_cast<double>(s.iters), 1e-12);
    s.weight = (1.0 / pi) * static_cast<double>(measured) / inv_sum;
  }
}

void DlsState::note_batch_completion(int batch) {
  auto out = batch_outstanding_.find(batch);
  if (out == batch_outstanding_.end()) return;
  if (out->second > 0) --out->second;
  const bool fully_issued =
      batch < batch_id_ || (batch == batch_id_ && batch_chunks_left_ == 0) ||
      (batch_fully_issued_.count(batch) && batch_fully_issued_.at(batch)) || remaining() == 0;
  if (out->second == 0 && fully_issued) {
    batch_outstanding_.erase(batch);
    if (technique_ == Technique::AWF_B || technique_ == Technique::AWF_D) recompute_awf_weights();
  }
}

void DlsState::update_stats(int pe, i64 chunk_size, double iter_time, double total_chunk_time) {
  if (pe < 0 || pe >= config_.pe_count) throw std::runtime_error("dls: PE index out of range");
  if (chunk_size < 1) throw std::runtime_error("dls: chunk size must be >= 1");
  if (iter_time < 0 || total_chunk_time < 0) throw std::runtime_error("dls: times must be >= 0");
  if (!is_adaptive(technique_)) return;

  auto& s = stats_[static_cast<std::size_t>(pe)];
  s.iters += chunk_size;
  s.iter_time += iter_time;
  s.total_time += total_chunk_time;
  s.measured = true;

  if (technique_ == Technique::AF) {
    const double per_iter = iter_time / static_cast<double>(chunk_size);
    s.af_count += chunk_size;
    s.af_sum += iter_time;
    s.af_sumsq += static_cast<double>(chunk_size) * per_iter * per_iter;
    return;
  }

  if (technique_ == Technique::AWF_C || technique_ == Technique::AWF_E) {
    recompute_awf_weights();
  } else {
    note_batch_completion(last_batch_[static_cast<std::size_t>(pe)]);
  }
}

}  // namespace loopsched
