#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "loopsched/common.hpp"

namespace loopsched {

enum class Technique {
  STATIC,
  SS,
  FSC,
  mFSC,
  GSS,
  TSS,
  FAC,
  WF,
  AWF_B,
  AWF_C,
  AWF_D,
  AWF_E,
  AF,
};

inline constexpr int kTechniqueCount = 13;
const std::vector<Technique>& all_techniques();

const char* to_string(Technique t);
Technique technique_from_string(const std::string& name);  // case-insensitive
bool is_adaptive(Technique t);

struct DlsConfig {
  i64 total_iterations = 0;           // N
  int pe_count = 0;                   // P
  double overhead_h = 0;              // scheduling overhead, s (FSC)
  double sigma = 0;                   // iteration-time standard deviation, s (FSC)
  std::vector<double> static_weights; // per-PE weights, sum = P (WF)

  void validate_for(Technique t) const;
};

struct Chunk {
  i64 start = 0;
  i64 size = 0;
};

/// Per-PE measurements accumulated through update_stats. Carried across
/// technique switches and into prediction sub-simulations.
struct PeSchedStats {
  i64 iters = 0;
  double iter_time = 0;   // accumulated chunk execution time
  double total_time = 0;  // accumulated chunk time including scheduling overhead
  double weight = 1.0;
  bool measured = false;
  // running per-iteration moments (AF)
  i64 af_count = 0;
  double af_sum = 0;
  double af_sumsq = 0;
};

/// Scheduling state for one parallel loop under one technique. Single-threaded;
/// distinct instances may be driven concurrently.
class DlsState {
 public:
  DlsState() = default;
  static DlsState init(Technique t, const DlsConfig& cfg);

  /// Next chunk for the requesting PE, or nullopt when no work remains for it.
  std::optional<Chunk> next_chunk(int pe, double now);

  /// Feed measured chunk times back. Nonadaptive techniques ignore the call
  /// beyond validating the PE index.
  void update_stats(int pe, i64 chunk_size, double iter_time, double total_chunk_time);

  Technique technique() const { return technique_; }
  const DlsConfig& config() const { return config_; }
  i64 scheduled() const { return scheduled_; }
  i64 remaining() const { return config_.total_iterations - scheduled_; }

  const std::vector<PeSchedStats>& stats() const { return stats_; }
  std::vector<double> weights() const;
  void seed_stats(const std::vector<PeSchedStats>& carried);

  // seeded technique parameters, exposed for verification
  double tss_chunk() const { return tss_chunk_; }
  double tss_delta() const { return tss_delta_; }
  i64 fixed_chunk() const { return fixed_chunk_; }

 private:
  i64 issue(int pe, i64 size);
  i64 batched_chunk(int pe);
  i64 af_chunk(int pe) const;
  void recompute_awf_weights();
  void note_batch_completion(int batch);

  Technique technique_ = Technique::SS;
  DlsConfig config_;
  i64 scheduled_ = 0;

  std::vector<PeSchedStats> stats_;
  std::vector<bool> done_;          // Empty already answered
  std::vector<bool> static_served_; // STATIC: one chunk per PE
  std::vector<int> last_batch_;     // batch id of the PE's outstanding chunk

  double tss_chunk_ = 0;
  double tss_delta_ = 0;
  i64 fixed_chunk_ = 0;  // FSC / mFSC

  // FAC/WF/AWF batching: a batch is ceil(R/2) iterations split into P chunks
  i64 batch_chunks_left_ = 0;
  double batch_unit_ = 0;  // batch iterations / P
  int batch_id_ = -1;
  std::unordered_map<int, i64> batch_outstanding_;
  std::unordered_map<int, bool> batch_fully_issued_;
};

/// Number of chunks FAC emits for (N, P), by replay of the batching rule.
i64 fac_chunk_count(i64 n, int p);

}  // namespace loopsched
