#pragma once

#include <string>
#include <vector>

#include "loopsched/common.hpp"

namespace loopsched {

/// One processing element. A host models a single core; node structure is not modeled.
struct Host {
  std::string id;
  double core_speed = 0;  // FLOP/s, nominal
  std::string core_class;
};

/// Star-topology link from a host to an ideal (infinite, zero-delay) hub.
struct Link {
  std::string host_id;
  double bandwidth = 0;  // B/s, nominal
  double latency = 0;    // s, nominal
};

struct Platform {
  std::vector<Host> hosts;
  std::vector<Link> links;  // one per host, same order as hosts
  int master_host_index = 0;

  int pe_count() const { return static_cast<int>(hosts.size()); }
  void validate() const;
};

/// Parse the line-oriented platform file ('#' comments allowed):
///   host <id> <class> <speed_flops>
///   link <host_id> <bandwidth_Bps> <latency_s>
///   master <host_id>
Platform load_platform(const std::string& path);

void store_platform(const Platform& p, const std::string& path);
std::string platform_to_string(const Platform& p);

/// weight_i = speed_i * P / sum(speed); the weights sum to P.
std::vector<double> relative_core_weights(const Platform& p);

}  // namespace loopsched
