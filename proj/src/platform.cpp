#include "loopsched/platform.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace loopsched {

void Platform::validate() const {
  if (hosts.size() < 2) throw std::runtime_error("platform: needs at least 2 hosts");
  if (links.size() != hosts.size()) {
    throw std::runtime_error("platform: expected one link per host, got " +
                             num_str(static_cast<i64>(links.size())) + " links for " +
                             num_str(static_cast<i64>(hosts.size())) + " hosts");
  }
  if (master_host_index < 0 || master_host_index >= pe_count()) {
    throw std::runtime_error("platform: master host index out of range");
  }
  std::unordered_set<std::string> ids;
  for (const auto& h : hosts) {
    if (h.core_speed <= 0) throw std::runtime_error("platform: nonpositive speed for host " + h.id);
    if (!ids.insert(h.id).second) throw std::runtime_error("platform: duplicate host id " + h.id);
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].host_id != hosts[i].id) {
      throw std::runtime_error("platform: link order must match host order (host " + hosts[i].id + ")");
    }
    if (links[i].bandwidth <= 0) throw std::runtime_error("platform: nonpositive bandwidth for " + links[i].host_id);
    if (links[i].latency < 0) throw std::runtime_error("platform: negative latency for " + links[i].host_id);
  }
}

Platform load_platform(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open platform file " + path);

  Platform p;
  std::unordered_map<std::string, int> host_index;
  std::unordered_map<std::string, Link> link_by_host;
  std::string master_id;
  bool master_seen = false;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string where = path + ":" + num_str(static_cast<i64>(lineno));

    if (tok[0] == "host") {
      if (tok.size() != 4) throw std::runtime_error(where + ": expected 'host <id> <class> <speed>'");
      Host h{tok[1], parse_num(tok[3], where), tok[2]};
      if (h.core_speed <= 0) throw std::runtime_error(where + ": nonpositive speed for host " + h.id);
      if (host_index.count(h.id)) throw std::runtime_error(where + ": duplicate host id " + h.id);
      host_index[h.id] = p.pe_count();
      p.hosts.push_back(std::move(h));
    } else if (tok[0] == "link") {
      if (tok.size() != 4) throw std::runtime_error(where + ": expected 'link <host_id> <bandwidth> <latency>'");
      if (!host_index.count(tok[1])) throw std::runtime_error(where + ": link for unknown host " + tok[1]);
      if (link_by_host.count(tok[1])) throw std::runtime_error(where + ": duplicate link for host " + tok[1]);
      Link l{tok[1], parse_num(tok[2], where), parse_num(tok[3], where)};
      if (l.bandwidth <= 0) throw std::runtime_error(where + ": nonpositive bandwidth for " + l.host_id);
      if (l.latency < 0) throw std::runtime_error(where + ": negative latency for " + l.host_id);
      link_by_host[tok[1]] = std::move(l);
    } else if (tok[0] == "master") {
      if (tok.size() != 2) throw std::runtime_error(where + ": expected 'master <host_id>'");
      if (master_seen) throw std::runtime_error(where + ": duplicate master line");
      master_id = tok[1];
      master_seen = true;
    } else {
      throw std::runtime_error(where + ": unknown record '" + tok[0] + "'");
    }
  }

  if (!master_seen) throw std::runtime_error(path + ": missing master line");
  auto it = host_index.find(master_id);
  if (it == host_index.end()) throw std::runtime_error(path + ": master refers to unknown host " + master_id);
  p.master_host_index = it->second;

  p.links.reserve(p.hosts.size());
  for (const auto& h : p.hosts) {
    auto lit = link_by_host.find(h.id);
    if (lit == link_by_host.end()) throw std::runtime_error(path + ": missing link for host " + h.id);
    p.links.push_back(lit->second);
  }
  p.validate();
  return p;
}

std::string platform_to_string(const Platform& p) {
  std::string out;
  for (const auto& h : p.hosts) {
    out += "host " + h.id + " " + h.core_class + " " + num_str(h.core_speed) + "\n";
  }
  for (const auto& l : p.links) {
    out += "link " + l.host_id + " " + num_str(l.bandwidth) + " " + num_str(l.latency) + "\n";
  }
  out += "master " + p.hosts[p.master_host_index].id + "\n";
  return out;
}

void store_platform(const Platform& p, const std::string& path) {
  p.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write platform file " + path);
  out << platform_to_string(p);
}

std::vector<double> relative_core_weights(const Platform& p) {
  p.validate();
  double total = 0;
  for (const auto& h : p.hosts) total += h.core_speed;
  std::vector<double> w;
  w.reserve(p.hosts.size());
  const double np = static_cast<double>(p.pe_count());
  for (const auto& h : p.hosts) w.push_back(h.core_speed * np / total);
  return w;
}

}  // namespace loopsched
