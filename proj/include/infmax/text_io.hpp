#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "infmax/graph.hpp"
#include "infmax/mrt.hpp"
#include "infmax/saic.hpp"

namespace infmax {

// Schedule text format: one line per round, `t u1 u2 ...` with a 1-based
// round number followed by node labels; `#` starts a comment. Lines for
// the same round merge. A file with no records is the empty schedule.
inline SeedSchedule parse_schedule(std::istream& in,
                                   const std::unordered_map<std::string, NodeId>& labels,
                                   uint32_t min_rounds = 0, uint32_t budget = 0) {
  SeedSchedule sched;
  sched.budget = budget;
  sched.rounds.assign(min_rounds, {});
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long round = 0;
    if (!(ls >> round) || round < 1)
      throw ParseError("schedule line " + std::to_string(line_no) + ": bad round number");
    if (static_cast<size_t>(round) > sched.rounds.size()) sched.rounds.resize(round);
    std::string tok;
    while (ls >> tok) {
      auto it = labels.find(tok);
      if (it == labels.end())
        throw ParseError("schedule line " + std::to_string(line_no) + ": unknown node `" + tok +
                         "`");
      if (!sched.contains(it->second, static_cast<uint32_t>(round)))
        sched.add(it->second, static_cast<uint32_t>(round));
    }
  }
  return sched;
}

inline void write_schedule(std::ostream& out, const SeedSchedule& sched,
                           const std::vector<std::string>& labels) {
  for (uint32_t t = 1; t <= sched.horizon(); ++t) {
    out << t;
    for (NodeId v : sched.rounds[t - 1]) out << ' ' << labels[v];
    out << '\n';
  }
}

// Key-value profile format, one `key value...` pair per line:
//   q_case <0..4>           synthetic q assignment (see q_case_profile)
//   q_base <c>              base-draw upper bound for q_case
//   q <label> <value>       explicit per-node q (applied after q_case)
//   self_delay exp <rate> | const <value>
//   edge_delay exp <rate> | const <value>
struct ProfileConfig {
  std::optional<int> q_case;
  double q_base = 1.0;
  std::vector<std::pair<std::string, double>> q_overrides;
  DelayDist self_delay = DelayDist::exponential(1.0);
  DelayDist edge_delay = DelayDist::exponential(1.0);
};

inline ProfileConfig parse_profile(std::istream& in) {
  ProfileConfig cfg;
  std::string line;
  size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ParseError("profile line " + std::to_string(line_no) + ": " + msg);
  };
  auto parse_delay = [&](std::istringstream& ls) {
    std::string kind;
    double param = 0;
    if (!(ls >> kind >> param)) fail("expected `exp <rate>` or `const <value>`");
    if (kind == "exp") return DelayDist::exponential(param);
    if (kind == "const") return DelayDist::constant(param);
    fail("unknown delay kind `" + kind + "`");
    return DelayDist{};
  };
  while (std::getline(in, line)) {
    ++line_no;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "q_case") {
      int c = -1;
      if (!(ls >> c) || c < 0 || c > 4) fail("q_case must be 0..4");
      cfg.q_case = c;
    } else if (key == "q_base") {
      if (!(ls >> cfg.q_base) || cfg.q_base < 0) fail("q_base must be non-negative");
    } else if (key == "q") {
      std::string label;
      double v = 0;
      if (!(ls >> label >> v) || v < 0 || v > 1) fail("q needs `<label> <value in [0,1]>`");
      cfg.q_overrides.emplace_back(label, v);
    } else if (key == "self_delay") {
      cfg.self_delay = parse_delay(ls);
    } else if (key == "edge_delay") {
      cfg.edge_delay = parse_delay(ls);
    } else {
      fail("unknown key `" + key + "`");
    }
  }
  return cfg;
}

inline SelfActivationProfile materialize_profile(const ProfileConfig& cfg,
                                                 const DirectedGraph& g,
                                                 const std::vector<std::string>& labels,
                                                 Rng& rng) {
  SelfActivationProfile prof;
  prof.delta.assign(g.num_nodes(), cfg.self_delay);
  if (cfg.q_case) prof.q = q_case_profile(g, *cfg.q_case, cfg.q_base, rng);
  else prof.q.assign(g.num_nodes(), 0.0);
  if (!cfg.q_overrides.empty()) {
    auto idx = label_index(labels);
    for (const auto& [label, v] : cfg.q_overrides) {
      auto it = idx.find(label);
      if (it == idx.end()) throw InputError("profile q override for unknown node `" + label + "`");
      prof.q[it->second] = v;
    }
  }
  return prof;
}

inline EdgeDelays materialize_edge_delays(const ProfileConfig& cfg, const DirectedGraph& g) {
  return uniform_edge_delays(g.num_edges(), cfg.edge_delay);
}

}  // namespace infmax
