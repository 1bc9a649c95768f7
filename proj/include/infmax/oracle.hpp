#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "infmax/graph.hpp"
#include "infmax/greedy.hpp"
#include "infmax/mrt.hpp"
#include "infmax/saic.hpp"

namespace infmax::oracle {

inline constexpr int kEnumerationBitCap = 20;

namespace detail {

inline std::vector<uint32_t> stochastic_edges(const DirectedGraph& g) {
  std::vector<uint32_t> out;
  for (uint32_t e = 0; e < g.num_edges(); ++e)
    if (g.edge(e).p < 1.0) out.push_back(e);
  return out;
}

}  // namespace detail

// Expected count of nodes reached from `seeds` that are not in `a_prev`.
// Edges with p = 1 are folded out of the enumeration.
inline double exact_marginal_sigma(const DirectedGraph& g, std::span<const NodeId> a_prev,
                                   std::span<const NodeId> seeds) {
  auto stoch = detail::stochastic_edges(g);
  if (stoch.size() > kEnumerationBitCap)
    throw CapExceededError("too many stochastic edges to enumerate");
  std::vector<uint8_t> active(g.num_nodes(), 0);
  for (NodeId v : a_prev) active[v] = 1;

  LiveEdgeGraph live;
  live.live.assign(g.num_edges(), 1);
  double total = 0.0;
  uint64_t masks = uint64_t(1) << stoch.size();
  for (uint64_t mask = 0; mask < masks; ++mask) {
    double prob = 1.0;
    for (size_t b = 0; b < stoch.size(); ++b) {
      bool on = (mask >> b) & 1;
      live.live[stoch[b]] = on;
      prob *= on ? g.edge(stoch[b]).p : 1.0 - g.edge(stoch[b]).p;
    }
    size_t count = 0;
    for (NodeId v : reach(g, live, seeds))
      if (!active[v]) ++count;
    total += prob * static_cast<double>(count);
  }
  return total;
}

inline double exact_sigma(const DirectedGraph& g, std::span<const NodeId> seeds) {
  return exact_marginal_sigma(g, {}, seeds);
}

// Product-measure enumeration over the T rounds' live-edge draws.
inline double exact_rho_mrt(const DirectedGraph& g, const SeedSchedule& sched) {
  auto stoch = detail::stochastic_edges(g);
  uint32_t T = sched.horizon();
  size_t bits = stoch.size() * T;
  if (bits > kEnumerationBitCap)
    throw CapExceededError("rounds x stochastic edges exceeds enumeration cap");

  LiveEdgeGraph live;
  live.live.assign(g.num_edges(), 1);
  std::vector<uint8_t> activated(g.num_nodes());
  double total = 0.0;
  uint64_t masks = uint64_t(1) << bits;
  for (uint64_t mask = 0; mask < masks; ++mask) {
    double prob = 1.0;
    std::fill(activated.begin(), activated.end(), 0);
    size_t count = 0;
    for (uint32_t t = 0; t < T; ++t) {
      for (size_t b = 0; b < stoch.size(); ++b) {
        bool on = (mask >> (t * stoch.size() + b)) & 1;
        live.live[stoch[b]] = on;
        prob *= on ? g.edge(stoch[b]).p : 1.0 - g.edge(stoch[b]).p;
      }
      for (NodeId v : reach(g, live, sched.rounds[t])) {
        if (!activated[v]) {
          activated[v] = 1;
          ++count;
        }
      }
    }
    total += prob * static_cast<double>(count);
  }
  return total;
}

// Joint enumeration over live masks and self-activation subsets for the
// boosted spread E|reach(L, S u A)|.
inline double exact_sigma_b(const DirectedGraph& g, const std::vector<double>& q,
                            std::span<const NodeId> seeds) {
  auto stoch = detail::stochastic_edges(g);
  std::vector<NodeId> coin_nodes;
  std::vector<NodeId> always_on;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (q[v] >= 1.0) always_on.push_back(v);
    else if (q[v] > 0.0) coin_nodes.push_back(v);
  }
  if (stoch.size() + coin_nodes.size() > kEnumerationBitCap)
    throw CapExceededError("stochastic edges + stochastic q nodes exceed enumeration cap");

  LiveEdgeGraph live;
  live.live.assign(g.num_edges(), 1);
  double total = 0.0;
  uint64_t masks = uint64_t(1) << (stoch.size() + coin_nodes.size());
  for (uint64_t mask = 0; mask < masks; ++mask) {
    double prob = 1.0;
    for (size_t b = 0; b < stoch.size(); ++b) {
      bool on = (mask >> b) & 1;
      live.live[stoch[b]] = on;
      prob *= on ? g.edge(stoch[b]).p : 1.0 - g.edge(stoch[b]).p;
    }
    std::vector<NodeId> start(seeds.begin(), seeds.end());
    start.insert(start.end(), always_on.begin(), always_on.end());
    for (size_t b = 0; b < coin_nodes.size(); ++b) {
      bool on = (mask >> (stoch.size() + b)) & 1;
      prob *= on ? q[coin_nodes[b]] : 1.0 - q[coin_nodes[b]];
      if (on) start.push_back(coin_nodes[b]);
    }
    total += prob * static_cast<double>(reach(g, live, start).size());
  }
  return total;
}

// Exact per-round activation probabilities q(v, U) for every seed subset
// U, built once per instance. Rounds of the multi-round model are i.i.d.,
// so rho of any schedule assembles as sum_v 1 - prod_t (1 - q(v, S_t)).
class MembershipTable {
 public:
  explicit MembershipTable(const DirectedGraph& g, uint64_t work_cap = uint64_t(1) << 30)
      : n_(g.num_nodes()) {
    if (n_ > 20) throw CapExceededError("membership table supports at most 20 nodes");
    auto stoch = detail::stochastic_edges(g);
    if (stoch.size() > kEnumerationBitCap)
      throw CapExceededError("too many stochastic edges to enumerate");
    uint64_t subsets = uint64_t(1) << n_;
    uint64_t work = (uint64_t(1) << stoch.size()) * subsets;
    if (work > work_cap) throw CapExceededError("membership table enumeration too large");

    table_.assign(subsets * n_, 0.0);
    std::vector<uint32_t> det_adj(n_, 0), adj(n_, 0), row(n_, 0);
    for (uint32_t e = 0; e < g.num_edges(); ++e)
      if (g.edge(e).p >= 1.0) det_adj[g.edge(e).src] |= uint32_t(1) << g.edge(e).dst;

    std::vector<uint32_t> reach_bits(subsets, 0);
    std::vector<NodeId> stack;
    uint64_t masks = uint64_t(1) << stoch.size();
    for (uint64_t mask = 0; mask < masks; ++mask) {
      double prob = 1.0;
      adj = det_adj;
      for (size_t b = 0; b < stoch.size(); ++b) {
        const Edge& ed = g.edge(stoch[b]);
        if ((mask >> b) & 1) {
          prob *= ed.p;
          adj[ed.src] |= uint32_t(1) << ed.dst;
        } else {
          prob *= 1.0 - ed.p;
        }
      }
      for (NodeId v = 0; v < n_; ++v) {
        uint32_t seen = uint32_t(1) << v;
        stack.assign(1, v);
        while (!stack.empty()) {
          NodeId u = stack.back();
          stack.pop_back();
          uint32_t fresh = adj[u] & ~seen;
          seen |= fresh;
          while (fresh) {
            stack.push_back(static_cast<NodeId>(std::countr_zero(fresh)));
            fresh &= fresh - 1;
          }
        }
        row[v] = seen;
      }
      for (uint64_t u = 1; u < subsets; ++u) {
        uint64_t low = u & (~u + 1);
        reach_bits[u] = reach_bits[u ^ low] | row[std::countr_zero(low)];
      }
      for (uint64_t u = 1; u < subsets; ++u) {
        uint32_t bits = reach_bits[u];
        double* slot = table_.data() + u * n_;
        while (bits) {
          slot[std::countr_zero(bits)] += prob;
          bits &= bits - 1;
        }
      }
    }
  }

  NodeId num_nodes() const { return n_; }

  double activation_prob(uint32_t subset_mask, NodeId v) const {
    return table_[static_cast<uint64_t>(subset_mask) * n_ + v];
  }

  double sigma(uint32_t subset_mask) const {
    double s = 0;
    for (NodeId v = 0; v < n_; ++v) s += activation_prob(subset_mask, v);
    return s;
  }

  double sigma_minus(uint32_t subset_mask, uint32_t active_mask) const {
    double s = 0;
    for (NodeId v = 0; v < n_; ++v)
      if (!((active_mask >> v) & 1)) s += activation_prob(subset_mask, v);
    return s;
  }

  static uint32_t mask_of(std::span<const NodeId> nodes) {
    uint32_t m = 0;
    for (NodeId v : nodes) m |= uint32_t(1) << v;
    return m;
  }

  double rho(const SeedSchedule& sched) const {
    double total = 0;
    for (NodeId v = 0; v < n_; ++v) {
      double miss = 1.0;
      for (uint32_t t = 0; t < sched.horizon(); ++t)
        miss *= 1.0 - activation_prob(mask_of(sched.rounds[t]), v);
      total += 1.0 - miss;
    }
    return total;
  }

  double rho_pairs(std::span<const RoundNodePair> pairs, uint32_t T) const {
    std::vector<uint32_t> round_masks(T, 0);
    for (const auto& p : pairs) round_masks[p.round - 1] |= uint32_t(1) << p.node;
    double total = 0;
    for (NodeId v = 0; v < n_; ++v) {
      double miss = 1.0;
      for (uint32_t t = 0; t < T; ++t) miss *= 1.0 - activation_prob(round_masks[t], v);
      total += 1.0 - miss;
    }
    return total;
  }

  ScheduleEvaluator evaluator() const {
    return [this](const SeedSchedule& s) { return rho(s); };
  }

 private:
  NodeId n_;
  std::vector<double> table_;  // [subset][node]
};

struct ScheduleOptResult {
  double value = 0;
  SeedSchedule best;
  size_t candidates = 0;
};

// Full enumeration of schedules with per-round sets of size <= k.
// Deterministic tie rule: the first candidate in enumeration order wins.
inline ScheduleOptResult exhaustive_opt_schedule(const DirectedGraph& g, uint32_t T, uint32_t k,
                                                 const ScheduleEvaluator& eval,
                                                 size_t cap = 1'000'000) {
  const NodeId n = g.num_nodes();
  if (n > 24) throw CapExceededError("exhaustive schedule search limited to 24 nodes");
  std::vector<std::vector<NodeId>> round_sets;
  for (uint32_t mask = 0;; ++mask) {
    if (std::popcount(mask) <= static_cast<int>(k)) {
      std::vector<NodeId> s;
      for (NodeId v = 0; v < n; ++v)
        if ((mask >> v) & 1) s.push_back(v);
      round_sets.push_back(std::move(s));
    }
    if (mask == (uint32_t(1) << n) - 1) break;
  }
  double candidates = std::pow(static_cast<double>(round_sets.size()), T);
  if (candidates > static_cast<double>(cap))
    throw CapExceededError("schedule search space exceeds cap");

  ScheduleOptResult res;
  res.best = SeedSchedule::empty(T, k);
  res.value = eval(res.best);
  std::vector<size_t> odo(T, 0);
  SeedSchedule sched = SeedSchedule::empty(T, k);
  for (;;) {
    for (uint32_t t = 0; t < T; ++t) sched.rounds[t] = round_sets[odo[t]];
    double v = eval(sched);
    ++res.candidates;
    if (v > res.value) {
      res.value = v;
      res.best = sched;
    }
    uint32_t t = 0;
    while (t < T && ++odo[t] == round_sets.size()) odo[t++] = 0;
    if (t == T) break;
  }
  return res;
}

struct SetOptResult {
  double value = 0;
  std::vector<NodeId> best;
  size_t candidates = 0;
};

inline SetOptResult exhaustive_opt_set(const DirectedGraph& g, uint32_t k,
                                       const std::function<double(std::span<const NodeId>)>& eval,
                                       size_t cap = 1'000'000) {
  const NodeId n = g.num_nodes();
  if (n > 24) throw CapExceededError("exhaustive set search limited to 24 nodes");
  SetOptResult res;
  res.value = eval(std::span<const NodeId>{});
  uint64_t masks = uint64_t(1) << n;
  if (masks > cap) throw CapExceededError("set search space exceeds cap");
  std::vector<NodeId> nodes;
  for (uint64_t mask = 1; mask < masks; ++mask) {
    if (std::popcount(mask) > static_cast<int>(k)) continue;
    nodes.clear();
    for (NodeId v = 0; v < n; ++v)
      if ((mask >> v) & 1) nodes.push_back(v);
    double v = eval(nodes);
    ++res.candidates;
    if (v > res.value) {
      res.value = v;
      res.best = nodes;
    }
  }
  return res;
}

// Enumerates every SAIC possible world; requires Constant delay
// distributions so the world space is finite.
template <typename F>
void enumerate_worlds(const DirectedGraph& g, const SelfActivationProfile& prof,
                      const EdgeDelays& edge_delays, F&& per_world) {
  for (const auto& d : prof.delta)
    if (d.kind != DelayDist::Kind::Constant)
      throw InputError("world enumeration requires constant self delays");
  for (const auto& d : edge_delays)
    if (d.kind != DelayDist::Kind::Constant)
      throw InputError("world enumeration requires constant edge delays");

  auto stoch = detail::stochastic_edges(g);
  std::vector<NodeId> coin_nodes;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (prof.q[v] > 0.0 && prof.q[v] < 1.0) coin_nodes.push_back(v);
  if (stoch.size() + coin_nodes.size() > kEnumerationBitCap)
    throw CapExceededError("world enumeration exceeds bit cap");

  PossibleWorld w;
  w.self_active.assign(g.num_nodes(), 0);
  w.self_delay.resize(g.num_nodes());
  w.live.assign(g.num_edges(), 1);
  w.edge_delay.resize(g.num_edges());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    w.self_active[v] = prof.q[v] >= 1.0 ? 1 : 0;
    w.self_delay[v] = prof.delta[v].param;
  }
  for (uint32_t e = 0; e < g.num_edges(); ++e) w.edge_delay[e] = edge_delays[e].param;

  uint64_t masks = uint64_t(1) << (stoch.size() + coin_nodes.size());
  for (uint64_t mask = 0; mask < masks; ++mask) {
    double prob = 1.0;
    for (size_t b = 0; b < stoch.size(); ++b) {
      bool on = (mask >> b) & 1;
      w.live[stoch[b]] = on;
      prob *= on ? g.edge(stoch[b]).p : 1.0 - g.edge(stoch[b]).p;
    }
    for (size_t b = 0; b < coin_nodes.size(); ++b) {
      bool on = (mask >> (stoch.size() + b)) & 1;
      w.self_active[coin_nodes[b]] = on;
      prob *= on ? prof.q[coin_nodes[b]] : 1.0 - prof.q[coin_nodes[b]];
    }
    per_world(w, prob);
  }
}

inline double exact_preemptive_spread(const DirectedGraph& g, const SelfActivationProfile& prof,
                                      const EdgeDelays& edge_delays, std::span<const NodeId> set,
                                      bool boosted) {
  double total = 0;
  enumerate_worlds(g, prof, edge_delays, [&](const PossibleWorld& w, double prob) {
    total += prob * static_cast<double>(preemptive_credit(g, w, set, boosted).size());
  });
  return total;
}

}  // namespace infmax::oracle
