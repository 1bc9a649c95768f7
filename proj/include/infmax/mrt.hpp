#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "infmax/graph.hpp"
#include "infmax/parallel.hpp"
#include "infmax/rng.hpp"

namespace infmax {

// Seeding decision "node v in round t" (t is 1-based).
struct RoundNodePair {
  NodeId node;
  uint32_t round;

  friend bool operator==(const RoundNodePair&, const RoundNodePair&) = default;
  friend auto operator<=>(const RoundNodePair&, const RoundNodePair&) = default;
};

// T per-round seed sets; the same node may seed several rounds.
struct SeedSchedule {
  uint32_t budget = 0;                        // per-round cap k
  std::vector<std::vector<NodeId>> rounds;    // index t-1 holds S_t, sorted

  uint32_t horizon() const { return static_cast<uint32_t>(rounds.size()); }

  bool contains(NodeId v, uint32_t round) const {
    const auto& s = rounds[round - 1];
    return std::binary_search(s.begin(), s.end(), v);
  }

  void add(NodeId v, uint32_t round) {
    auto& s = rounds[round - 1];
    s.insert(std::upper_bound(s.begin(), s.end(), v), v);
  }

  std::vector<RoundNodePair> pairs() const {
    std::vector<RoundNodePair> out;
    for (uint32_t t = 1; t <= horizon(); ++t)
      for (NodeId v : rounds[t - 1]) out.push_back({v, t});
    return out;
  }

  static SeedSchedule empty(uint32_t T, uint32_t k) {
    SeedSchedule s;
    s.budget = k;
    s.rounds.assign(T, {});
    return s;
  }

  static SeedSchedule from_pairs(std::span<const RoundNodePair> ps, uint32_t T, uint32_t k) {
    SeedSchedule s = empty(T, k);
    for (const auto& p : ps) s.add(p.node, p.round);
    return s;
  }

  void validate(const DirectedGraph& g) const {
    for (const auto& s : rounds) {
      if (budget > 0 && s.size() > budget) throw InputError("round exceeds budget k");
      for (NodeId v : s)
        if (v >= g.num_nodes()) throw InputError("seed node out of range");
    }
  }
};

struct SpreadEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  size_t samples = 0;
};

struct McOptions {
  int threads = 0;
  // Reuse one world stream across schedules evaluated from the same Rng
  // state (variance-reduced comparisons; not part of the reference method).
  bool common_random_numbers = false;
};

namespace detail {

// Union of per-round propagations; coins are flipped on first touch, which
// matches sampling a full live-edge graph per round.
inline size_t simulate_schedule_count(const DirectedGraph& g, const SeedSchedule& sched,
                                      Rng& rng, EpochMarker& activated, EpochMarker& visited,
                                      std::vector<NodeId>& queue,
                                      std::vector<NodeId>* out_nodes) {
  activated.ensure(g.num_nodes());
  visited.ensure(g.num_nodes());
  activated.next_epoch();
  size_t total = 0;
  for (uint32_t t = 0; t < sched.horizon(); ++t) {
    visited.next_epoch();
    queue.clear();
    for (NodeId s : sched.rounds[t])
      if (visited.mark(s)) queue.push_back(s);
    for (size_t head = 0; head < queue.size(); ++head) {
      NodeId u = queue[head];
      if (activated.mark(u)) {
        ++total;
        if (out_nodes) out_nodes->push_back(u);
      }
      for (uint32_t e : g.out_edges(u)) {
        const Edge& ed = g.edge(e);
        if (visited.marked(ed.dst)) continue;
        if (rng.coin(ed.p)) {
          visited.mark(ed.dst);
          queue.push_back(ed.dst);
        }
      }
    }
  }
  return total;
}

}  // namespace detail

// One MRT outcome: T independent live-edge draws, union of the reaches.
inline std::vector<NodeId> simulate_schedule(const DirectedGraph& g, const SeedSchedule& sched,
                                             Rng& rng) {
  EpochMarker activated, visited;
  std::vector<NodeId> queue, nodes;
  detail::simulate_schedule_count(g, sched, rng, activated, visited, queue, &nodes);
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

// Monte Carlo estimate of rho(schedule) over `samples` runs. Sample i draws
// from substream i, so results are identical for any thread count.
inline SpreadEstimate estimate_rho(const DirectedGraph& g, const SeedSchedule& sched,
                                   size_t samples, Rng& rng, const McOptions& opts = {}) {
  Rng base = opts.common_random_numbers ? rng.substream(0) : rng.substream(rng.next());
  std::vector<uint32_t> counts(samples);
  parallel_for(
      samples,
      [&](size_t i) {
        thread_local EpochMarker activated, visited;
        thread_local std::vector<NodeId> queue;
        Rng r = base.substream(i);
        counts[i] = static_cast<uint32_t>(
            detail::simulate_schedule_count(g, sched, r, activated, visited, queue, nullptr));
      },
      opts.threads);

  SpreadEstimate est;
  est.samples = samples;
  uint64_t sum = 0, sumsq = 0;
  for (uint32_t c : counts) {
    sum += c;
    sumsq += static_cast<uint64_t>(c) * c;
  }
  if (samples > 0) est.mean = static_cast<double>(sum) / static_cast<double>(samples);
  if (samples > 1) {
    double var = (static_cast<double>(sumsq) -
                  static_cast<double>(sum) * static_cast<double>(sum) / samples) /
                 (static_cast<double>(samples) - 1.0);
    if (var < 0) var = 0;
    est.stderr_ = std::sqrt(var / static_cast<double>(samples));
  }
  return est;
}

// R = ceil(31 k^2 n ln(2 k n^(l+1) T) / eps^2); log terms in ln-space to
// avoid overflow for large n.
inline uint64_t simulation_count(uint32_t k, uint64_t n, double ell, uint32_t T, double eps) {
  double ln_term = std::log(2.0 * k) + (ell + 1.0) * std::log(static_cast<double>(n)) +
                   std::log(static_cast<double>(T));
  double r = 31.0 * k * k * static_cast<double>(n) * ln_term / (eps * eps);
  return static_cast<uint64_t>(std::ceil(r));
}

}  // namespace infmax
