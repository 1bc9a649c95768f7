#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "infmax/graph.hpp"
#include "infmax/mrt.hpp"
#include "infmax/parallel.hpp"

namespace infmax {

using ScheduleEvaluator = std::function<double(const SeedSchedule&)>;

// Monte Carlo rho estimator whose sample stream is a pure function of
// (seed, schedule), so concurrent candidate evaluations replay identically.
inline ScheduleEvaluator make_mc_evaluator(const DirectedGraph& g, size_t R, uint64_t seed,
                                           const McOptions& opts = {}) {
  return [&g, R, seed, opts](const SeedSchedule& sched) {
    uint64_t h = seed;
    for (uint32_t t = 0; t < sched.horizon(); ++t) {
      h = hash_combine(h, t + 1);
      for (NodeId v : sched.rounds[t]) h = hash_combine(h, v);
    }
    Rng rng(h);
    McOptions inner = opts;
    inner.common_random_numbers = true;  // the stream is already schedule-keyed
    return estimate_rho(g, sched, R, rng, inner).mean;
  };
}

struct PickRecord {
  uint32_t round;
  NodeId node;
  double gain;
  bool zero_gain;  // filled the budget without improving the estimate
};

struct GreedyResult {
  SeedSchedule schedule;
  std::vector<PickRecord> picks;
  double final_value = 0;
  size_t evaluations = 0;
};

struct GreedyOptions {
  int threads = 0;
  bool lazy = false;  // CELF-style accelerator; off in conformance runs
};

namespace detail {

struct Candidate {
  double bound;
  uint32_t round;
  NodeId node;
  // max-heap by bound, ties to smallest (round, node)
  bool operator<(const Candidate& o) const {
    if (bound != o.bound) return bound < o.bound;
    if (round != o.round) return round > o.round;
    return node > o.node;
  }
};

}  // namespace detail

// Within-round greedy: rounds are filled in order, each with k greedy
// picks against the evaluated spread of the schedule so far.
inline GreedyResult double_greedy(const DirectedGraph& g, uint32_t T, uint32_t k,
                                  const ScheduleEvaluator& eval, const GreedyOptions& opts = {}) {
  const NodeId n = g.num_nodes();
  if (k > n) throw InfeasibleError("budget exceeds node count");
  GreedyResult res;
  res.schedule = SeedSchedule::empty(T, k);
  double base_value = 0.0;

  for (uint32_t t = 1; t <= T; ++t) {
    std::priority_queue<detail::Candidate> heap;
    if (opts.lazy) {
      std::vector<double> value(n, 0);
      std::vector<NodeId> cands;
      for (NodeId v = 0; v < n; ++v) cands.push_back(v);
      parallel_for(
          cands.size(),
          [&](size_t i) {
            SeedSchedule trial = res.schedule;
            trial.add(cands[i], t);
            value[cands[i]] = eval(trial);
          },
          opts.threads);
      res.evaluations += n;
      for (NodeId v = 0; v < n; ++v) heap.push({value[v] - base_value, t, v});
    }

    for (uint32_t j = 0; j < k && j < n; ++j) {
      NodeId pick = n;
      double pick_value = 0;
      if (opts.lazy) {
        // pop until the freshest bound stays on top
        for (;;) {
          detail::Candidate c = heap.top();
          heap.pop();
          SeedSchedule trial = res.schedule;
          trial.add(c.node, t);
          double val = eval(trial);
          ++res.evaluations;
          double gain = val - base_value;
          if (heap.empty() || gain >= heap.top().bound) {
            pick = c.node;
            pick_value = val;
            break;
          }
          heap.push({gain, t, c.node});
        }
      } else {
        std::vector<double> value(n, -1);
        std::vector<NodeId> cands;
        for (NodeId v = 0; v < n; ++v)
          if (!res.schedule.contains(v, t)) cands.push_back(v);
        parallel_for(
            cands.size(),
            [&](size_t i) {
              SeedSchedule trial = res.schedule;
              trial.add(cands[i], t);
              value[cands[i]] = eval(trial);
            },
            opts.threads);
        res.evaluations += cands.size();
        double best = -1;
        for (NodeId v : cands) {
          if (value[v] > best) {
            best = value[v];
            pick = v;
          }
        }
        pick_value = best;
      }
      double gain = pick_value - base_value;
      res.schedule.add(pick, t);
      res.picks.push_back({t, pick, gain, gain <= 0.0});
      base_value = pick_value;
    }
  }
  res.final_value = base_value;
  return res;
}

// Cross-round greedy under the per-round budget: T*k picks, each the
// feasible (node, round) pair of maximum estimated marginal gain.
inline GreedyResult global_greedy(const DirectedGraph& g, uint32_t T, uint32_t k,
                                  const ScheduleEvaluator& eval, const GreedyOptions& opts = {}) {
  const NodeId n = g.num_nodes();
  if (k > n) throw InfeasibleError("budget exceeds node count");
  GreedyResult res;
  res.schedule = SeedSchedule::empty(T, k);
  double base_value = 0.0;

  auto feasible = [&](uint32_t t, NodeId v) {
    return res.schedule.rounds[t - 1].size() < k && !res.schedule.contains(v, t);
  };

  std::priority_queue<detail::Candidate> heap;
  if (opts.lazy) {
    std::vector<double> value(static_cast<size_t>(T) * n, 0);
    parallel_for(
        static_cast<size_t>(T) * n,
        [&](size_t i) {
          uint32_t t = static_cast<uint32_t>(i / n) + 1;
          NodeId v = static_cast<NodeId>(i % n);
          SeedSchedule trial = res.schedule;
          trial.add(v, t);
          value[i] = eval(trial);
        },
        opts.threads);
    res.evaluations += static_cast<size_t>(T) * n;
    for (uint32_t t = 1; t <= T; ++t)
      for (NodeId v = 0; v < n; ++v)
        heap.push({value[static_cast<size_t>(t - 1) * n + v] - base_value, t, v});
  }

  size_t steps = static_cast<size_t>(T) * k;
  for (size_t step = 0; step < steps; ++step) {
    uint32_t pick_t = 0;
    NodeId pick_v = n;
    double pick_value = 0;
    if (opts.lazy) {
      for (;;) {
        if (heap.empty()) break;
        detail::Candidate c = heap.top();
        heap.pop();
        if (!feasible(c.round, c.node)) continue;
        SeedSchedule trial = res.schedule;
        trial.add(c.node, c.round);
        double val = eval(trial);
        ++res.evaluations;
        double gain = val - base_value;
        if (heap.empty() || gain >= heap.top().bound) {
          pick_t = c.round;
          pick_v = c.node;
          pick_value = val;
          break;
        }
        heap.push({gain, c.round, c.node});
      }
      if (pick_t == 0) break;  // no feasible pair left
    } else {
      std::vector<std::pair<uint32_t, NodeId>> cands;
      for (uint32_t t = 1; t <= T; ++t)
        for (NodeId v = 0; v < n; ++v)
          if (feasible(t, v)) cands.push_back({t, v});
      if (cands.empty()) break;
      std::vector<double> value(cands.size());
      parallel_for(
          cands.size(),
          [&](size_t i) {
            SeedSchedule trial = res.schedule;
            trial.add(cands[i].second, cands[i].first);
            value[i] = eval(trial);
          },
          opts.threads);
      res.evaluations += cands.size();
      double best = -1;
      size_t best_i = 0;
      for (size_t i = 0; i < cands.size(); ++i) {
        if (value[i] > best) {
          best = value[i];
          best_i = i;
        }
      }
      pick_t = cands[best_i].first;
      pick_v = cands[best_i].second;
      pick_value = best;
    }
    double gain = pick_value - base_value;
    res.schedule.add(pick_v, pick_t);
    res.picks.push_back({pick_t, pick_v, gain, gain <= 0.0});
    base_value = pick_value;
  }
  res.final_value = base_value;
  return res;
}

}  // namespace infmax
