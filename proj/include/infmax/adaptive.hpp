#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "infmax/graph.hpp"
#include "infmax/mrt.hpp"
#include "infmax/parallel.hpp"
#include "infmax/rng.hpp"
#include "infmax/rr.hpp"

namespace infmax {

// What one round's propagation revealed: the subgraph of the round's
// live-edge graph reached from the seeds. Nothing outside it is exposed.
struct RoundTrace {
  std::vector<NodeId> seeds;
  std::vector<NodeId> reached;          // sorted, includes seeds
  std::vector<NodeId> newly_activated;  // sorted, reached minus previous active
  std::vector<uint32_t> live_edges;     // observed live edge ids within the subgraph
};

class Feedback {
 public:
  uint32_t rounds_observed() const { return static_cast<uint32_t>(traces_.size()); }
  const std::vector<NodeId>& active() const { return active_; }
  const std::vector<RoundTrace>& traces() const { return traces_; }
  bool is_active(NodeId v) const {
    return std::binary_search(active_.begin(), active_.end(), v);
  }

  void observe(RoundTrace t) {
    std::vector<NodeId> merged;
    merged.reserve(active_.size() + t.reached.size());
    std::set_union(active_.begin(), active_.end(), t.reached.begin(), t.reached.end(),
                   std::back_inserter(merged));
    t.newly_activated.clear();
    std::set_difference(t.reached.begin(), t.reached.end(), active_.begin(), active_.end(),
                        std::back_inserter(t.newly_activated));
    active_ = std::move(merged);
    traces_.push_back(std::move(t));
  }

 private:
  std::vector<NodeId> active_;
  std::vector<RoundTrace> traces_;
};

// Decision contract: (graph, feedback, k, round, rng substream) -> seeds,
// at most k of them. Policies may keep per-trial state; run_adaptive
// builds one instance per trial through a factory.
using Policy =
    std::function<std::vector<NodeId>(const DirectedGraph&, const Feedback&, uint32_t k,
                                      uint32_t round, Rng&)>;
using PolicyFactory = std::function<Policy()>;

struct AdaptiveRunResult {
  SeedSchedule realized;
  uint32_t total_active = 0;
  std::vector<uint32_t> round_gains;  // sums to total_active
  Feedback feedback;
};

struct PolicyEvaluation {
  double mean = 0;
  double stderr_ = 0;
  size_t trials = 0;
  std::vector<AdaptiveRunResult> runs;
};

namespace detail {

// Hidden environment for one trial. Edge coins are pure functions of
// (trial key, round, edge), so the round's live-edge graph exists in full
// before any of it is observed, and revisits are consistent by
// construction.
struct TrialEnvironment {
  const DirectedGraph& g;
  uint64_t trial_key;

  bool edge_live(uint32_t round, uint32_t e) const {
    uint64_t h = hash_combine(hash_combine(trial_key, round), e);
    return u01_from_bits(h) < g.edge(e).p;
  }

  RoundTrace propagate(uint32_t round, std::vector<NodeId> seeds) const {
    RoundTrace t;
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    t.seeds = seeds;
    std::vector<uint8_t> seen(g.num_nodes(), 0);
    std::vector<NodeId> queue;
    for (NodeId s : t.seeds) {
      if (!seen[s]) {
        seen[s] = 1;
        queue.push_back(s);
      }
    }
    for (size_t head = 0; head < queue.size(); ++head) {
      NodeId u = queue[head];
      for (uint32_t e : g.out_edges(u)) {
        if (!edge_live(round, e)) continue;
        t.live_edges.push_back(e);
        NodeId v = g.edge(e).dst;
        if (!seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
      }
    }
    t.reached = std::move(queue);
    std::sort(t.reached.begin(), t.reached.end());
    return t;
  }
};

}  // namespace detail

struct RunOptions {
  int threads = 0;
  bool keep_runs = true;
};

// f_avg estimation: per trial the policy sees only the Feedback built from
// observed propagation. Trial i is driven by substream i of a fresh base.
inline PolicyEvaluation run_adaptive(const DirectedGraph& g, const PolicyFactory& factory,
                                     uint32_t T, uint32_t k, size_t trials, Rng& rng,
                                     const RunOptions& opts = {}) {
  if (trials < 1) throw InputError("need at least one trial");
  Rng base = rng.substream(rng.next());
  std::vector<AdaptiveRunResult> runs(trials);
  std::atomic<bool> over_budget{false};
  parallel_for(
      trials,
      [&](size_t i) {
        Rng trial_rng = base.substream(i);
        detail::TrialEnvironment env{g, trial_rng.next()};
        Policy policy = factory();
        AdaptiveRunResult run;
        run.realized = SeedSchedule::empty(T, k);
        for (uint32_t t = 1; t <= T; ++t) {
          Rng policy_rng = trial_rng.substream(t);
          std::vector<NodeId> seeds = policy(g, run.feedback, k, t, policy_rng);
          if (seeds.size() > k) {
            over_budget.store(true);
            return;
          }
          for (NodeId s : seeds) run.realized.add(s, t);
          RoundTrace trace = env.propagate(t, std::move(seeds));
          size_t before = run.feedback.active().size();
          run.feedback.observe(std::move(trace));
          run.round_gains.push_back(
              static_cast<uint32_t>(run.feedback.active().size() - before));
        }
        run.total_active = static_cast<uint32_t>(run.feedback.active().size());
        runs[i] = std::move(run);
      },
      opts.threads);
  if (over_budget.load()) throw InputError("policy exceeded budget");

  PolicyEvaluation ev;
  ev.trials = trials;
  uint64_t sum = 0, sumsq = 0;
  for (const auto& r : runs) {
    sum += r.total_active;
    sumsq += static_cast<uint64_t>(r.total_active) * r.total_active;
  }
  ev.mean = static_cast<double>(sum) / static_cast<double>(trials);
  if (trials > 1) {
    double var = (static_cast<double>(sumsq) -
                  static_cast<double>(sum) * static_cast<double>(sum) / trials) /
                 (static_cast<double>(trials) - 1.0);
    if (var < 0) var = 0;
    ev.stderr_ = std::sqrt(var / static_cast<double>(trials));
  }
  if (opts.keep_runs) ev.runs = std::move(runs);
  return ev;
}

inline PolicyEvaluation run_adaptive(const DirectedGraph& g, const Policy& policy, uint32_t T,
                                     uint32_t k, size_t trials, Rng& rng,
                                     const RunOptions& opts = {}) {
  return run_adaptive(g, [&policy]() { return policy; }, T, k, trials, rng, opts);
}

// Expected newly-activated count of seeding S given already-active nodes:
// influence spread with weight 0 on a_prev and 1 elsewhere.
inline double marginal_gain(const DirectedGraph& g, std::span<const NodeId> a_prev,
                            std::span<const NodeId> seeds, size_t samples, Rng& rng,
                            int threads = 0) {
  Rng base = rng.substream(rng.next());
  std::vector<uint8_t> active(g.num_nodes(), 0);
  for (NodeId v : a_prev) active[v] = 1;
  std::vector<uint32_t> counts(samples);
  parallel_for(
      samples,
      [&](size_t i) {
        thread_local EpochMarker visited;
        thread_local std::vector<NodeId> queue;
        visited.ensure(g.num_nodes());
        visited.next_epoch();
        queue.clear();
        Rng r = base.substream(i);
        uint32_t gain = 0;
        for (NodeId s : seeds)
          if (visited.mark(s)) queue.push_back(s);
        for (size_t head = 0; head < queue.size(); ++head) {
          NodeId u = queue[head];
          if (!active[u]) ++gain;
          for (uint32_t e : g.out_edges(u)) {
            const Edge& ed = g.edge(e);
            if (visited.marked(ed.dst)) continue;
            if (r.coin(ed.p)) {
              visited.mark(ed.dst);
              queue.push_back(ed.dst);
            }
          }
        }
        counts[i] = gain;
      },
      threads);
  uint64_t sum = 0;
  for (uint32_t c : counts) sum += c;
  return samples == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(samples);
}

// Monte-Carlo greedy for one round: k picks maximizing the estimated
// weighted spread, R simulations per candidate evaluation. Zero-gain picks
// still fill the budget, smallest id first.
inline std::vector<NodeId> ada_greedy_round(const DirectedGraph& g,
                                            std::span<const NodeId> a_prev, uint32_t k,
                                            size_t R, Rng& rng, int threads = 0) {
  const NodeId n = g.num_nodes();
  Rng base = rng.substream(rng.next());
  std::vector<NodeId> seeds;
  std::vector<uint8_t> chosen(n, 0);
  uint32_t picks = k < n ? k : n;
  for (uint32_t j = 0; j < picks; ++j) {
    std::vector<double> value(n, -1.0);
    std::vector<NodeId> cands;
    for (NodeId v = 0; v < n; ++v)
      if (!chosen[v]) cands.push_back(v);
    parallel_for(
        cands.size(),
        [&](size_t idx) {
          NodeId v = cands[idx];
          std::vector<NodeId> trial(seeds);
          trial.push_back(v);
          Rng r = base.substream(hash_combine(j, v));
          value[v] = marginal_gain(g, a_prev, trial, R, r, 1);
        },
        threads);
    NodeId best = n;
    double best_val = -1.0;
    for (NodeId v = 0; v < n; ++v) {
      if (chosen[v]) continue;
      if (value[v] > best_val) {
        best_val = value[v];
        best = v;
      }
    }
    chosen[best] = 1;
    seeds.push_back(best);
  }
  std::sort(seeds.begin(), seeds.end());
  return seeds;
}

// RR set rooted uniformly outside the already-active set.
inline RRSet gen_weighted_rr(const DirectedGraph& g, std::span<const NodeId> complement,
                             Rng& rng, RrScratch* scratch = nullptr) {
  if (complement.empty()) throw InputError("no inactive node left to root an RR set");
  NodeId root = complement[rng.below(complement.size())];
  return gen_rr(g, root, rng, scratch);
}

struct AdaImmRoundResult {
  std::vector<NodeId> seeds;
  double spread_estimate = 0;  // n_a * covered fraction
  ImmParams params;
  Phase1Result phase1;
};

struct AdaImmOptions {
  int threads = 0;
  // Carry RR sets (re-rooted away from newly active nodes) and the last
  // halving index across rounds. Off by default; the reference method
  // regenerates from scratch.
  bool incremental = false;
};

struct AdaImmCarry {
  std::vector<RRSet> retained;
  uint64_t counter = 0;
  uint32_t last_iter = 1;
};

// One round of adaptive IMM: weighted RR sets rooted in V \ A, spread
// scale n_a = n - |A|.
inline AdaImmRoundResult ada_imm_round(const DirectedGraph& g, std::span<const NodeId> a_prev,
                                       uint32_t k, double eps, double ell, uint32_t T, Rng& rng,
                                       const AdaImmOptions& opts = {},
                                       AdaImmCarry* carry = nullptr) {
  const NodeId n = g.num_nodes();
  if (a_prev.size() >= n) throw InputError("all nodes already active");
  if (k > n) throw InfeasibleError("budget exceeds node count");
  uint64_t n_a = n - a_prev.size();

  AdaImmRoundResult res;
  res.params = compute_params(eps, ell, k, n, T, ImmVariant::Adaptive);

  std::vector<NodeId> complement;
  complement.reserve(n_a);
  {
    size_t ai = 0;
    for (NodeId v = 0; v < n; ++v) {
      if (ai < a_prev.size() && a_prev[ai] == v) ++ai;
      else complement.push_back(v);
    }
  }

  RrStore store(n);
  uint64_t counter = 0;
  uint32_t start_iter = 1;
  if (carry && opts.incremental) {
    std::vector<uint8_t> active(n, 0);
    for (NodeId v : a_prev) active[v] = 1;
    for (auto& s : carry->retained)
      if (!active[s.root]) store.add(std::move(s));
    carry->retained.clear();
    counter = carry->counter;
    start_iter = carry->last_iter > 1 ? carry->last_iter - 1 : 1;
  }

  Rng base = rng.substream(rng.next());
  auto ensure_total = [&](size_t target) {
    while (store.size() < target) {
      size_t batch = target - store.size();
      std::vector<RRSet> buf(batch);
      parallel_for(
          batch,
          [&](size_t j) {
            thread_local RrScratch scratch;
            Rng r = base.substream(counter + j);
            buf[j] = gen_weighted_rr(g, complement, r, &scratch);
          },
          opts.threads);
      counter += batch;
      for (auto& s : buf) store.add(std::move(s));
    }
    return store.size();
  };
  auto coverage = [&]() { return node_selection(store, k).covered_fraction; };

  res.phase1 = imm_phase1(res.params, n_a, ensure_total, coverage, start_iter);
  auto sel = node_selection(store, k);
  res.seeds = sel.nodes;
  res.spread_estimate = static_cast<double>(n_a) * sel.covered_fraction;

  if (carry && opts.incremental) {
    carry->retained.reserve(store.size());
    for (size_t i = 0; i < store.size(); ++i) carry->retained.push_back(store.sample(i));
    carry->counter = counter;
    carry->last_iter = res.phase1.halving_iters > 0 ? res.phase1.halving_iters : 1;
  }
  return res;
}

// ---- shipped policies ----

inline PolicyFactory make_ada_greedy_policy(size_t R, int threads = 0) {
  return [R, threads]() -> Policy {
    return [R, threads](const DirectedGraph& g, const Feedback& fb, uint32_t k, uint32_t,
                        Rng& rng) {
      return ada_greedy_round(g, fb.active(), k, R, rng, threads);
    };
  };
}

inline PolicyFactory make_ada_imm_policy(double eps, double ell, uint32_t T,
                                         const AdaImmOptions& opts = {}) {
  return [eps, ell, T, opts]() -> Policy {
    auto carry = std::make_shared<AdaImmCarry>();
    return [eps, ell, T, opts, carry](const DirectedGraph& g, const Feedback& fb, uint32_t k,
                                      uint32_t, Rng& rng) {
      if (fb.active().size() >= g.num_nodes()) {
        // nothing left to influence; seed the lowest-id nodes
        std::vector<NodeId> s;
        for (NodeId v = 0; v < k && v < g.num_nodes(); ++v) s.push_back(v);
        return s;
      }
      auto res = ada_imm_round(g, fb.active(), k, eps, ell, T, rng, opts, carry.get());
      return res.seeds;
    };
  };
}

// Non-adaptive schedule wrapped as a policy.
inline PolicyFactory make_schedule_policy(SeedSchedule sched) {
  return [sched]() -> Policy {
    return [sched](const DirectedGraph&, const Feedback&, uint32_t, uint32_t round,
                   Rng&) -> std::vector<NodeId> {
      if (round > sched.horizon()) return {};
      return sched.rounds[round - 1];
    };
  };
}

}  // namespace infmax
