#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "infmax/graph.hpp"
#include "infmax/parallel.hpp"
#include "infmax/rng.hpp"
#include "infmax/rr.hpp"

namespace infmax {

inline constexpr double kInfDelay = std::numeric_limits<double>::infinity();

struct DelayDist {
  enum class Kind { Exponential, Constant };
  Kind kind = Kind::Exponential;
  double param = 1.0;  // rate for Exponential, value for Constant

  double sample(Rng& rng) const {
    return kind == Kind::Exponential ? rng.exponential(param) : param;
  }
  static DelayDist exponential(double rate) {
    if (!(rate > 0)) throw InputError("exponential rate must be positive");
    return {Kind::Exponential, rate};
  }
  static DelayDist constant(double v) {
    if (!(v >= 0)) throw InputError("constant delay must be non-negative");
    return {Kind::Constant, v};
  }
};

struct SelfActivationProfile {
  std::vector<double> q;          // self-activation probability per node
  std::vector<DelayDist> delta;   // self-activation delay per node

  static SelfActivationProfile uniform(NodeId n, double q_value, DelayDist d) {
    if (!(q_value >= 0.0 && q_value <= 1.0)) throw InputError("q outside [0,1]");
    SelfActivationProfile p;
    p.q.assign(n, q_value);
    p.delta.assign(n, d);
    return p;
  }
};

using EdgeDelays = std::vector<DelayDist>;

inline EdgeDelays uniform_edge_delays(size_t m, DelayDist d) { return EdgeDelays(m, d); }

// Synthetic q assignments: 0 uniform, 1 rising with out-degree, 2 falling
// with out-degree, 3/4 half-and-half mixes of 0 with 1/2. Base draw is
// uniform on [0, c]; results are clamped into [0,1] and zero out-degrees
// are treated as degree 1 in case 2.
inline std::vector<double> q_case_profile(const DirectedGraph& g, int q_case, double c, Rng& rng) {
  if (q_case < 0 || q_case > 4) throw InputError("q case must be 0..4");
  if (!(c >= 0)) throw InputError("q base must be non-negative");
  const NodeId n = g.num_nodes();
  std::vector<double> q(n);
  auto clamp01 = [](double x) { return x < 0 ? 0 : (x > 1 ? 1 : x); };
  for (NodeId v = 0; v < n; ++v) {
    double beta = rng.uniform01() * c;
    double deg = static_cast<double>(g.out_degree(v));
    bool alt = (q_case == 1 || q_case == 2) || ((q_case == 3 || q_case == 4) && rng.coin(0.5));
    if (!alt) {
      q[v] = clamp01(beta);
    } else if (q_case == 1 || q_case == 3) {
      q[v] = clamp01(beta * deg);
    } else {
      q[v] = clamp01(beta / (deg > 0 ? deg : 1.0));
    }
  }
  return q;
}

// Full randomness of one SAIC outcome. edge_delay entries are meaningful
// only where the edge is live.
struct PossibleWorld {
  std::vector<uint8_t> self_active;
  std::vector<double> self_delay;
  std::vector<uint8_t> live;
  std::vector<double> edge_delay;
};

inline PossibleWorld sample_world(const DirectedGraph& g, const SelfActivationProfile& prof,
                                  const EdgeDelays& edge_delays, Rng& rng) {
  const NodeId n = g.num_nodes();
  const size_t m = g.num_edges();
  PossibleWorld w;
  w.self_active.resize(n);
  w.self_delay.resize(n);
  w.live.resize(m);
  w.edge_delay.resize(m);
  for (NodeId v = 0; v < n; ++v) {
    w.self_active[v] = rng.coin(prof.q[v]) ? 1 : 0;
    w.self_delay[v] = prof.delta[v].sample(rng);
  }
  for (size_t e = 0; e < m; ++e) {
    w.live[e] = rng.coin(g.edge(e).p) ? 1 : 0;
    w.edge_delay[e] = edge_delays[e].sample(rng);
  }
  return w;
}

// Activated set when S is boosted: reach over live edges from S and the
// self-activated nodes. Delays never change membership.
inline std::vector<NodeId> boosted_active_set(const DirectedGraph& g, const PossibleWorld& w,
                                              std::span<const NodeId> seeds) {
  std::vector<uint8_t> seen(g.num_nodes(), 0);
  std::vector<NodeId> queue;
  for (NodeId s : seeds)
    if (!seen[s]) {
      seen[s] = 1;
      queue.push_back(s);
    }
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (w.self_active[v] && !seen[v]) {
      seen[v] = 1;
      queue.push_back(v);
    }
  for (size_t head = 0; head < queue.size(); ++head) {
    NodeId u = queue[head];
    for (uint32_t e : g.out_edges(u)) {
      if (!w.live[e]) continue;
      NodeId v = g.edge(e).dst;
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  std::sort(queue.begin(), queue.end());
  return queue;
}

// Minimum total delay (self delay at the source + live-path edge delays)
// from any node of `sources` to every node.
inline std::vector<double> multi_source_delay(const DirectedGraph& g, const PossibleWorld& w,
                                              std::span<const NodeId> sources) {
  const NodeId n = g.num_nodes();
  std::vector<double> dist(n, kInfDelay);
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  for (NodeId s : sources) {
    double d0 = w.self_delay[s];
    if (d0 < dist[s]) {
      dist[s] = d0;
      pq.push({d0, s});
    }
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (uint32_t e : g.out_edges(u)) {
      if (!w.live[e]) continue;
      double nd = d + w.edge_delay[e];
      NodeId v = g.edge(e).dst;
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.push({nd, v});
      }
    }
  }
  return dist;
}

// Earliest self-activated source reaching each node, with its total delay.
// Ties (possible under Constant delays) resolve to the smaller source id.
struct SourceAttribution {
  std::vector<double> delay;      // min total delay from any self-activated node
  std::vector<int64_t> source;    // winning source, -1 if unreachable
};

inline SourceAttribution first_source(const DirectedGraph& g, const PossibleWorld& w) {
  const NodeId n = g.num_nodes();
  SourceAttribution out;
  out.delay.assign(n, kInfDelay);
  out.source.assign(n, -1);
  using Entry = std::tuple<double, int64_t, NodeId>;  // (delay, source, node)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  for (NodeId v = 0; v < n; ++v) {
    if (!w.self_active[v]) continue;
    double d0 = w.self_delay[v];
    if (d0 < out.delay[v] || (d0 == out.delay[v] && static_cast<int64_t>(v) < out.source[v])) {
      out.delay[v] = d0;
      out.source[v] = v;
      pq.push({d0, v, v});
    }
  }
  while (!pq.empty()) {
    auto [d, src, u] = pq.top();
    pq.pop();
    if (d > out.delay[u] || (d == out.delay[u] && src > out.source[u])) continue;
    for (uint32_t e : g.out_edges(u)) {
      if (!w.live[e]) continue;
      double nd = d + w.edge_delay[e];
      NodeId v = g.edge(e).dst;
      if (nd < out.delay[v] || (nd == out.delay[v] && src < out.source[v])) {
        out.delay[v] = nd;
        out.source[v] = src;
        pq.push({nd, src, v});
      }
    }
  }
  return out;
}

// Nodes whose earliest activation in this world comes from `set`, strictly
// ahead of every self-activated source outside it. boosted=true treats the
// whole set as activated regardless of its own coins (seed semantics);
// otherwise only its self-activated members compete.
inline std::vector<NodeId> preemptive_credit(const DirectedGraph& g, const PossibleWorld& w,
                                             std::span<const NodeId> set, bool boosted) {
  const NodeId n = g.num_nodes();
  std::vector<uint8_t> in_set(n, 0);
  for (NodeId v : set) in_set[v] = 1;

  std::vector<NodeId> sources;
  for (NodeId v : set)
    if (boosted || w.self_active[v]) sources.push_back(v);
  std::vector<NodeId> rivals;
  for (NodeId v = 0; v < n; ++v)
    if (w.self_active[v] && !in_set[v]) rivals.push_back(v);

  std::vector<double> ds = multi_source_delay(g, w, sources);
  std::vector<double> dr = multi_source_delay(g, w, rivals);
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v)
    if (ds[v] < kInfDelay && ds[v] < dr[v]) out.push_back(v);
  return out;
}

enum class SaicObjective { SigmaB, Rho, RhoB };

// Forward Monte Carlo over sampled worlds for sigma^B, rho, or rho^B.
inline SpreadEstimate estimate_objective(const DirectedGraph& g,
                                         const SelfActivationProfile& prof,
                                         const EdgeDelays& edge_delays, SaicObjective target,
                                         std::span<const NodeId> set, size_t samples, Rng& rng,
                                         const McOptions& opts = {}) {
  Rng base = opts.common_random_numbers ? rng.substream(0) : rng.substream(rng.next());
  std::vector<uint32_t> counts(samples);
  parallel_for(
      samples,
      [&](size_t i) {
        Rng r = base.substream(i);
        PossibleWorld w = sample_world(g, prof, edge_delays, r);
        size_t c;
        if (target == SaicObjective::SigmaB) {
          c = boosted_active_set(g, w, set).size();
        } else {
          c = preemptive_credit(g, w, set, target == SaicObjective::RhoB).size();
        }
        counts[i] = static_cast<uint32_t>(c);
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

// ---- preemptive RR set generation ----

struct PRRResult {
  std::vector<NodeId> members;  // sorted
  int64_t source = -1;          // first self-activated node reaching the root, -1 if none
};

struct PrrTrace {
  std::vector<double> pop_delays;  // non-stale pops, in pop order
};

namespace detail {

// Dijkstra over reversed live edges with one shadow node per real node;
// the shadow edge carries the self-activation delay. Entry ids < n are
// real, ids >= n are shadows, so the (delay, id) ordering breaks delay
// ties as (real before shadow, then smaller node id).
template <typename World>
PRRResult gen_prr_core(const DirectedGraph& g, NodeId root, World&& world, PrrTrace* trace) {
  const NodeId n = g.num_nodes();
  std::vector<double> delay(2 * static_cast<size_t>(n), kInfDelay);
  std::vector<uint8_t> popped(2 * static_cast<size_t>(n), 0);
  using Entry = std::pair<double, uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  delay[root] = 0.0;
  pq.push({0.0, root});

  PRRResult res;
  while (!pq.empty()) {
    auto [d, id] = pq.top();
    pq.pop();
    if (popped[id]) continue;
    popped[id] = 1;
    if (trace) trace->pop_delays.push_back(d);
    if (id >= n) {
      NodeId v = id - n;
      res.members.push_back(v);
      if (world.self_coin(v)) {
        res.source = v;
        break;
      }
    } else {
      NodeId v = id;
      double sd = d + world.self_delay(v);
      uint32_t shadow = n + v;
      if (sd < delay[shadow]) {
        delay[shadow] = sd;
        pq.push({sd, shadow});
      }
      for (uint32_t e : g.in_edges(v)) {
        if (!world.edge_live(e)) continue;
        double nd = d + world.edge_delay(e);
        NodeId u = g.edge(e).src;
        if (nd < delay[u]) {
          delay[u] = nd;
          pq.push({nd, u});
        }
      }
    }
  }
  std::sort(res.members.begin(), res.members.end());
  return res;
}

struct LazyWorldView {
  const DirectedGraph& g;
  const SelfActivationProfile& prof;
  const EdgeDelays& edge_delays;
  Rng& rng;

  bool edge_live(uint32_t e) { return rng.coin(g.edge(e).p); }
  double edge_delay(uint32_t e) { return edge_delays[e].sample(rng); }
  double self_delay(NodeId v) { return prof.delta[v].sample(rng); }
  bool self_coin(NodeId v) { return rng.coin(prof.q[v]); }
};

struct FixedWorldView {
  const PossibleWorld& w;

  bool edge_live(uint32_t e) const { return w.live[e]; }
  double edge_delay(uint32_t e) const { return w.edge_delay[e]; }
  double self_delay(NodeId v) const { return w.self_delay[v]; }
  bool self_coin(NodeId v) const { return w.self_active[v]; }
};

}  // namespace detail

// Lazily sampled P-RR set: randomness is drawn in exploration order, each
// coin and delay at most once per sample.
inline PRRResult gen_prr(const DirectedGraph& g, const SelfActivationProfile& prof,
                         const EdgeDelays& edge_delays, std::optional<NodeId> root, Rng& rng,
                         PrrTrace* trace = nullptr) {
  NodeId r = root ? *root : static_cast<NodeId>(rng.below(g.num_nodes()));
  detail::LazyWorldView view{g, prof, edge_delays, rng};
  return detail::gen_prr_core(g, r, view, trace);
}

// Same search against a pinned world; used to check the generator against
// the definition-based forward computation.
inline PRRResult gen_prr_in_world(const DirectedGraph& g, const PossibleWorld& w, NodeId root,
                                  PrrTrace* trace = nullptr) {
  return detail::gen_prr_core(g, root, detail::FixedWorldView{w}, trace);
}

// ---- IMM-style solvers ----

struct SaicImmResult {
  std::vector<NodeId> seeds;
  double spread_estimate = 0;
  ImmParams params;
  Phase1Result phase1;
  uint64_t covered_external = 0;  // BIM only
  std::vector<std::string> warnings;
};

struct SaicImmOptions {
  int threads = 0;
};

// IMM with self-activation pre-coverage: a generated RR set containing a
// self-activated member is only counted, not stored, and the coverage
// fraction folds those counts back in.
inline SaicImmResult imm_bim(const DirectedGraph& g, const SelfActivationProfile& prof,
                             uint32_t k, double eps, double ell, Rng& rng,
                             const SaicImmOptions& opts = {}) {
  const NodeId n = g.num_nodes();
  if (k > n) throw InfeasibleError("budget exceeds node count");
  SaicImmResult res;
  res.params = compute_params(eps, ell, k, n, 1, ImmVariant::Standard);

  RrStore store(n);
  Rng base = rng.substream(rng.next());
  uint64_t counter = 0;
  auto ensure_total = [&](size_t target) {
    while (store.total_samples() < target) {
      size_t batch = target - store.total_samples();
      std::vector<RRSet> buf(batch);
      std::vector<uint8_t> pre_covered(batch);
      parallel_for(
          batch,
          [&](size_t j) {
            thread_local RrScratch scratch;
            Rng r = base.substream(counter + j);
            RRSet s = gen_rr(g, std::nullopt, r, &scratch);
            uint8_t cov = 0;
            for (NodeId u : s.members) {
              if (r.coin(prof.q[u])) {
                cov = 1;
                break;
              }
            }
            pre_covered[j] = cov;
            if (!cov) buf[j] = std::move(s);
          },
          opts.threads);
      counter += batch;
      for (size_t j = 0; j < batch; ++j) {
        if (pre_covered[j]) store.add_covered_external();
        else store.add(std::move(buf[j]));
      }
    }
    return store.total_samples();
  };
  auto coverage = [&]() { return node_selection(store, k).covered_fraction; };

  res.phase1 = imm_phase1(res.params, n, ensure_total, coverage);
  auto sel = node_selection(store, k);
  res.seeds = sel.nodes;
  res.spread_estimate = static_cast<double>(n) * sel.covered_fraction;
  res.covered_external = store.covered_external();
  return res;
}

// IMM over P-RR sets (boosted preemptive spread).
inline SaicImmResult imm_bpim(const DirectedGraph& g, const SelfActivationProfile& prof,
                              const EdgeDelays& edge_delays, uint32_t k, double eps, double ell,
                              Rng& rng, const SaicImmOptions& opts = {}) {
  const NodeId n = g.num_nodes();
  if (k > n) throw InfeasibleError("budget exceeds node count");
  SaicImmResult res;
  res.params = compute_params(eps, ell, k, n, 1, ImmVariant::Standard);

  RrStore store(n);
  Rng base = rng.substream(rng.next());
  uint64_t counter = 0;
  auto ensure_total = [&](size_t target) {
    while (store.size() < target) {
      size_t batch = target - store.size();
      std::vector<RRSet> buf(batch);
      parallel_for(
          batch,
          [&](size_t j) {
            Rng r = base.substream(counter + j);
            NodeId root = static_cast<NodeId>(r.below(n));
            PRRResult p = gen_prr(g, prof, edge_delays, root, r);
            buf[j] = RRSet{root, std::move(p.members)};
          },
          opts.threads);
      counter += batch;
      for (auto& s : buf) store.add(std::move(s));
    }
    return store.size();
  };
  auto coverage = [&]() { return node_selection(store, k).covered_fraction; };

  res.phase1 = imm_phase1(res.params, n, ensure_total, coverage);
  auto sel = node_selection(store, k);
  res.seeds = sel.nodes;
  res.spread_estimate = static_cast<double>(n) * sel.covered_fraction;
  return res;
}

// Counter-based preemptive IMM: every sample keeps only the first
// self-activated node u^s reaching the root; the answer is the k largest
// counters and rho({u}) is estimated by n * est_u / theta.
inline SaicImmResult imm_pim(const DirectedGraph& g, const SelfActivationProfile& prof,
                             const EdgeDelays& edge_delays, uint32_t k, double eps, double ell,
                             Rng& rng, const SaicImmOptions& opts = {}) {
  const NodeId n = g.num_nodes();
  if (k > n) throw InfeasibleError("budget exceeds node count");
  SaicImmResult res;
  res.params = compute_params(eps, ell, k, n, 1, ImmVariant::Pim);

  std::vector<uint64_t> est(n, 0);
  size_t total = 0;
  Rng base = rng.substream(rng.next());
  uint64_t counter = 0;
  auto ensure_total = [&](size_t target) {
    while (total < target) {
      size_t batch = target - total;
      std::vector<int64_t> hits(batch);
      parallel_for(
          batch,
          [&](size_t j) {
            Rng r = base.substream(counter + j);
            NodeId root = static_cast<NodeId>(r.below(n));
            PRRResult p = gen_prr(g, prof, edge_delays, root, r);
            hits[j] = p.source;
          },
          opts.threads);
      counter += batch;
      total += batch;
      for (int64_t h : hits)
        if (h >= 0) ++est[static_cast<size_t>(h)];
    }
    return total;
  };
  auto topk_sum = [&]() {
    std::vector<uint64_t> vals(est);
    uint32_t kk = k < n ? k : n;
    std::nth_element(vals.begin(), vals.begin() + (kk - 1), vals.end(), std::greater<>());
    uint64_t s = 0;
    for (uint32_t i = 0; i < kk; ++i) s += vals[i];
    return s;
  };
  auto coverage = [&]() {
    return total == 0 ? 0.0 : static_cast<double>(topk_sum()) / static_cast<double>(total);
  };

  res.phase1 = imm_phase1(res.params, n, ensure_total, coverage);

  // top k by (count desc, id asc)
  std::vector<NodeId> order(n);
  for (NodeId v = 0; v < n; ++v) order[v] = v;
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return est[a] > est[b]; });
  uint32_t kk = k < n ? k : n;
  res.seeds.assign(order.begin(), order.begin() + kk);
  std::sort(res.seeds.begin(), res.seeds.end());
  uint64_t top = 0;
  for (NodeId v : res.seeds) top += est[v];
  res.spread_estimate =
      static_cast<double>(n) * static_cast<double>(top) / static_cast<double>(total);
  if (top == 0) res.warnings.push_back("all est counters are zero; returned lowest node ids");
  return res;
}

}  // namespace infmax
