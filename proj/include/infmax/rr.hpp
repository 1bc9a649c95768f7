#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "infmax/graph.hpp"
#include "infmax/mrt.hpp"
#include "infmax/parallel.hpp"
#include "infmax/rng.hpp"

namespace infmax {

struct RRSet {
  NodeId root = 0;
  std::vector<NodeId> members;  // sorted; plain reverse samples contain the root
};

// T reverse samples sharing one root, one per round's live-edge draw.
struct RRSequence {
  NodeId root = 0;
  std::vector<std::vector<NodeId>> per_round;
};

struct RrScratch {
  EpochMarker visited;
  std::vector<NodeId> queue;
};

namespace detail {

inline void reverse_sample_members(const DirectedGraph& g, NodeId root, Rng& rng,
                                   RrScratch& scratch, std::vector<NodeId>& out) {
  scratch.visited.ensure(g.num_nodes());
  scratch.visited.next_epoch();
  scratch.queue.clear();
  scratch.queue.push_back(root);
  scratch.visited.mark(root);
  for (size_t head = 0; head < scratch.queue.size(); ++head) {
    NodeId v = scratch.queue[head];
    for (uint32_t e : g.in_edges(v)) {
      const Edge& ed = g.edge(e);
      if (scratch.visited.marked(ed.src)) continue;
      if (rng.coin(ed.p)) {
        scratch.visited.mark(ed.src);
        scratch.queue.push_back(ed.src);
      }
    }
  }
  out = scratch.queue;
  std::sort(out.begin(), out.end());
}

}  // namespace detail

// Reverse BFS from `root` (uniform when absent), flipping each incoming
// edge's coin on first touch. Same distribution as reverse_reach on a
// sampled live-edge graph.
inline RRSet gen_rr(const DirectedGraph& g, std::optional<NodeId> root, Rng& rng,
                    RrScratch* scratch = nullptr) {
  RrScratch local;
  RrScratch& s = scratch ? *scratch : local;
  RRSet r;
  r.root = root ? *root : static_cast<NodeId>(rng.below(g.num_nodes()));
  detail::reverse_sample_members(g, r.root, rng, s, r.members);
  return r;
}

inline RRSequence gen_rr_sequence(const DirectedGraph& g, uint32_t T, Rng& rng,
                                  RrScratch* scratch = nullptr) {
  RrScratch local;
  RrScratch& s = scratch ? *scratch : local;
  RRSequence seq;
  seq.root = static_cast<NodeId>(rng.below(g.num_nodes()));
  seq.per_round.resize(T);
  for (uint32_t t = 0; t < T; ++t)
    detail::reverse_sample_members(g, seq.root, rng, s, seq.per_round[t]);
  return seq;
}

// Inverted-index store for single-round RR sets. covered_external counts
// samples that were pre-covered by a non-seed cause and therefore not
// stored (IMM for boosted spread); they still enter the sample total.
class RrStore {
 public:
  explicit RrStore(NodeId n) : index_(n) {}

  void add(RRSet s) {
    uint32_t id = static_cast<uint32_t>(samples_.size());
    for (NodeId v : s.members) index_[v].push_back(id);
    samples_.push_back(std::move(s));
  }

  size_t size() const { return samples_.size(); }
  uint64_t covered_external() const { return covered_external_; }
  void add_covered_external() { ++covered_external_; }
  size_t total_samples() const { return samples_.size() + covered_external_; }

  const RRSet& sample(size_t i) const { return samples_[i]; }
  const std::vector<uint32_t>& containing(NodeId v) const { return index_[v]; }
  NodeId num_nodes() const { return static_cast<NodeId>(index_.size()); }

  void dump(std::ostream& out) const;
  static RrStore load(std::istream& in);

 private:
  std::vector<RRSet> samples_;
  std::vector<std::vector<uint32_t>> index_;  // node -> sample ids
  uint64_t covered_external_ = 0;
};

// Store of RR sequences with a per-round inverted index.
class RrSequenceStore {
 public:
  RrSequenceStore(NodeId n, uint32_t T) : rounds_(T), index_(T, std::vector<std::vector<uint32_t>>(n)) {}

  void add(RRSequence s) {
    uint32_t id = static_cast<uint32_t>(samples_.size());
    for (uint32_t t = 0; t < rounds_; ++t)
      for (NodeId v : s.per_round[t]) index_[t][v].push_back(id);
    samples_.push_back(std::move(s));
  }

  size_t size() const { return samples_.size(); }
  uint32_t rounds() const { return rounds_; }
  const RRSequence& sample(size_t i) const { return samples_[i]; }
  const std::vector<uint32_t>& containing(uint32_t round, NodeId v) const {
    return index_[round - 1][v];
  }
  NodeId num_nodes() const {
    return rounds_ == 0 ? 0 : static_cast<NodeId>(index_[0].size());
  }

  bool covered_by(const SeedSchedule& sched, size_t i) const {
    const RRSequence& s = samples_[i];
    for (uint32_t t = 0; t < sched.horizon() && t < rounds_; ++t) {
      const auto& members = s.per_round[t];
      for (NodeId v : sched.rounds[t])
        if (std::binary_search(members.begin(), members.end(), v)) return true;
    }
    return false;
  }

  void dump(std::ostream& out) const;
  static RrSequenceStore load(std::istream& in);

 private:
  uint32_t rounds_;
  std::vector<RRSequence> samples_;
  std::vector<std::vector<std::vector<uint32_t>>> index_;  // [round][node] -> ids
};

// rho estimate of Lemma-style sequence coverage: n * fraction of sequences
// intersected by the schedule in some round.
inline double estimate_rho_rr(const RrSequenceStore& store, const SeedSchedule& sched) {
  if (store.size() == 0) throw InputError("empty RR sequence store");
  if (sched.horizon() > store.rounds()) throw InputError("schedule has more rounds than store");
  size_t covered = 0;
  for (size_t i = 0; i < store.size(); ++i)
    if (store.covered_by(sched, i)) ++covered;
  return static_cast<double>(store.num_nodes()) * static_cast<double>(covered) /
         static_cast<double>(store.size());
}

struct SelectionResult {
  std::vector<NodeId> nodes;
  size_t covered_samples = 0;   // stored samples hit by the selection
  double covered_fraction = 0;  // (covered_external + hits) / total_samples
};

// Greedy max coverage over the stored samples; ties go to the smallest
// node id, and remaining budget is filled with the lowest unused ids.
inline SelectionResult node_selection(const RrStore& store, uint32_t k) {
  const NodeId n = store.num_nodes();
  SelectionResult res;
  std::vector<int64_t> count(n, 0);
  for (NodeId v = 0; v < n; ++v) count[v] = static_cast<int64_t>(store.containing(v).size());
  std::vector<uint8_t> covered(store.size(), 0);
  std::vector<uint8_t> chosen(n, 0);

  uint32_t picks = k < n ? k : n;
  for (uint32_t j = 0; j < picks; ++j) {
    NodeId best = n;
    int64_t best_count = -1;
    for (NodeId v = 0; v < n; ++v) {
      if (chosen[v]) continue;
      if (count[v] > best_count) {
        best_count = count[v];
        best = v;
      }
    }
    chosen[best] = 1;
    res.nodes.push_back(best);
    for (uint32_t id : store.containing(best)) {
      if (covered[id]) continue;
      covered[id] = 1;
      ++res.covered_samples;
      for (NodeId u : store.sample(id).members) --count[u];
    }
  }
  if (store.total_samples() > 0) {
    res.covered_fraction =
        static_cast<double>(res.covered_samples + store.covered_external()) /
        static_cast<double>(store.total_samples());
  }
  return res;
}

enum class ImmVariant { Standard, Adaptive, Pim };

// Sample-size constants shared by the IMM-style solvers. `ell` is the
// post-adjustment exponent actually used in the lambdas.
struct ImmParams {
  ImmVariant variant = ImmVariant::Standard;
  double eps_input = 0, ell_input = 0;
  double eps = 0;       // working epsilon (shrunk for the adaptive variant)
  double ell = 0;       // after gamma workaround (+ round adjustment if any)
  double eps_prime = 0; // sqrt(2) * eps
  double alpha = 0, beta = 0, beta_tilde = 0;
  double lambda_prime = 0, lambda_star = 0, lambda_tilde_star = 0;
  double gamma = 0;
  double ln_choose = 0; // ln of the candidate-set count used in the bounds

  double selection_lambda() const {
    return variant == ImmVariant::Pim ? lambda_tilde_star : lambda_star;
  }
};

namespace detail {

inline double ln_choose(uint64_t n, uint64_t k) {
  if (k > n) return 0.0;
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

inline double lambda_star_at(double ell, double eps, double ln_c, uint64_t n, bool pim) {
  double ln_n = std::log(static_cast<double>(n));
  double alpha = std::sqrt(ell * ln_n + std::log(2.0));
  if (pim) {
    double beta_tilde = std::sqrt(ln_c + alpha * alpha);
    double s = alpha + beta_tilde;
    return 2.0 * static_cast<double>(n) * s * s / (eps * eps);
  }
  double one_minus = 1.0 - 1.0 / std::exp(1.0);
  double beta = std::sqrt(one_minus * (ln_c + alpha * alpha));
  double s = one_minus * alpha + beta;
  return 2.0 * static_cast<double>(n) * s * s / (eps * eps);
}

}  // namespace detail

// eps/ell adjustments plus the gamma workaround (binary search over
// multiples of 1/ln n until ceil(lambda*(ell)) <= n^gamma). The adaptive
// variant additionally folds the round count into ell and shrinks eps.
// ln_choose_override replaces ln C(n,k) when the candidate ground set is
// not plain k-subsets (the multi-round schedule solver uses this).
inline ImmParams compute_params(double eps, double ell, uint32_t k, uint64_t n, uint32_t T,
                                ImmVariant variant,
                                std::optional<double> ln_choose_override = std::nullopt) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must be in (0,1)");
  if (!(ell > 0.0)) throw InputError("ell must be positive");
  if (n < 2) throw InputError("need at least 2 nodes for IMM parameters");
  if (k < 1 || k > n) throw InputError("budget k out of range");

  ImmParams p;
  p.variant = variant;
  p.eps_input = eps;
  p.ell_input = ell;
  double ln_n = std::log(static_cast<double>(n));
  p.ln_choose = ln_choose_override ? *ln_choose_override : detail::ln_choose(n, k);

  double ell_basis = ell;
  p.eps = eps;
  if (variant == ImmVariant::Adaptive) {
    ell_basis += std::log(2.0 * T) / ln_n;
    p.eps = std::exp(1.0 - 1.0 / std::exp(1.0)) * eps / 2.0;
  }
  p.eps_prime = std::sqrt(2.0) * p.eps;

  // ceil(lambda) <= n^(j/ln n) = e^j; the smallest such grid point.
  double lam_basis = detail::lambda_star_at(ell_basis, p.eps, p.ln_choose, n,
                                            variant == ImmVariant::Pim);
  double ln_target = std::log(std::ceil(lam_basis));
  uint64_t hi = static_cast<uint64_t>(std::ceil(ln_target));
  if (hi < 1) hi = 1;
  uint64_t lo = 1;
  while (lo < hi) {
    uint64_t mid = lo + (hi - lo) / 2;
    if (static_cast<double>(mid) >= ln_target) hi = mid;
    else lo = mid + 1;
  }
  p.gamma = static_cast<double>(lo) / ln_n;

  p.ell = ell_basis + p.gamma + std::log(2.0) / ln_n;

  p.alpha = std::sqrt(p.ell * ln_n + std::log(2.0));
  double one_minus = 1.0 - 1.0 / std::exp(1.0);
  p.beta = std::sqrt(one_minus * (p.ln_choose + p.alpha * p.alpha));
  p.beta_tilde = std::sqrt(p.ln_choose + p.alpha * p.alpha);
  p.lambda_prime = (2.0 + 2.0 / 3.0 * p.eps_prime) *
                   (p.ln_choose + p.ell * ln_n + std::log(std::log2(static_cast<double>(n)))) *
                   static_cast<double>(n) / (p.eps_prime * p.eps_prime);
  p.lambda_star = 2.0 * static_cast<double>(n) * (one_minus * p.alpha + p.beta) *
                  (one_minus * p.alpha + p.beta) / (p.eps * p.eps);
  p.lambda_tilde_star = 2.0 * static_cast<double>(n) * (p.alpha + p.beta_tilde) *
                        (p.alpha + p.beta_tilde) / (p.eps * p.eps);
  return p;
}

struct Phase1Result {
  double lb = 1.0;
  double theta = 0;
  size_t samples = 0;        // total generated, including discarded/pre-covered
  uint32_t halving_iters = 0;
  bool lb_from_check = false;
};

// The two-phase sample-size search shared by every IMM-style solver here.
// ensure_total(target) generates until the variant's sample total reaches
// `target` and returns the new total; coverage() evaluates the current
// greedy selection as a fraction of the sample total.
template <typename EnsureTotal, typename Coverage>
Phase1Result imm_phase1(const ImmParams& p, uint64_t n_effective, EnsureTotal&& ensure_total,
                        Coverage&& coverage, uint32_t start_iter = 1) {
  Phase1Result r;
  if (n_effective >= 2) {
    double n_eff = static_cast<double>(n_effective);
    uint32_t imax = static_cast<uint32_t>(std::floor(std::log2(n_eff - 1.0)));
    for (uint32_t i = start_iter; i <= imax; ++i) {
      double x = n_eff / std::pow(2.0, i);
      double theta_i = p.lambda_prime / x;
      r.samples = ensure_total(static_cast<size_t>(std::ceil(theta_i)));
      r.halving_iters = i;
      double f = coverage();
      if (n_eff * f >= (1.0 + p.eps_prime) * x) {
        r.lb = n_eff * f / (1.0 + p.eps_prime);
        r.lb_from_check = true;
        break;
      }
    }
  }
  r.theta = p.selection_lambda() / r.lb;
  r.samples = ensure_total(static_cast<size_t>(std::floor(r.theta)) + 1);
  return r;
}

// ---- store fixture dump/load (little-endian, versioned) ----

namespace detail {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("truncated RR store file");
  return v;
}
inline void put_members(std::ostream& out, const std::vector<NodeId>& m) {
  put<uint32_t>(out, static_cast<uint32_t>(m.size()));
  for (NodeId v : m) put<uint32_t>(out, v);
}
inline std::vector<NodeId> get_members(std::istream& in) {
  uint32_t sz = get<uint32_t>(in);
  std::vector<NodeId> m(sz);
  for (uint32_t i = 0; i < sz; ++i) m[i] = get<uint32_t>(in);
  return m;
}

inline constexpr char kStoreMagic[8] = {'I', 'M', 'X', 'R', 'R', 'S', 'T', '1'};

}  // namespace detail

inline void RrStore::dump(std::ostream& out) const {
  out.write(detail::kStoreMagic, 8);
  detail::put<uint8_t>(out, 0);  // flat store
  detail::put<uint32_t>(out, num_nodes());
  detail::put<uint32_t>(out, 1);
  detail::put<uint64_t>(out, covered_external_);
  detail::put<uint64_t>(out, samples_.size());
  for (const RRSet& s : samples_) {
    detail::put<uint32_t>(out, s.root);
    detail::put_members(out, s.members);
  }
}

inline RrStore RrStore::load(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || !std::equal(magic, magic + 8, detail::kStoreMagic))
    throw ParseError("bad RR store magic");
  if (detail::get<uint8_t>(in) != 0) throw ParseError("store kind mismatch");
  uint32_t n = detail::get<uint32_t>(in);
  detail::get<uint32_t>(in);  // T, always 1
  uint64_t cov = detail::get<uint64_t>(in);
  uint64_t cnt = detail::get<uint64_t>(in);
  RrStore store(n);
  store.covered_external_ = cov;
  for (uint64_t i = 0; i < cnt; ++i) {
    RRSet s;
    s.root = detail::get<uint32_t>(in);
    s.members = detail::get_members(in);
    store.add(std::move(s));
  }
  return store;
}

inline void RrSequenceStore::dump(std::ostream& out) const {
  out.write(detail::kStoreMagic, 8);
  detail::put<uint8_t>(out, 1);  // sequence store
  detail::put<uint32_t>(out, num_nodes());
  detail::put<uint32_t>(out, rounds_);
  detail::put<uint64_t>(out, 0);
  detail::put<uint64_t>(out, samples_.size());
  for (const RRSequence& s : samples_) {
    detail::put<uint32_t>(out, s.root);
    for (const auto& m : s.per_round) detail::put_members(out, m);
  }
}

inline RrSequenceStore RrSequenceStore::load(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || !std::equal(magic, magic + 8, detail::kStoreMagic))
    throw ParseError("bad RR store magic");
  if (detail::get<uint8_t>(in) != 1) throw ParseError("store kind mismatch");
  uint32_t n = detail::get<uint32_t>(in);
  uint32_t t = detail::get<uint32_t>(in);
  detail::get<uint64_t>(in);
  uint64_t cnt = detail::get<uint64_t>(in);
  RrSequenceStore store(n, t);
  for (uint64_t i = 0; i < cnt; ++i) {
    RRSequence s;
    s.root = detail::get<uint32_t>(in);
    s.per_round.resize(t);
    for (uint32_t r = 0; r < t; ++r) s.per_round[r] = detail::get_members(in);
    store.add(std::move(s));
  }
  return store;
}

// ---- multi-round RR-sequence solver ----

struct ScheduleSelectionResult {
  SeedSchedule schedule;
  size_t covered_samples = 0;
  double covered_fraction = 0;
};

// Greedy coverage over node-round pairs under the per-round budget.
// within_round freezes rounds in order; otherwise any feasible pair may be
// picked at each of the T*k steps. Ties: smallest (round, node).
inline ScheduleSelectionResult schedule_selection(const RrSequenceStore& store, uint32_t T,
                                                  uint32_t k, bool within_round) {
  const NodeId n = store.num_nodes();
  ScheduleSelectionResult res;
  res.schedule = SeedSchedule::empty(T, k);
  std::vector<uint8_t> covered(store.size(), 0);

  auto gain_of = [&](uint32_t t, NodeId v) {
    size_t gain = 0;
    for (uint32_t id : store.containing(t, v))
      if (!covered[id]) ++gain;
    return gain;
  };
  auto apply = [&](uint32_t t, NodeId v) {
    res.schedule.add(v, t);
    for (uint32_t id : store.containing(t, v)) {
      if (!covered[id]) {
        covered[id] = 1;
        ++res.covered_samples;
      }
    }
  };

  if (within_round) {
    for (uint32_t t = 1; t <= T; ++t) {
      for (uint32_t j = 0; j < k && j < n; ++j) {
        NodeId best = n;
        size_t best_gain = 0;
        bool found = false;
        for (NodeId v = 0; v < n; ++v) {
          if (res.schedule.contains(v, t)) continue;
          size_t gain = gain_of(t, v);
          if (!found || gain > best_gain) {
            best = v;
            best_gain = gain;
            found = true;
          }
        }
        if (found) apply(t, best);
      }
    }
  } else {
    size_t steps = static_cast<size_t>(T) * k;
    for (size_t step = 0; step < steps; ++step) {
      NodeId best_v = n;
      uint32_t best_t = 0;
      size_t best_gain = 0;
      bool found = false;
      for (uint32_t t = 1; t <= T; ++t) {
        if (res.schedule.rounds[t - 1].size() >= k) continue;
        for (NodeId v = 0; v < n; ++v) {
          if (res.schedule.contains(v, t)) continue;
          size_t gain = gain_of(t, v);
          if (!found || gain > best_gain) {
            best_v = v;
            best_t = t;
            best_gain = gain;
            found = true;
          }
        }
      }
      if (!found) break;
      apply(best_t, best_v);
    }
  }
  if (store.size() > 0)
    res.covered_fraction =
        static_cast<double>(res.covered_samples) / static_cast<double>(store.size());
  return res;
}

struct MrimImmResult {
  SeedSchedule schedule;
  double spread_estimate = 0;
  ImmParams params;
  Phase1Result phase1;
};

// IMM-style solver on RR sequences. The estimator is the sequence-coverage
// identity; the sample-size recipe reuses the standard machinery with the
// candidate ground set widened to per-round k-subsets across T rounds.
inline MrimImmResult mrim_imm(const DirectedGraph& g, uint32_t T, uint32_t k, double eps,
                              double ell, bool within_round, Rng& rng, int threads = 0) {
  const NodeId n = g.num_nodes();
  if (k > n) throw InfeasibleError("budget exceeds node count");
  MrimImmResult res;
  double ln_c = static_cast<double>(T) * detail::ln_choose(n, k);
  res.params = compute_params(eps, ell, k, n, T, ImmVariant::Standard, ln_c);

  RrSequenceStore store(n, T);
  Rng base = rng.substream(rng.next());
  uint64_t counter = 0;
  auto ensure_total = [&](size_t target) {
    while (store.size() < target) {
      size_t batch = target - store.size();
      std::vector<RRSequence> buf(batch);
      parallel_for(
          batch,
          [&](size_t j) {
            thread_local RrScratch scratch;
            Rng r = base.substream(counter + j);
            buf[j] = gen_rr_sequence(g, T, r, &scratch);
          },
          threads);
      counter += batch;
      for (auto& s : buf) store.add(std::move(s));
    }
    return store.size();
  };
  auto coverage = [&]() { return schedule_selection(store, T, k, within_round).covered_fraction; };

  res.phase1 = imm_phase1(res.params, n, ensure_total, coverage);
  auto sel = schedule_selection(store, T, k, within_round);
  res.schedule = sel.schedule;
  res.spread_estimate = static_cast<double>(n) * sel.covered_fraction;
  return res;
}

}  // namespace infmax
