#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "infmax/oracle.hpp"
#include "infmax/saic.hpp"
#include "infmax/text_io.hpp"
#include "test_util.hpp"

using namespace infmax;
namespace oc = infmax::oracle;

namespace {

// single edge u->v with p=1, q=1 everywhere, Exp(1) delays: the
// closed-form instance with rho({u}) = 1.25 and rho({v}) = 0.75
struct ClosedFormFixture {
  DirectedGraph g = testutil::make_graph(2, {{0, 1, 1.0}});
  SelfActivationProfile prof = SelfActivationProfile::uniform(2, 1.0, DelayDist::exponential(1.0));
  EdgeDelays ed = uniform_edge_delays(1, DelayDist::exponential(1.0));
};

PossibleWorld fixed_world(const DirectedGraph& g, std::vector<uint8_t> self_active,
                          std::vector<double> self_delay, std::vector<uint8_t> live,
                          std::vector<double> edge_delay) {
  PossibleWorld w;
  w.self_active = std::move(self_active);
  w.self_delay = std::move(self_delay);
  w.live = std::move(live);
  w.edge_delay = std::move(edge_delay);
  return w;
}

// Definition-based P-RR set: all u reaching the root with total delay at
// most the smallest self-activated total delay; independent of gen_prr.
std::pair<std::vector<NodeId>, int64_t> prr_by_definition(const DirectedGraph& g,
                                                          const PossibleWorld& w, NodeId root) {
  const NodeId n = g.num_nodes();
  // reverse Dijkstra from the root over live edges gives path delays u->root
  std::vector<double> path(n, kInfDelay);
  path[root] = 0;
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  pq.push({0, root});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > path[v]) continue;
    for (uint32_t e : g.in_edges(v)) {
      if (!w.live[e]) continue;
      double nd = d + w.edge_delay[e];
      NodeId u = g.edge(e).src;
      if (nd < path[u]) {
        path[u] = nd;
        pq.push({nd, u});
      }
    }
  }
  double best = kInfDelay;
  int64_t source = -1;
  for (NodeId u = 0; u < n; ++u) {
    if (!w.self_active[u] || path[u] == kInfDelay) continue;
    double total = w.self_delay[u] + path[u];
    if (total < best || (total == best && static_cast<int64_t>(u) < source)) {
      best = total;
      source = u;
    }
  }
  std::vector<NodeId> members;
  for (NodeId u = 0; u < n; ++u) {
    if (path[u] == kInfDelay) continue;
    if (w.self_delay[u] + path[u] <= best) members.push_back(u);
  }
  return {members, source};
}

}  // namespace

TEST(SampleWorld, DegenerateSelfActivation) {
  auto g = testutil::random_graph(5, 8, 1, 0.2, 0.8);
  EdgeDelays ed = uniform_edge_delays(8, DelayDist::exponential(1.0));
  Rng rng(1);
  auto all = SelfActivationProfile::uniform(5, 1.0, DelayDist::exponential(1.0));
  auto none = SelfActivationProfile::uniform(5, 0.0, DelayDist::exponential(1.0));
  for (int i = 0; i < 10; ++i) {
    auto w1 = sample_world(g, all, ed, rng);
    EXPECT_EQ(std::count(w1.self_active.begin(), w1.self_active.end(), 1), 5);
    auto w0 = sample_world(g, none, ed, rng);
    EXPECT_EQ(std::count(w0.self_active.begin(), w0.self_active.end(), 1), 0);
  }
}

TEST(SampleWorld, ExponentialSelfDelayMean) {
  auto g = testutil::make_graph(1, {});
  auto prof = SelfActivationProfile::uniform(1, 1.0, DelayDist::exponential(1.0));
  EdgeDelays ed;
  Rng rng(2);
  double sum = 0;
  const size_t N = 100000;
  for (size_t i = 0; i < N; ++i) sum += sample_world(g, prof, ed, rng).self_delay[0];
  EXPECT_NEAR(sum / N, 1.0, 4.0 / std::sqrt(static_cast<double>(N)));
}

TEST(BoostedActiveSet, Examples) {
  auto g = testutil::make_graph(2, {{0, 1, 1.0}});
  auto w_empty = fixed_world(g, {0, 0}, {1, 1}, {1}, {0.5});
  EXPECT_TRUE(boosted_active_set(g, w_empty, {}).empty());

  auto w_a = fixed_world(g, {1, 0}, {1, 1}, {1}, {0.5});
  EXPECT_EQ(boosted_active_set(g, w_a, {}), (std::vector<NodeId>{0, 1}));

  auto w_all = fixed_world(g, {1, 1}, {1, 1}, {1}, {0.5});
  EXPECT_EQ(boosted_active_set(g, w_all, {}), (std::vector<NodeId>{0, 1}));

  std::vector<NodeId> seeds{0};
  EXPECT_EQ(boosted_active_set(g, w_empty, seeds), (std::vector<NodeId>{0, 1}));
}

TEST(PreemptiveCredit, HandComputedExamples) {
  auto g = testutil::make_graph(2, {{0, 1, 1.0}});
  // delta(u)=0.5, d=0.3, delta(v)=2.0, both self-activated: u wins v (0.8 < 2.0)
  auto w1 = fixed_world(g, {1, 1}, {0.5, 2.0}, {1}, {0.3});
  std::vector<NodeId> a{0};
  EXPECT_EQ(preemptive_credit(g, w1, a, false), (std::vector<NodeId>{0, 1}));
  // delta(v)=0.6: v keeps itself (0.8 > 0.6)
  auto w2 = fixed_world(g, {1, 1}, {0.5, 0.6}, {1}, {0.3});
  EXPECT_EQ(preemptive_credit(g, w2, a, false), (std::vector<NodeId>{0}));
}

TEST(PreemptiveCredit, NoRivalsMeansPlainReach) {
  auto g = testutil::make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  auto w = fixed_world(g, {1, 0, 0}, {0.5, 1, 1}, {1, 1}, {0.2, 0.2});
  std::vector<NodeId> a{0, 1};
  EXPECT_EQ(preemptive_credit(g, w, a, false), (std::vector<NodeId>{0, 1, 2}));
}

TEST(PreemptiveCredit, BoostedIgnoresOwnCoin) {
  auto g = testutil::make_graph(2, {{0, 1, 1.0}});
  // u not self-activated; as a boosted seed it still claims credit
  auto w = fixed_world(g, {0, 1}, {0.5, 2.0}, {1}, {0.3});
  std::vector<NodeId> s{0};
  EXPECT_EQ(preemptive_credit(g, w, s, true), (std::vector<NodeId>{0, 1}));
  EXPECT_TRUE(preemptive_credit(g, w, s, false).empty());
}

TEST(EstimateObjective, ClosedFormInstance) {
  ClosedFormFixture fx;
  Rng rng(3);
  const size_t N = 100000;
  std::vector<NodeId> u{0}, v{1};
  auto rho_u = estimate_objective(fx.g, fx.prof, fx.ed, SaicObjective::Rho, u, N, rng);
  EXPECT_NEAR(rho_u.mean, 1.25, 3 * rho_u.stderr_);
  auto rho_v = estimate_objective(fx.g, fx.prof, fx.ed, SaicObjective::Rho, v, N, rng);
  EXPECT_NEAR(rho_v.mean, 0.75, 3 * rho_v.stderr_);
}

TEST(EstimateObjective, SigmaBZeroWithoutSeedsOrSelfActivation) {
  auto g = testutil::random_graph(4, 6, 4, 0.2, 0.8);
  auto prof = SelfActivationProfile::uniform(4, 0.0, DelayDist::exponential(1.0));
  EdgeDelays ed = uniform_edge_delays(6, DelayDist::exponential(1.0));
  Rng rng(5);
  auto est = estimate_objective(g, prof, ed, SaicObjective::SigmaB, {}, 1000, rng);
  EXPECT_DOUBLE_EQ(est.mean, 0.0);
}

TEST(EstimateObjective, RhoAdditivityAcrossSingletons) {
  ClosedFormFixture fx;
  Rng rng(6);
  const size_t N = 100000;
  std::vector<NodeId> all{0, 1};
  auto rho_all = estimate_objective(fx.g, fx.prof, fx.ed, SaicObjective::Rho, all, N, rng);
  EXPECT_DOUBLE_EQ(rho_all.mean, 2.0);  // every node is claimed by some source
  std::vector<NodeId> u{0}, v{1};
  auto ru = estimate_objective(fx.g, fx.prof, fx.ed, SaicObjective::Rho, u, N, rng);
  auto rv = estimate_objective(fx.g, fx.prof, fx.ed, SaicObjective::Rho, v, N, rng);
  double se = std::sqrt(ru.stderr_ * ru.stderr_ + rv.stderr_ * rv.stderr_);
  EXPECT_NEAR(ru.mean + rv.mean, rho_all.mean, 4 * se);
}

TEST(GenPrr, SpecHandTrace) {
  // a->b live with d=0.3, delta(a)=0.5, delta(b)=2.0, only a self-activated,
  // root b: pops b@0, a@0.3, shadow_a@0.8 then stops with u^s = a
  auto g = testutil::make_graph(2, {{0, 1, 1.0}});
  auto w = fixed_world(g, {1, 0}, {0.5, 2.0}, {1}, {0.3});
  PrrTrace trace;
  auto res = gen_prr_in_world(g, w, 1, &trace);
  EXPECT_EQ(res.members, (std::vector<NodeId>{0}));
  EXPECT_EQ(res.source, 0);
  ASSERT_EQ(trace.pop_delays.size(), 3u);
  EXPECT_DOUBLE_EQ(trace.pop_delays[0], 0.0);
  EXPECT_DOUBLE_EQ(trace.pop_delays[1], 0.3);
  EXPECT_DOUBLE_EQ(trace.pop_delays[2], 0.8);
}

TEST(GenPrr, SelfActivatedRootShortCircuits) {
  auto g = testutil::make_graph(2, {{0, 1, 1.0}});
  auto w = fixed_world(g, {1, 1}, {0.5, 0.1}, {1}, {0.3});
  auto res = gen_prr_in_world(g, w, 1);
  EXPECT_EQ(res.members, (std::vector<NodeId>{1}));
  EXPECT_EQ(res.source, 1);
}

TEST(GenPrr, NoSelfActivationExploresEverything) {
  auto g = testutil::make_graph(3, {{0, 1, 1.0}});
  auto w = fixed_world(g, {0, 0, 0}, {1, 1, 1}, {1}, {0.3});
  auto res = gen_prr_in_world(g, w, 1);
  EXPECT_EQ(res.members, (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(res.source, -1);
}

TEST(GenPrr, MatchesDefinitionOnRandomFixedWorlds) {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    uint32_t n = 4 + static_cast<uint32_t>(rng.below(9));  // up to 12
    auto g = testutil::random_graph(n, 2 * n, 5000 + rep, 0.3, 0.9);
    auto prof = SelfActivationProfile::uniform(n, 0.4, DelayDist::exponential(1.0));
    EdgeDelays ed = uniform_edge_delays(g.num_edges(), DelayDist::exponential(1.0));
    Rng wr = rng.substream(rep);
    PossibleWorld w = sample_world(g, prof, ed, wr);
    NodeId root = static_cast<NodeId>(rng.below(n));

    PrrTrace trace;
    auto got = gen_prr_in_world(g, w, root, &trace);
    auto [want_members, want_source] = prr_by_definition(g, w, root);
    EXPECT_EQ(got.members, want_members) << "rep " << rep;
    EXPECT_EQ(got.source, want_source) << "rep " << rep;
    for (size_t i = 1; i < trace.pop_delays.size(); ++i)
      EXPECT_LE(trace.pop_delays[i - 1], trace.pop_delays[i]);
  }
}

TEST(GenPrr, LazyAndFixedAgreeInDistribution) {
  // bpim identity: rho^B(S) = n * P[S cap R^P != empty], lazy sampler
  // against the forward Monte Carlo oracle
  ClosedFormFixture fx;
  Rng rng(8);
  const size_t N = 100000;
  size_t hits = 0;
  std::vector<NodeId> s{0};
  for (size_t i = 0; i < N; ++i) {
    Rng r = rng.substream(i);
    auto p = gen_prr(fx.g, fx.prof, fx.ed, std::nullopt, r);
    hits += std::binary_search(p.members.begin(), p.members.end(), NodeId{0});
  }
  double f = static_cast<double>(hits) / N;
  double se_rr = 2.0 * std::sqrt(f * (1 - f) / N);
  Rng rng2(9);
  auto fwd = estimate_objective(fx.g, fx.prof, fx.ed, SaicObjective::RhoB, s, N, rng2);
  double se = std::sqrt(se_rr * se_rr + fwd.stderr_ * fwd.stderr_);
  EXPECT_NEAR(2.0 * f, fwd.mean, 4 * se);
}

TEST(GenPrr, PimIdentityOnClosedForm) {
  // rho({u}) = n * P[u^s = u] -> est ratio 1.25 : 0.75
  ClosedFormFixture fx;
  Rng rng(10);
  const size_t N = 100000;
  size_t hits_u = 0, hits_v = 0;
  for (size_t i = 0; i < N; ++i) {
    Rng r = rng.substream(i);
    auto p = gen_prr(fx.g, fx.prof, fx.ed, std::nullopt, r);
    hits_u += p.source == 0;
    hits_v += p.source == 1;
  }
  double fu = static_cast<double>(hits_u) / N;
  double se = 2.0 * std::sqrt(fu * (1 - fu) / N);
  EXPECT_NEAR(2.0 * fu, 1.25, 4 * se);
  EXPECT_NEAR(2.0 * (static_cast<double>(hits_v) / N), 0.75, 4 * se);
}

TEST(ExactAdditivity, ConstantDelayEnumeration) {
  // random constant delays are tie-free almost surely; additivity holds
  // exactly world by world
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    uint32_t n = 4;
    auto g = testutil::random_graph(n, 5, 6000 + rep, 0.3, 0.9);
    SelfActivationProfile prof;
    for (NodeId v = 0; v < n; ++v) {
      prof.q.push_back(0.2 + 0.6 * rng.uniform01());
      prof.delta.push_back(DelayDist::constant(rng.uniform01() * 2.0));
    }
    EdgeDelays ed;
    for (size_t e = 0; e < g.num_edges(); ++e)
      ed.push_back(DelayDist::constant(rng.uniform01()));

    std::vector<double> singles(n);
    for (NodeId v = 0; v < n; ++v) {
      std::vector<NodeId> s{v};
      singles[v] = oc::exact_preemptive_spread(g, prof, ed, s, false);
    }
    std::vector<NodeId> a{0, 2, 3};
    double whole = oc::exact_preemptive_spread(g, prof, ed, a, false);
    EXPECT_NEAR(whole, singles[0] + singles[2] + singles[3], 1e-9);
  }
}

TEST(PerWorldProperties, BoostedMarginalContainment) {
  // Phi^B_W(T+u) \ Phi^B_W(T) subset of Phi^B_W(S+u) \ Phi^B_W(S), S subset T;
  // same containment for the preemptive Gamma^B_W
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    uint32_t n = 6;
    auto g = testutil::random_graph(n, 10, 7000 + rep, 0.3, 0.9);
    auto prof = SelfActivationProfile::uniform(n, 0.3, DelayDist::exponential(1.0));
    EdgeDelays ed = uniform_edge_delays(g.num_edges(), DelayDist::exponential(1.0));
    Rng wr = rng.substream(rep);
    PossibleWorld w = sample_world(g, prof, ed, wr);

    std::vector<NodeId> small{1};
    std::vector<NodeId> big{1, 3};
    NodeId u = 4;
    auto with = [&](std::vector<NodeId> base) {
      base.push_back(u);
      std::sort(base.begin(), base.end());
      return base;
    };
    auto diff = [](std::vector<NodeId> lhs, const std::vector<NodeId>& rhs) {
      std::vector<NodeId> out;
      std::set_difference(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(),
                          std::back_inserter(out));
      return out;
    };

    auto phi_gain_small = diff(boosted_active_set(g, w, with(small)), boosted_active_set(g, w, small));
    auto phi_gain_big = diff(boosted_active_set(g, w, with(big)), boosted_active_set(g, w, big));
    EXPECT_TRUE(std::includes(phi_gain_small.begin(), phi_gain_small.end(), phi_gain_big.begin(),
                              phi_gain_big.end()));

    auto gam_gain_small =
        diff(preemptive_credit(g, w, with(small), true), preemptive_credit(g, w, small, true));
    auto gam_gain_big =
        diff(preemptive_credit(g, w, with(big), true), preemptive_credit(g, w, big, true));
    EXPECT_TRUE(std::includes(gam_gain_small.begin(), gam_gain_small.end(), gam_gain_big.begin(),
                              gam_gain_big.end()));
  }
}

TEST(PerWorldProperties, BoostConsistency) {
  // sigma^B(S) under q equals sigma^B(empty) with q forced to 1 on S,
  // world by world on a shared stream
  auto g = testutil::random_graph(6, 10, 13, 0.2, 0.8);
  auto prof = SelfActivationProfile::uniform(6, 0.3, DelayDist::exponential(1.0));
  std::vector<NodeId> s{1, 4};
  auto boosted_prof = prof;
  for (NodeId v : s) boosted_prof.q[v] = 1.0;
  EdgeDelays ed = uniform_edge_delays(g.num_edges(), DelayDist::exponential(1.0));
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    Rng r1 = rng.substream(i), r2 = rng.substream(i);
    auto w1 = sample_world(g, prof, ed, r1);
    auto w2 = sample_world(g, boosted_prof, ed, r2);
    EXPECT_EQ(boosted_active_set(g, w1, s), boosted_active_set(g, w2, {}));
  }
}

TEST(ImmBim, CoverageFractionArithmetic) {
  // covered=3, |R|=7, selection hits 2 -> F = 5/10
  RrStore store(7);
  store.add(RRSet{0, {0}});
  store.add(RRSet{0, {0}});
  for (NodeId v = 1; v <= 5; ++v) store.add(RRSet{v, {v}});
  for (int i = 0; i < 3; ++i) store.add_covered_external();
  auto sel = node_selection(store, 1);
  EXPECT_EQ(sel.covered_samples, 2u);
  EXPECT_DOUBLE_EQ(sel.covered_fraction, 0.5);
}

TEST(ImmBim, NoSelfActivationBehavesLikePlainImm) {
  auto g = testutil::random_graph(6, 10, 16, 0.2, 0.8);
  auto prof = SelfActivationProfile::uniform(6, 0.0, DelayDist::exponential(1.0));
  Rng rng(17);
  auto res = imm_bim(g, prof, 2, 0.3, 1.0, rng);
  EXPECT_EQ(res.covered_external, 0u);
  EXPECT_EQ(res.seeds.size(), 2u);
  // with everything stored, sigma_b == sigma and the estimate tracks it
  std::vector<NodeId> s = res.seeds;
  EXPECT_NEAR(res.spread_estimate, oc::exact_sigma(g, s), 0.5);
}

TEST(ImmBim, FullSelfActivationDegenerate) {
  auto g = testutil::random_graph(5, 8, 18, 0.2, 0.8);
  auto prof = SelfActivationProfile::uniform(5, 1.0, DelayDist::exponential(1.0));
  Rng rng(19);
  auto res = imm_bim(g, prof, 2, 0.3, 1.0, rng);
  EXPECT_DOUBLE_EQ(res.spread_estimate, 5.0);
  EXPECT_EQ(res.seeds, (std::vector<NodeId>{0, 1}));  // tie rule: lowest ids
}

TEST(ImmBim, PrefersHighSigmaBSeed) {
  // star center is the right boosted seed; isolated node contributes via q
  auto g = testutil::make_graph(4, {{0, 1, 1.0}, {0, 2, 1.0}});
  auto prof = SelfActivationProfile::uniform(4, 0.0, DelayDist::exponential(1.0));
  Rng rng(20);
  auto res = imm_bim(g, prof, 1, 0.2, 1.0, rng);
  EXPECT_EQ(res.seeds, (std::vector<NodeId>{0}));
}

TEST(ImmBpim, SeedsConcentrateWherePreemptionIsEasy) {
  // two directed triangles; the first self-activates for sure, the second
  // never does, so a seed in the second claims the whole triangle
  auto g = testutil::make_graph(6, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0},
                                    {3, 4, 1.0}, {4, 5, 1.0}, {5, 3, 1.0}});
  SelfActivationProfile prof;
  prof.q = {1, 1, 1, 0, 0, 0};
  prof.delta.assign(6, DelayDist::exponential(1.0));
  EdgeDelays ed = uniform_edge_delays(6, DelayDist::exponential(1.0));

  // MC oracle agrees that the quiet triangle is the better placement
  Rng orng(21);
  std::vector<NodeId> in_loud{0}, in_quiet{3};
  auto rho_loud = estimate_objective(g, prof, ed, SaicObjective::RhoB, in_loud, 20000, orng);
  auto rho_quiet = estimate_objective(g, prof, ed, SaicObjective::RhoB, in_quiet, 20000, orng);
  EXPECT_GT(rho_quiet.mean, rho_loud.mean + 1.0);

  Rng rng(22);
  auto res = imm_bpim(g, prof, ed, 1, 0.2, 1.0, rng);
  ASSERT_EQ(res.seeds.size(), 1u);
  EXPECT_GE(res.seeds[0], 3u);
}

TEST(ImmBpim, NoSelfActivationKeepsFullReachableSets) {
  auto g = testutil::make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  auto prof = SelfActivationProfile::uniform(3, 0.0, DelayDist::exponential(1.0));
  EdgeDelays ed = uniform_edge_delays(2, DelayDist::exponential(1.0));
  Rng rng(23);
  auto res = imm_bpim(g, prof, ed, 1, 0.3, 1.0, rng);
  // with no competition the chain head covers every root
  EXPECT_EQ(res.seeds, (std::vector<NodeId>{0}));
  EXPECT_NEAR(res.spread_estimate, 3.0, 1e-9);
}

TEST(ImmBpim, FullBudgetCoversEverything) {
  auto g = testutil::random_graph(4, 6, 29, 0.3, 0.9);
  auto prof = SelfActivationProfile::uniform(4, 0.5, DelayDist::exponential(1.0));
  EdgeDelays ed = uniform_edge_delays(6, DelayDist::exponential(1.0));
  Rng rng(30);
  auto res = imm_bpim(g, prof, ed, 4, 0.3, 1.0, rng);
  // every P-RR set is nonempty, so seeding all nodes covers every sample
  EXPECT_EQ(res.seeds.size(), 4u);
  EXPECT_DOUBLE_EQ(res.spread_estimate, 4.0);
}

TEST(ExhaustiveOpt, PimAdditiveRouteMatchesDirectRoute) {
  // same optimum whether sets are evaluated directly or assembled from
  // singleton preemptive spreads
  Rng rng(31);
  auto g = testutil::random_graph(4, 5, 32, 0.3, 0.9);
  SelfActivationProfile prof;
  for (NodeId v = 0; v < 4; ++v) {
    prof.q.push_back(0.3 + 0.5 * rng.uniform01());
    prof.delta.push_back(DelayDist::constant(rng.uniform01() * 2.0));
  }
  EdgeDelays ed;
  for (size_t e = 0; e < g.num_edges(); ++e) ed.push_back(DelayDist::constant(rng.uniform01()));

  auto direct = [&](std::span<const NodeId> s) {
    return oc::exact_preemptive_spread(g, prof, ed, s, false);
  };
  std::vector<double> singles(4);
  for (NodeId v = 0; v < 4; ++v) {
    std::vector<NodeId> s{v};
    singles[v] = direct(s);
  }
  auto additive = [&](std::span<const NodeId> s) {
    double total = 0;
    for (NodeId v : s) total += singles[v];
    return total;
  };
  auto opt_direct = oc::exhaustive_opt_set(g, 2, direct);
  auto opt_additive = oc::exhaustive_opt_set(g, 2, additive);
  EXPECT_NEAR(opt_direct.value, opt_additive.value, 1e-9);
  EXPECT_EQ(opt_direct.best, opt_additive.best);
}

TEST(ImmPim, ClosedFormTopOne) {
  ClosedFormFixture fx;
  Rng rng(24);
  auto res = imm_pim(fx.g, fx.prof, fx.ed, 1, 0.1, 1.0, rng);
  EXPECT_EQ(res.seeds, (std::vector<NodeId>{0}));
  EXPECT_NEAR(res.spread_estimate, 1.25, 0.1);
  EXPECT_TRUE(res.warnings.empty());
}

TEST(ImmPim, TwoIsolatedNodesSplitEvenly) {
  auto g = testutil::make_graph(2, {});
  auto prof = SelfActivationProfile::uniform(2, 1.0, DelayDist::exponential(1.0));
  EdgeDelays ed;
  Rng rng(25);
  auto res = imm_pim(g, prof, ed, 1, 0.2, 1.0, rng);
  EXPECT_EQ(res.seeds.size(), 1u);
  EXPECT_NEAR(res.spread_estimate, 1.0, 0.1);
}

TEST(ImmPim, AllZeroEstimatesWarn) {
  auto g = testutil::make_graph(3, {{0, 1, 1.0}});
  auto prof = SelfActivationProfile::uniform(3, 0.0, DelayDist::exponential(1.0));
  EdgeDelays ed = uniform_edge_delays(1, DelayDist::exponential(1.0));
  Rng rng(26);
  auto res = imm_pim(g, prof, ed, 2, 0.3, 1.0, rng);
  EXPECT_EQ(res.seeds, (std::vector<NodeId>{0, 1}));
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_DOUBLE_EQ(res.spread_estimate, 0.0);
}

TEST(QCaseProfile, BoundsAndZeroDegree) {
  auto g = testutil::make_graph(4, {{0, 1, 0.5}, {0, 2, 0.5}, {0, 3, 0.5}});
  Rng rng(27);
  for (int c = 0; c <= 4; ++c) {
    auto q = q_case_profile(g, c, 2.0, rng);
    ASSERT_EQ(q.size(), 4u);
    for (double v : q) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_THROW(q_case_profile(g, 5, 2.0, rng), InputError);
}

TEST(ProfileIo, ParseAndMaterialize) {
  std::istringstream graph_in("a b 0.5\nb c 0.5\n");
  auto loaded = from_edge_list(graph_in);
  std::istringstream prof_in(
      "# test profile\n"
      "q_case 0\n"
      "q_base 2\n"
      "q b 0.25\n"
      "self_delay exp 2.0\n"
      "edge_delay const 0.125\n");
  auto cfg = parse_profile(prof_in);
  Rng rng(28);
  auto prof = materialize_profile(cfg, loaded.graph, loaded.labels, rng);
  auto ed = materialize_edge_delays(cfg, loaded.graph);
  EXPECT_DOUBLE_EQ(prof.q[label_index(loaded.labels).at("b")], 0.25);
  EXPECT_EQ(prof.delta[0].kind, DelayDist::Kind::Exponential);
  EXPECT_DOUBLE_EQ(prof.delta[0].param, 2.0);
  ASSERT_EQ(ed.size(), 2u);
  EXPECT_EQ(ed[0].kind, DelayDist::Kind::Constant);
  EXPECT_DOUBLE_EQ(ed[0].param, 0.125);
}

TEST(ProfileIo, ErrorsCarryLineNumbers) {
  std::istringstream bad("q_case 9\n");
  try {
    parse_profile(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(ScheduleIo, RoundTrip) {
  std::istringstream graph_in("a b 0.5\nc a 0.5\n");
  auto loaded = from_edge_list(graph_in);
  auto idx = label_index(loaded.labels);
  std::istringstream sched_in("# schedule\n2 c\n1 a b\n");
  auto sched = parse_schedule(sched_in, idx);
  ASSERT_EQ(sched.horizon(), 2u);
  EXPECT_EQ(sched.rounds[0].size(), 2u);
  EXPECT_EQ(sched.rounds[1].size(), 1u);
  std::ostringstream out;
  write_schedule(out, sched, loaded.labels);
  EXPECT_EQ(out.str(), "1 a b\n2 c\n");
}
