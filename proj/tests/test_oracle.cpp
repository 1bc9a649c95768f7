#include <gtest/gtest.h>

#include "infmax/oracle.hpp"
#include "test_util.hpp"

using namespace infmax;
namespace oc = infmax::oracle;

namespace {

SeedSchedule sched_of(uint32_t T, uint32_t k,
                      std::vector<std::vector<NodeId>> rounds) {
  SeedSchedule s = SeedSchedule::empty(T, k);
  for (uint32_t t = 0; t < rounds.size(); ++t)
    for (NodeId v : rounds[t]) s.add(v, t + 1);
  return s;
}

}  // namespace

TEST(ExactSigma, SingleStochasticEdge) {
  auto g = testutil::make_graph(2, {{0, 1, 0.5}});
  std::vector<NodeId> s{0};
  EXPECT_NEAR(oc::exact_sigma(g, s), 1.5, 1e-12);
  EXPECT_DOUBLE_EQ(oc::exact_sigma(g, {}), 0.0);
}

TEST(ExactSigma, DeterministicPathFoldedOut) {
  auto g = testutil::make_graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  std::vector<NodeId> s{0};
  EXPECT_DOUBLE_EQ(oc::exact_sigma(g, s), 4.0);
}

TEST(ExactSigma, CapExceeded) {
  auto g = testutil::random_graph(8, 24, 7, 0.3, 0.7);
  ASSERT_GT(g.num_edges(), 20u);
  std::vector<NodeId> s{0};
  EXPECT_THROW(oc::exact_sigma(g, s), CapExceededError);
}

TEST(ExactRhoMrt, TwoRoundSingleEdge) {
  auto g = testutil::make_graph(2, {{0, 1, 0.5}});
  auto sched = sched_of(2, 1, {{0}, {0}});
  EXPECT_NEAR(oc::exact_rho_mrt(g, sched), 1.75, 1e-12);
}

TEST(ExactRhoMrt, SingleRoundEqualsSigma) {
  auto g = testutil::random_graph(5, 8, 21, 0.2, 0.8);
  auto sched = sched_of(1, 2, {{0, 3}});
  std::vector<NodeId> s{0, 3};
  EXPECT_NEAR(oc::exact_rho_mrt(g, sched), oc::exact_sigma(g, s), 1e-12);
}

TEST(ExactRhoMrt, IsolatedSeedsCountOnce) {
  auto g = testutil::make_graph(3, {});
  auto sched = sched_of(2, 2, {{0, 1}, {0, 2}});
  EXPECT_DOUBLE_EQ(oc::exact_rho_mrt(g, sched), 3.0);
}

TEST(MembershipTable, MatchesProductEnumeration) {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    auto g = testutil::random_graph(5, 6, 300 + seed, 0.2, 0.9);
    oc::MembershipTable table(g);
    Rng rng(seed);
    for (int rep = 0; rep < 5; ++rep) {
      SeedSchedule sched = SeedSchedule::empty(2, 2);
      for (uint32_t t = 1; t <= 2; ++t)
        for (int j = 0; j < 2; ++j) {
          NodeId v = static_cast<NodeId>(rng.below(5));
          if (!sched.contains(v, t)) sched.add(v, t);
        }
      EXPECT_NEAR(table.rho(sched), oc::exact_rho_mrt(g, sched), 1e-9);
    }
  }
}

TEST(MembershipTable, SigmaMatchesExact) {
  auto g = testutil::random_graph(6, 9, 77, 0.2, 0.9);
  oc::MembershipTable table(g);
  std::vector<NodeId> s{1, 4};
  EXPECT_NEAR(table.sigma(oc::MembershipTable::mask_of(s)), oc::exact_sigma(g, s), 1e-12);
}

TEST(ExactSigmaB, ReducesToSigmaWhenNoSelfActivation) {
  auto g = testutil::random_graph(5, 7, 5, 0.2, 0.8);
  std::vector<double> q(5, 0.0);
  std::vector<NodeId> s{0, 2};
  EXPECT_NEAR(oc::exact_sigma_b(g, q, s), oc::exact_sigma(g, s), 1e-12);
}

TEST(ExactSigmaB, AllSelfActivatedCoversEverything) {
  auto g = testutil::random_graph(5, 7, 6, 0.2, 0.8);
  std::vector<double> q(5, 1.0);
  EXPECT_DOUBLE_EQ(oc::exact_sigma_b(g, q, {}), 5.0);
}

TEST(ExactSigmaB, SingleNodeBernoulli) {
  auto g = testutil::make_graph(1, {});
  std::vector<double> q{0.5};
  EXPECT_NEAR(oc::exact_sigma_b(g, q, {}), 0.5, 1e-12);
}

TEST(ExactMarginalSigma, WeightsActivatedNodesZero) {
  auto g = testutil::make_graph(2, {{0, 1, 1.0}});
  std::vector<NodeId> a{1};
  std::vector<NodeId> s{0};
  EXPECT_DOUBLE_EQ(oc::exact_marginal_sigma(g, a, s), 1.0);
  std::vector<NodeId> all{0, 1};
  EXPECT_DOUBLE_EQ(oc::exact_marginal_sigma(g, all, s), 0.0);
}

TEST(ExhaustiveOpt, StarPlusIsolatedScheduleOptimum) {
  // star a->{b,c} with p=1 plus isolated d
  auto g = testutil::make_graph(4, {{0, 1, 1.0}, {0, 2, 1.0}});
  oc::MembershipTable table(g);
  auto res = oc::exhaustive_opt_schedule(g, 2, 1, table.evaluator());
  EXPECT_DOUBLE_EQ(res.value, 4.0);
}

TEST(ExhaustiveOpt, FullBudgetSingleRound) {
  auto g = testutil::random_graph(5, 8, 9, 0.2, 0.8);
  oc::MembershipTable table(g);
  auto res = oc::exhaustive_opt_schedule(g, 1, 5, table.evaluator());
  EXPECT_NEAR(res.value, 5.0, 1e-9);
}

TEST(ExhaustiveOpt, SetSearchAdditiveEvaluator) {
  // with an additive objective the optimum is the top-k sum
  auto g = testutil::make_graph(4, {});
  std::vector<double> weight{0.5, 2.0, 1.0, 0.25};
  auto eval = [&](std::span<const NodeId> s) {
    double v = 0;
    for (NodeId u : s) v += weight[u];
    return v;
  };
  auto res = oc::exhaustive_opt_set(g, 2, eval);
  EXPECT_DOUBLE_EQ(res.value, 3.0);
  EXPECT_EQ(res.best, (std::vector<NodeId>{1, 2}));
}

TEST(WorldEnumeration, ProbabilitiesSumToOne) {
  auto g = testutil::make_graph(3, {{0, 1, 0.4}, {1, 2, 0.7}});
  SelfActivationProfile prof = SelfActivationProfile::uniform(3, 0.3, DelayDist::constant(1.0));
  EdgeDelays ed = uniform_edge_delays(2, DelayDist::constant(0.5));
  double total = 0;
  size_t worlds = 0;
  oc::enumerate_worlds(g, prof, ed, [&](const PossibleWorld&, double p) {
    total += p;
    ++worlds;
  });
  EXPECT_EQ(worlds, 32u);  // 2 edges x 3 coin nodes
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(WorldEnumeration, RequiresConstantDelays) {
  auto g = testutil::make_graph(2, {{0, 1, 0.5}});
  SelfActivationProfile prof = SelfActivationProfile::uniform(2, 0.5, DelayDist::exponential(1.0));
  EdgeDelays ed = uniform_edge_delays(1, DelayDist::constant(0.5));
  EXPECT_THROW(
      oc::enumerate_worlds(g, prof, ed, [](const PossibleWorld&, double) {}),
      InputError);
}
