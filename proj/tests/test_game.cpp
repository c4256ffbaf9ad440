#include <gtest/gtest.h>

#include <limits>

#include "mail/game/analysis.hpp"
#include "mail/game/io.hpp"
#include "test_util.hpp"

using namespace mail;
using mail::testing::for_each_deterministic_policy;
using mail::testing::random_game;
using mail::testing::random_policy;

namespace {

MarkovGame null_game(int s, int h)
{
   MarkovGame::Builder b(s, {2, 2}, h);
   for (int x = 0; x < s; ++x)
      for (int i = 0; i < 2; ++i)
         for (int j = 0; j < 2; ++j) b.deterministic(x, i, j, (x + i + j) % s);
   b.initial_state(0);
   return b.build();
}

// Forward computation of sum_h <mu_h, r^n>.
double forward_value(const MarkovGame& g, const StagePolicy& p1, const StagePolicy& p2, Player n)
{
   const auto occ = occupancy(g, p1, p2);
   double total = 0.0;
   for (int h = 0; h < g.horizon(); ++h) {
      const auto mu = joint_occupancy(g, occ, p1, p2, h);
      for (int x = 0; x < g.n_states(); ++x)
         for (int a1 = 0; a1 < g.n_actions(Player::One); ++a1)
            for (int a2 = 0; a2 < g.n_actions(Player::Two); ++a2)
               total += mu[g.triple(x, a1, a2)] * g.reward(n, x, a1, a2);
   }
   return total;
}

}  // namespace

TEST(MarkovGame, RejectsBadRows)
{
   MarkovGame::Builder b(2, {1, 1}, 1);
   b.transition(0, 0, 0, {{0, 0.5}, {1, 0.4}});
   b.deterministic(1, 0, 0, 1);
   b.initial_state(0);
   EXPECT_THROW(b.build(), ArgumentError);
   b.transition(0, 0, 0, {{0, 0.5}, {1, 0.5}});
   b.reward(1, 0, 0, 1.5);
   EXPECT_THROW(b.build(), ArgumentError);
   b.reward(1, 0, 0, 1.0);
   EXPECT_NO_THROW(b.build());
   EXPECT_THROW(b.deterministic(2, 0, 0, 0), DimensionError);
}

TEST(Occupancy, ConservesMassAndMarginalizes)
{
   for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = random_game(seed, 4, 2, 3, 4);
      const auto p1 = random_policy(seed, g, Player::One);
      const auto p2 = random_policy(seed, g, Player::Two);
      const auto occ = occupancy(g, p1, p2);
      ASSERT_EQ(occ.horizon(), 4);
      for (int h = 0; h < 4; ++h) {
         EXPECT_NEAR(occ.state_occ[h].sum(), 1.0, 1e-10);
         const auto mu = joint_occupancy(g, occ, p1, p2, h);
         for (int x = 0; x < 4; ++x) {
            double m = 0.0;
            for (int a1 = 0; a1 < 2; ++a1)
               for (int a2 = 0; a2 < 3; ++a2) m += mu[g.triple(x, a1, a2)];
            EXPECT_NEAR(m, occ.state_occ[h](x), 1e-10);
         }
      }
   }
}

TEST(Occupancy, SingleStateChain)
{
   const auto g = null_game(1, 5);
   const auto occ = occupancy(g, StagePolicy::uniform(g, Player::One), StagePolicy::uniform(g, Player::Two));
   for (const auto& nu : occ.state_occ) EXPECT_DOUBLE_EQ(nu(0), 1.0);
}

TEST(Occupancy, ShapeMismatchIsDimensionError)
{
   const auto g = null_game(2, 3);
   const auto bad = StagePolicy::uniform(Player::One, 2, 2, 2);
   EXPECT_THROW(occupancy(g, bad, StagePolicy::uniform(g, Player::Two)), DimensionError);
   EXPECT_THROW(occupancy(g, StagePolicy::uniform(g, Player::Two), StagePolicy::uniform(g, Player::One)),
                DimensionError);
}

TEST(Evaluate, NullGameHasZeroValue)
{
   const auto g = null_game(3, 4);
   const auto vt = evaluate(g, StagePolicy::uniform(g, Player::One), StagePolicy::uniform(g, Player::Two),
                            Player::One);
   for (const auto& v : vt.v) EXPECT_EQ(v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Evaluate, BackwardMatchesForwardOccupancy)
{
   for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto g = random_game(seed, 3, 2, 2, 3);
      const auto p1 = random_policy(seed, g, Player::One);
      const auto p2 = random_policy(seed, g, Player::Two);
      for (Player n : {Player::One, Player::Two})
         EXPECT_NEAR(evaluate(g, p1, p2, n).initial_value(g), forward_value(g, p1, p2, n), 1e-10);
   }
}

TEST(Evaluate, ZeroSumAndConsistency)
{
   const auto g = random_game(3, 4, 3, 2, 5);
   const auto p1 = random_policy(3, g, Player::One);
   const auto p2 = random_policy(3, g, Player::Two);
   const auto v1 = evaluate(g, p1, p2, Player::One);
   const auto v2 = evaluate(g, p1, p2, Player::Two);
   for (int h = 0; h <= g.horizon(); ++h) {
      EXPECT_LT((v1.v[h] + v2.v[h]).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LE(v1.v[h].cwiseAbs().maxCoeff(), g.horizon() - h + 1e-12);
   }
   for (int h = 0; h < g.horizon(); ++h)
      for (int x = 0; x < g.n_states(); ++x)
         EXPECT_NEAR(v1.v[h](x), v1.q[h].row(x).dot(p1.dist(h, x)), 1e-10);
}

TEST(BestResponse, MatchesBruteForceEnumeration)
{
   int checked = 0;
   for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng pick(seed);
      const int s = 1 + pick.uniform_int(3);
      const int n1 = 1 + pick.uniform_int(2), n2 = 1 + pick.uniform_int(2);
      const int h = 1 + pick.uniform_int(3);
      const auto g = random_game(seed, s, n1, n2, h);
      for (Player n : {Player::One, Player::Two}) {
         const auto opp = random_policy(seed + 1000, g, other(n));
         const auto br = best_response(g, opp, n);
         double best = -std::numeric_limits<double>::infinity();
         for_each_deterministic_policy(g, n, [&](const StagePolicy& pol) {
            const double v = n == Player::One ? evaluate(g, pol, opp, n).initial_value(g)
                                              : evaluate(g, opp, pol, n).initial_value(g);
            best = std::max(best, v);
         });
         EXPECT_NEAR(br.values.initial_value(g), best, 1e-10);
         EXPECT_TRUE(br.policy.is_deterministic());
         ++checked;
      }
   }
   EXPECT_EQ(checked, 200);
}

TEST(BestResponse, ActionIrrelevantGame)
{
   // Player 2's action never matters: any of its policies is a best response.
   MarkovGame::Builder b(2, {2, 3}, 3);
   for (int x = 0; x < 2; ++x)
      for (int i = 0; i < 2; ++i)
         for (int j = 0; j < 3; ++j) {
            b.deterministic(x, i, j, i);
            b.reward(x, i, j, x == 0 ? 0.5 : -0.25);
         }
   b.initial_state(0);
   const auto g = b.build();
   const auto p1 = random_policy(1, g, Player::One);
   const auto br = best_response(g, p1, Player::Two);
   const auto any = random_policy(2, g, Player::Two);
   EXPECT_NEAR(br.values.initial_value(g), evaluate(g, p1, any, Player::Two).initial_value(g), 1e-12);
}

TEST(NashGap, NonNegativeOnRandomProfiles)
{
   for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto g = random_game(seed, 3, 2, 2, 3);
      const auto rep = nash_gap_report(g, random_policy(seed, g, Player::One), random_policy(seed, g, Player::Two));
      EXPECT_GE(rep.gap, 0.0);
      EXPECT_GE(rep.gain[0], -1e-12);
      EXPECT_GE(rep.gain[1], -1e-12);
   }
}

TEST(ExpectedTv, ConventionWithoutHalf)
{
   StagePolicy p(Player::One, 1, 1, 2), q(Player::One, 1, 1, 2);
   p.set_action(0, 0, 0);
   q.set_action(0, 0, 1);
   OccupancyTable w{{Vector::Ones(1)}};
   const auto tv = expected_tv(w, p, q);
   EXPECT_DOUBLE_EQ(tv.tv[0], 2.0);
   EXPECT_DOUBLE_EQ(tv.tv_sq[0], 4.0);
   EXPECT_DOUBLE_EQ(expected_tv(w, p, p).total(), 0.0);
   EXPECT_THROW(expected_tv(w, p, StagePolicy(Player::Two, 1, 1, 2)), DimensionError);
}

TEST(GameIo, RoundTripIsExact)
{
   auto g = random_game(17, 3, 2, 3, 4);
   const auto text = to_json(g).dump();
   const auto back = game_from_json(Json::parse(text));
   ASSERT_EQ(back.n_states(), g.n_states());
   ASSERT_EQ(back.horizon(), g.horizon());
   for (int x = 0; x < 3; ++x)
      for (int a1 = 0; a1 < 2; ++a1)
         for (int a2 = 0; a2 < 3; ++a2) {
            EXPECT_EQ(back.reward(x, a1, a2), g.reward(x, a1, a2));
            const auto s0 = g.successors(x, a1, a2), s1 = back.successors(x, a1, a2);
            ASSERT_EQ(s0.size(), s1.size());
            for (std::size_t k = 0; k < s0.size(); ++k) {
               EXPECT_EQ(s0[k].next, s1[k].next);
               EXPECT_EQ(s0[k].prob, s1[k].prob);
            }
         }
   EXPECT_EQ(back.initial(), g.initial());
   EXPECT_EQ(to_json(back).dump(), text);
}

TEST(GameIo, PolicyRoundTripAndErrors)
{
   const auto g = random_game(4, 2, 3, 2, 2);
   const auto p = random_policy(4, g, Player::One);
   const auto back = policy_from_json(Json::parse(to_json(p).dump()));
   for (int h = 0; h < 2; ++h) EXPECT_EQ(back.stage(h), p.stage(h));
   auto j = to_json(p);
   j["format"] = "something-else";
   EXPECT_THROW(policy_from_json(j), DecodeError);
   auto k = to_json(g);
   k["transition"].push_back({9, 0, 0, 0, 1.0});
   EXPECT_THROW(game_from_json(k), DecodeError);
}

TEST(SwapRoles, NegatesValues)
{
   const auto g = random_game(8, 3, 2, 3, 3);
   const auto sw = swap_roles(g, {0, 1, 2});
   const auto p1 = random_policy(8, g, Player::One);
   const auto p2 = random_policy(8, g, Player::Two);
   StagePolicy q1(Player::One, 3, 3, 3), q2(Player::Two, 3, 3, 2);
   for (int h = 0; h < 3; ++h) {
      q1.stage(h) = p2.stage(h);
      q2.stage(h) = p1.stage(h);
   }
   EXPECT_NEAR(evaluate(sw, q1, q2, Player::One).initial_value(sw),
               -evaluate(g, p1, p2, Player::One).initial_value(g), 1e-12);
}
