#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>

#include "mail/envs/chain.hpp"
#include "mail/envs/gridworld.hpp"
#include "mail/envs/tictactoe.hpp"
#include "mail/equilibrium/nash.hpp"

using namespace mail;
namespace gw = mail::gridworld;
namespace ttt = mail::tictactoe;

TEST(Gridworld, StateCountAndDecode)
{
   const auto g = gw::game();
   EXPECT_EQ(g.n_states(), 73);
   EXPECT_EQ(gw::kLiveStates, 72);
   EXPECT_EQ(g.horizon(), 10);
   for (int x = 0; x < gw::kLiveStates; ++x) {
      const auto p = gw::decode(x);
      EXPECT_EQ(gw::encode(p.p1, p.p2), x);
   }
   EXPECT_THROW(gw::decode(gw::kTerminal), DecodeError);
   EXPECT_THROW(gw::game(4), ArgumentError);
   EXPECT_TRUE(g.is_terminal(gw::kTerminal));
}

TEST(Gridworld, StartIsDeterministicAndFair)
{
   const auto g = gw::game();
   const auto occ = occupancy(g, StagePolicy::uniform(g, Player::One), StagePolicy::uniform(g, Player::Two));
   EXPECT_EQ(occ.state_occ[0](gw::start_state()), 1.0);
   const auto s = gw::decode(gw::start_state());
   const auto dist = [](gw::Cell c) { return std::abs(c.row - gw::kGoal.row) + std::abs(c.col - gw::kGoal.col); };
   EXPECT_EQ(dist(s.p1), dist(s.p2));
}

TEST(Gridworld, MovementRules)
{
   using gw::Cell;
   // Wall: agent at (0,0) moving left stays.
   auto o = gw::transition(gw::encode({0, 0}, {2, 2}), gw::Left, gw::Left);
   EXPECT_EQ(gw::decode(o.next).p1, (Cell{0, 0}));
   EXPECT_EQ(gw::decode(o.next).p2, (Cell{2, 1}));
   // Moving into the other agent's current cell is blocked, even if it leaves.
   o = gw::transition(gw::encode({1, 0}, {1, 1}), gw::Right, gw::Right);
   EXPECT_EQ(gw::decode(o.next).p1, (Cell{1, 0}));
   EXPECT_EQ(gw::decode(o.next).p2, (Cell{1, 2}));
   // Swaps are blocked.
   o = gw::transition(gw::encode({1, 0}, {1, 1}), gw::Right, gw::Left);
   EXPECT_EQ(o.next, gw::encode({1, 0}, {1, 1}));
   // Same target: both stay.
   o = gw::transition(gw::encode({1, 0}, {1, 2}), gw::Right, gw::Left);
   EXPECT_EQ(o.next, gw::encode({1, 0}, {1, 2}));
   // Reaching the goal pays once and terminates.
   o = gw::transition(gw::encode({0, 1}, {2, 2}), gw::Right, gw::Up);
   EXPECT_EQ(o.next, gw::kTerminal);
   EXPECT_EQ(o.reward, 1.0);
   o = gw::transition(gw::encode({2, 0}, {1, 2}), gw::Up, gw::Up);
   EXPECT_EQ(o.reward, -1.0);
   // Both heading for the goal collide and stay.
   o = gw::transition(gw::encode({0, 1}, {1, 2}), gw::Right, gw::Up);
   EXPECT_EQ(o.reward, 0.0);
   EXPECT_EQ(o.next, gw::encode({0, 1}, {1, 2}));
}

TEST(Gridworld, DeterministicRows)
{
   const auto g = gw::game();
   for (int x = 0; x < g.n_states(); ++x)
      for (int a1 = 0; a1 < 4; ++a1)
         for (int a2 = 0; a2 < 4; ++a2) {
            const auto s = g.successors(x, a1, a2);
            ASSERT_EQ(s.size(), 1u);
            EXPECT_EQ(s[0].prob, 1.0);
         }
}

TEST(Gridworld, NashValueZeroAtStart)
{
   const auto g = gw::game();
   const auto eq = solve_nash(g);
   EXPECT_NEAR(eq.stage_values[0](gw::start_state()), 0.0, 1e-8);
   EXPECT_LE(nash_gap(g, eq.profile), 1e-6);
   EXPECT_NEAR(evaluate(g, eq.profile.first, eq.profile.second, Player::One).initial_value(g), 0.0, 1e-8);
   EXPECT_NEAR(best_response(g, eq.profile.second, Player::One).values.initial_value(g), 0.0, 1e-8);
}

TEST(Gridworld, SwapSymmetryNegatesValue)
{
   const auto g = gw::game();
   std::vector<int> map(gw::kStates);
   for (int x = 0; x < gw::kLiveStates; ++x) {
      const auto p = gw::decode(x);
      map[x] = gw::encode(p.p2, p.p1);
   }
   map[gw::kTerminal] = gw::kTerminal;
   const auto sw = swap_roles(g, map);
   const auto v = solve_nash(g).stage_values[0];
   const auto vs = solve_nash(sw).stage_values[0];
   for (int x = 0; x < gw::kStates; ++x) EXPECT_NEAR(vs(map[x]), -v(x), 1e-9);
   EXPECT_NEAR(vs(map[gw::start_state()]), 0.0, 1e-9);
}

TEST(Gridworld, ReflectionMapsStartToSwappedStart)
{
   EXPECT_EQ(gw::reflect(gw::kStart1), gw::kStart2);
   EXPECT_EQ(gw::reflect(gw::kGoal), gw::kGoal);
}

TEST(Gridworld, RetreatingPlayerIsExploitable)
{
   const auto g = gw::game();
   const auto eq = solve_nash(g);
   // Player 1 always moves down or left, away from the goal.
   const auto away = StagePolicy::deterministic(g, Player::One, [](int h, int) { return h % 2 ? gw::Down : gw::Left; });
   EXPECT_GT(nash_gap(g, away, eq.profile.second), 0.5);
}

TEST(Gridworld, MixturesOfPermutedEquilibria)
{
   const auto g = gw::game();
   std::vector<EquilibriumProfile> eqs;
   for (std::uint64_t s = 1; s <= 4; ++s) eqs.push_back(solve_nash(g, {s}));
   bool distinct = false;
   for (int h = 0; h < g.horizon() && !distinct; ++h)
      distinct = (eqs[0].profile.first.stage(h) - eqs[1].profile.first.stage(h)).cwiseAbs().maxCoeff() > 1e-9;
   EXPECT_TRUE(distinct);
   EXPECT_LE(mix_equilibria(g, {eqs[0], eqs[1]}, {0.5, 0.5}).nash_gap, 1e-6);
   EXPECT_LE(mix_equilibria(g, eqs, {0.25, 0.25, 0.25, 0.25}).nash_gap, 1e-6);
}

TEST(Gridworld, QreGapShrinksWithEta)
{
   const auto g = gw::game();
   const auto eq = solve_nash(g);
   const double base = std::log(500.0) / g.horizon();
   double prev = 1e9;
   for (double m : {1.0, 5.0, 20.0}) {
      const double gap = nash_gap(g, qre_policy(eq, m * base));
      EXPECT_LT(gap, prev);
      prev = gap;
   }
}

TEST(Gridworld, Render)
{
   EXPECT_EQ(gw::render(gw::start_state()), "..G\n1..\n.2.\n");
   EXPECT_EQ(gw::render(gw::kTerminal), "<terminal>\n");
}

TEST(Chain, UniformCompletionProbability)
{
   for (int len : {2, 8}) {
      const auto g = chain::game(len);
      const auto occ = occupancy(g, StagePolicy::uniform(g, Player::One), StagePolicy::uniform(g, Player::Two));
      EXPECT_NEAR(occ.state_occ[len - 1](chain::end_state(g)), std::pow(0.5, len - 1), 1e-15);
   }
   EXPECT_THROW(chain::game(1), ArgumentError);
}

TEST(Chain, AdvancingPolicyReachesEnd)
{
   const int len = 8;
   const auto g = chain::game(len);
   const auto adv = StagePolicy::deterministic(g, Player::One, [](int, int x) { return chain::advancing_action(x); });
   const auto occ = occupancy(g, adv, StagePolicy::uniform(g, Player::Two));
   for (int h = 0; h < len; ++h) EXPECT_EQ(occ.state_occ[h](chain::kStart + h), 1.0);
   EXPECT_EQ(occ.state_occ[len - 2](len), 0.0);
   // Only player 2's action at the end state moves payoff.
   const auto eq = solve_nash(g);
   EXPECT_NEAR(eq.stage_values[0](chain::kStart), 0.0, 1e-12);
   EXPECT_EQ(eq.profile.second.prob(len - 1, len, 0), 1.0);
}

namespace {

// Plain minimax over raw boards, no symmetry, no memo beyond a map.
int plain_minimax(const ttt::Board& b, std::map<std::uint32_t, int>& memo)
{
   if (const auto it = memo.find(ttt::code(b)); it != memo.end()) return it->second;
   int v;
   if (ttt::wins(b, ttt::X)) v = 1;
   else if (ttt::wins(b, ttt::O)) v = -1;
   else if (ttt::count(b, ttt::Empty) == 0) v = 0;
   else {
      const auto m = ttt::mover(b);
      v = m == ttt::X ? -2 : 2;
      for (int c = 0; c < 9; ++c)
         if (b[c] == ttt::Empty) {
            auto n = b;
            n[c] = m;
            const int s = plain_minimax(n, memo);
            v = m == ttt::X ? std::max(v, s) : std::min(v, s);
         }
   }
   memo.emplace(ttt::code(b), v);
   return v;
}

const ttt::Game& shared_ttt()
{
   static const ttt::Game g;
   return g;
}

}  // namespace

TEST(TicTacToe, ReachableBoardsAndCanonicalTable)
{
   const auto& g = shared_ttt();
   EXPECT_EQ(g.n_boards(), 5478);
   EXPECT_EQ(g.game().n_states(), 5479);
   ttt::MinimaxExpert expert;
   EXPECT_EQ(expert.table().size(), 765u);
   int decisions = 0;
   for (const auto& [c, e] : expert.table()) decisions += e.cell >= 0;
   EXPECT_EQ(decisions, 765 - 138);
}

TEST(TicTacToe, CanonicalizationIsAnInvariant)
{
   const auto& g = shared_ttt();
   EXPECT_EQ(ttt::canonicalize(ttt::Board{}).board, ttt::Board{});
   for (int x = 0; x < g.n_boards(); x += 7) {
      const auto& b = g.board(x);
      const auto c = ttt::canonicalize(b);
      EXPECT_EQ(ttt::canonicalize(c.board).board, c.board);
      EXPECT_EQ(ttt::apply(c.transform, b), c.board);
      for (int t = 0; t < 8; ++t) EXPECT_EQ(ttt::canonicalize(ttt::apply(t, b)).board, c.board);
   }
   ttt::Board bad{};
   bad[0] = bad[1] = ttt::X;
   EXPECT_THROW(ttt::canonicalize(bad), ArgumentError);
}

TEST(TicTacToe, NonMoverActionIsIgnored)
{
   const auto& gm = shared_ttt().game();
   for (int x = 0; x < gm.n_states(); ++x)
      for (int a = 0; a < 9; ++a)
         for (int b = 1; b < 9; ++b) {
            // Whoever is not moving cannot change the outcome.
            const auto& s1 = gm.successors(x, a, 0);
            const auto& s2 = gm.successors(x, a, b);
            const auto& s3 = gm.successors(x, 0, a);
            const auto& s4 = gm.successors(x, b, a);
            const bool p1_moves = x < shared_ttt().n_boards() && ttt::mover(shared_ttt().board(x)) == ttt::X;
            if (p1_moves) {
               ASSERT_EQ(s1[0].next, s2[0].next);
               ASSERT_EQ(gm.reward(x, a, 0), gm.reward(x, a, b));
            } else {
               ASSERT_EQ(s3[0].next, s4[0].next);
               ASSERT_EQ(gm.reward(x, 0, a), gm.reward(x, b, a));
            }
         }
}

TEST(TicTacToe, ExpertIsOptimalAgainstFullTree)
{
   const auto& g = shared_ttt();
   ttt::MinimaxExpert expert;
   std::map<std::uint32_t, int> memo;
   EXPECT_EQ(plain_minimax(ttt::Board{}, memo), 0);
   for (int x = 0; x < g.n_boards(); ++x) {
      const auto& b = g.board(x);
      if (ttt::is_over(b)) continue;
      const int cell = expert.move(b);
      ASSERT_GE(cell, 0);
      ASSERT_EQ(b[cell], ttt::Empty);
      auto n = b;
      n[cell] = ttt::mover(b);
      // The expert's move keeps the minimax value of the position.
      EXPECT_EQ(plain_minimax(n, memo), plain_minimax(b, memo)) << ttt::render(b);
   }
}

TEST(TicTacToe, ExpertProfileIsNashAndDraws)
{
   const auto& g = shared_ttt();
   ttt::MinimaxExpert expert;
   const auto prof = expert.policies(g);
   EXPECT_LE(nash_gap(g.game(), prof), 1e-12);
   const auto v = evaluate(g.game(), prof.first, prof.second, Player::One);
   EXPECT_EQ(v.initial_value(g.game()), 0.0);
   const auto occ = occupancy(g.game(), prof.first, prof.second);
   EXPECT_EQ(occ.state_occ[0](g.state_of(ttt::Board{})), 1.0);
}

TEST(TicTacToe, RewardsAndForfeit)
{
   const auto& g = shared_ttt();
   ttt::Board b{};
   b[0] = b[1] = ttt::X;
   b[3] = b[4] = ttt::O;
   const int x = g.state_of(b);
   EXPECT_EQ(g.step(x, 2, 5).second, 1.0);
   EXPECT_EQ(g.step(x, 0, 5).first, g.sink());
   EXPECT_EQ(g.step(x, 0, 5).second, -1.0);
   b[2] = ttt::X;
   EXPECT_TRUE(g.game().is_terminal(g.state_of(b)));
   EXPECT_EQ(ttt::render(b), "XXX\nOO.\n...\n");
}
