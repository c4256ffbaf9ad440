#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mail/game/markov_game.hpp"

namespace mail {

/// State visitation per stage; joint state-action occupancy is derived on
/// demand with joint_occupancy().
struct OccupancyTable {
   std::vector<Vector> state_occ;  // [h](x) = nu_h(x), h in [0, H)

   int horizon() const noexcept { return static_cast<int>(state_occ.size()); }
};

/// Values of a policy pair for one player. v has H + 1 entries, v[H] == 0.
struct ValueTable {
   Player player = Player::One;
   std::vector<Vector> v;     // [h](x)
   std::vector<RowMatrix> q;  // [h](x, own action)

   double initial_value(const MarkovGame& g) const { return g.initial().dot(v.front()); }
};

namespace detail {

inline void check_profile(const MarkovGame& g, const StagePolicy& p1, const StagePolicy& p2)
{
   if (p1.player() != Player::One || p2.player() != Player::Two)
      throw DimensionError("policy pair must be ordered (player 1, player 2)");
   p1.check_shape(g);
   p2.check_shape(g);
}

// One-step action values of `player` at stage h against a fixed opponent,
// given the continuation values `next` of stage h + 1.
inline RowMatrix backup(const MarkovGame& g, const StagePolicy& opponent, Player player, int h,
                        const Vector& next)
{
   const int own_n = g.n_actions(player);
   const int opp_n = g.n_actions(other(player));
   RowMatrix q = RowMatrix::Zero(g.n_states(), own_n);
   for (int x = 0; x < g.n_states(); ++x) {
      const auto opp = opponent.dist(h, x);
      for (int a = 0; a < own_n; ++a) {
         double acc = 0.0;
         for (int b = 0; b < opp_n; ++b) {
            const double pb = opp(b);
            if (pb == 0.0) continue;
            const auto [a1, a2] = MarkovGame::joint(player, a, b);
            double cont = g.reward(player, x, a1, a2);
            for (const auto& t : g.successors(x, a1, a2)) cont += t.prob * next(t.next);
            acc += pb * cont;
         }
         q(x, a) = acc;
      }
   }
   return q;
}

}  // namespace detail

inline OccupancyTable occupancy(const MarkovGame& g, const StagePolicy& p1, const StagePolicy& p2)
{
   detail::check_profile(g, p1, p2);
   OccupancyTable occ;
   occ.state_occ.reserve(static_cast<std::size_t>(g.horizon()));
   occ.state_occ.push_back(g.initial());
   for (int h = 0; h + 1 < g.horizon(); ++h) {
      const Vector& nu = occ.state_occ.back();
      Vector next = Vector::Zero(g.n_states());
      for (int x = 0; x < g.n_states(); ++x) {
         if (nu(x) == 0.0) continue;
         for (int a1 = 0; a1 < g.n_actions(Player::One); ++a1) {
            const double w1 = nu(x) * p1.prob(h, x, a1);
            if (w1 == 0.0) continue;
            for (int a2 = 0; a2 < g.n_actions(Player::Two); ++a2) {
               const double w = w1 * p2.prob(h, x, a2);
               if (w == 0.0) continue;
               for (const auto& t : g.successors(x, a1, a2)) next(t.next) += w * t.prob;
            }
         }
      }
      occ.state_occ.push_back(std::move(next));
   }
   return occ;
}

// mu_h(x, a1, a2) flattened with MarkovGame::triple indexing.
inline std::vector<double> joint_occupancy(const MarkovGame& g, const OccupancyTable& occ,
                                           const StagePolicy& p1, const StagePolicy& p2, int h)
{
   std::vector<double> mu(static_cast<std::size_t>(g.n_states()) * g.n_actions(Player::One) *
                          g.n_actions(Player::Two));
   for (int x = 0; x < g.n_states(); ++x)
      for (int a1 = 0; a1 < g.n_actions(Player::One); ++a1)
         for (int a2 = 0; a2 < g.n_actions(Player::Two); ++a2)
            mu[g.triple(x, a1, a2)] = occ.state_occ[h](x) * p1.prob(h, x, a1) * p2.prob(h, x, a2);
   return mu;
}

inline ValueTable evaluate(const MarkovGame& g, const StagePolicy& p1, const StagePolicy& p2,
                           Player player)
{
   detail::check_profile(g, p1, p2);
   const StagePolicy& own = player == Player::One ? p1 : p2;
   const StagePolicy& opp = player == Player::One ? p2 : p1;
   const int H = g.horizon();
   ValueTable vt;
   vt.player = player;
   vt.v.assign(static_cast<std::size_t>(H) + 1, Vector::Zero(g.n_states()));
   vt.q.resize(static_cast<std::size_t>(H));
   for (int h = H - 1; h >= 0; --h) {
      vt.q[h] = detail::backup(g, opp, player, h, vt.v[h + 1]);
      vt.v[h] = vt.q[h].cwiseProduct(own.stage(h)).rowwise().sum();
   }
   return vt;
}

struct BestResponse {
   StagePolicy policy;
   ValueTable values;
};

/// Deterministic best response of `player` against `opponent` by backward
/// induction on the induced MDP. Ties go to the lowest action index.
inline BestResponse best_response(const MarkovGame& g, const StagePolicy& opponent, Player player)
{
   if (opponent.player() != other(player))
      throw DimensionError("best_response: opponent policy belongs to the wrong player");
   opponent.check_shape(g);
   const int H = g.horizon();
   BestResponse br{StagePolicy(player, H, g.n_states(), g.n_actions(player)), {}};
   br.values.player = player;
   br.values.v.assign(static_cast<std::size_t>(H) + 1, Vector::Zero(g.n_states()));
   br.values.q.resize(static_cast<std::size_t>(H));
   for (int h = H - 1; h >= 0; --h) {
      RowMatrix q = detail::backup(g, opponent, player, h, br.values.v[h + 1]);
      for (int x = 0; x < g.n_states(); ++x) {
         int best = 0;
         for (int a = 1; a < q.cols(); ++a)
            if (q(x, a) > q(x, best) + 1e-13) best = a;
         br.policy.set_action(h, x, best);
         br.values.v[h](x) = q(x, best);
      }
      br.values.q[h] = std::move(q);
   }
   return br;
}

struct NashGapReport {
   double gap = 0.0;
   double gain[2] = {0.0, 0.0};  // best-response improvement of each player
};

inline constexpr double kNashGapNoise = 1e-9;

/// Exploitability max_n <nu_1, V_n^{br, pi^-n} - V_n^pi>. Values in
/// [-1e-9, 0) are clamped to 0; anything lower is a DP inconsistency.
inline NashGapReport nash_gap_report(const MarkovGame& g, const StagePolicy& p1, const StagePolicy& p2)
{
   detail::check_profile(g, p1, p2);
   const double v1 = evaluate(g, p1, p2, Player::One).initial_value(g);
   const double br1 = best_response(g, p2, Player::One).values.initial_value(g);
   const double br2 = best_response(g, p1, Player::Two).values.initial_value(g);
   NashGapReport rep;
   rep.gain[0] = br1 - v1;
   rep.gain[1] = br2 + v1;  // V_2 = -V_1 in a zero-sum game
   double gap = std::max(rep.gain[0], rep.gain[1]);
   if (gap < -kNashGapNoise)
      throw NumericalError("nash_gap: negative exploitability " + std::to_string(gap));
   rep.gap = std::max(gap, 0.0);
   return rep;
}

inline double nash_gap(const MarkovGame& g, const StagePolicy& p1, const StagePolicy& p2)
{
   return nash_gap_report(g, p1, p2).gap;
}
inline double nash_gap(const MarkovGame& g, const PolicyProfile& prof)
{
   return nash_gap(g, prof.first, prof.second);
}

struct StageTv {
   std::vector<double> tv;     // sum_x nu_h(x) TV(p_h, q_h)(x)
   std::vector<double> tv_sq;  // sum_x nu_h(x) TV^2
   double total() const
   {
      double s = 0.0;
      for (double t : tv) s += t;
      return s;
   }
};

// TV(p, q) = sum_a |p(a) - q(a)| (no 1/2 factor).
inline StageTv expected_tv(const OccupancyTable& weights, const StagePolicy& p, const StagePolicy& q)
{
   if (p.player() != q.player()) throw DimensionError("expected_tv: policies of different players");
   if (p.horizon() != q.horizon() || p.n_states() != q.n_states() || p.n_actions() != q.n_actions() ||
       weights.horizon() != p.horizon())
      throw DimensionError("expected_tv: shape mismatch");
   StageTv out;
   for (int h = 0; h < p.horizon(); ++h) {
      double s = 0.0, s2 = 0.0;
      for (int x = 0; x < p.n_states(); ++x) {
         const double w = weights.state_occ[h](x);
         if (w == 0.0) continue;
         const double tv = (p.dist(h, x) - q.dist(h, x)).cwiseAbs().sum();
         s += w * tv;
         s2 += w * tv * tv;
      }
      out.tv.push_back(s);
      out.tv_sq.push_back(s2);
   }
   return out;
}

}  // namespace mail
