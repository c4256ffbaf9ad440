#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mail/core/rng.hpp"
#include "mail/equilibrium/matrix_game.hpp"
#include "mail/game/analysis.hpp"
#include "mail/game/io.hpp"

namespace mail {

struct EquilibriumProfile {
   PolicyProfile profile;
   std::vector<Vector> stage_values;            // [h](x), player 1 value, h in [0, H)
   std::vector<std::vector<Matrix>> stage_q;    // [h][x](a1, a2)
};

struct NashOptions {
   // 0 keeps the natural action order. Any other value shuffles the order the
   // LP sees at every (stage, state), which selects a different optimal
   // vertex whenever the stage game has several.
   std::uint64_t action_order_seed = 0;
};

// Q_h(x, a1, a2) = r(x, a1, a2) + E[V_{h+1}(x')].
inline Matrix stage_matrix(const MarkovGame& g, int x, const Vector& next)
{
   const int n1 = g.n_actions(Player::One), n2 = g.n_actions(Player::Two);
   Matrix q(n1, n2);
   for (int a1 = 0; a1 < n1; ++a1)
      for (int a2 = 0; a2 < n2; ++a2) {
         double v = g.reward(x, a1, a2);
         for (const auto& t : g.successors(x, a1, a2)) v += t.prob * next(t.next);
         q(a1, a2) = v;
      }
   return q;
}

inline EquilibriumProfile solve_nash(const MarkovGame& g, const NashOptions& opts = {})
{
   const int H = g.horizon(), S = g.n_states();
   const int n1 = g.n_actions(Player::One), n2 = g.n_actions(Player::Two);
   EquilibriumProfile eq{{StagePolicy(Player::One, H, S, n1), StagePolicy(Player::Two, H, S, n2)}, {}, {}};
   eq.stage_values.assign(static_cast<std::size_t>(H), Vector::Zero(S));
   eq.stage_q.assign(static_cast<std::size_t>(H), std::vector<Matrix>(static_cast<std::size_t>(S)));
   Vector next = Vector::Zero(S);
   std::vector<int> rows(static_cast<std::size_t>(n1)), cols(static_cast<std::size_t>(n2));
   for (int h = H - 1; h >= 0; --h) {
      for (int x = 0; x < S; ++x) {
         Matrix q = stage_matrix(g, x, next);
         MatrixGameSolution sol;
         if (opts.action_order_seed == 0) {
            sol = matrix_maximin(q);
         } else {
            Rng rng(Rng::combine({opts.action_order_seed, static_cast<std::uint64_t>(h),
                                  static_cast<std::uint64_t>(x)}));
            std::iota(rows.begin(), rows.end(), 0);
            std::iota(cols.begin(), cols.end(), 0);
            for (int i = n1 - 1; i > 0; --i) std::swap(rows[i], rows[rng.uniform_int(i + 1)]);
            for (int j = n2 - 1; j > 0; --j) std::swap(cols[j], cols[rng.uniform_int(j + 1)]);
            sol = matrix_maximin(q, rows, cols);
         }
         eq.profile.first.dist(h, x) = sol.row_strategy.transpose();
         eq.profile.second.dist(h, x) = sol.col_strategy.transpose();
         eq.stage_values[h](x) = sol.value;
         eq.stage_q[h][x] = std::move(q);
      }
      next = eq.stage_values[h];
   }
   return eq;
}

struct MixedProfile {
   PolicyProfile profile;
   double nash_gap = 0.0;
   std::string warning;  // empty when the post-hoc check passes
};

inline constexpr double kEquilibriumTolerance = 1e-6;

/// Stagewise convex combination of equilibrium strategies, checked after the
/// fact with nash_gap.
inline MixedProfile mix_equilibria(const MarkovGame& g, const std::vector<EquilibriumProfile>& eqs,
                                   const std::vector<double>& weights)
{
   if (eqs.empty() || eqs.size() != weights.size())
      throw ArgumentError("mix_equilibria: need one weight per profile");
   double total = 0.0;
   for (double w : weights) {
      if (!(w >= 0.0)) throw ArgumentError("mix_equilibria: negative weight");
      total += w;
   }
   if (std::abs(total - 1.0) > 1e-10) throw ArgumentError("mix_equilibria: weights must sum to 1");
   MixedProfile out{eqs.front().profile, 0.0, {}};
   for (auto* p : {&out.profile.first, &out.profile.second}) {
      p->check_shape(g);
      for (int h = 0; h < p->horizon(); ++h) p->stage(h).setZero();
   }
   for (std::size_t k = 0; k < eqs.size(); ++k) {
      eqs[k].profile.first.check_shape(g);
      eqs[k].profile.second.check_shape(g);
      for (int h = 0; h < g.horizon(); ++h) {
         out.profile.first.stage(h) += weights[k] * eqs[k].profile.first.stage(h);
         out.profile.second.stage(h) += weights[k] * eqs[k].profile.second.stage(h);
      }
   }
   out.nash_gap = nash_gap(g, out.profile);
   if (out.nash_gap > kEquilibriumTolerance)
      out.warning = "mixture is not an equilibrium: nash_gap = " + std::to_string(out.nash_gap);
   return out;
}

/// Softmax of eta times each player's marginal equilibrium action value.
inline PolicyProfile qre_policy(const EquilibriumProfile& eq, double eta)
{
   if (!(eta > 0.0) || !std::isfinite(eta)) throw ArgumentError("qre_policy: eta must be positive");
   if (eq.stage_q.empty()) throw ArgumentError("qre_policy: equilibrium has no stage Q tables");
   PolicyProfile out = eq.profile;
   auto softmax_into = [eta](auto row, const Vector& q) {
      const double m = q.maxCoeff();
      Vector e = (eta * (q.array() - m)).exp();
      row = (e / e.sum()).transpose();
   };
   for (int h = 0; h < static_cast<int>(eq.stage_q.size()); ++h)
      for (int x = 0; x < static_cast<int>(eq.stage_q[h].size()); ++x) {
         const Matrix& q = eq.stage_q[h][x];
         const Vector p1 = eq.profile.first.dist(h, x).transpose();
         const Vector p2 = eq.profile.second.dist(h, x).transpose();
         softmax_into(out.first.dist(h, x), Vector(q * p2));
         softmax_into(out.second.dist(h, x), Vector(-(q.transpose() * p1)));
      }
   return out;
}

inline Json to_json(const EquilibriumProfile& eq)
{
   Json values = Json::array();
   for (const auto& v : eq.stage_values) values.push_back(std::vector<double>(v.data(), v.data() + v.size()));
   Json q = Json::array();
   for (const auto& stage : eq.stage_q) {
      Json s = Json::array();
      for (const auto& m : stage) {
         Json rows = Json::array();
         for (Eigen::Index i = 0; i < m.rows(); ++i) {
            Json r = Json::array();
            for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
            rows.push_back(std::move(r));
         }
         s.push_back(std::move(rows));
      }
      q.push_back(std::move(s));
   }
   return Json{{"format", "mail-lab.equilibrium"},
               {"version", 1},
               {"player1", to_json(eq.profile.first)},
               {"player2", to_json(eq.profile.second)},
               {"stage_values", std::move(values)},
               {"stage_q", std::move(q)}};
}

inline EquilibriumProfile equilibrium_from_json(const Json& j)
{
   detail::expect_format(j, "mail-lab.equilibrium", 1);
   EquilibriumProfile eq{{policy_from_json(j.at("player1")), policy_from_json(j.at("player2"))}, {}, {}};
   if (eq.profile.first.player() != Player::One || eq.profile.second.player() != Player::Two)
      throw DecodeError("equilibrium: players out of order");
   for (const auto& v : j.at("stage_values")) {
      const auto d = v.get<std::vector<double>>();
      eq.stage_values.emplace_back(Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size())));
   }
   for (const auto& s : j.at("stage_q")) {
      std::vector<Matrix> stage;
      for (const auto& m : s) {
         const auto rows = m.get<std::vector<std::vector<double>>>();
         Matrix mat(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
         for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<Eigen::Index>(rows[i].size()) != mat.cols()) throw DecodeError("equilibrium: ragged Q");
            for (std::size_t k = 0; k < rows[i].size(); ++k) mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
         }
         stage.push_back(std::move(mat));
      }
      eq.stage_q.push_back(std::move(stage));
   }
   return eq;
}

}  // namespace mail
