#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mail/envs/gridworld.hpp"
#include "mail/game/io.hpp"
#include "mail/game/markov_game.hpp"

namespace mail {

struct FeatureEntry {
   int index;
   double value;
};

/// Sparse per-player feature map phi(x, a) in R^d, stored row-compressed over
/// (state, own action). Construction checks ||phi||_2 <= 1 everywhere.
class FeatureMap {
  public:
   using Row = std::vector<FeatureEntry>;

   FeatureMap(std::string name, Player player, int dim, int n_states, int n_actions,
              const std::vector<Row>& rows)
       : name_(std::move(name)), player_(player), dim_(dim), n_states_(n_states), n_actions_(n_actions)
   {
      if (dim <= 0) throw DimensionError("FeatureMap: dimension must be positive");
      if (static_cast<int>(rows.size()) != n_states * n_actions)
         throw DimensionError("FeatureMap: expected one row per (state, action)");
      offsets_.reserve(rows.size() + 1);
      offsets_.push_back(0);
      for (std::size_t r = 0; r < rows.size(); ++r) {
         double sq = 0.0;
         for (const auto& e : rows[r]) {
            if (e.index < 0 || e.index >= dim) throw DimensionError("FeatureMap: coordinate out of range");
            if (!std::isfinite(e.value)) throw ArgumentError("FeatureMap: non-finite feature value");
            sq += e.value * e.value;
            if (e.value != 0.0) entries_.push_back(e);
         }
         if (sq > 1.0 + 1e-12)
            throw ArgumentError("FeatureMap '" + name_ + "': feature norm " + std::to_string(std::sqrt(sq)) +
                                " exceeds 1 at state " + std::to_string(r / n_actions) + ", action " +
                                std::to_string(r % n_actions));
         offsets_.push_back(static_cast<int>(entries_.size()));
      }
   }

   const std::string& name() const noexcept { return name_; }
   Player player() const noexcept { return player_; }
   int dim() const noexcept { return dim_; }
   int n_states() const noexcept { return n_states_; }
   int n_actions() const noexcept { return n_actions_; }

   std::span<const FeatureEntry> phi(int x, int a) const noexcept
   {
      const int r = x * n_actions_ + a;
      return {entries_.data() + offsets_[r], entries_.data() + offsets_[r + 1]};
   }

   Vector dense(int x, int a) const
   {
      Vector v = Vector::Zero(dim_);
      for (const auto& e : phi(x, a)) v(e.index) = e.value;
      return v;
   }

   template <typename Vec>
   double dot(int x, int a, const Vec& w) const
   {
      double s = 0.0;
      for (const auto& e : phi(x, a)) s += e.value * w(e.index);
      return s;
   }

   template <typename Vec>
   void axpy(double alpha, int x, int a, Vec& out) const
   {
      for (const auto& e : phi(x, a)) out(e.index) += alpha * e.value;
   }

   // out += weight * phi phi^T
   void add_outer(double weight, int x, int a, Matrix& out) const
   {
      const auto p = phi(x, a);
      for (const auto& ei : p)
         for (const auto& ej : p) out(ei.index, ej.index) += weight * ei.value * ej.value;
   }

   void check_game(const MarkovGame& g) const
   {
      if (n_states_ != g.n_states() || n_actions_ != g.n_actions(player_))
         throw DimensionError("FeatureMap '" + name_ + "' does not match the game for player " + to_string(player_));
   }

  private:
   std::string name_;
   Player player_;
   int dim_;
   int n_states_;
   int n_actions_;
   std::vector<int> offsets_;
   std::vector<FeatureEntry> entries_;
};

/// One-hot e_(x, a) over the non-terminal states; terminal states map to 0.
inline FeatureMap tabular_features(const MarkovGame& g, Player player)
{
   const int A = g.n_actions(player);
   std::vector<FeatureMap::Row> rows(static_cast<std::size_t>(g.n_states()) * A);
   int live = 0;
   for (int x = 0; x < g.n_states(); ++x) {
      if (g.is_terminal(x)) continue;
      for (int a = 0; a < A; ++a) rows[static_cast<std::size_t>(x) * A + a] = {{live * A + a, 1.0}};
      ++live;
   }
   return FeatureMap("tabular", player, std::max(live * A, 1), g.n_states(), A, rows);
}

/// phi(x, a) = c for every input (d = 1), terminal states included.
inline FeatureMap constant_features(const MarkovGame& g, Player player, double c)
{
   if (!(c > 0.0 && c <= 1.0)) throw ArgumentError("constant_features: c must lie in (0, 1]");
   const int A = g.n_actions(player);
   std::vector<FeatureMap::Row> rows(static_cast<std::size_t>(g.n_states()) * A, FeatureMap::Row{{0, c}});
   return FeatureMap("constant", player, 1, g.n_states(), A, rows);
}

namespace gridworld {

inline constexpr int kConcepts = 20;

// Compass sector of the displacement (drow, dcol): 0 = N, 1 = NE, ..., 7 = NW,
// each a 45 degree bin centred on its direction. Rows grow southwards.
inline int sector(int drow, int dcol)
{
   const double deg = std::atan2(static_cast<double>(dcol), static_cast<double>(-drow)) * 180.0 / std::numbers::pi;
   const int s = static_cast<int>(std::floor((deg + 22.5) / 45.0));
   return ((s % 8) + 8) % 8;
}

// The 20 binary concepts seen from `player`: direction to the opponent (8),
// direction to the goal (8), adjacency to opponent / goal (8-neighbourhood),
// standing on the goal, standing in a corner.
inline std::array<bool, kConcepts> concepts(int x, Player player)
{
   const auto pos = decode(x);
   const Cell me = pos.of(player), opp = pos.of(other(player));
   std::array<bool, kConcepts> c{};
   c[sector(opp.row - me.row, opp.col - me.col)] = true;
   if (!(me == kGoal)) c[8 + sector(kGoal.row - me.row, kGoal.col - me.col)] = true;
   auto adjacent = [](Cell a, Cell b) { return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col)) == 1; };
   c[16] = adjacent(me, opp);
   c[17] = adjacent(me, kGoal);
   c[18] = me == kGoal;
   c[19] = (me.row == 0 || me.row == kSide - 1) && (me.col == 0 || me.col == kSide - 1);
   return c;
}

}  // namespace gridworld

/// Relational gridworld features: the 20 concepts copied into the slot of the
/// acting action (d = 80), scaled to unit l2 norm. The terminal maps to 0.
inline FeatureMap relational_features(const MarkovGame& g, Player player)
{
   namespace gw = gridworld;
   if (g.n_states() != gw::kStates || g.n_actions(player) != gw::kActions)
      throw DecodeError("relational_features: game is not the 3x3 gridworld");
   std::vector<FeatureMap::Row> rows(static_cast<std::size_t>(gw::kStates) * gw::kActions);
   for (int x = 0; x < gw::kLiveStates; ++x) {
      const auto c = gw::concepts(x, player);
      int on = 0;
      for (bool b : c) on += b;
      const double v = 1.0 / std::sqrt(static_cast<double>(on));
      for (int a = 0; a < gw::kActions; ++a) {
         auto& row = rows[static_cast<std::size_t>(x) * gw::kActions + a];
         for (int k = 0; k < gw::kConcepts; ++k)
            if (c[k]) row.push_back({a * gw::kConcepts + k, v});
      }
   }
   return FeatureMap("relational", player, gw::kConcepts * gw::kActions, gw::kStates, gw::kActions, rows);
}

// {"format": "mail-lab.feature-map", "version": 1, "name": ..., "dim": d,
//  "features": [{"player": n, "state": x, "action": a, "phi": [d values]}, ...]}
// Pairs that are not listed map to the zero vector.
inline FeatureMap features_from_json(const Json& j, const MarkovGame& g, Player player)
{
   detail::expect_format(j, "mail-lab.feature-map", 1);
   const int d = j.at("dim").get<int>();
   const int A = g.n_actions(player);
   std::vector<FeatureMap::Row> rows(static_cast<std::size_t>(g.n_states()) * A);
   for (const auto& f : j.at("features")) {
      const int pl = f.at("player").get<int>();
      if (pl != 1 && pl != 2) throw DecodeError("feature-map: player must be 1 or 2");
      if (pl != static_cast<int>(player)) continue;
      const int x = f.at("state").get<int>(), a = f.at("action").get<int>();
      if (x < 0 || x >= g.n_states() || a < 0 || a >= A) throw DecodeError("feature-map: (state, action) out of range");
      const auto phi = f.at("phi").get<std::vector<double>>();
      if (static_cast<int>(phi.size()) != d) throw DecodeError("feature-map: vector length differs from dim");
      auto& row = rows[static_cast<std::size_t>(x) * A + a];
      row.clear();
      for (int k = 0; k < d; ++k)
         if (phi[k] != 0.0) row.push_back({k, phi[k]});
   }
   return FeatureMap(j.value("name", std::string("custom")), player, d, g.n_states(), A, rows);
}

inline Json to_json(const FeatureMap& f)
{
   Json feats = Json::array();
   for (int x = 0; x < f.n_states(); ++x)
      for (int a = 0; a < f.n_actions(); ++a) {
         if (f.phi(x, a).empty()) continue;
         const Vector v = f.dense(x, a);
         feats.push_back({{"player", static_cast<int>(f.player())},
                          {"state", x},
                          {"action", a},
                          {"phi", std::vector<double>(v.data(), v.data() + v.size())}});
      }
   return Json{{"format", "mail-lab.feature-map"},
               {"version", 1},
               {"name", f.name()},
               {"dim", f.dim()},
               {"features", std::move(feats)}};
}

}  // namespace mail
