#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mail/core/rng.hpp"
#include "mail/features/feature_map.hpp"
#include "mail/game/markov_game.hpp"

// Seeded random instances for property checks.
namespace mail::random_instances {

// Dense random game: every transition row is a random distribution over all
// states and rewards are uniform in [-1, 1].
inline MarkovGame random_game(std::uint64_t seed, int n_states, int a1, int a2, int horizon)
{
   Rng rng(Rng::combine({seed, 0x7e57}));
   MarkovGame::Builder b(n_states, {a1, a2}, horizon);
   for (int x = 0; x < n_states; ++x)
      for (int i = 0; i < a1; ++i)
         for (int j = 0; j < a2; ++j) {
            std::vector<double> w(static_cast<std::size_t>(n_states));
            double s = 0.0;
            for (auto& v : w) s += (v = rng.uniform() + 1e-3);
            std::vector<Transition> row;
            for (int y = 0; y < n_states; ++y) row.push_back({y, w[y] / s});
            // Force exact row sum by adjusting the last entry.
            double acc = 0.0;
            for (int y = 0; y + 1 < n_states; ++y) acc += row[y].prob;
            row.back().prob = 1.0 - acc;
            b.transition(x, i, j, std::move(row));
            b.reward(x, i, j, 2.0 * rng.uniform() - 1.0);
         }
   Vector nu(n_states);
   for (int x = 0; x < n_states; ++x) nu(x) = rng.uniform() + 0.1;
   nu /= nu.sum();
   nu(n_states - 1) = 1.0 - nu.head(n_states - 1).sum();
   b.initial(nu);
   return b.build();
}

inline StagePolicy random_policy(std::uint64_t seed, const MarkovGame& g, Player p)
{
   Rng rng(Rng::combine({seed, static_cast<std::uint64_t>(index_of(p)), 0x901c7}));
   StagePolicy pol(p, g.horizon(), g.n_states(), g.n_actions(p));
   for (int h = 0; h < g.horizon(); ++h)
      for (int x = 0; x < g.n_states(); ++x) {
         auto row = pol.dist(h, x);
         for (int a = 0; a < row.size(); ++a) row(a) = rng.uniform() + 0.05;
         row /= row.sum();
      }
   return pol;
}

// Dense random features with norm at most 1.
inline std::shared_ptr<const FeatureMap> random_features(const MarkovGame& g, Player p, int d, std::uint64_t seed)
{
   Rng rng(seed);
   std::vector<FeatureMap::Row> rows;
   for (int r = 0; r < g.n_states() * g.n_actions(p); ++r) {
      Vector v(d);
      for (int k = 0; k < d; ++k) v(k) = rng.uniform() - 0.5;
      v /= std::max(1.0, v.norm());
      FeatureMap::Row row;
      for (int k = 0; k < d; ++k) row.push_back({k, v(k)});
      rows.push_back(row);
   }
   return std::make_shared<const FeatureMap>("random", p, d, g.n_states(), g.n_actions(p), rows);
}

// Calls f on every deterministic nonstationary policy of player p.
inline void for_each_deterministic_policy(const MarkovGame& g, Player p,
                                          const std::function<void(const StagePolicy&)>& f)
{
   const int n = g.n_actions(p);
   const int slots = g.horizon() * g.n_states();
   std::vector<int> choice(static_cast<std::size_t>(slots), 0);
   while (true) {
      StagePolicy pol(p, g.horizon(), g.n_states(), n);
      for (int s = 0; s < slots; ++s) pol.set_action(s / g.n_states(), s % g.n_states(), choice[s]);
      f(pol);
      int s = 0;
      while (s < slots && ++choice[s] == n) choice[s++] = 0;
      if (s == slots) break;
   }
}

}  // namespace mail::random_instances
