#pragma once

#include <algorithm>
#include <array>
#include <memory>
#include <vector>

#include "mail/exploration/lsvi_ucb_zero.hpp"
#include "mail/equilibrium/nash.hpp"
#include "mail/imitation/bc.hpp"

namespace mail {

enum class ExplorationMode { Lsvi, Uniform };

struct FeatureMaps {
   std::shared_ptr<const FeatureMap> player1;
   std::shared_ptr<const FeatureMap> player2;

   const std::shared_ptr<const FeatureMap>& of(Player p) const { return p == Player::One ? player1 : player2; }
};

struct InteractiveResult {
   PolicyProfile profile;
   std::array<ExplorationTrace, 2> traces;  // [n - 1]: player n frozen, -n explores
   std::vector<BcFit> fits;                 // [n - 1]
   long expert_queries = 0;
};

struct InteractiveOptions {
   ExplorationMode mode = ExplorationMode::Lsvi;
   bool check_expert = true;  // refuse an expert whose nash_gap exceeds 1e-6
};

namespace detail {

inline void check_interactive_inputs(const MarkovGame& g, const PolicyProfile& expert, const FeatureMaps& fm,
                                     const InteractiveOptions& opts)
{
   if (!fm.player1 || !fm.player2) throw ArgumentError("interactive_mail: missing feature map");
   if (fm.player1->player() != Player::One || fm.player2->player() != Player::Two)
      throw DimensionError("interactive_mail: feature maps must be ordered (player 1, player 2)");
   if (opts.check_expert) {
      const double gap = nash_gap(g, expert);
      if (gap > kEquilibriumTolerance)
         throw ArgumentError("interactive_mail: expert is not an equilibrium (nash_gap = " + std::to_string(gap) + ")");
   }
}

inline ExplorationTrace explore_for(const MarkovGame& g, const PolicyProfile& expert, Player frozen,
                                    const FeatureMaps& fm, const ExplorationConfig& cfg, ExplorationMode mode, Rng rng)
{
   const FeatureMap& f = *fm.of(other(frozen));
   return mode == ExplorationMode::Lsvi ? lsvi_ucb_zero(g, expert, frozen, f, cfg, rng)
                                        : uniform_explore(g, expert, frozen, f, cfg, rng);
}

}  // namespace detail

/// For each player n: explore with n frozen to the expert, then fit player n
/// by BC on the collected labels with eta = log(K) / H unless bc_cfg sets it.
inline InteractiveResult interactive_mail(const MarkovGame& g, const PolicyProfile& expert, const FeatureMaps& fm,
                                          const ExplorationConfig& cfg, const BcConfig& bc_cfg, Rng rng,
                                          const InteractiveOptions& opts = {})
{
   if (cfg.n_episodes < 1) throw ArgumentError("interactive_mail: K must be at least 1");
   detail::check_interactive_inputs(g, expert, fm, opts);
   InteractiveResult out;
   for (Player n : {Player::One, Player::Two}) {
      const int i = index_of(n);
      out.traces[i] = detail::explore_for(g, expert, n, fm, cfg, opts.mode, rng.split(static_cast<std::uint64_t>(i + 1)));
      out.fits.push_back(bc_fit(out.traces[i].dataset, fm.of(n), g.horizon(), bc_cfg));
      out.expert_queries += out.traces[i].expert_queries;
   }
   out.profile = {out.fits[0].policy.to_stage_policy(), out.fits[1].policy.to_stage_policy()};
   return out;
}

struct SweepPoint {
   int k = 0;
   double nash_gap = 0.0;
   long expert_queries = 0;  // both players
   double mean_loglik = 0.0;  // over both fits
};

/// Anytime variant: one exploration run per player up to the largest budget,
/// then BC on every prefix in `budgets`. Each prefix is exactly the data a
/// run with that K would have seen, since episode k never looks ahead.
inline std::vector<SweepPoint> interactive_sweep(const MarkovGame& g, const PolicyProfile& expert,
                                                 const FeatureMaps& fm, ExplorationConfig cfg, const BcConfig& bc_cfg,
                                                 std::vector<int> budgets, Rng rng,
                                                 const InteractiveOptions& opts = {})
{
   if (budgets.empty()) throw ArgumentError("interactive_sweep: no budgets");
   std::sort(budgets.begin(), budgets.end());
   if (budgets.front() < 1) throw ArgumentError("interactive_sweep: budgets must be at least 1");
   detail::check_interactive_inputs(g, expert, fm, opts);
   cfg.n_episodes = budgets.back();
   if (cfg.beta <= 0.0)
      throw ArgumentError("interactive_sweep: set beta explicitly, the default depends on K");
   std::array<ExplorationTrace, 2> traces;
   for (Player n : {Player::One, Player::Two})
      traces[index_of(n)] =
          detail::explore_for(g, expert, n, fm, cfg, opts.mode, rng.split(static_cast<std::uint64_t>(index_of(n) + 1)));
   std::vector<SweepPoint> out;
   for (int k : budgets) {
      SweepPoint pt;
      pt.k = k;
      PolicyProfile prof;
      for (Player n : {Player::One, Player::Two}) {
         const auto data = dataset_prefix(traces[index_of(n)].dataset, k);
         const auto fit = bc_fit(data, fm.of(n), g.horizon(), bc_cfg);
         (n == Player::One ? prof.first : prof.second) = fit.policy.to_stage_policy();
         pt.expert_queries += static_cast<long>(data.size());
         pt.mean_loglik += 0.5 * fit.mean_loglik();
      }
      pt.nash_gap = nash_gap(g, prof);
      out.push_back(pt);
   }
   return out;
}

}  // namespace mail
