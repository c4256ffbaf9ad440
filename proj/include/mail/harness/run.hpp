#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "mail/envs/chain.hpp"
#include "mail/envs/gridworld.hpp"
#include "mail/envs/tictactoe.hpp"
#include "mail/equilibrium/nash.hpp"
#include "mail/exploration/interactive.hpp"
#include "mail/harness/config.hpp"

namespace mail {

struct RunRecord {
   std::uint64_t seed = 0;
   std::string env;
   std::string feature_map;
   std::string algorithm;
   int budget = 0;
   long expert_queries = 0;
   double nash_gap = std::numeric_limits<double>::quiet_NaN();
   double train_loglik = std::numeric_limits<double>::quiet_NaN();  // mean per sample over both fits
   double expected_tv_to_expert = std::numeric_limits<double>::quiet_NaN();
   double wall_ms = 0.0;
   std::string error;  // empty on success

   bool ok() const noexcept { return error.empty(); }
};

/// Game, expert, and feature maps shared by every run of one config.
struct Workbench {
   std::shared_ptr<const MarkovGame> game;
   PolicyProfile expert;
   FeatureMaps features;
   double expert_gap = 0.0;
};

inline std::shared_ptr<const MarkovGame> make_environment(const ExperimentConfig& c)
{
   if (c.env == "gridworld") return std::make_shared<const MarkovGame>(gridworld::game(c.horizon));
   if (c.env == "chain") return std::make_shared<const MarkovGame>(chain::game(c.length));
   if (c.env == "tictactoe") return tictactoe::Game().shared_game();
   throw ConfigError("unknown env '" + c.env + "'");
}

inline std::shared_ptr<const FeatureMap> make_features(const ExperimentConfig& c, const MarkovGame& g, Player p)
{
   if (c.features == "tabular") return std::make_shared<const FeatureMap>(tabular_features(g, p));
   if (c.features == "relational") return std::make_shared<const FeatureMap>(relational_features(g, p));
   if (c.features == "constant") return std::make_shared<const FeatureMap>(constant_features(g, p, c.feature_constant));
   throw ConfigError("unknown feature map '" + c.features + "'");
}

inline PolicyProfile make_expert(const ExperimentConfig& c, const MarkovGame& g)
{
   if (c.expert.kind == "nash") return solve_nash(g).profile;
   if (c.expert.kind == "qre") return qre_policy(solve_nash(g), c.expert.eta);
   std::vector<EquilibriumProfile> eqs;
   for (int i = 0; i < c.expert.k; ++i) eqs.push_back(solve_nash(g, {static_cast<std::uint64_t>(i)}));
   std::vector<double> w = c.expert.weights;
   if (w.empty()) w.assign(static_cast<std::size_t>(c.expert.k), 1.0 / c.expert.k);
   return mix_equilibria(g, eqs, w).profile;
}

inline Workbench make_workbench(const ExperimentConfig& c)
{
   Workbench wb;
   wb.game = make_environment(c);
   wb.expert = make_expert(c, *wb.game);
   wb.expert_gap = nash_gap(*wb.game, wb.expert);
   wb.features = {make_features(c, *wb.game, Player::One), make_features(c, *wb.game, Player::Two)};
   return wb;
}

// Independent stream of one (seed, budget) job.
inline Rng run_stream(const ExperimentConfig& c, std::uint64_t seed, int budget)
{
   return Rng(Rng::combine({c.master_seed, seed, static_cast<std::uint64_t>(budget), Rng::hash_name(c.algorithm)}));
}

inline RunRecord run_one(const ExperimentConfig& c, const Workbench& wb, std::uint64_t seed, int budget)
{
   RunRecord rec{seed, c.env, c.features, c.algorithm, budget};
   const auto t0 = std::chrono::steady_clock::now();
   try {
      const MarkovGame& g = *wb.game;
      Rng rng = run_stream(c, seed, budget);
      PolicyProfile learned;
      double ll = 0.0;
      if (c.algorithm == "bc") {
         const auto data = sample_expert_dataset(g, wb.expert, budget, rng);
         rec.expert_queries = static_cast<long>(data.size());
         const auto f1 = bc_fit(data, wb.features.player1, g.horizon(), c.bc);
         const auto f2 = bc_fit(data, wb.features.player2, g.horizon(), c.bc);
         learned = {f1.policy.to_stage_policy(), f2.policy.to_stage_policy()};
         ll = 0.5 * (f1.mean_loglik() + f2.mean_loglik());
      } else {
         ExplorationConfig ec = c.exploration;
         ec.n_episodes = budget;
         InteractiveOptions opts;
         opts.mode = c.algorithm == "uniform-explore-bc" ? ExplorationMode::Uniform : ExplorationMode::Lsvi;
         // Mixtures and QRE experts are legitimate teachers even when not exact equilibria.
         opts.check_expert = false;
         const auto res = interactive_mail(g, wb.expert, wb.features, ec, c.bc, rng, opts);
         rec.expert_queries = res.expert_queries;
         learned = res.profile;
         ll = 0.5 * (res.fits[0].mean_loglik() + res.fits[1].mean_loglik());
      }
      rec.train_loglik = ll;
      rec.nash_gap = nash_gap(g, learned);
      const auto occ = occupancy(g, wb.expert.first, wb.expert.second);
      rec.expected_tv_to_expert = 0.5 * (expected_tv(occ, learned.first, wb.expert.first).total() +
                                         expected_tv(occ, learned.second, wb.expert.second).total());
   } catch (const std::exception& e) {
      rec.error = e.what();
   }
   rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
   return rec;
}

/// Worker count from MAIL_LAB_THREADS, else the hardware concurrency.
inline int thread_budget()
{
   if (const char* s = std::getenv("MAIL_LAB_THREADS"); s && *s) {
      char* end = nullptr;
      const long v = std::strtol(s, &end, 10);
      if (*end != '\0' || v < 1) throw ConfigError("MAIL_LAB_THREADS must be a positive integer");
      return static_cast<int>(v);
   }
   return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs every (seed, budget) pair on a bounded pool. Records come back in
/// config order: seeds outer, budgets inner.
inline std::vector<RunRecord> run(const ExperimentConfig& c, int threads = 0)
{
   c.validate();
   if (threads <= 0) threads = thread_budget();
   std::vector<std::pair<std::uint64_t, int>> jobs;
   for (auto s : c.seeds)
      for (int b : c.budgets) jobs.emplace_back(s, b);
   std::vector<RunRecord> out(jobs.size());
   Workbench wb;
   try {
      wb = make_workbench(c);
   } catch (const ConfigError&) {
      throw;
   } catch (const std::exception& e) {
      for (std::size_t i = 0; i < jobs.size(); ++i) {
         out[i] = RunRecord{jobs[i].first, c.env, c.features, c.algorithm, jobs[i].second};
         out[i].error = std::string("setup: ") + e.what();
      }
      return out;
   }
   std::atomic<std::size_t> next{0};
   auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) out[i] = run_one(c, wb, jobs[i].first, jobs[i].second);
   };
   const int n = std::min<int>(threads, static_cast<int>(jobs.size()));
   std::vector<std::jthread> pool;
   for (int t = 1; t < n; ++t) pool.emplace_back(worker);
   worker();
   pool.clear();
   return out;
}

}  // namespace mail
