#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mail/envs/chain.hpp"
#include "mail/envs/gridworld.hpp"
#include "mail/envs/tictactoe.hpp"
#include "mail/equilibrium/nash.hpp"
#include "mail/exploration/interactive.hpp"
#include "mail/game/random_instances.hpp"
#include "mail/harness/config.hpp"
#include "mail/harness/output.hpp"

namespace mail::acceptance {

struct CriterionResult {
   int id = 0;
   std::string name;
   bool passed = false;
   std::string detail;
   double seconds = 0.0;
};

struct Options {
   std::filesystem::path default_config;  // shipped config for the determinism check
   std::filesystem::path mail_lab;        // CLI binary; empty runs the check in-process
   std::filesystem::path scratch;         // where the determinism runs write
};

inline const std::vector<std::uint64_t> kSeeds{42, 123, 456, 789};

namespace detail {

inline std::string num(double v, int digits = 4)
{
   char buf[48];
   std::snprintf(buf, sizeof buf, "%.*g", digits, v);
   return buf;
}

using Clock = std::chrono::steady_clock;

inline double since(Clock::time_point t0)
{
   return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline FeatureMaps maps(const MarkovGame& g, bool relational)
{
   if (relational)
      return {std::make_shared<const FeatureMap>(relational_features(g, Player::One)),
              std::make_shared<const FeatureMap>(relational_features(g, Player::Two))};
   return {std::make_shared<const FeatureMap>(tabular_features(g, Player::One)),
           std::make_shared<const FeatureMap>(tabular_features(g, Player::Two))};
}

// beta + 1 = H: an unvisited pair's optimistic value sits exactly at the clip.
inline double horizon_beta(const MarkovGame& g) { return g.horizon() - 1.0; }

}  // namespace detail

inline CriterionResult equilibrium_exactness()
{
   const auto t0 = detail::Clock::now();
   const auto g = gridworld::game(10);
   const auto eq = solve_nash(g);
   const double gap = nash_gap(g, eq.profile);
   const double value = eq.stage_values[0](gridworld::start_state());
   const double secs = detail::since(t0);
   return {1, "equilibrium exactness", gap <= 1e-6 && std::abs(value) <= 1e-8 && secs <= 10.0,
           "nash_gap=" + detail::num(gap) + " start_value=" + detail::num(value), secs};
}

inline CriterionResult bc_failure_tabular()
{
   const auto t0 = detail::Clock::now();
   const auto g = gridworld::game(10);
   const auto eq = solve_nash(g);
   const auto fm = detail::maps(g, false);
   double loss = 0.0, gap = 0.0;
   for (auto seed : kSeeds) {
      const auto data = sample_expert_dataset(g, eq.profile, 500, Rng(seed));
      const auto f1 = bc_fit(data, fm.player1, g.horizon(), {});
      const auto f2 = bc_fit(data, fm.player2, g.horizon(), {});
      loss += -0.5 * (f1.mean_loglik() + f2.mean_loglik()) / kSeeds.size();
      gap += nash_gap(g, {f1.policy.to_stage_policy(), f2.policy.to_stage_policy()}) / kSeeds.size();
   }
   const double secs = detail::since(t0);
   const double need = 0.25 * g.horizon();
   return {2, "BC failure with tabular features", loss <= 0.01 && gap >= need && secs <= 120.0,
           "train_logloss=" + detail::num(loss) + " nash_gap=" + detail::num(gap) + " (need >= " + detail::num(need) +
               ")",
           secs};
}

inline CriterionResult interactive_success()
{
   const auto t0 = detail::Clock::now();
   const auto g = gridworld::game(10);
   const auto eq = solve_nash(g);
   std::vector<int> budgets;
   for (int k = 250; k <= 5000; k += 250) budgets.push_back(k);
   const double threshold = 0.05 * g.horizon();
   ExplorationConfig cfg;
   cfg.beta = detail::horizon_beta(g);
   bool all_reach = true;
   int relational_faster = 0;
   std::string detail = "K to gap<=" + detail::num(threshold) + " (tabular/relational):";
   for (auto seed : kSeeds) {
      int first[2] = {-1, -1};
      for (int rel = 0; rel < 2; ++rel) {
         const auto pts = interactive_sweep(g, eq.profile, detail::maps(g, rel == 1), cfg, {}, budgets, Rng(seed));
         for (const auto& p : pts)
            if (p.nash_gap <= threshold) {
               first[rel] = p.k;
               break;
            }
      }
      all_reach = all_reach && first[0] > 0 && first[1] > 0;
      relational_faster += first[1] > 0 && (first[0] < 0 || first[1] < first[0]);
      detail += " " + std::to_string(first[0]) + "/" + std::to_string(first[1]);
   }
   const double secs = detail::since(t0);
   return {3, "interactive success", all_reach && relational_faster >= 3 && secs <= 600.0,
           detail + " relational_faster=" + std::to_string(relational_faster) + "/4", secs};
}

inline CriterionResult probe_norm_decay()
{
   const auto t0 = detail::Clock::now();
   const auto g = gridworld::game(10);
   const auto eq = solve_nash(g);
   bool ok = true;
   std::string detail = "slopes over K in [100, 5000]:";
   for (int rel = 0; rel < 2; ++rel)
      for (Player frozen : {Player::One, Player::Two}) {
         const Player ex = other(frozen);
         const auto f = rel ? relational_features(g, ex) : tabular_features(g, ex);
         ExplorationConfig cfg;
         cfg.n_episodes = 5000;
         cfg.beta = detail::horizon_beta(g);
         cfg.checkpoints = log_checkpoints(cfg.n_episodes);
         const auto tr = lsvi_ucb_zero(g, eq.profile, frozen, f, cfg, Rng(kSeeds[0]));
         Rng rng(Rng::combine({kSeeds[0], 50}));
         std::vector<StagePolicy> probes;
         for (int i = 0; i < 50; ++i) probes.push_back(random_deterministic_policy(g, ex, rng));
         probes.push_back(frozen == Player::One ? eq.profile.second : eq.profile.first);
         const double slope = log_log_slope(probe_feature_norms(tr, g, eq.profile, probes, f), 100, 5000);
         ok = ok && slope >= -0.65 && slope <= -0.35;
         detail += std::string(" ") + (rel ? "relational" : "tabular") + "/frozen" + to_string(frozen) + "=" +
                   detail::num(slope, 3);
      }
   return {4, "probe feature-norm decay", ok, detail, detail::since(t0)};
}

inline CriterionResult chain_exploration()
{
   const auto t0 = detail::Clock::now();
   const auto g = chain::game(8);
   const auto eq = solve_nash(g);
   const auto f = tabular_features(g, Player::One);
   ExplorationConfig cfg;
   cfg.n_episodes = 100000;
   cfg.watch_state = chain::end_state(g);
   cfg.stop_on_watch = true;
   cfg.beta = detail::horizon_beta(g);
   double mean = 0.0;
   std::vector<int> lsvi;
   bool all_found = true;
   for (int s = 0; s < 200; ++s) {
      const auto u = uniform_explore(g, eq.profile, Player::Two, f, cfg, Rng(static_cast<std::uint64_t>(s)));
      const auto l = lsvi_ucb_zero(g, eq.profile, Player::Two, f, cfg, Rng(static_cast<std::uint64_t>(s)));
      all_found = all_found && u.first_watch_visit > 0 && l.first_watch_visit > 0;
      mean += u.first_watch_visit / 200.0;
      lsvi.push_back(l.first_watch_visit);
   }
   std::nth_element(lsvi.begin(), lsvi.begin() + 100, lsvi.end());
   const int median_hi = lsvi[100];
   std::nth_element(lsvi.begin(), lsvi.begin() + 99, lsvi.end());
   const double median = 0.5 * (lsvi[99] + median_hi);
   return {5, "chain first passage", all_found && std::abs(mean - 128.0) <= 0.2 * 128.0 && median <= 64.0,
           "uniform_mean=" + detail::num(mean) + " lsvi_median=" + detail::num(median), detail::since(t0)};
}

inline CriterionResult tictactoe_expert()
{
   namespace ttt = tictactoe;
   const auto t0 = detail::Clock::now();
   ttt::MinimaxExpert expert;
   const std::size_t table = expert.table().size();
   auto play = [&](int expert_mark, Rng* rng) {
      ttt::Board b{};
      while (!ttt::is_over(b)) {
         const auto m = ttt::mover(b);
         int cell;
         if (!rng || m == expert_mark) {
            cell = expert.move(b);
         } else {
            std::vector<int> empty;
            for (int i = 0; i < ttt::kCells; ++i)
               if (b[i] == ttt::Empty) empty.push_back(i);
            cell = empty[rng->uniform_int(static_cast<int>(empty.size()))];
         }
         b[cell] = m;
      }
      if (ttt::wins(b, ttt::X)) return ttt::X;
      if (ttt::wins(b, ttt::O)) return ttt::O;
      return ttt::Empty;
   };
   const bool self_draw = play(ttt::X, nullptr) == ttt::Empty;
   int losses = 0, games = 0;
   for (int i = 0; i < 10000; ++i) {
      Rng rng(Rng::combine({0x777, static_cast<std::uint64_t>(i)}));
      const int mark = i % 2 == 0 ? ttt::X : ttt::O;
      const int result = play(mark, &rng);
      losses += result != ttt::Empty && result != mark;
      ++games;
   }
   const double secs = detail::since(t0);
   return {6, "tic-tac-toe expert", table == 765 && self_draw && losses == 0 && secs <= 30.0,
           "table=" + std::to_string(table) + " self_play=" + (self_draw ? "draw" : "decisive") +
               " losses=" + std::to_string(losses) + "/" + std::to_string(games),
           secs};
}

inline CriterionResult constant_concentrability()
{
   const auto t0 = detail::Clock::now();
   const auto g = gridworld::game(10);
   const auto eq = solve_nash(g);
   Rng rng(31);
   std::vector<StagePolicy> devs = best_response_deviations(g, Player::One, 5, rng);
   for (auto& d : best_response_deviations(g, Player::Two, 5, rng)) devs.push_back(std::move(d));
   for (int i = 0; i < 5; ++i) {
      devs.push_back(random_deterministic_policy(g, Player::One, rng));
      devs.push_back(random_deterministic_policy(g, Player::Two, rng));
   }
   double worst = 0.0;
   for (double c : {0.1, 0.5, 1.0}) {
      const auto rep = concentrability_estimate(g, eq.profile, constant_features(g, Player::One, c),
                                                constant_features(g, Player::Two, c), devs, 0.0);
      worst = std::max(worst, std::abs(rep.value - 1.0));
   }
   return {7, "constant-feature concentrability", worst <= 1e-9, "max |C - 1|=" + detail::num(worst),
           detail::since(t0)};
}

inline CriterionResult oracle_suites()
{
   using namespace random_instances;
   const auto t0 = detail::Clock::now();
   // (a) best response against enumeration.
   double br_err = 0.0;
   for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng pick(seed);
      const int s = 1 + pick.uniform_int(3);
      const int n1 = 1 + pick.uniform_int(2), n2 = 1 + pick.uniform_int(2);
      const int h = 1 + pick.uniform_int(3);
      const auto g = random_game(seed, s, n1, n2, h);
      for (Player n : {Player::One, Player::Two}) {
         const auto opp = random_policy(seed + 1000, g, other(n));
         double best = -std::numeric_limits<double>::infinity();
         for_each_deterministic_policy(g, n, [&](const StagePolicy& pol) {
            const double v = n == Player::One ? evaluate(g, pol, opp, n).initial_value(g)
                                              : evaluate(g, opp, pol, n).initial_value(g);
            best = std::max(best, v);
         });
         br_err = std::max(br_err, std::abs(best_response(g, opp, n).values.initial_value(g) - best));
      }
   }
   // (b) BC gradient against central differences.
   double grad_err = 0.0;
   for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = random_game(seed, 3, 3, 2, 2);
      const auto f = random_features(g, Player::One, 4, seed + 100);
      const auto d = sample_expert_dataset(
          g, {random_policy(seed, g, Player::One), random_policy(seed, g, Player::Two)}, 30, Rng(seed));
      SoftLinPolicy pol(f, 2, 1.7, 100.0);
      Rng rng(seed + 7);
      for (int h = 0; h < 2; ++h) {
         Vector t(4);
         for (int k = 0; k < 4; ++k) t(k) = 2.0 * rng.uniform() - 1.0;
         pol.set_theta(h, t);
      }
      const auto grad = grad_log_likelihood(pol, d);
      for (int h = 0; h < 2; ++h) {
         Vector fd(4);
         for (int k = 0; k < 4; ++k) {
            SoftLinPolicy plus = pol, minus = pol;
            Vector tp = pol.theta(h), tm = pol.theta(h);
            tp(k) += 1e-5;
            tm(k) -= 1e-5;
            plus.set_theta(h, tp);
            minus.set_theta(h, tm);
            fd(k) = (log_likelihood(plus, d) - log_likelihood(minus, d)) / 2e-5;
         }
         grad_err = std::max(grad_err, (fd - grad[h]).norm() / std::max(1e-12, grad[h].norm()));
      }
   }
   // (c) matrix game saddle residual.
   double saddle = 0.0;
   Rng mrng(2024);
   for (int t = 0; t < 1000; ++t) {
      const int m = 1 + mrng.uniform_int(8), n = 1 + mrng.uniform_int(8);
      Matrix a(m, n);
      for (int i = 0; i < m; ++i)
         for (int j = 0; j < n; ++j) a(i, j) = 4.0 * mrng.uniform() - 2.0;
      saddle = std::max(saddle, saddle_residual(a, matrix_maximin(a)));
   }
   // (d) mixed expert at the first stage, deviation on one of its actions:
   // squared tabular coefficient equals the occupancy ratio.
   MarkovGame::Builder b(2, {2, 2}, 2);
   for (int x = 0; x < 2; ++x)
      for (int i = 0; i < 2; ++i)
         for (int j = 0; j < 2; ++j) {
            b.deterministic(x, i, j, i == 0 ? x : 1 - x);
            b.reward(x, i, j, x == 1 ? 0.5 : 0.0);
         }
   b.initial_state(0);
   const auto g2 = b.build();
   StagePolicy e1 = StagePolicy::deterministic(g2, Player::One, [](int, int) { return 0; });
   e1.dist(0, 0) << 0.25, 0.75;
   const PolicyProfile expert{e1, StagePolicy::deterministic(g2, Player::Two, [](int, int) { return 0; })};
   const auto dev = StagePolicy::deterministic(g2, Player::One, [](int, int) { return 0; });
   const double c_phi = concentrability_estimate(g2, expert, tabular_features(g2, Player::One),
                                                 tabular_features(g2, Player::Two), {dev}, 0.0)
                            .value;
   const double ratio = occupancy_ratio_concentrability(g2, expert, {dev});
   const double conc_err = std::abs(c_phi * c_phi - ratio) + std::abs(ratio - 4.0);
   const bool ok = br_err <= 1e-10 && grad_err <= 1e-5 && saddle <= 1e-8 && conc_err <= 1e-9;
   return {8, "oracle suites", ok,
           "(a) br_err=" + detail::num(br_err) + " (b) grad_rel_err=" + detail::num(grad_err) +
               " (c) saddle=" + detail::num(saddle) + " (d) C^2=" + detail::num(c_phi * c_phi) + " ratio=" + detail::num(ratio) + " err=" + detail::num(conc_err),
           detail::since(t0)};
}

inline std::string read_file(const std::filesystem::path& p)
{
   std::ifstream in(p, std::ios::binary);
   std::ostringstream s;
   s << in.rdbuf();
   return s.str();
}

inline CriterionResult determinism(const Options& opts)
{
   const auto t0 = detail::Clock::now();
   if (opts.default_config.empty() || !std::filesystem::exists(opts.default_config))
      return {9, "determinism", false, "default config not found: " + opts.default_config.string(), 0.0};
   std::string csv[2];
   std::string how;
   if (!opts.mail_lab.empty()) {
      how = "two CLI runs";
      const auto base = opts.scratch.empty() ? std::filesystem::temp_directory_path() / "mail-lab-determinism"
                                             : opts.scratch;
      for (int i = 0; i < 2; ++i) {
         const auto dir = base / ("run" + std::to_string(i));
         std::filesystem::remove_all(dir);
         const std::string cmd = "\"" + opts.mail_lab.string() + "\" run --config \"" + opts.default_config.string() +
                                 "\" --out \"" + dir.string() + "\" > /dev/null 2>&1";
         const int rc = std::system(cmd.c_str());
         if (rc != 0) return {9, "determinism", false, "mail-lab run failed: " + cmd, detail::since(t0)};
         csv[i] = read_file(dir / "results.csv");
      }
   } else {
      how = "two in-process runs";
      const auto cfg = load_config(opts.default_config);
      for (auto& c : csv) {
         std::ostringstream os;
         emit_csv(run(cfg), os);
         c = os.str();
      }
   }
   const bool same = !csv[0].empty() && csv[0] == csv[1];
   return {9, "determinism", same, how + (same ? ": identical " : ": differ ") + std::to_string(csv[0].size()) + " bytes",
           detail::since(t0)};
}

inline std::vector<std::function<CriterionResult()>> battery(const Options& opts)
{
   return {equilibrium_exactness, bc_failure_tabular, interactive_success, probe_norm_decay, chain_exploration,
           tictactoe_expert,      constant_concentrability, oracle_suites, [opts] { return determinism(opts); }};
}

inline std::string format(const CriterionResult& r)
{
   char secs[32];
   std::snprintf(secs, sizeof secs, "%.1f s", r.seconds);
   return std::string(r.passed ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " (" + r.name +
          "): " + r.detail + " [" + secs + "]";
}

/// Runs every criterion, printing one line each as it finishes. Returns the
/// number of failures.
inline int run_battery(const Options& opts, std::ostream& os)
{
   int failed = 0;
   for (const auto& c : battery(opts)) {
      CriterionResult r;
      try {
         r = c();
      } catch (const std::exception& e) {
         r.passed = false;
         r.detail = std::string("error: ") + e.what();
      }
      failed += !r.passed;
      os << format(r) << std::endl;
   }
   return failed;
}

}  // namespace mail::acceptance
