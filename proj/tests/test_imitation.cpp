#include <gtest/gtest.h>

#include <sstream>

#include "mail/envs/gridworld.hpp"
#include "mail/equilibrium/nash.hpp"
#include "mail/imitation/bc.hpp"
#include "test_util.hpp"

using namespace mail;
using mail::testing::random_game;
using mail::testing::random_features;
using mail::testing::random_policy;

namespace {

MarkovGame one_state_game(int actions)
{
   MarkovGame::Builder b(1, {actions, 1}, 1);
   for (int a = 0; a < actions; ++a) b.deterministic(0, a, 0, 0);
   b.initial_state(0);
   return b.build();
}

PolicyProfile with_player(const MarkovGame& g, const StagePolicy& pol)
{
   if (pol.player() == Player::One) return {pol, StagePolicy::uniform(g, Player::Two)};
   return {StagePolicy::uniform(g, Player::One), pol};
}

// Expected TV between two policies of player p under the occupancy of (p, uniform).
double weighted_tv(const MarkovGame& g, const StagePolicy& gen, const StagePolicy& fit)
{
   const auto prof = with_player(g, gen);
   return expected_tv(occupancy(g, prof.first, prof.second), gen, fit).total();
}

}  // namespace

TEST(ExpertDataset, EmptyAndDeterministic)
{
   const auto g = gridworld::game();
   const auto eq = solve_nash(g);
   EXPECT_EQ(sample_expert_dataset(g, eq.profile, 0, Rng(1)).size(), 0u);
   const auto det = PolicyProfile{StagePolicy::deterministic(g, Player::One, [](int, int) { return 1; }),
                                  StagePolicy::deterministic(g, Player::Two, [](int, int) { return 2; })};
   const auto d = sample_expert_dataset(g, det, 5, Rng(2));
   ASSERT_EQ(d.size(), 5u * g.horizon());
   for (const auto& s : d.samples) {
      const auto& ref = d.samples[s.h];
      EXPECT_EQ(s.state, ref.state);
      EXPECT_EQ(s.a1, ref.a1);
      EXPECT_EQ(s.a2, ref.a2);
   }
   EXPECT_THROW(sample_expert_dataset(g, det, -1, Rng(2)), ArgumentError);
}

TEST(ExpertDataset, StageOneFrequencies)
{
   const auto g = random_game(4, 4, 2, 2, 2);
   const auto prof = PolicyProfile{random_policy(1, g, Player::One), random_policy(1, g, Player::Two)};
   const int n = 10000;
   const auto d = sample_expert_dataset(g, prof, n, Rng(9));
   std::vector<double> freq(4, 0.0);
   for (const auto& s : d.samples)
      if (s.h == 0) freq[s.state] += 1.0;
   for (int x = 0; x < 4; ++x) {
      const double p = g.initial()(x);
      EXPECT_LE(std::abs(freq[x] / n - p), 3.0 * std::sqrt(p * (1 - p) / n));
   }
   // Gridworld start is deterministic.
   const auto gg = gridworld::game();
   for (const auto& s : sample_expert_dataset(gg, solve_nash(gg).profile, 100, Rng(3)).samples)
      if (s.h == 0) EXPECT_EQ(s.state, gridworld::start_state());
}

TEST(ExpertDataset, CsvRoundTrip)
{
   const auto g = random_game(4, 3, 2, 3, 3);
   const auto d = sample_expert_dataset(g, {random_policy(1, g, Player::One), random_policy(1, g, Player::Two)}, 7, Rng(5));
   std::stringstream ss;
   write_csv(d, ss);
   const auto text = ss.str();
   EXPECT_EQ(text.substr(0, text.find('\n')), "traj_id,h,state,a1,a2");
   const auto back = read_csv(ss);
   ASSERT_EQ(back.size(), d.size());
   EXPECT_EQ(back.n_trajectories, 7);
   EXPECT_EQ(back.horizon, 3);
   for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_EQ(back.samples[i].h, d.samples[i].h);
      EXPECT_EQ(back.samples[i].state, d.samples[i].state);
      EXPECT_EQ(back.samples[i].a2, d.samples[i].a2);
   }
   std::stringstream bad("traj_id,h,state,a1,a2\n0,0,1,1,1\n");
   EXPECT_THROW(read_csv(bad), DecodeError);
   std::stringstream nohdr("0,1,1,1,1\n");
   EXPECT_THROW(read_csv(nohdr), DecodeError);
}

TEST(SoftLin, ZeroThetaIsUniformAndNormalized)
{
   const auto g = random_game(1, 3, 4, 2, 2);
   const auto f = random_features(g, Player::One, 5, 1);
   SoftLinPolicy pol(f, 2, 3.0, 10.0);
   for (int x = 0; x < 3; ++x)
      for (int a = 0; a < 4; ++a) EXPECT_NEAR(pol.dist(0, x)(a), 0.25, 1e-15);
   Vector t(5);
   t << 3, -2, 1, 0.5, 4;
   pol.set_theta(1, t);
   for (int x = 0; x < 3; ++x) EXPECT_NEAR(pol.dist(1, x).sum(), 1.0, 1e-12);
   EXPECT_THROW(SoftLinPolicy(f, 2, 0.0, 1.0), ArgumentError);
}

TEST(SoftLin, EmptyDatasetHasZeroLikelihoodAndGradient)
{
   const auto g = random_game(1, 3, 4, 2, 2);
   SoftLinPolicy pol(random_features(g, Player::One, 5, 1), 2, 1.0, 10.0);
   ExpertDataset d;
   EXPECT_EQ(log_likelihood(pol, d), 0.0);
   for (const auto& v : grad_log_likelihood(pol, d)) EXPECT_EQ(v.norm(), 0.0);
}

TEST(SoftLin, GradientMatchesCentralDifferences)
{
   for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = random_game(seed, 3, 3, 2, 2);
      const auto f = random_features(g, Player::One, 4, seed + 100);
      const auto d = sample_expert_dataset(g, {random_policy(seed, g, Player::One), random_policy(seed, g, Player::Two)},
                                           30, Rng(seed));
      SoftLinPolicy pol(f, 2, 1.7, 100.0);
      Rng rng(seed + 7);
      for (int h = 0; h < 2; ++h) {
         Vector t(4);
         for (int k = 0; k < 4; ++k) t(k) = 2.0 * rng.uniform() - 1.0;
         pol.set_theta(h, t);
      }
      const auto grad = grad_log_likelihood(pol, d);
      const double eps = 1e-5;
      for (int h = 0; h < 2; ++h) {
         Vector fd(4);
         for (int k = 0; k < 4; ++k) {
            SoftLinPolicy plus = pol, minus = pol;
            Vector tp = pol.theta(h), tm = pol.theta(h);
            tp(k) += eps;
            tm(k) -= eps;
            plus.set_theta(h, tp);
            minus.set_theta(h, tm);
            fd(k) = (log_likelihood(plus, d) - log_likelihood(minus, d)) / (2 * eps);
         }
         EXPECT_LE((fd - grad[h]).norm() / std::max(1e-12, grad[h].norm()), 1e-5) << "seed " << seed;
      }
   }
}

TEST(BcFit, MultinomialClosedForm)
{
   const auto g = one_state_game(2);
   ExpertDataset d;
   d.n_trajectories = 10;
   for (int i = 0; i < 10; ++i) d.samples.push_back({i, 0, 0, i < 7 ? 0 : 1, 0});
   auto f = std::make_shared<const FeatureMap>(tabular_features(g, Player::One));
   BcConfig cfg;
   cfg.eta = 1.0;
   cfg.b_theta = 1e3;
   const auto fit = bc_fit(d, f, 1, cfg);
   const Vector p = fit.policy.dist(0, 0);
   EXPECT_NEAR(p(0), 0.7, 1e-3);
   EXPECT_NEAR(p(1), 0.3, 1e-3);
   EXPECT_GE(fit.loglik, fit.loglik_at_zero);
}

TEST(BcFit, ProjectionAndMonotoneOnSeparableData)
{
   const auto g = gridworld::game();
   const auto eq = solve_nash(g);
   const auto d = sample_expert_dataset(g, eq.profile, 50, Rng(1));
   auto f = std::make_shared<const FeatureMap>(tabular_features(g, Player::One));
   BcConfig cfg;
   cfg.b_theta = 3.0;
   const auto fit = bc_fit(d, f, g.horizon(), cfg);
   for (int h = 0; h < g.horizon(); ++h) EXPECT_LE(fit.policy.theta(h).norm(), 3.0 + 1e-9);
   EXPECT_GE(fit.loglik, fit.loglik_at_zero);
}

TEST(BcFit, ConcaveObjectiveConvergesFromAnyStart)
{
   const auto g = random_game(3, 3, 3, 2, 2);
   const auto gen = random_policy(3, g, Player::One);
   const auto d = sample_expert_dataset(g, with_player(g, gen), 200, Rng(4));
   auto f = std::make_shared<const FeatureMap>(tabular_features(g, Player::One));
   BcConfig cfg;
   cfg.eta = 1.0;
   cfg.b_theta = 50.0;
   cfg.max_epochs = 20000;
   cfg.grad_tolerance = 1e-10;
   const auto a = bc_fit(d, f, 2, cfg);
   Rng rng(5);
   std::vector<Vector> start(2, Vector(f->dim()));
   for (auto& v : start)
      for (int k = 0; k < v.size(); ++k) v(k) = 4.0 * rng.uniform() - 2.0;
   const auto b = bc_fit(d, f, 2, cfg, &start);
   EXPECT_NEAR(a.loglik, b.loglik, 1e-6);
}

TEST(BcFit, ConsistencyWithDataSize)
{
   const auto g = random_game(11, 3, 3, 2, 3);
   const auto f = random_features(g, Player::One, 4, 12);
   SoftLinPolicy gen(f, 3, 1.0, 100.0);
   Rng rng(13);
   for (int h = 0; h < 3; ++h) {
      Vector t(4);
      for (int k = 0; k < 4; ++k) t(k) = 6.0 * rng.uniform() - 3.0;
      gen.set_theta(h, t);
   }
   const auto gen_pol = gen.to_stage_policy();
   BcConfig cfg;
   cfg.eta = 1.0;
   cfg.b_theta = 100.0;
   double tv_small = 0.0, tv_large = 0.0;
   for (std::uint64_t s = 0; s < 4; ++s) {
      const auto small = sample_expert_dataset(g, with_player(g, gen_pol), 34, Rng(s));    // ~10^2 samples
      const auto large = sample_expert_dataset(g, with_player(g, gen_pol), 3334, Rng(s));  // ~10^4 samples
      tv_small += weighted_tv(g, gen_pol, bc_fit(small, f, 3, cfg).policy.to_stage_policy());
      tv_large += weighted_tv(g, gen_pol, bc_fit(large, f, 3, cfg).policy.to_stage_policy());
   }
   EXPECT_LT(tv_large, tv_small);
   // The generator is nearly stationary for its own large sample.
   const auto big = sample_expert_dataset(g, with_player(g, gen_pol), 3334, Rng(99));
   const auto counts = aggregate(big, Player::One, 3, 3);
   const auto grad = grad_log_likelihood(gen, counts);
   for (int h = 0; h < 3; ++h) {
      double n_h = 0.0;
      for (const auto& r : counts.stages[h]) n_h += r.total;
      EXPECT_LE(grad[h].norm() / n_h, 0.05);
   }
}

TEST(BcFit, ErrorsOnMissingData)
{
   const auto g = one_state_game(2);
   auto f = std::make_shared<const FeatureMap>(tabular_features(g, Player::One));
   ExpertDataset d;
   EXPECT_THROW(bc_fit(d, f, 1, {}), ArgumentError);
   d.samples.push_back({0, 0, 0, 0, 0});
   d.labelled[0] = false;
   EXPECT_THROW(bc_fit(d, f, 1, {}), ArgumentError);
}

TEST(BcFit, GridworldTabularFitsDeterministicExpert)
{
   const auto g = gridworld::game();
   const auto eq = solve_nash(g);
   const auto d = sample_expert_dataset(g, eq.profile, 500, Rng(42));
   auto f = std::make_shared<const FeatureMap>(tabular_features(g, Player::One));
   BcConfig cfg;
   cfg.eta = BcConfig::default_eta(500, g.horizon());
   const auto fit = bc_fit(d, f, g.horizon(), cfg);
   EXPECT_LE(-fit.mean_loglik(), 0.01);
}

TEST(SoftLin, JsonRoundTrip)
{
   const auto g = random_game(1, 3, 4, 2, 2);
   const auto f = random_features(g, Player::One, 5, 1);
   SoftLinPolicy pol(f, 2, 0.7, 9.0);
   pol.set_theta(1, Vector::LinSpaced(5, -1.0, 1.0));
   const auto back = softlin_from_json(Json::parse(to_json(pol).dump()), f);
   EXPECT_EQ(back.eta(), 0.7);
   EXPECT_EQ(back.b_theta(), 9.0);
   EXPECT_EQ(back.theta(1), pol.theta(1));
}
