#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mail/core/rng.hpp"
#include "mail/features/feature_map.hpp"
#include "mail/game/analysis.hpp"

namespace mail {

/// Per-stage ridge covariance Lambda_h = sum phi phi^T + lambda I.
struct CovarianceState {
   double lambda_ridge = 0.0;
   std::vector<Matrix> matrices;
   std::vector<long> count;

   CovarianceState() = default;
   CovarianceState(int horizon, int dim, double lambda)
       : lambda_ridge(lambda), matrices(static_cast<std::size_t>(horizon), lambda * Matrix::Identity(dim, dim)),
         count(static_cast<std::size_t>(horizon), 0)
   {
      if (!(lambda >= 0.0)) throw ArgumentError("CovarianceState: lambda must be nonnegative");
   }

   int horizon() const noexcept { return static_cast<int>(matrices.size()); }
   int dim() const noexcept { return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows()); }

   void update(int h, const FeatureMap& f, int x, int a)
   {
      f.add_outer(1.0, x, a, matrices[h]);
      ++count[h];
   }
   void update(int h, const Vector& u)
   {
      matrices[h].noalias() += u * u.transpose();
      ++count[h];
   }

   double logdet(int h) const { return Eigen::LDLT<Matrix>(matrices[h]).vectorD().array().log().sum(); }
};

using FeatureExpectation = std::vector<Vector>;  // [h], one d-vector per stage

namespace detail {

inline std::pair<const StagePolicy&, const StagePolicy&> order_pair(const StagePolicy& own, const StagePolicy& opp)
{
   if (own.player() == Player::One) return {own, opp};
   return {opp, own};
}

}  // namespace detail

/// phi_h = sum_{x, a} phi(x, a) pi_h(a | x) nu_h(x) under (deviation, opponent).
inline FeatureExpectation feature_expectation(const MarkovGame& g, const StagePolicy& deviation,
                                              const StagePolicy& opponent, const FeatureMap& f)
{
   if (deviation.player() != f.player() || opponent.player() != other(f.player()))
      throw DimensionError("feature_expectation: policies do not match the feature map's player");
   f.check_game(g);
   const auto [p1, p2] = detail::order_pair(deviation, opponent);
   const auto occ = occupancy(g, p1, p2);
   FeatureExpectation out(static_cast<std::size_t>(g.horizon()), Vector::Zero(f.dim()));
   for (int h = 0; h < g.horizon(); ++h)
      for (int x = 0; x < g.n_states(); ++x) {
         const double nu = occ.state_occ[h](x);
         if (nu == 0.0) continue;
         for (int a = 0; a < f.n_actions(); ++a)
            if (const double w = nu * deviation.prob(h, x, a); w != 0.0) f.axpy(w, x, a, out[h]);
      }
   return out;
}

/// Exact expert covariance for the feature map's player via occupancy.
inline CovarianceState expert_covariance(const MarkovGame& g, const PolicyProfile& expert, const FeatureMap& f,
                                         double lambda)
{
   f.check_game(g);
   const auto occ = occupancy(g, expert.first, expert.second);
   const StagePolicy& own = f.player() == Player::One ? expert.first : expert.second;
   CovarianceState cov(g.horizon(), f.dim(), lambda);
   for (int h = 0; h < g.horizon(); ++h)
      for (int x = 0; x < g.n_states(); ++x) {
         const double nu = occ.state_occ[h](x);
         if (nu == 0.0) continue;
         for (int a = 0; a < f.n_actions(); ++a)
            if (const double w = nu * own.prob(h, x, a); w != 0.0) f.add_outer(w, x, a, cov.matrices[h]);
      }
   return cov;
}

/// sqrt(v^T Lambda^{-1} v) by a linear solve. Cholesky when Lambda carries a
/// ridge; otherwise column-pivoted QR, and v outside the range of Lambda is
/// reported as a SingularityError for `stage`.
inline double weighted_norm(const Vector& v, const Matrix& lambda_matrix, bool ridge, int stage = -1)
{
   if (v.size() != lambda_matrix.rows() || lambda_matrix.rows() != lambda_matrix.cols())
      throw DimensionError("weighted_norm: dimension mismatch");
   if (ridge) {
      Eigen::LLT<Matrix> llt(lambda_matrix);
      if (llt.info() == Eigen::Success) return std::sqrt(std::max(0.0, v.dot(llt.solve(v))));
   }
   Eigen::ColPivHouseholderQR<Matrix> qr(lambda_matrix);
   const Vector z = qr.solve(v);
   const double scale = std::max(1.0, v.norm()) * std::max(1.0, lambda_matrix.cwiseAbs().maxCoeff());
   if ((lambda_matrix * z - v).norm() > 1e-9 * scale || !z.allFinite())
      throw SingularityError("weighted_norm: vector outside the range of the covariance at stage " +
                                 std::to_string(stage + 1),
                             stage);
   return std::sqrt(std::max(0.0, v.dot(z)));
}

inline double weighted_norm(const Vector& v, const CovarianceState& cov, int h)
{
   return weighted_norm(v, cov.matrices[h], cov.lambda_ridge > 0.0, h);
}

struct ConcentrabilityReport {
   double value = 0.0;  // lower bound on the feature concentrability
   Player player = Player::One;
   int stage = 0;
   int deviation = 0;  // index into the deviation set
};

/// Max over players, stages, and the supplied deviations of the expert-weighted
/// feature-expectation norm. The true coefficient maximizes over every best
/// response to every soft-linear opponent, so this is a lower bound.
inline ConcentrabilityReport concentrability_estimate(const MarkovGame& g, const PolicyProfile& expert,
                                                      const FeatureMap& f1, const FeatureMap& f2,
                                                      const std::vector<StagePolicy>& deviations, double lambda)
{
   if (deviations.empty()) throw ArgumentError("concentrability_estimate: empty deviation set");
   if (f1.player() != Player::One || f2.player() != Player::Two)
      throw DimensionError("concentrability_estimate: feature maps must be ordered (player 1, player 2)");
   const CovarianceState cov[2] = {expert_covariance(g, expert, f1, lambda), expert_covariance(g, expert, f2, lambda)};
   ConcentrabilityReport best;
   best.value = -1.0;
   for (std::size_t k = 0; k < deviations.size(); ++k) {
      const StagePolicy& dev = deviations[k];
      const int n = index_of(dev.player());
      const FeatureMap& f = n == 0 ? f1 : f2;
      const auto phi = feature_expectation(g, dev, own_and_opponent(expert, dev.player()).second, f);
      for (int h = 0; h < g.horizon(); ++h) {
         const double v = weighted_norm(phi[h], cov[n], h);
         if (v > best.value) best = {v, dev.player(), h, static_cast<int>(k)};
      }
   }
   return best;
}

/// State-level analogue: max over players, stages, deviations of
/// ||nu_h^{dev, expert} / nu_h^{expert}||_inf (infinite off the expert's support).
inline double occupancy_ratio_concentrability(const MarkovGame& g, const PolicyProfile& expert,
                                              const std::vector<StagePolicy>& deviations)
{
   if (deviations.empty()) throw ArgumentError("occupancy_ratio_concentrability: empty deviation set");
   const auto base = occupancy(g, expert.first, expert.second);
   double best = 0.0;
   for (const auto& dev : deviations) {
      const auto& opp = own_and_opponent(expert, dev.player()).second;
      const auto [p1, p2] = detail::order_pair(dev, opp);
      const auto occ = occupancy(g, p1, p2);
      for (int h = 0; h < g.horizon(); ++h)
         for (int x = 0; x < g.n_states(); ++x) {
            const double num = occ.state_occ[h](x);
            if (num == 0.0) continue;
            const double den = base.state_occ[h](x);
            best = std::max(best, den == 0.0 ? std::numeric_limits<double>::infinity() : num / den);
         }
   }
   return best;
}

/// Uniformly random deterministic nonstationary policy.
inline StagePolicy random_deterministic_policy(const MarkovGame& g, Player p, Rng& rng)
{
   StagePolicy pol(p, g.horizon(), g.n_states(), g.n_actions(p));
   for (int h = 0; h < g.horizon(); ++h)
      for (int x = 0; x < g.n_states(); ++x) pol.set_action(h, x, rng.uniform_int(g.n_actions(p)));
   return pol;
}

/// Deviation set made of best responses of `player` to random deterministic
/// opponents.
inline std::vector<StagePolicy> best_response_deviations(const MarkovGame& g, Player player, int count, Rng& rng)
{
   std::vector<StagePolicy> out;
   out.reserve(static_cast<std::size_t>(count));
   for (int i = 0; i < count; ++i)
      out.push_back(best_response(g, random_deterministic_policy(g, other(player), rng), player).policy);
   return out;
}

}  // namespace mail
