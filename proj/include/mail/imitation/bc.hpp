#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mail/features/feature_map.hpp"
#include "mail/game/io.hpp"
#include "mail/imitation/dataset.hpp"

namespace mail {

/// pi_h(a | x) proportional to exp(eta * phi(x, a)^T theta_h), ||theta_h|| <= b_theta.
class SoftLinPolicy {
  public:
   SoftLinPolicy(std::shared_ptr<const FeatureMap> fmap, int horizon, double eta, double b_theta)
       : fmap_(std::move(fmap)), eta_(eta), b_theta_(b_theta),
         theta_(static_cast<std::size_t>(horizon), Vector::Zero(fmap_->dim()))
   {
      if (!(eta > 0.0) || !std::isfinite(eta)) throw ArgumentError("SoftLinPolicy: eta must be positive");
      if (!(b_theta > 0.0)) throw ArgumentError("SoftLinPolicy: b_theta must be positive");
   }

   Player player() const noexcept { return fmap_->player(); }
   int horizon() const noexcept { return static_cast<int>(theta_.size()); }
   double eta() const noexcept { return eta_; }
   double b_theta() const noexcept { return b_theta_; }
   const FeatureMap& features() const noexcept { return *fmap_; }
   std::shared_ptr<const FeatureMap> shared_features() const noexcept { return fmap_; }
   const Vector& theta(int h) const { return theta_[h]; }
   void set_theta(int h, Vector t)
   {
      if (t.size() != fmap_->dim()) throw DimensionError("SoftLinPolicy: theta dimension");
      theta_[h] = std::move(t);
   }

   // Logits eta * phi^T theta for every own action.
   Vector logits(int h, int x, const Vector& theta) const
   {
      Vector z(fmap_->n_actions());
      for (int a = 0; a < z.size(); ++a) z(a) = eta_ * fmap_->dot(x, a, theta);
      return z;
   }

   Vector dist(int h, int x) const { return softmax(logits(h, x, theta_[h])); }

   StagePolicy to_stage_policy() const
   {
      StagePolicy p(player(), horizon(), fmap_->n_states(), fmap_->n_actions());
      for (int h = 0; h < horizon(); ++h)
         for (int x = 0; x < fmap_->n_states(); ++x) p.dist(h, x) = dist(h, x).transpose();
      return p;
   }

   static Vector softmax(const Vector& z)
   {
      const Vector e = (z.array() - z.maxCoeff()).exp();
      return e / e.sum();
   }
   static double log_sum_exp(const Vector& z)
   {
      const double m = z.maxCoeff();
      return m + std::log((z.array() - m).exp().sum());
   }

  private:
   std::shared_ptr<const FeatureMap> fmap_;
   double eta_;
   double b_theta_;
   std::vector<Vector> theta_;
};

namespace detail {

// Sum over the stage's rows of sum_a c_a log pi(a | x) at theta, and its gradient.
inline double stage_loglik(const SoftLinPolicy& pol, const std::vector<StageCounts::Row>& rows, int h,
                           const Vector& theta, Vector* grad)
{
   const FeatureMap& f = pol.features();
   double ll = 0.0;
   if (grad) grad->setZero(f.dim());
   for (const auto& r : rows) {
      const Vector z = pol.logits(h, r.state, theta);
      const double lse = SoftLinPolicy::log_sum_exp(z);
      for (int a = 0; a < z.size(); ++a)
         if (r.counts[a] != 0.0) ll += r.counts[a] * (z(a) - lse);
      if (grad) {
         const Vector p = SoftLinPolicy::softmax(z);
         for (int a = 0; a < z.size(); ++a) {
            const double w = pol.eta() * (r.counts[a] - r.total * p(a));
            if (w != 0.0) f.axpy(w, r.state, a, *grad);
         }
      }
   }
   return ll;
}

inline Vector project_ball(Vector v, double radius)
{
   const double n = v.norm();
   if (n > radius) v *= radius / n;
   return v;
}

}  // namespace detail

inline double log_likelihood(const SoftLinPolicy& pol, const StageCounts& data)
{
   double ll = 0.0;
   for (int h = 0; h < static_cast<int>(data.stages.size()) && h < pol.horizon(); ++h)
      ll += detail::stage_loglik(pol, data.stages[h], h, pol.theta(h), nullptr);
   return ll;
}

// Per stage eta * sum_i [phi(x_i, a_i) - E_{a ~ pi_h(.|x_i)} phi(x_i, a)].
inline std::vector<Vector> grad_log_likelihood(const SoftLinPolicy& pol, const StageCounts& data)
{
   std::vector<Vector> g(static_cast<std::size_t>(pol.horizon()), Vector::Zero(pol.features().dim()));
   for (int h = 0; h < static_cast<int>(data.stages.size()) && h < pol.horizon(); ++h)
      detail::stage_loglik(pol, data.stages[h], h, pol.theta(h), &g[h]);
   return g;
}

inline double log_likelihood(const SoftLinPolicy& pol, const ExpertDataset& d)
{
   return log_likelihood(pol, aggregate(d, pol.player(), pol.horizon(), pol.features().n_actions()));
}
inline std::vector<Vector> grad_log_likelihood(const SoftLinPolicy& pol, const ExpertDataset& d)
{
   return grad_log_likelihood(pol, aggregate(d, pol.player(), pol.horizon(), pol.features().n_actions()));
}

struct BcConfig {
   double eta = 0.0;      // <= 0: log(n) / H with n = tau_E or K
   double b_theta = 0.0;  // <= 0: H * sqrt(d)
   double step_size = 1.0;
   int max_epochs = 1000;
   double grad_tolerance = 1e-8;

   static double default_eta(int n_trajectories, int horizon)
   {
      return std::log(static_cast<double>(std::max(n_trajectories, 2))) / horizon;
   }
};

struct BcFit {
   SoftLinPolicy policy;
   double loglik = 0.0;          // sum over samples
   double loglik_at_zero = 0.0;  // theta = 0 baseline
   double n_samples = 0.0;
   std::vector<int> epochs;       // per stage
   std::vector<double> grad_norm; // final projected-gradient norm per stage (per sample)

   double mean_loglik() const { return n_samples > 0.0 ? loglik / n_samples : 0.0; }
};

/// Maximum likelihood over the soft-linear class by projected gradient ascent
/// on each stage separately. Armijo backtracking (c = 1e-4, halving) on the
/// per-sample objective; the accepted step doubles for the next epoch.
inline BcFit bc_fit(const ExpertDataset& data, std::shared_ptr<const FeatureMap> fmap, int horizon,
                    const BcConfig& cfg, const std::vector<Vector>* theta0 = nullptr)
{
   constexpr double kArmijo = 1e-4;
   const Player p = fmap->player();
   const auto counts = aggregate(data, p, horizon, fmap->n_actions());
   if (counts.n_samples == 0.0) throw ArgumentError("bc_fit: no samples for player " + to_string(p));
   const double eta = cfg.eta > 0.0 ? cfg.eta : BcConfig::default_eta(data.n_trajectories, horizon);
   const double radius = cfg.b_theta > 0.0 ? cfg.b_theta : horizon * std::sqrt(static_cast<double>(fmap->dim()));
   if (!(cfg.step_size > 0.0)) throw ArgumentError("bc_fit: step_size must be positive");
   BcFit fit{SoftLinPolicy(fmap, horizon, eta, radius), 0.0, 0.0, counts.n_samples, {}, {}};
   fit.epochs.assign(static_cast<std::size_t>(horizon), 0);
   fit.grad_norm.assign(static_cast<std::size_t>(horizon), 0.0);
   fit.loglik_at_zero = log_likelihood(fit.policy, counts);

   for (int h = 0; h < horizon; ++h) {
      const auto& rows = counts.stages[h];
      if (rows.empty()) continue;
      double n_h = 0.0;
      for (const auto& r : rows) n_h += r.total;
      Vector theta = theta0 ? detail::project_ball((*theta0)[h], radius) : Vector::Zero(fmap->dim());
      Vector grad;
      double f = detail::stage_loglik(fit.policy, rows, h, theta, &grad) / n_h;
      grad /= n_h;
      // Logit curvature grows like eta^2.
      double t = cfg.step_size / (eta * eta);
      int epoch = 0;
      double gnorm = 0.0;
      for (; epoch < cfg.max_epochs; ++epoch) {
         if (!std::isfinite(f)) throw NumericalError("bc_fit: non-finite loss at epoch " + std::to_string(epoch));
         gnorm = (detail::project_ball(theta + grad, radius) - theta).norm();
         if (gnorm <= cfg.grad_tolerance) break;
         bool accepted = false;
         Vector cand, cand_grad;
         double fc = 0.0;
         for (int tries = 0; tries < 60; ++tries, t *= 0.5) {
            cand = detail::project_ball(theta + t * grad, radius);
            fc = detail::stage_loglik(fit.policy, rows, h, cand, &cand_grad) / n_h;
            if (std::isfinite(fc) && fc >= f + kArmijo * grad.dot(cand - theta)) {
               accepted = true;
               break;
            }
         }
         if (!accepted) break;  // no ascent step left at machine precision
         if (fc < f) throw NumericalError("bc_fit: likelihood decreased at epoch " + std::to_string(epoch));
         theta = std::move(cand);
         grad = cand_grad / n_h;
         f = fc;
         t *= 2.0;
      }
      fit.epochs[h] = epoch;
      fit.grad_norm[h] = gnorm;
      fit.policy.set_theta(h, std::move(theta));
   }
   fit.loglik = log_likelihood(fit.policy, counts);
   return fit;
}

inline Json to_json(const SoftLinPolicy& p)
{
   Json theta = Json::array();
   for (int h = 0; h < p.horizon(); ++h)
      theta.push_back(std::vector<double>(p.theta(h).data(), p.theta(h).data() + p.theta(h).size()));
   return Json{{"player", static_cast<int>(p.player())},
               {"features", p.features().name()},
               {"eta", p.eta()},
               {"b_theta", p.b_theta()},
               {"theta", std::move(theta)}};
}

inline SoftLinPolicy softlin_from_json(const Json& j, std::shared_ptr<const FeatureMap> fmap)
{
   const auto theta = j.at("theta").get<std::vector<std::vector<double>>>();
   SoftLinPolicy p(std::move(fmap), static_cast<int>(theta.size()), j.at("eta").get<double>(),
                   j.at("b_theta").get<double>());
   for (int h = 0; h < p.horizon(); ++h) {
      if (static_cast<int>(theta[h].size()) != p.features().dim()) throw DecodeError("softlin: theta dimension");
      p.set_theta(h, Eigen::Map<const Vector>(theta[h].data(), static_cast<Eigen::Index>(theta[h].size())));
   }
   return p;
}

}  // namespace mail
