#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mail/core/rng.hpp"
#include "mail/features/covariance.hpp"
#include "mail/imitation/dataset.hpp"

namespace mail {

enum class LsviSolver { Auto, Gram, Refactor };

struct ExplorationConfig {
   int n_episodes = 1000;
   double beta = 0.0;  // <= 0: c_beta * d * H * ln(K d H / delta)
   double c_beta = 0.1;
   double delta = 0.05;
   double ridge = 1.0;
   LsviSolver solver = LsviSolver::Auto;
   int gram_limit = 2048;      // Auto uses the Gram form up to this many (state, action) pairs
   int refresh_every = 256;    // exact Gram rebuild period, in episodes
   std::vector<int> checkpoints;  // episode counts at which visit counts are snapshotted
   int watch_state = -1;          // record the first episode that visits this state
   bool stop_on_watch = false;
   bool record_policies = false;  // keep the greedy policy of every episode

   double resolved_beta(int dim, int horizon) const
   {
      if (beta > 0.0) return beta;
      const double arg = static_cast<double>(n_episodes) * dim * horizon / delta;
      return c_beta * dim * horizon * std::log(arg);
   }

   void validate() const
   {
      if (n_episodes < 1) throw ArgumentError("exploration: n_episodes must be at least 1");
      if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("exploration: delta must lie in (0, 1)");
      if (!(ridge > 0.0)) throw ArgumentError("exploration: ridge must be positive");
      if (beta <= 0.0 && !(c_beta > 0.0)) throw ArgumentError("exploration: beta or c_beta must be positive");
      if (refresh_every < 1) throw ArgumentError("exploration: refresh_every must be positive");
   }
};

// Log-spaced episode counts 1, 2, 5, 10, 20, 50, ... up to k_max (always included).
inline std::vector<int> log_checkpoints(int k_max)
{
   std::vector<int> out{0};
   for (long base = 1; base <= k_max; base *= 10)
      for (long m : {1L, 2L, 5L})
         if (base * m <= k_max) out.push_back(static_cast<int>(base * m));
   if (out.back() != k_max) out.push_back(k_max);
   return out;
}

/// Result of one exploration run for a fixed (frozen) player.
struct ExplorationTrace {
   Player frozen = Player::Two;
   Player explorer = Player::One;
   ExpertDataset dataset;
   CovarianceState covariances;  // Lambda_h after the last episode
   double beta = 0.0;
   int episodes = 0;
   long expert_queries = 0;
   int first_watch_visit = -1;  // 1-based episode, -1 if never
   // Visit counts of every (state, explorer action) pair per stage, taken
   // after snapshot_k[i] episodes; Lambda at a checkpoint is rebuilt from them.
   std::vector<int> snapshot_k;
   std::vector<std::vector<std::vector<int>>> snapshot_counts;  // [i][h][pair]
   std::vector<double> elliptical_potential;  // [h] sum_k ||phi_k||^2 in the pre-update metric
   std::vector<StagePolicy> policy_log;  // greedy policy used in episode k + 1, lowest-index ties
   double max_q = 0.0;
   double min_q = 0.0;
   std::string solver;

   // Lambda_h rebuilt from the visit counts of snapshot i.
   Matrix covariance_at(std::size_t i, int h, const FeatureMap& f) const
   {
      if (i >= snapshot_counts.size()) throw ArgumentError("ExplorationTrace: no covariance snapshot " + std::to_string(i));
      Matrix m = covariances.lambda_ridge * Matrix::Identity(f.dim(), f.dim());
      const auto& c = snapshot_counts[i][h];
      for (int p = 0; p < static_cast<int>(c.size()); ++p)
         if (c[p] > 0) f.add_outer(static_cast<double>(c[p]), p / f.n_actions(), p % f.n_actions(), m);
      return m;
   }
};

namespace detail {

// Ridge-regression state of one stage over all (state, action) pairs. In Gram
// form it keeps G = Phi Lambda^{-1} Phi^T, updated by Sherman-Morrison and
// rebuilt exactly from a Cholesky factor every refresh period; in refactor
// form it solves with a fresh Cholesky factor every time.
class StageRegression {
  public:
   StageRegression(const Matrix* phi, double ridge, bool gram)
       : phi_(phi), gram_(gram), lambda_(ridge * Matrix::Identity(phi->cols(), phi->cols()))
   {
      if (gram_) rebuild();
   }

   const Matrix& lambda() const noexcept { return lambda_; }

   // ||phi_p||^2 in the current metric.
   double norm_sq(int p) const
   {
      if (gram_) return gram_matrix_(p, p);
      Eigen::LLT<Matrix> llt(lambda_);
      const Vector v = phi_->row(p).transpose();
      return v.dot(llt.solve(v));
   }

   void update(int p)
   {
      const Vector v = phi_->row(p).transpose();
      lambda_.noalias() += v * v.transpose();
      if (gram_) {
         const Vector col = gram_matrix_.col(p);
         const double scale = 1.0 / (1.0 + col(p));
         nz_.clear();
         for (Eigen::Index i = 0; i < col.size(); ++i)
            if (col(i) != 0.0) nz_.push_back(static_cast<int>(i));
         if (2 * nz_.size() > static_cast<std::size_t>(col.size())) {
            gram_matrix_.noalias() -= (scale * col) * col.transpose();
         } else {
            for (int j : nz_) {
               const double cj = scale * col(j);
               for (int i : nz_) gram_matrix_(i, j) -= col(i) * cj;
            }
         }
      }
   }

   void rebuild()
   {
      Eigen::LLT<Matrix> llt(lambda_);
      if (llt.info() != Eigen::Success) throw NumericalError("lsvi: covariance lost positive definiteness");
      const Matrix m = llt.matrixL().solve(phi_->transpose());  // d x P
      gram_matrix_ = m.transpose() * m;
   }

   // Linear part phi_p^T w and bonus norm for every pair, given the
   // regression right-hand side y (per pair: sum of targets at that pair).
   void evaluate(const Vector& y, Vector& lin, Vector& norm) const
   {
      if (gram_) {
         lin.noalias() = gram_matrix_ * y;
         norm = gram_matrix_.diagonal().cwiseMax(0.0).cwiseSqrt();
         return;
      }
      Eigen::LLT<Matrix> llt(lambda_);
      if (llt.info() != Eigen::Success) throw NumericalError("lsvi: covariance lost positive definiteness");
      const Vector w = llt.solve(phi_->transpose() * y);
      lin.noalias() = *phi_ * w;
      const Matrix m = llt.matrixL().solve(phi_->transpose());
      norm = m.colwise().norm().transpose();
   }

  private:
   const Matrix* phi_;
   bool gram_;
   Matrix lambda_;
   Matrix gram_matrix_;
   std::vector<int> nz_;
};

struct Transition3 {
   int next;
   int count;
};

// Shared rollout and bookkeeping for the bonus-driven and uniform explorers.
class Explorer {
  public:
   Explorer(const MarkovGame& g, const PolicyProfile& expert, Player frozen, const FeatureMap& f,
            const ExplorationConfig& cfg, bool optimistic)
       : g_(g), f_(f), cfg_(cfg), frozen_(frozen), explorer_(other(frozen)), optimistic_(optimistic),
         expert_(frozen == Player::One ? expert.first : expert.second)
   {
      cfg.validate();
      if (f.player() != explorer_) throw DimensionError("exploration: feature map must belong to the exploring player");
      f.check_game(g);
      expert_.check_shape(g);
      H_ = g.horizon();
      S_ = g.n_states();
      A_ = g.n_actions(explorer_);
      P_ = S_ * A_;
      phi_ = Matrix::Zero(P_, f.dim());
      for (int x = 0; x < S_; ++x)
         for (int a = 0; a < A_; ++a) phi_.row(x * A_ + a) = f.dense(x, a).transpose();
      gram_ = cfg.solver == LsviSolver::Gram || (cfg.solver == LsviSolver::Auto && P_ <= cfg.gram_limit);
      for (int h = 0; h < H_; ++h) stages_.emplace_back(&phi_, cfg.ridge, gram_ && optimistic);
      visits_.assign(static_cast<std::size_t>(H_), std::vector<int>(static_cast<std::size_t>(P_), 0));
      next_.assign(static_cast<std::size_t>(H_), std::vector<std::vector<Transition3>>(static_cast<std::size_t>(P_)));
      q_.assign(static_cast<std::size_t>(H_), Vector::Constant(P_, 0.0));
      beta_ = optimistic ? cfg.resolved_beta(f.dim(), H_) : 0.0;
      trace_.frozen = frozen;
      trace_.explorer = explorer_;
      trace_.beta = beta_;
      trace_.dataset.provenance = Provenance::Interactive;
      trace_.dataset.horizon = H_;
      trace_.dataset.labelled[index_of(explorer_)] = false;
      trace_.elliptical_potential.assign(static_cast<std::size_t>(H_), 0.0);
      trace_.solver = optimistic ? (gram_ ? "gram" : "refactor") : "none";
      checkpoints_ = cfg.checkpoints;
      std::sort(checkpoints_.begin(), checkpoints_.end());
      if (optimistic_) backward_pass();
   }

   ExplorationTrace run(Rng rng)
   {
      snapshot_if_due(0);
      std::vector<int> xs(static_cast<std::size_t>(H_) + 1), as(static_cast<std::size_t>(H_));
      std::vector<double> probs;
      for (int k = 1; k <= cfg_.n_episodes; ++k) {
         Rng ep = rng.split(static_cast<std::uint64_t>(k));
         int x = ep.categorical(g_.initial());
         for (int h = 0; h < H_; ++h) {
            xs[h] = x;
            if (x == cfg_.watch_state && trace_.first_watch_visit < 0) trace_.first_watch_visit = k;
            const int a = optimistic_ ? greedy(h, x, ep) : ep.uniform_int(A_);
            const int b = ep.categorical(expert_.dist(h, x));  // expert query
            ++trace_.expert_queries;
            as[h] = a;
            const auto [a1, a2] = MarkovGame::joint(explorer_, a, b);
            trace_.dataset.samples.push_back({k - 1, h, x, a1, a2});
            const auto succ = g_.successors(x, a1, a2);
            if (succ.size() == 1) {
               x = succ[0].next;
            } else {
               probs.clear();
               for (const auto& t : succ) probs.push_back(t.prob);
               x = succ[ep.categorical(probs)].next;
            }
         }
         xs[H_] = x;
         // Covariance and regression data grow after the rollout, before the
         // backward pass.
         for (int h = 0; h < H_; ++h) {
            const int p = xs[h] * A_ + as[h];
            trace_.elliptical_potential[h] += stages_[h].norm_sq(p);
            stages_[h].update(p);
            ++visits_[h][p];
            auto& nx = next_[h][p];
            auto it = std::find_if(nx.begin(), nx.end(), [&](const Transition3& t) { return t.next == xs[h + 1]; });
            if (it == nx.end()) nx.push_back({xs[h + 1], 1});
            else ++it->count;
         }
         if (cfg_.watch_state >= 0 && xs[H_] == cfg_.watch_state && trace_.first_watch_visit < 0)
            trace_.first_watch_visit = k;
         trace_.episodes = k;
         snapshot_if_due(k);
         if (cfg_.stop_on_watch && trace_.first_watch_visit > 0) break;
         if (optimistic_) {
            if (gram_ && k % cfg_.refresh_every == 0)
               for (auto& s : stages_) s.rebuild();
            backward_pass(k);
         }
      }
      trace_.dataset.n_trajectories = trace_.episodes;
      trace_.covariances = CovarianceState(H_, f_.dim(), cfg_.ridge);
      for (int h = 0; h < H_; ++h) {
         trace_.covariances.matrices[h] = stages_[h].lambda();
         trace_.covariances.count[h] = trace_.episodes;
      }
      if (!trace_.snapshot_k.empty() && trace_.snapshot_k.back() != trace_.episodes) take_snapshot(trace_.episodes);
      return std::move(trace_);
   }

  private:
   int greedy(int h, int x, Rng& rng) const
   {
      const Vector& q = q_[h];
      double best = q(x * A_);
      for (int a = 1; a < A_; ++a) best = std::max(best, q(x * A_ + a));
      int ties = 0;
      for (int a = 0; a < A_; ++a) ties += q(x * A_ + a) >= best - 1e-12;
      int pick = rng.uniform_int(ties);
      for (int a = 0; a < A_; ++a)
         if (q(x * A_ + a) >= best - 1e-12 && pick-- == 0) return a;
      return A_ - 1;
   }

   void backward_pass(int k = 0)
   {
      const double H = static_cast<double>(H_);
      Vector v_next = Vector::Zero(S_);
      Vector y(P_), lin(P_), norm(P_);
      for (int h = H_ - 1; h >= 0; --h) {
         y.setZero();
         for (int p = 0; p < P_; ++p)
            for (const auto& t : next_[h][p]) y(p) += t.count * v_next(t.next);
         stages_[h].evaluate(y, lin, norm);
         Vector& q = q_[h];
         for (int p = 0; p < P_; ++p) {
            const double raw = lin(p) + (beta_ + 1.0) * norm(p);
            if (!std::isfinite(raw))
               throw NumericalError("lsvi: non-finite value at episode " + std::to_string(k) + ", stage " +
                                    std::to_string(h + 1));
            q(p) = std::clamp(raw, 0.0, H);
         }
         Vector v(S_);
         for (int x = 0; x < S_; ++x) v(x) = q.segment(x * A_, A_).maxCoeff();
         if (cfg_.record_policies) {
            if (static_cast<int>(trace_.policy_log.size()) == k)
               trace_.policy_log.emplace_back(explorer_, H_, S_, A_);
            for (int x = 0; x < S_; ++x) {
               Eigen::Index a;
               q.segment(x * A_, A_).maxCoeff(&a);
               trace_.policy_log[k].set_action(h, x, static_cast<int>(a));
            }
         }
         trace_.max_q = std::max(trace_.max_q, q.maxCoeff());
         trace_.min_q = std::min(trace_.min_q, q.minCoeff());
         v_next = std::move(v);
      }
   }

   void snapshot_if_due(int k)
   {
      if (std::binary_search(checkpoints_.begin(), checkpoints_.end(), k)) take_snapshot(k);
   }
   void take_snapshot(int k)
   {
      if (!trace_.snapshot_k.empty() && trace_.snapshot_k.back() == k) return;
      trace_.snapshot_k.push_back(k);
      trace_.snapshot_counts.push_back(visits_);
   }

   const MarkovGame& g_;
   const FeatureMap& f_;
   ExplorationConfig cfg_;
   Player frozen_, explorer_;
   bool optimistic_;
   const StagePolicy& expert_;
   int H_ = 0, S_ = 0, A_ = 0, P_ = 0;
   Matrix phi_;
   bool gram_ = false;
   double beta_ = 0.0;
   std::vector<StageRegression> stages_;
   std::vector<std::vector<int>> visits_;
   std::vector<std::vector<std::vector<Transition3>>> next_;
   std::vector<Vector> q_;
   std::vector<int> checkpoints_;
   ExplorationTrace trace_;
};

}  // namespace detail

/// Reward-free exploration by the non-frozen player with zero reward and
/// bonus (beta + 1) ||phi||_{Lambda^{-1}}; the frozen player follows its
/// expert policy and every visited state yields one expert label.
inline ExplorationTrace lsvi_ucb_zero(const MarkovGame& g, const PolicyProfile& expert, Player frozen,
                                      const FeatureMap& explorer_features, const ExplorationConfig& cfg, Rng rng)
{
   detail::Explorer ex(g, expert, frozen, explorer_features, cfg, true);
   return ex.run(rng);
}

/// Same data-collection contract with a uniformly random explorer.
inline ExplorationTrace uniform_explore(const MarkovGame& g, const PolicyProfile& expert, Player frozen,
                                        const FeatureMap& explorer_features, const ExplorationConfig& cfg, Rng rng)
{
   detail::Explorer ex(g, expert, frozen, explorer_features, cfg, false);
   return ex.run(rng);
}

/// The first k episodes of an interactive dataset.
inline ExpertDataset dataset_prefix(const ExpertDataset& d, int episodes)
{
   ExpertDataset out;
   out.provenance = d.provenance;
   out.horizon = d.horizon;
   out.labelled[0] = d.labelled[0];
   out.labelled[1] = d.labelled[1];
   out.n_trajectories = std::min(episodes, d.n_trajectories);
   for (const auto& s : d.samples)
      if (s.traj < episodes) out.samples.push_back(s);
   return out;
}

struct ProbeSeries {
   std::vector<int> k;
   std::vector<double> value;                 // sum_h max_probe norm, per checkpoint
   std::vector<std::vector<double>> stage;    // [i][h] max over probes
   std::vector<std::vector<double>> per_probe;  // [i][probe] sum_h norm
};

/// Expert-weighted feature-expectation norms of the probe policies in the
/// metric of each stored covariance snapshot.
inline ProbeSeries probe_feature_norms(const ExplorationTrace& trace, const MarkovGame& g, const PolicyProfile& expert,
                                       const std::vector<StagePolicy>& probes, const FeatureMap& f)
{
   if (trace.snapshot_k.empty()) throw ArgumentError("probe_feature_norms: trace holds no covariance snapshots");
   if (probes.empty()) throw ArgumentError("probe_feature_norms: empty probe set");
   const auto& frozen_policy = trace.frozen == Player::One ? expert.first : expert.second;
   std::vector<FeatureExpectation> phis;
   for (const auto& p : probes) {
      if (p.player() != trace.explorer) throw DimensionError("probe_feature_norms: probes must be explorer policies");
      phis.push_back(feature_expectation(g, p, frozen_policy, f));
   }
   ProbeSeries out;
   for (std::size_t i = 0; i < trace.snapshot_k.size(); ++i) {
      out.k.push_back(trace.snapshot_k[i]);
      std::vector<double> stage(static_cast<std::size_t>(g.horizon()), 0.0);
      std::vector<double> per(probes.size(), 0.0);
      for (int h = 0; h < g.horizon(); ++h) {
         const Eigen::LLT<Matrix> llt(trace.covariance_at(i, h, f));
         for (std::size_t j = 0; j < probes.size(); ++j) {
            const Vector& v = phis[j][h];
            const double n = std::sqrt(std::max(0.0, v.dot(llt.solve(v))));
            per[j] += n;
            stage[h] = std::max(stage[h], n);
         }
      }
      double total = 0.0;
      for (double s : stage) total += s;
      out.value.push_back(total);
      out.stage.push_back(std::move(stage));
      out.per_probe.push_back(std::move(per));
   }
   return out;
}

// Least-squares slope of log(value) against log(k) over checkpoints in [k_lo, k_hi].
inline double log_log_slope(const ProbeSeries& s, int k_lo, int k_hi)
{
   double sx = 0, sy = 0, sxx = 0, sxy = 0;
   int n = 0;
   for (std::size_t i = 0; i < s.k.size(); ++i) {
      if (s.k[i] < k_lo || s.k[i] > k_hi || s.k[i] <= 0 || !(s.value[i] > 0.0)) continue;
      const double x = std::log(static_cast<double>(s.k[i])), y = std::log(s.value[i]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++n;
   }
   if (n < 2) throw ArgumentError("log_log_slope: need at least two checkpoints in range");
   return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mail
