#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mail/core/types.hpp"

namespace mail {

struct Transition {
   int next;
   double prob;
};

/// Two-player zero-sum finite-horizon Markov game over dense integer states and
/// actions. Rewards are the payoff to player 1; player 2 receives the negation.
///
/// Transitions are stored in compressed rows keyed by (state, a1, a2), which
/// keeps deterministic games such as Tic-Tac-Toe linear in the number of
/// joint actions. Instances are immutable once built.
class MarkovGame {
  public:
   class Builder;

   int n_states() const noexcept { return n_states_; }
   int n_actions(Player p) const noexcept { return n_actions_[index_of(p)]; }
   std::array<int, 2> n_actions() const noexcept { return n_actions_; }
   int horizon() const noexcept { return horizon_; }
   const Vector& initial() const noexcept { return initial_; }

   int triple(int x, int a1, int a2) const noexcept
   {
      return (x * n_actions_[0] + a1) * n_actions_[1] + a2;
   }

   std::span<const Transition> successors(int x, int a1, int a2) const noexcept
   {
      const int t = triple(x, a1, a2);
      return {succ_.data() + offsets_[t], succ_.data() + offsets_[t + 1]};
   }

   double reward(int x, int a1, int a2) const noexcept { return reward_[triple(x, a1, a2)]; }
   double reward(Player p, int x, int a1, int a2) const noexcept
   {
      const double r = reward(x, a1, a2);
      return p == Player::One ? r : -r;
   }

   // Absorbing zero-reward states that carry no decision content. Feature maps
   // give them the zero vector; dynamics treat them like any other state.
   bool is_terminal(int x) const noexcept { return terminal_[x] != 0; }
   int n_terminal() const noexcept
   {
      int n = 0;
      for (char t : terminal_) n += t != 0;
      return n;
   }

   // Maps (own action of player p, opponent action) to the (a1, a2) order.
   static constexpr std::pair<int, int> joint(Player p, int own, int opp) noexcept
   {
      return p == Player::One ? std::pair{own, opp} : std::pair{opp, own};
   }

   void validate() const;

  private:
   MarkovGame() = default;

   int n_states_ = 0;
   std::array<int, 2> n_actions_{0, 0};
   int horizon_ = 0;
   std::vector<int> offsets_;
   std::vector<Transition> succ_;
   std::vector<double> reward_;
   Vector initial_;
   std::vector<char> terminal_;
};

class MarkovGame::Builder {
  public:
   Builder(int n_states, std::array<int, 2> n_actions, int horizon)
       : n_states_(n_states), n_actions_(n_actions), horizon_(horizon)
   {
      if (n_states <= 0 || n_actions[0] <= 0 || n_actions[1] <= 0)
         throw DimensionError("MarkovGame: state and action counts must be positive");
      if (horizon <= 0) throw ArgumentError("MarkovGame: horizon must be positive");
      const auto n = static_cast<std::size_t>(n_states) * n_actions[0] * n_actions[1];
      rows_.resize(n);
      reward_.assign(n, 0.0);
      initial_ = Vector::Zero(n_states);
      terminal_.assign(static_cast<std::size_t>(n_states), 0);
   }

   Builder& transition(int x, int a1, int a2, std::vector<Transition> row)
   {
      rows_.at(index(x, a1, a2)) = std::move(row);
      return *this;
   }
   Builder& deterministic(int x, int a1, int a2, int next)
   {
      return transition(x, a1, a2, {{next, 1.0}});
   }
   Builder& reward(int x, int a1, int a2, double r)
   {
      reward_.at(index(x, a1, a2)) = r;
      return *this;
   }
   Builder& initial(Vector nu)
   {
      if (nu.size() != n_states_) throw DimensionError("MarkovGame: initial distribution size");
      initial_ = std::move(nu);
      return *this;
   }
   Builder& initial_state(int x)
   {
      initial_.setZero();
      initial_(x) = 1.0;
      return *this;
   }
   Builder& terminal(int x)
   {
      terminal_.at(static_cast<std::size_t>(x)) = 1;
      return *this;
   }

   MarkovGame build() const
   {
      MarkovGame g;
      g.n_states_ = n_states_;
      g.n_actions_ = n_actions_;
      g.horizon_ = horizon_;
      g.offsets_.reserve(rows_.size() + 1);
      g.offsets_.push_back(0);
      for (const auto& row : rows_) {
         g.succ_.insert(g.succ_.end(), row.begin(), row.end());
         g.offsets_.push_back(static_cast<int>(g.succ_.size()));
      }
      g.reward_ = reward_;
      g.initial_ = initial_;
      g.terminal_ = terminal_;
      g.validate();
      return g;
   }

  private:
   std::size_t index(int x, int a1, int a2) const
   {
      if (x < 0 || x >= n_states_ || a1 < 0 || a1 >= n_actions_[0] || a2 < 0 || a2 >= n_actions_[1])
         throw DimensionError("MarkovGame: (state, a1, a2) out of range");
      return (static_cast<std::size_t>(x) * n_actions_[0] + a1) * n_actions_[1] + a2;
   }

   int n_states_;
   std::array<int, 2> n_actions_;
   int horizon_;
   std::vector<std::vector<Transition>> rows_;
   std::vector<double> reward_;
   Vector initial_;
   std::vector<char> terminal_;
};

inline void MarkovGame::validate() const
{
   constexpr double kTol = 1e-12;
   for (int x = 0; x < n_states_; ++x) {
      for (int a1 = 0; a1 < n_actions_[0]; ++a1) {
         for (int a2 = 0; a2 < n_actions_[1]; ++a2) {
            double sum = 0.0;
            for (const auto& t : successors(x, a1, a2)) {
               if (t.next < 0 || t.next >= n_states_)
                  throw DimensionError("MarkovGame: successor index out of range");
               if (!(t.prob >= 0.0)) throw ArgumentError("MarkovGame: negative transition probability");
               sum += t.prob;
            }
            if (std::abs(sum - 1.0) > kTol)
               throw ArgumentError("MarkovGame: transition row (" + std::to_string(x) + ", " +
                                   std::to_string(a1) + ", " + std::to_string(a2) +
                                   ") sums to " + std::to_string(sum));
            const double r = reward(x, a1, a2);
            if (!(std::abs(r) <= 1.0)) throw ArgumentError("MarkovGame: |reward| exceeds 1");
         }
      }
   }
   if ((initial_.array() < 0.0).any() || std::abs(initial_.sum() - 1.0) > kTol)
      throw ArgumentError("MarkovGame: initial distribution is not a probability vector");
}

/// Non-stationary policy of one player: for every stage h in [0, H) a row
/// stochastic |X| x |A^n| table.
class StagePolicy {
  public:
   StagePolicy() = default;
   StagePolicy(Player player, int horizon, int n_states, int n_actions)
       : player_(player), n_states_(n_states), n_actions_(n_actions),
         stages_(static_cast<std::size_t>(horizon), RowMatrix::Zero(n_states, n_actions))
   {
   }

   static StagePolicy uniform(Player player, int horizon, int n_states, int n_actions)
   {
      StagePolicy p(player, horizon, n_states, n_actions);
      for (auto& s : p.stages_) s.setConstant(1.0 / n_actions);
      return p;
   }
   static StagePolicy uniform(const MarkovGame& g, Player player)
   {
      return uniform(player, g.horizon(), g.n_states(), g.n_actions(player));
   }

   // Deterministic policy from a chooser (h, x) -> action.
   static StagePolicy deterministic(const MarkovGame& g, Player player,
                                    const std::function<int(int, int)>& choose)
   {
      StagePolicy p(player, g.horizon(), g.n_states(), g.n_actions(player));
      for (int h = 0; h < g.horizon(); ++h)
         for (int x = 0; x < g.n_states(); ++x) p.set_action(h, x, choose(h, x));
      return p;
   }

   Player player() const noexcept { return player_; }
   int horizon() const noexcept { return static_cast<int>(stages_.size()); }
   int n_states() const noexcept { return n_states_; }
   int n_actions() const noexcept { return n_actions_; }

   double prob(int h, int x, int a) const { return stages_[h](x, a); }
   auto dist(int h, int x) const { return stages_[h].row(x); }
   auto dist(int h, int x) { return stages_[h].row(x); }
   const RowMatrix& stage(int h) const { return stages_[h]; }
   RowMatrix& stage(int h) { return stages_[h]; }

   void set_action(int h, int x, int a)
   {
      stages_[h].row(x).setZero();
      stages_[h](x, a) = 1.0;
   }

   void validate(double tol = 1e-10) const
   {
      for (std::size_t h = 0; h < stages_.size(); ++h) {
         const auto& s = stages_[h];
         if ((s.array() < 0.0).any())
            throw ArgumentError("StagePolicy: negative probability at stage " + std::to_string(h));
         for (int x = 0; x < n_states_; ++x)
            if (std::abs(s.row(x).sum() - 1.0) > tol)
               throw ArgumentError("StagePolicy: distribution at stage " + std::to_string(h) +
                                   ", state " + std::to_string(x) + " does not sum to 1");
      }
   }

   void check_shape(const MarkovGame& g) const
   {
      if (horizon() != g.horizon() || n_states_ != g.n_states() || n_actions_ != g.n_actions(player_))
         throw DimensionError("StagePolicy: shape does not match game for player " +
                              to_string(player_));
   }

   bool is_deterministic(double tol = 0.0) const
   {
      for (const auto& s : stages_)
         for (int x = 0; x < n_states_; ++x)
            if (s.row(x).maxCoeff() < 1.0 - tol) return false;
      return true;
   }

  private:
   Player player_ = Player::One;
   int n_states_ = 0;
   int n_actions_ = 0;
   std::vector<RowMatrix> stages_;
};

using PolicyProfile = std::pair<StagePolicy, StagePolicy>;

// Picks (p1, p2) out of a profile as (own, opponent) for player n.
inline std::pair<const StagePolicy&, const StagePolicy&> own_and_opponent(const PolicyProfile& prof,
                                                                         Player n)
{
   if (n == Player::One) return {prof.first, prof.second};
   return {prof.second, prof.first};
}

// Exchanges the roles of the players: player 1 of the result is player 2 of
// `g`, rewards are negated, and states are relabelled by `state_map`.
inline MarkovGame swap_roles(const MarkovGame& g, const std::vector<int>& state_map)
{
   if (static_cast<int>(state_map.size()) != g.n_states())
      throw DimensionError("swap_roles: state map size");
   MarkovGame::Builder b(g.n_states(), {g.n_actions(Player::Two), g.n_actions(Player::One)}, g.horizon());
   Vector nu = Vector::Zero(g.n_states());
   for (int x = 0; x < g.n_states(); ++x) {
      nu(state_map[x]) += g.initial()(x);
      if (g.is_terminal(x)) b.terminal(state_map[x]);
      for (int a1 = 0; a1 < g.n_actions(Player::One); ++a1)
         for (int a2 = 0; a2 < g.n_actions(Player::Two); ++a2) {
            std::vector<Transition> row;
            for (const auto& t : g.successors(x, a1, a2)) row.push_back({state_map[t.next], t.prob});
            b.transition(state_map[x], a2, a1, std::move(row));
            b.reward(state_map[x], a2, a1, -g.reward(x, a1, a2));
         }
   }
   b.initial(nu);
   return b.build();
}

}  // namespace mail
