#pragma once

#include <string>

#include "mail/game/markov_game.hpp"

namespace mail {

// Combination-lock chain controlled by player 1. State 0 is an absorbing
// pit, episodes start at state 1, and state L is absorbing. At state i the
// advancing action is i % 2; the other action drops into the pit. Only at
// state L does player 2's action matter: player 1 earns 1 when player 2
// plays action 1 there, 0 otherwise. The horizon is L, so a uniform player 1
// reaches L with probability 2^-(L-1) per episode.
namespace chain {

inline constexpr int kActions = 2;
inline constexpr int kPit = 0;
inline constexpr int kStart = 1;

inline int advancing_action(int state) noexcept { return state % 2; }

inline MarkovGame game(int length)
{
   if (length < 2) throw ArgumentError("chain: length must be at least 2");
   const int n = length + 1;
   MarkovGame::Builder b(n, {kActions, kActions}, length);
   for (int x = 0; x < n; ++x)
      for (int a1 = 0; a1 < kActions; ++a1)
         for (int a2 = 0; a2 < kActions; ++a2) {
            int next;
            if (x == kPit || x == length) next = x;
            else next = a1 == advancing_action(x) ? x + 1 : kPit;
            b.deterministic(x, a1, a2, next);
            if (x == length) b.reward(x, a1, a2, a2 == 1 ? 1.0 : 0.0);
         }
   b.terminal(kPit);
   b.initial_state(kStart);
   return b.build();
}

inline int end_state(const MarkovGame& g) { return g.n_states() - 1; }

}  // namespace chain
}  // namespace mail
