#pragma once

#include <array>
#include <string>

#include "mail/game/markov_game.hpp"

namespace mail {

// 3x3 pursuit-to-goal grid. Cells are (row, col) with row 0 at the top; the
// goal is the top-right corner (0, 2). A state is the ordered pair of agent
// cells, so there are 9 * 8 = 72 live states plus one absorbing terminal.
namespace gridworld {

inline constexpr int kSide = 3;
inline constexpr int kCells = kSide * kSide;
inline constexpr int kLiveStates = kCells * (kCells - 1);
inline constexpr int kTerminal = kLiveStates;
inline constexpr int kStates = kLiveStates + 1;
inline constexpr int kActions = 4;
inline constexpr int kMinHorizon = 5;

enum Action : int { Left = 0, Right = 1, Up = 2, Down = 3 };

struct Cell {
   int row = 0;
   int col = 0;
   constexpr int index() const noexcept { return row * kSide + col; }
   static constexpr Cell from_index(int c) noexcept { return {c / kSide, c % kSide}; }
   friend constexpr bool operator==(Cell, Cell) = default;
};

inline constexpr Cell kGoal{0, 2};
inline constexpr Cell kStart1{1, 0};
inline constexpr Cell kStart2{2, 1};

struct Positions {
   Cell p1;
   Cell p2;
   const Cell& of(Player p) const noexcept { return p == Player::One ? p1 : p2; }
};

inline int encode(Cell a, Cell b)
{
   const int ca = a.index(), cb = b.index();
   if (ca == cb || ca < 0 || ca >= kCells || cb < 0 || cb >= kCells)
      throw ArgumentError("gridworld: agents must occupy distinct cells on the grid");
   return ca * (kCells - 1) + (cb < ca ? cb : cb - 1);
}

inline Positions decode(int x)
{
   if (x < 0 || x >= kLiveStates) throw DecodeError("gridworld: state " + std::to_string(x) + " has no positions");
   const int ca = x / (kCells - 1);
   int cb = x % (kCells - 1);
   if (cb >= ca) ++cb;
   return {Cell::from_index(ca), Cell::from_index(cb)};
}

inline constexpr Cell step(Cell c, int action) noexcept
{
   switch (action) {
      case Left: return {c.row, c.col > 0 ? c.col - 1 : c.col};
      case Right: return {c.row, c.col + 1 < kSide ? c.col + 1 : c.col};
      case Up: return {c.row > 0 ? c.row - 1 : c.row, c.col};
      default: return {c.row + 1 < kSide ? c.row + 1 : c.row, c.col};
   }
}

struct Outcome {
   int next;
   double reward;  // payoff to player 1
};

// Moves into a wall or into the other agent's current cell leave the mover in
// place (this also blocks swaps); if both agents target one cell, both stay.
inline Outcome transition(int x, int a1, int a2)
{
   if (x == kTerminal) return {kTerminal, 0.0};
   const auto [c1, c2] = decode(x);
   if (c1 == kGoal || c2 == kGoal) return {kTerminal, 0.0};
   Cell t1 = step(c1, a1), t2 = step(c2, a2);
   if (t1 == c2) t1 = c1;
   if (t2 == c1) t2 = c2;
   if (t1 == t2) t1 = c1, t2 = c2;
   if (t1 == kGoal) return {kTerminal, 1.0};
   if (t2 == kGoal) return {kTerminal, -1.0};
   return {encode(t1, t2), 0.0};
}

inline int start_state() { return encode(kStart1, kStart2); }

inline MarkovGame game(int horizon = 10)
{
   if (horizon < kMinHorizon)
      throw ArgumentError("gridworld: horizon must be at least " + std::to_string(kMinHorizon));
   MarkovGame::Builder b(kStates, {kActions, kActions}, horizon);
   for (int x = 0; x < kStates; ++x)
      for (int a1 = 0; a1 < kActions; ++a1)
         for (int a2 = 0; a2 < kActions; ++a2) {
            const auto o = transition(x, a1, a2);
            b.deterministic(x, a1, a2, o.next);
            b.reward(x, a1, a2, o.reward);
         }
   b.terminal(kTerminal);
   b.initial_state(start_state());
   return b.build();
}

// Reflection across the anti-diagonal through the goal; maps the start
// state onto itself with the agents exchanged.
inline constexpr Cell reflect(Cell c) noexcept { return {kSide - 1 - c.col, kSide - 1 - c.row}; }

inline std::string render(int x)
{
   if (x == kTerminal) return "<terminal>\n";
   const auto pos = decode(x);
   std::string out;
   for (int r = 0; r < kSide; ++r) {
      for (int c = 0; c < kSide; ++c) {
         const Cell cell{r, c};
         out += cell == pos.p1 ? '1' : cell == pos.p2 ? '2' : cell == kGoal ? 'G' : '.';
      }
      out += '\n';
   }
   return out;
}

}  // namespace gridworld
}  // namespace mail
