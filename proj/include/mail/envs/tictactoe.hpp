#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "mail/game/markov_game.hpp"

namespace mail {
namespace tictactoe {

inline constexpr int kCells = 9;
inline constexpr int kHorizon = 9;

enum Mark : std::uint8_t { Empty = 0, X = 1, O = 2 };

using Board = std::array<std::uint8_t, kCells>;

inline constexpr std::array<std::array<int, 3>, 8> kLines{{{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                                                           {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}}};

// kTransforms[g][i] is the cell that cell i lands on under the g-th symmetry
// of the square (identity, three rotations, four reflections).
inline constexpr std::array<std::array<int, kCells>, 8> kTransforms = [] {
   std::array<std::array<int, kCells>, 8> t{};
   for (int i = 0; i < kCells; ++i) {
      const int r = i / 3, c = i % 3;
      const int img[8][2] = {{r, c},     {c, 2 - r}, {2 - r, 2 - c}, {2 - c, r},
                             {r, 2 - c}, {2 - r, c}, {c, r},         {2 - c, 2 - r}};
      for (int g = 0; g < 8; ++g) t[g][i] = img[g][0] * 3 + img[g][1];
   }
   return t;
}();

inline std::uint32_t code(const Board& b) noexcept
{
   std::uint32_t v = 0;
   for (int i = kCells - 1; i >= 0; --i) v = v * 3 + b[i];
   return v;
}

inline Board apply(int g, const Board& b) noexcept
{
   Board out{};
   for (int i = 0; i < kCells; ++i) out[kTransforms[g][i]] = b[i];
   return out;
}

inline int count(const Board& b, Mark m) noexcept
{
   return static_cast<int>(std::count(b.begin(), b.end(), static_cast<std::uint8_t>(m)));
}

inline bool wins(const Board& b, Mark m) noexcept
{
   for (const auto& l : kLines)
      if (b[l[0]] == m && b[l[1]] == m && b[l[2]] == m) return true;
   return false;
}

inline bool is_over(const Board& b) noexcept { return wins(b, X) || wins(b, O) || count(b, Empty) == 0; }

// X (player 1) moves first.
inline Mark mover(const Board& b) noexcept { return count(b, X) == count(b, O) ? X : O; }

inline bool is_legal(const Board& b) noexcept
{
   for (auto c : b)
      if (c > O) return false;
   const int nx = count(b, X), no = count(b, O);
   if (nx != no && nx != no + 1) return false;
   const bool xw = wins(b, X), ow = wins(b, O);
   if (xw && ow) return false;
   if (xw && nx != no + 1) return false;
   if (ow && nx != no) return false;
   return true;
}

struct Canonical {
   Board board;
   int transform;  // first g with apply(g, input) == board
};

inline Canonical canonicalize(const Board& b)
{
   if (!is_legal(b)) throw ArgumentError("tictactoe: illegal board");
   Canonical best{b, 0};
   std::uint32_t best_code = code(b);
   for (int g = 1; g < 8; ++g) {
      const Board t = apply(g, b);
      if (const auto c = code(t); c < best_code) best = {t, g}, best_code = c;
   }
   return best;
}

inline std::string render(const Board& b)
{
   std::string out;
   for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out += ".XO"[b[r * 3 + c]];
      out += '\n';
   }
   return out;
}

/// Tic-Tac-Toe as a simultaneous-move game. Both players have 9 actions and
/// the non-mover's action is ignored. A move onto an occupied cell forfeits
/// (the mover loses, play moves to an absorbing sink). Wins pay +-1 on the
/// completing move; finished boards absorb with zero reward.
class Game {
  public:
   Game()
   {
      std::vector<Board> frontier{Board{}};
      std::unordered_map<std::uint32_t, Board> seen{{0u, Board{}}};
      while (!frontier.empty()) {
         std::vector<Board> next;
         for (const auto& b : frontier) {
            if (is_over(b)) continue;
            const auto m = mover(b);
            for (int c = 0; c < kCells; ++c)
               if (b[c] == Empty) {
                  Board n = b;
                  n[c] = m;
                  if (seen.emplace(code(n), n).second) next.push_back(n);
               }
         }
         frontier = std::move(next);
      }
      boards_.reserve(seen.size());
      for (const auto& [c, b] : seen) boards_.push_back(b);
      std::sort(boards_.begin(), boards_.end(), [](const Board& a, const Board& b) { return code(a) < code(b); });
      for (int i = 0; i < static_cast<int>(boards_.size()); ++i) index_.emplace(code(boards_[i]), i);
      sink_ = static_cast<int>(boards_.size());

      const int n = sink_ + 1;
      MarkovGame::Builder builder(n, {kCells, kCells}, kHorizon);
      for (int x = 0; x < n; ++x)
         for (int a1 = 0; a1 < kCells; ++a1)
            for (int a2 = 0; a2 < kCells; ++a2) {
               const auto [next, r] = step(x, a1, a2);
               builder.deterministic(x, a1, a2, next);
               builder.reward(x, a1, a2, r);
            }
      builder.terminal(sink_);
      for (int x = 0; x < sink_; ++x)
         if (is_over(boards_[x])) builder.terminal(x);
      builder.initial_state(index_.at(0));
      game_ = std::make_shared<const MarkovGame>(builder.build());
   }

   const MarkovGame& game() const noexcept { return *game_; }
   std::shared_ptr<const MarkovGame> shared_game() const noexcept { return game_; }
   int n_boards() const noexcept { return static_cast<int>(boards_.size()); }
   int sink() const noexcept { return sink_; }
   const Board& board(int x) const { return boards_.at(static_cast<std::size_t>(x)); }

   int state_of(const Board& b) const
   {
      const auto it = index_.find(code(b));
      if (it == index_.end()) throw ArgumentError("tictactoe: board is not reachable in legal play");
      return it->second;
   }

   // (next state, reward to player 1)
   std::pair<int, double> step(int x, int a1, int a2) const
   {
      if (x == sink_) return {sink_, 0.0};
      const Board& b = boards_[x];
      if (is_over(b)) return {x, 0.0};
      const Mark m = mover(b);
      const int cell = m == X ? a1 : a2;
      const double sign = m == X ? 1.0 : -1.0;
      if (b[cell] != Empty) return {sink_, -sign};
      Board n = b;
      n[cell] = m;
      return {index_.at(code(n)), wins(n, m) ? sign : 0.0};
   }

  private:
   std::vector<Board> boards_;
   std::unordered_map<std::uint32_t, int> index_;
   int sink_ = 0;
   std::shared_ptr<const MarkovGame> game_;
};

/// Exact minimax expert over canonical boards. Scores are from the mover's
/// side: a win with e empty cells left is worth 1 + e, a loss -(1 + e), a
/// draw 0, so both players prefer quick wins and slow losses. Ties go to the
/// lowest canonical cell.
class MinimaxExpert {
  public:
   struct Entry {
      int score = 0;
      int cell = -1;  // in canonical coordinates; -1 on finished boards
   };

   // Solving the empty board visits every canonical class reachable in play,
   // finished boards included.
   MinimaxExpert() { solve(Board{}); }

   const std::unordered_map<std::uint32_t, Entry>& table() const noexcept { return table_; }

   int score(const Board& b) { return solve(canonicalize(b).board).score; }

   // Expert move on a raw board, or -1 if the game is over.
   int move(const Board& b)
   {
      const auto c = canonicalize(b);
      const Entry e = solve(c.board);
      if (e.cell < 0) return -1;
      for (int i = 0; i < kCells; ++i)
         if (kTransforms[c.transform][i] == e.cell) return i;
      return -1;
   }

   // Stage policies for both players: the mover follows the expert, the
   // non-mover (and every finished board) plays action 0.
   PolicyProfile policies(const Game& g)
   {
      const auto& game = g.game();
      std::vector<int> choice(static_cast<std::size_t>(game.n_states()), 0);
      std::vector<Mark> who(static_cast<std::size_t>(game.n_states()), Empty);
      for (int x = 0; x < g.n_boards(); ++x) {
         const Board& b = g.board(x);
         if (is_over(b)) continue;
         choice[x] = move(b);
         who[x] = mover(b);
      }
      auto p1 = StagePolicy::deterministic(game, Player::One, [&](int, int x) { return who[x] == X ? choice[x] : 0; });
      auto p2 = StagePolicy::deterministic(game, Player::Two, [&](int, int x) { return who[x] == O ? choice[x] : 0; });
      return {std::move(p1), std::move(p2)};
   }

  private:
   Entry solve(const Board& canon)
   {
      const auto key = code(canon);
      if (const auto it = table_.find(key); it != table_.end()) return it->second;
      Entry best;
      if (wins(canon, X) || wins(canon, O)) {
         best.score = -(1 + count(canon, Empty));  // the side to move has lost
      } else if (count(canon, Empty) > 0) {
         const Mark m = mover(canon);
         best.score = -100;
         for (int c = 0; c < kCells; ++c) {
            if (canon[c] != Empty) continue;
            Board n = canon;
            n[c] = m;
            const int s = -solve(canonicalize(n).board).score;
            if (s > best.score) best = {s, c};
         }
      }
      table_.emplace(key, best);
      return best;
   }

   std::unordered_map<std::uint32_t, Entry> table_;
};

}  // namespace tictactoe
}  // namespace mail
