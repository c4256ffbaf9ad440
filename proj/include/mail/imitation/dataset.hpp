#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mail/core/rng.hpp"
#include "mail/game/markov_game.hpp"

namespace mail {

enum class Provenance { NonInteractive, Interactive };

inline std::string to_string(Provenance p) { return p == Provenance::Interactive ? "interactive" : "non-interactive"; }

struct Sample {
   int traj = 0;
   int h = 0;  // 0-based stage
   int state = 0;
   int a1 = 0;
   int a2 = 0;

   int action(Player p) const noexcept { return p == Player::One ? a1 : a2; }
};

/// Stage-tagged joint samples. `labelled` marks the players whose column
/// holds expert actions: both for non-interactive data, only the frozen
/// player for interactive data (the other column is the explorer's action).
struct ExpertDataset {
   std::vector<Sample> samples;
   Provenance provenance = Provenance::NonInteractive;
   int n_trajectories = 0;
   int horizon = 0;
   bool labelled[2] = {true, true};

   bool is_labelled(Player p) const noexcept { return labelled[index_of(p)]; }
   std::size_t size() const noexcept { return samples.size(); }

   void validate(const MarkovGame& g) const
   {
      for (const auto& s : samples)
         if (s.h < 0 || s.h >= g.horizon() || s.state < 0 || s.state >= g.n_states() || s.a1 < 0 ||
             s.a1 >= g.n_actions(Player::One) || s.a2 < 0 || s.a2 >= g.n_actions(Player::Two))
            throw DimensionError("ExpertDataset: sample out of range for the game");
   }
};

/// Action counts of one player's labels, aggregated by (stage, state).
struct StageCounts {
   struct Row {
      int state;
      std::vector<double> counts;  // per own action
      double total;
   };
   std::vector<std::vector<Row>> stages;  // [h], rows sorted by state
   double n_samples = 0.0;
};

inline StageCounts aggregate(const ExpertDataset& d, Player p, int horizon, int n_actions)
{
   if (!d.is_labelled(p))
      throw ArgumentError("aggregate: dataset carries no expert labels for player " + to_string(p));
   std::vector<std::map<int, std::vector<double>>> acc(static_cast<std::size_t>(horizon));
   for (const auto& s : d.samples) {
      if (s.h < 0 || s.h >= horizon) throw DimensionError("aggregate: stage out of range");
      const int a = s.action(p);
      if (a < 0 || a >= n_actions) throw DimensionError("aggregate: action out of range");
      auto& row = acc[s.h][s.state];
      if (row.empty()) row.assign(static_cast<std::size_t>(n_actions), 0.0);
      row[a] += 1.0;
   }
   StageCounts out;
   out.stages.resize(static_cast<std::size_t>(horizon));
   for (int h = 0; h < horizon; ++h)
      for (auto& [x, c] : acc[h]) {
         double t = 0.0;
         for (double v : c) t += v;
         out.n_samples += t;
         out.stages[h].push_back({x, std::move(c), t});
      }
   return out;
}

/// n_traj rollouts of the expert profile from the initial distribution.
inline ExpertDataset sample_expert_dataset(const MarkovGame& g, const PolicyProfile& expert, int n_traj, Rng rng)
{
   if (n_traj < 0) throw ArgumentError("sample_expert_dataset: negative trajectory count");
   expert.first.check_shape(g);
   expert.second.check_shape(g);
   ExpertDataset d;
   d.provenance = Provenance::NonInteractive;
   d.n_trajectories = n_traj;
   d.horizon = g.horizon();
   d.samples.reserve(static_cast<std::size_t>(n_traj) * g.horizon());
   std::vector<double> probs;
   for (int t = 0; t < n_traj; ++t) {
      int x = rng.categorical(g.initial());
      for (int h = 0; h < g.horizon(); ++h) {
         const int a1 = rng.categorical(expert.first.dist(h, x));
         const int a2 = rng.categorical(expert.second.dist(h, x));
         d.samples.push_back({t, h, x, a1, a2});
         const auto succ = g.successors(x, a1, a2);
         if (succ.size() == 1) {
            x = succ[0].next;
         } else {
            probs.clear();
            for (const auto& tr : succ) probs.push_back(tr.prob);
            x = succ[rng.categorical(probs)].next;
         }
      }
   }
   return d;
}

// CSV: traj_id,h,state,a1,a2 with h 1-based.
inline void write_csv(const ExpertDataset& d, std::ostream& os)
{
   os << "traj_id,h,state,a1,a2\n";
   for (const auto& s : d.samples) os << s.traj << ',' << s.h + 1 << ',' << s.state << ',' << s.a1 << ',' << s.a2 << '\n';
}

inline ExpertDataset read_csv(std::istream& is, Provenance provenance = Provenance::NonInteractive)
{
   std::string line;
   if (!std::getline(is, line) || line != "traj_id,h,state,a1,a2")
      throw DecodeError("expert dataset CSV: missing header 'traj_id,h,state,a1,a2'");
   ExpertDataset d;
   d.provenance = provenance;
   int max_traj = -1;
   int lineno = 1;
   while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      Sample s;
      char c1, c2, c3, c4;
      if (!(ls >> s.traj >> c1 >> s.h >> c2 >> s.state >> c3 >> s.a1 >> c4 >> s.a2) || c1 != ',' || c2 != ',' ||
          c3 != ',' || c4 != ',' || s.h < 1)
         throw DecodeError("expert dataset CSV: malformed line " + std::to_string(lineno));
      --s.h;
      max_traj = std::max(max_traj, s.traj);
      d.horizon = std::max(d.horizon, s.h + 1);
      d.samples.push_back(s);
   }
   d.n_trajectories = max_traj + 1;
   return d;
}

}  // namespace mail
