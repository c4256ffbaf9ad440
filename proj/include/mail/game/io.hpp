#pragma once

#include <string>

#include "json.hpp"
#include "mail/game/markov_game.hpp"

namespace mail {

using Json = nlohmann::json;

inline constexpr int kGameFormatVersion = 1;
inline constexpr int kPolicyFormatVersion = 1;

namespace detail {

inline void expect_format(const Json& j, const char* format, int version)
{
   if (!j.contains("format") || j.at("format") != format)
      throw DecodeError(std::string("expected a '") + format + "' document");
   if (j.at("version").get<int>() != version)
      throw DecodeError(std::string(format) + ": unsupported version " + j.at("version").dump());
}

}  // namespace detail

// Doubles are emitted in shortest round-trip form (at most 17 significant
// digits), so a load of a dump reproduces every probability bit for bit.
inline Json to_json(const MarkovGame& g)
{
   Json trans = Json::array();
   Json reward = Json::array();
   for (int x = 0; x < g.n_states(); ++x)
      for (int a1 = 0; a1 < g.n_actions(Player::One); ++a1)
         for (int a2 = 0; a2 < g.n_actions(Player::Two); ++a2) {
            for (const auto& t : g.successors(x, a1, a2))
               trans.push_back(Json::array({x, a1, a2, t.next, t.prob}));
            if (const double r = g.reward(x, a1, a2); r != 0.0)
               reward.push_back(Json::array({x, a1, a2, r}));
         }
   Json terminal = Json::array();
   for (int x = 0; x < g.n_states(); ++x)
      if (g.is_terminal(x)) terminal.push_back(x);
   Json initial = Json::array();
   for (int x = 0; x < g.n_states(); ++x) initial.push_back(g.initial()(x));
   return Json{{"format", "mail-lab.markov-game"},
               {"version", kGameFormatVersion},
               {"n_states", g.n_states()},
               {"actions", {g.n_actions(Player::One), g.n_actions(Player::Two)}},
               {"horizon", g.horizon()},
               {"transition", std::move(trans)},
               {"reward", std::move(reward)},
               {"initial", std::move(initial)},
               {"terminal", std::move(terminal)}};
}

inline MarkovGame game_from_json(const Json& j)
{
   detail::expect_format(j, "mail-lab.markov-game", kGameFormatVersion);
   const int n = j.at("n_states").get<int>();
   const auto actions = j.at("actions").get<std::array<int, 2>>();
   MarkovGame::Builder b(n, actions, j.at("horizon").get<int>());
   std::vector<std::vector<Transition>> rows(static_cast<std::size_t>(n) * actions[0] * actions[1]);
   auto idx = [&](int x, int a1, int a2) {
      if (x < 0 || x >= n || a1 < 0 || a1 >= actions[0] || a2 < 0 || a2 >= actions[1])
         throw DecodeError("markov-game: index out of range");
      return (static_cast<std::size_t>(x) * actions[0] + a1) * actions[1] + a2;
   };
   for (const auto& e : j.at("transition"))
      rows[idx(e.at(0), e.at(1), e.at(2))].push_back({e.at(3).get<int>(), e.at(4).get<double>()});
   for (int x = 0; x < n; ++x)
      for (int a1 = 0; a1 < actions[0]; ++a1)
         for (int a2 = 0; a2 < actions[1]; ++a2) b.transition(x, a1, a2, std::move(rows[idx(x, a1, a2)]));
   for (const auto& e : j.at("reward")) b.reward(e.at(0), e.at(1), e.at(2), e.at(3).get<double>());
   const auto init = j.at("initial").get<std::vector<double>>();
   if (static_cast<int>(init.size()) != n) throw DecodeError("markov-game: initial vector length");
   b.initial(Eigen::Map<const Vector>(init.data(), n));
   if (j.contains("terminal"))
      for (const auto& x : j.at("terminal")) b.terminal(x.get<int>());
   return b.build();
}

inline Json to_json(const StagePolicy& p)
{
   Json stages = Json::array();
   for (int h = 0; h < p.horizon(); ++h) {
      Json rows = Json::array();
      for (int x = 0; x < p.n_states(); ++x) {
         Json row = Json::array();
         for (int a = 0; a < p.n_actions(); ++a) row.push_back(p.prob(h, x, a));
         rows.push_back(std::move(row));
      }
      stages.push_back(std::move(rows));
   }
   return Json{{"format", "mail-lab.stage-policy"},
               {"version", kPolicyFormatVersion},
               {"player", static_cast<int>(p.player())},
               {"horizon", p.horizon()},
               {"n_states", p.n_states()},
               {"n_actions", p.n_actions()},
               {"probs", std::move(stages)}};
}

inline StagePolicy policy_from_json(const Json& j)
{
   detail::expect_format(j, "mail-lab.stage-policy", kPolicyFormatVersion);
   const int pl = j.at("player").get<int>();
   if (pl != 1 && pl != 2) throw DecodeError("stage-policy: player must be 1 or 2");
   StagePolicy p(pl == 1 ? Player::One : Player::Two, j.at("horizon").get<int>(),
                 j.at("n_states").get<int>(), j.at("n_actions").get<int>());
   const auto& probs = j.at("probs");
   if (static_cast<int>(probs.size()) != p.horizon()) throw DecodeError("stage-policy: stage count");
   for (int h = 0; h < p.horizon(); ++h) {
      if (static_cast<int>(probs[h].size()) != p.n_states()) throw DecodeError("stage-policy: state count");
      for (int x = 0; x < p.n_states(); ++x) {
         const auto& row = probs[h][x];
         if (static_cast<int>(row.size()) != p.n_actions()) throw DecodeError("stage-policy: action count");
         for (int a = 0; a < p.n_actions(); ++a) p.stage(h)(x, a) = row[a].get<double>();
      }
   }
   p.validate();
   return p;
}

}  // namespace mail
