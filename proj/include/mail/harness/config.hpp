#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mail/envs/gridworld.hpp"
#include "mail/exploration/lsvi_ucb_zero.hpp"
#include "mail/imitation/bc.hpp"
#include "toml.hpp"

namespace mail {

struct ExpertSpec {
   std::string kind = "nash";  // nash | nash-mixture | qre
   int k = 1;                  // mixture: equilibria from action-order seeds 0..k-1
   std::vector<double> weights;
   double eta = 1.0;           // qre
};

struct OutputSpec {
   bool plot = true;
   bool log_x = true;
   std::string metric = "nash_gap";
};

struct ExperimentConfig {
   std::string name = "experiment";
   std::string env = "gridworld";
   int horizon = 10;  // gridworld
   int length = 8;    // chain
   std::string features = "tabular";
   double feature_constant = 1.0;  // constant features
   std::string algorithm = "bc";
   std::vector<int> budgets;
   std::vector<std::uint64_t> seeds;
   std::uint64_t master_seed = 0;
   ExpertSpec expert;
   BcConfig bc;
   ExplorationConfig exploration;
   OutputSpec output;

   void validate() const;
};

inline const std::vector<std::string>& registered_envs()
{
   static const std::vector<std::string> v{"gridworld", "chain", "tictactoe"};
   return v;
}
inline const std::vector<std::string>& registered_features()
{
   static const std::vector<std::string> v{"tabular", "relational", "constant"};
   return v;
}
inline const std::vector<std::string>& registered_algorithms()
{
   static const std::vector<std::string> v{"bc", "lsvi-ucb-zero-bc", "uniform-explore-bc"};
   return v;
}
inline const std::vector<std::string>& registered_experts()
{
   static const std::vector<std::string> v{"nash", "nash-mixture", "qre"};
   return v;
}

namespace detail {

inline std::string join(const std::vector<std::string>& v)
{
   std::string s;
   for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
   return s;
}

inline void expect_registered(const std::string& what, const std::string& value, const std::vector<std::string>& known)
{
   for (const auto& k : known)
      if (k == value) return;
   throw ConfigError("unknown " + what + " '" + value + "' (registered: " + join(known) + ")");
}

// Reads a TOML table while tracking which keys were consumed, so leftovers
// can be reported as unknown.
class TableReader {
  public:
   TableReader(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

   bool has(const std::string& key) const { return t_.contains(key); }

   template <class T>
   void get(const std::string& key, T& out)
   {
      const toml::node* n = t_.get(key);
      if (!n) return;
      used_.insert(key);
      if constexpr (std::is_same_v<T, bool>) {
         if (!n->is_boolean()) fail(key, "a boolean");
         out = n->as_boolean()->get();
      } else if constexpr (std::is_same_v<T, std::string>) {
         if (!n->is_string()) fail(key, "a string");
         out = n->as_string()->get();
      } else if constexpr (std::is_integral_v<T>) {
         if (!n->is_integer()) fail(key, "an integer");
         const auto v = n->as_integer()->get();
         if constexpr (std::is_unsigned_v<T>)
            if (v < 0) fail(key, "a nonnegative integer");
         out = static_cast<T>(v);
      } else if constexpr (std::is_floating_point_v<T>) {
         if (n->is_integer()) out = static_cast<T>(n->as_integer()->get());
         else if (n->is_floating_point()) out = static_cast<T>(n->as_floating_point()->get());
         else fail(key, "a number");
      } else {
         const toml::array* a = n->as_array();
         if (!a) fail(key, "an array");
         out.clear();
         for (const auto& e : *a) {
            typename T::value_type v{};
            if constexpr (std::is_integral_v<typename T::value_type>) {
               if (!e.is_integer()) fail(key, "an array of integers");
               const auto i = e.as_integer()->get();
               if constexpr (std::is_unsigned_v<typename T::value_type>)
                  if (i < 0) fail(key, "an array of nonnegative integers");
               v = static_cast<typename T::value_type>(i);
            } else {
               if (e.is_integer()) v = static_cast<double>(e.as_integer()->get());
               else if (e.is_floating_point()) v = e.as_floating_point()->get();
               else fail(key, "an array of numbers");
            }
            out.push_back(v);
         }
      }
   }

   const toml::table* table(const std::string& key)
   {
      const toml::node* n = t_.get(key);
      if (!n) return nullptr;
      used_.insert(key);
      if (!n->is_table()) fail(key, "a table");
      return n->as_table();
   }

   void finish() const
   {
      for (const auto& [k, v] : t_)
         if (!used_.count(std::string(k.str())))
            throw ConfigError("unknown key '" + qualified(std::string(k.str())) + "'");
   }

  private:
   [[noreturn]] void fail(const std::string& key, const char* what) const
   {
      throw ConfigError("'" + qualified(key) + "' must be " + what);
   }
   std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

   const toml::table& t_;
   std::string path_;
   std::set<std::string> used_;
};

}  // namespace detail

inline void ExperimentConfig::validate() const
{
   detail::expect_registered("env", env, registered_envs());
   detail::expect_registered("feature map", features, registered_features());
   detail::expect_registered("algorithm", algorithm, registered_algorithms());
   detail::expect_registered("expert", expert.kind, registered_experts());
   if (features == "relational" && env != "gridworld")
      throw ConfigError("feature map 'relational' is only defined for env 'gridworld'");
   if (features == "constant" && !(feature_constant > 0.0 && feature_constant <= 1.0))
      throw ConfigError("features.c must lie in (0, 1]");
   if (budgets.empty()) throw ConfigError("budgets must be nonempty");
   for (std::size_t i = 0; i < budgets.size(); ++i) {
      if (budgets[i] < 1) throw ConfigError("budgets must be positive");
      if (i > 0 && budgets[i] <= budgets[i - 1]) throw ConfigError("budgets must be strictly increasing");
   }
   if (seeds.empty()) throw ConfigError("seeds must be nonempty");
   if (env == "gridworld" && horizon < gridworld::kMinHorizon)
      throw ConfigError("env.horizon must be at least " + std::to_string(gridworld::kMinHorizon));
   if (env == "chain" && length < 2) throw ConfigError("env.length must be at least 2");
   if (expert.kind == "nash-mixture") {
      if (expert.k < 1) throw ConfigError("expert.k must be at least 1");
      if (!expert.weights.empty() && static_cast<int>(expert.weights.size()) != expert.k)
         throw ConfigError("expert.weights must have k entries");
   }
   if (expert.kind == "qre" && !(expert.eta > 0.0)) throw ConfigError("expert.eta must be positive");
   if (!(bc.step_size > 0.0) || bc.max_epochs < 1) throw ConfigError("bc.step_size and bc.max_epochs must be positive");
   try {
      ExplorationConfig probe = exploration;
      probe.n_episodes = budgets.back();
      probe.validate();
   } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
   }
   static const std::set<std::string> metrics{"nash_gap", "train_loglik", "expected_tv_to_expert", "expert_queries"};
   if (!metrics.count(output.metric)) throw ConfigError("unknown output.metric '" + output.metric + "'");
}

/// Parses the TOML experiment format:
///
///   name = "..."            algorithm = "bc"        budgets = [...]
///   seeds = [...]           master_seed = 0
///   [env]       name, horizon (gridworld), length (chain)
///   [features]  name, c (constant)
///   [expert]    kind, k, weights, eta
///   [bc]        eta, b_theta, step_size, max_epochs, grad_tolerance
///   [exploration] beta, c_beta, delta, ridge, solver, refresh_every
///   [output]    plot, log_x, metric
///
/// Unknown keys anywhere are errors.
inline ExperimentConfig parse_config(const toml::table& root)
{
   ExperimentConfig c;
   detail::TableReader r(root, "");
   r.get("name", c.name);
   r.get("algorithm", c.algorithm);
   r.get("budgets", c.budgets);
   r.get("seeds", c.seeds);
   r.get("master_seed", c.master_seed);
   if (const auto* t = r.table("env")) {
      detail::TableReader e(*t, "env");
      e.get("name", c.env);
      e.get("horizon", c.horizon);
      e.get("length", c.length);
      e.finish();
   }
   if (const auto* t = r.table("features")) {
      detail::TableReader e(*t, "features");
      e.get("name", c.features);
      e.get("c", c.feature_constant);
      e.finish();
   }
   if (const auto* t = r.table("expert")) {
      detail::TableReader e(*t, "expert");
      e.get("kind", c.expert.kind);
      e.get("k", c.expert.k);
      e.get("weights", c.expert.weights);
      e.get("eta", c.expert.eta);
      e.finish();
   }
   if (const auto* t = r.table("bc")) {
      detail::TableReader e(*t, "bc");
      e.get("eta", c.bc.eta);
      e.get("b_theta", c.bc.b_theta);
      e.get("step_size", c.bc.step_size);
      e.get("max_epochs", c.bc.max_epochs);
      e.get("grad_tolerance", c.bc.grad_tolerance);
      e.finish();
   }
   if (const auto* t = r.table("exploration")) {
      detail::TableReader e(*t, "exploration");
      e.get("beta", c.exploration.beta);
      e.get("c_beta", c.exploration.c_beta);
      e.get("delta", c.exploration.delta);
      e.get("ridge", c.exploration.ridge);
      e.get("refresh_every", c.exploration.refresh_every);
      std::string solver = "auto";
      e.get("solver", solver);
      if (solver == "auto") c.exploration.solver = LsviSolver::Auto;
      else if (solver == "gram") c.exploration.solver = LsviSolver::Gram;
      else if (solver == "refactor") c.exploration.solver = LsviSolver::Refactor;
      else throw ConfigError("unknown exploration.solver '" + solver + "' (registered: auto, gram, refactor)");
      e.finish();
   }
   if (const auto* t = r.table("output")) {
      detail::TableReader e(*t, "output");
      e.get("plot", c.output.plot);
      e.get("log_x", c.output.log_x);
      e.get("metric", c.output.metric);
      e.finish();
   }
   r.finish();
   c.validate();
   return c;
}

inline ExperimentConfig parse_config_string(std::string_view text, const std::string& source = "<string>")
{
   try {
      return parse_config(toml::parse(text, source));
   } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << source << ':' << e.source().begin.line << ':' << e.source().begin.column << ": " << e.description();
      throw ConfigError(os.str());
   }
}

inline ExperimentConfig load_config(const std::filesystem::path& file)
{
   try {
      return parse_config(toml::parse_file(file.string()));
   } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << file.string() << ':' << e.source().begin.line << ':' << e.source().begin.column << ": " << e.description();
      throw ConfigError(os.str());
   }
}

}  // namespace mail
