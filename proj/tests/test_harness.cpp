#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "mail/harness/config.hpp"
#include "mail/harness/output.hpp"
#include "mail/harness/run.hpp"

using namespace mail;

namespace {

const char* kSmall = R"(
name = "small"
algorithm = "bc"
budgets = [10, 50, 100, 200, 500]
seeds = [42, 123, 456, 789]

[env]
name = "gridworld"
horizon = 10

[features]
name = "tabular"
)";

std::string csv_of(const std::vector<RunRecord>& rs)
{
   std::ostringstream os;
   emit_csv(rs, os);
   return os.str();
}

void expect_config_error(const std::string& text, const std::string& fragment)
{
   try {
      parse_config_string(text);
      ADD_FAILURE() << "no ConfigError for: " << text;
   } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
   }
}

}  // namespace

TEST(Config, ParsesSectionsAndDefaults)
{
   const auto c = parse_config_string(R"(
algorithm = "lsvi-ucb-zero-bc"
budgets = [5, 9]
seeds = [1]
master_seed = 7
[env]
name = "chain"
length = 5
[exploration]
beta = 4.0
solver = "refactor"
[bc]
eta = 0.3
)");
   EXPECT_EQ(c.algorithm, "lsvi-ucb-zero-bc");
   EXPECT_EQ(c.env, "chain");
   EXPECT_EQ(c.length, 5);
   EXPECT_EQ(c.budgets, (std::vector<int>{5, 9}));
   EXPECT_EQ(c.master_seed, 7u);
   EXPECT_DOUBLE_EQ(c.exploration.beta, 4.0);
   EXPECT_EQ(c.exploration.solver, LsviSolver::Refactor);
   EXPECT_DOUBLE_EQ(c.bc.eta, 0.3);
   EXPECT_EQ(c.features, "tabular");
   EXPECT_EQ(c.expert.kind, "nash");
}

TEST(Config, Errors)
{
   expect_config_error("budgets = [1]\nseeds = [1]\nalgorithm = \"dagger\"", "bc");
   expect_config_error("budgets = [1]\nseeds = [1]\n[env]\nname = \"maze\"", "gridworld");
   expect_config_error("budgets = [1]\nseeds = [1]\nbudgetz = 3", "budgetz");
   expect_config_error("budgets = [1]\nseeds = [1]\n[env]\nhorizn = 3", "env.horizn");
   expect_config_error("budgets = [5, 5]\nseeds = [1]", "increasing");
   expect_config_error("budgets = []\nseeds = [1]", "budgets");
   expect_config_error("budgets = [1]\nseeds = []", "seeds");
   expect_config_error("budgets = [1]\nseeds = [1]\n[env]\nname = \"chain\"\n[features]\nname = \"relational\"",
                       "relational");
   expect_config_error("budgets = [1]\nseeds = [1]\nname = 3", "name");
   expect_config_error("budgets = [1\nseeds = [1]", "<string>:");
   expect_config_error("budgets = [1]\nseeds = [1]\n[exploration]\nsolver = \"qr\"", "refactor");
}

TEST(Config, LoadMissingFile)
{
   EXPECT_THROW(load_config("/nonexistent/dir/none.toml"), ConfigError);
}

TEST(Run, TwentyRecordsInConfigOrder)
{
   const auto c = parse_config_string(kSmall);
   const auto rs = run(c, 2);
   ASSERT_EQ(rs.size(), 20u);
   for (std::size_t i = 0; i < rs.size(); ++i) {
      EXPECT_TRUE(rs[i].ok()) << rs[i].error;
      EXPECT_EQ(rs[i].seed, c.seeds[i / 5]);
      EXPECT_EQ(rs[i].budget, c.budgets[i % 5]);
      EXPECT_EQ(rs[i].expert_queries, 10L * rs[i].budget);
      EXPECT_GE(rs[i].nash_gap, 0.0);
      EXPECT_LE(rs[i].train_loglik, 0.0);
   }
}

TEST(Run, DeterministicAcrossThreadCounts)
{
   auto c = parse_config_string(kSmall);
   c.budgets = {10, 50};
   EXPECT_EQ(csv_of(run(c, 1)), csv_of(run(c, 3)));
}

TEST(Run, MasterSeedChangesStochasticRuns)
{
   auto c = parse_config_string("algorithm = \"uniform-explore-bc\"\nbudgets = [30]\nseeds = [1, 2]\n"
                                "[env]\nname = \"chain\"\nlength = 6\n");
   const auto a = run(c, 1);
   EXPECT_TRUE(a[0].ok()) << a[0].error;
   EXPECT_NE(a[0].train_loglik, a[1].train_loglik);
   c.master_seed = 9;
   EXPECT_NE(csv_of(a), csv_of(run(c, 1)));
}

TEST(Run, InteractiveAndChain)
{
   const auto c = parse_config_string(R"(
algorithm = "lsvi-ucb-zero-bc"
budgets = [20]
seeds = [3]
[env]
name = "chain"
length = 4
[exploration]
beta = 3.0
)");
   const auto rs = run(c, 1);
   ASSERT_EQ(rs.size(), 1u);
   EXPECT_TRUE(rs[0].ok()) << rs[0].error;
   EXPECT_GT(rs[0].expert_queries, 0);
}

TEST(Run, ThreadBudgetFromEnvironment)
{
   setenv("MAIL_LAB_THREADS", "3", 1);
   EXPECT_EQ(thread_budget(), 3);
   setenv("MAIL_LAB_THREADS", "zero", 1);
   EXPECT_THROW(thread_budget(), ConfigError);
   unsetenv("MAIL_LAB_THREADS");
   EXPECT_GE(thread_budget(), 1);
}

TEST(Output, SingleRecordCsvAndRoundTrip)
{
   RunRecord r{42, "gridworld", "tabular", "bc", 10};
   r.expert_queries = 100;
   r.nash_gap = 0.1;
   r.train_loglik = -0.25;
   r.expected_tv_to_expert = 1.0 / 3.0;
   r.wall_ms = 12.5;
   const std::string csv = csv_of({r});
   EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
   EXPECT_EQ(csv.substr(0, csv.find('\n')), kRecordHeader);
   std::istringstream in(csv);
   const auto back = read_records_csv(in);
   ASSERT_EQ(back.size(), 1u);
   EXPECT_EQ(back[0].seed, 42u);
   EXPECT_EQ(back[0].expected_tv_to_expert, 1.0 / 3.0);
   EXPECT_EQ(back[0].wall_ms, 0.0);
}

TEST(Output, ErrorRecordKeepsEmptyMetrics)
{
   RunRecord r{1, "chain", "tabular", "bc", 5};
   r.error = "boom, \"quoted\"";
   std::istringstream in(csv_of({r}));
   const auto back = read_records_csv(in);
   ASSERT_EQ(back.size(), 1u);
   EXPECT_EQ(back[0].error, r.error);
   EXPECT_TRUE(std::isnan(back[0].nash_gap));
}

TEST(Output, PlotRequiresRecords)
{
   std::ostringstream os;
   EXPECT_THROW(emit_plot({}, "nash_gap", "budget", os), ArgumentError);
   const auto rs = run(parse_config_string(std::string(kSmall) + "\n"), 1);
   emit_plot(rs, "nash_gap", "budget", os, true);
   EXPECT_NE(os.str().find("<svg"), std::string::npos);
   EXPECT_NE(os.str().find("bc / tabular"), std::string::npos);
}
