#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mail/harness/acceptance.hpp"
#include "mail/harness/config.hpp"
#include "mail/harness/output.hpp"

#ifndef MAIL_DEFAULT_CONFIG
#define MAIL_DEFAULT_CONFIG "configs/default.toml"
#endif

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kRunError = 1;
constexpr int kConfigError = 2;

std::ofstream open_out(const fs::path& p)
{
   std::ofstream os(p, std::ios::binary);
   if (!os) throw mail::Error("cannot write " + p.string());
   return os;
}

int cmd_run(const fs::path& config, const fs::path& out)
{
   const auto cfg = mail::load_config(config);
   const int threads = mail::thread_budget();
   std::cerr << "mail-lab: " << cfg.name << ": " << cfg.seeds.size() * cfg.budgets.size() << " runs on " << threads
             << " thread(s)\n";
   const auto records = mail::run(cfg, threads);
   fs::create_directories(out);
   {
      auto os = open_out(out / "results.csv");
      mail::emit_csv(records, os);
   }
   {
      auto os = open_out(out / "timing.csv");
      mail::emit_csv(records, os, true);
   }
   int failed = 0;
   for (const auto& r : records)
      if (!r.ok()) {
         ++failed;
         std::cerr << "mail-lab: seed " << r.seed << " budget " << r.budget << ": " << r.error << "\n";
      }
   if (cfg.output.plot && failed < static_cast<int>(records.size())) {
      auto os = open_out(out / (cfg.output.metric + ".svg"));
      mail::emit_plot(records, cfg.output.metric, "budget", os, cfg.output.log_x);
   }
   std::cout << (out / "results.csv").string() << "\n";
   return failed ? kRunError : kOk;
}

int cmd_plot(const fs::path& csv, const std::string& metric, const std::string& x, const fs::path& out, bool log_x)
{
   std::ifstream in(csv, std::ios::binary);
   if (!in) throw mail::Error("cannot read " + csv.string());
   const auto records = mail::read_records_csv(in);
   if (out.empty()) {
      mail::emit_plot(records, metric, x, std::cout, log_x);
   } else {
      auto os = open_out(out);
      mail::emit_plot(records, metric, x, os, log_x);
   }
   return kOk;
}

int cmd_verify(const std::string& suite, const fs::path& config, const char* argv0)
{
   if (suite != "acceptance") throw mail::ConfigError("unknown suite '" + suite + "' (known: acceptance)");
   mail::acceptance::Options opts;
   opts.default_config = config;
   std::error_code ec;
   opts.mail_lab = fs::canonical("/proc/self/exe", ec);
   if (ec) opts.mail_lab = fs::absolute(argv0);
   opts.scratch = fs::temp_directory_path() / "mail-lab-verify";
   const int failed = mail::acceptance::run_battery(opts, std::cout);
   std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
   return failed ? kRunError : kOk;
}

}  // namespace

int main(int argc, char** argv)
{
   CLI::App app{"mail-lab: imitation learning experiments on zero-sum Markov games"};
   app.require_subcommand(1);

   fs::path run_config, run_out;
   auto* run = app.add_subcommand("run", "run an experiment config");
   run->add_option("--config", run_config, "TOML experiment config")->required();
   run->add_option("--out", run_out, "output directory")->required();

   fs::path plot_csv, plot_out;
   std::string metric = "nash_gap", x = "budget";
   bool linear_x = false;
   auto* plot = app.add_subcommand("plot", "plot a results CSV as SVG");
   plot->add_option("--csv", plot_csv, "results CSV")->required();
   plot->add_option("--metric", metric, "nash_gap | train_loglik | expected_tv_to_expert | expert_queries");
   plot->add_option("--x", x, "budget | expert_queries");
   plot->add_option("--out", plot_out, "SVG file (default stdout)");
   plot->add_flag("--linear-x", linear_x, "linear instead of log x axis");

   std::string suite = "acceptance";
   fs::path verify_config = MAIL_DEFAULT_CONFIG;
   auto* verify = app.add_subcommand("verify", "run a verification suite");
   verify->add_option("--suite", suite, "suite name")->required();
   verify->add_option("--config", verify_config, "config used by the determinism check");

   try {
      app.parse(argc, argv);
   } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? kOk : kConfigError;
   }

   try {
      if (*run) return cmd_run(run_config, run_out);
      if (*plot) return cmd_plot(plot_csv, metric, x, plot_out, !linear_x);
      return cmd_verify(suite, verify_config, argv[0]);
   } catch (const mail::ConfigError& e) {
      std::cerr << "mail-lab: config error: " << e.what() << "\n";
      return kConfigError;
   } catch (const std::exception& e) {
      std::cerr << "mail-lab: error: " << e.what() << "\n";
      return kRunError;
   }
}
