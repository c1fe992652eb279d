// Command-line front end: run experiment specs, compare algorithms on a
// shared problem, check rescaling-schedule hypotheses, and test rate claims
// against trace files.
//
// Exit codes: 0 success, 1 runtime failure, 2 spec or argument problem,
// 3 schedule hypothesis failure.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tikhoprox/experiment.hpp"

namespace {

std::ostream& log_stream() { return std::cout; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tikhonov-regularized proximal point toolkit"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  bool quiet = false;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_flag("--quiet", quiet, "suppress progress output");

  auto* run = app.add_subcommand("run", "run one experiment spec");
  run->fallthrough();  // --out / --quiet may follow the subcommand
  std::string run_spec;
  run->add_option("spec", run_spec, "experiment spec file")->required();

  auto* compare =
      app.add_subcommand("compare", "run several specs on one problem");
  compare->fallthrough();
  std::vector<std::string> compare_specs;
  compare->add_option("specs", compare_specs, "experiment spec files")
      ->expected(-1);

  auto* check = app.add_subcommand("check-schedule",
                                   "verify schedule growth hypotheses");
  check->fallthrough();
  std::string sched_str;
  double check_c = 3.0, check_mu = 1.0, horizon = 1e13;
  check->add_option("schedule", sched_str,
                    "schedule spec, e.g. polylog:m=3,q=3")
      ->required();
  check->add_option("--c", check_c, "Tikhonov coefficient")
      ->capture_default_str();
  check->add_option("--mu", check_mu, "margin parameter")
      ->capture_default_str();
  check->add_option("--horizon", horizon, "largest time checked")
      ->capture_default_str();

  auto* rates =
      app.add_subcommand("rates", "fit decay rates from a trace CSV");
  rates->fallthrough();
  std::string rates_csv;
  std::vector<std::string> claim_strs;
  rates->add_option("trace", rates_csv, "trace CSV file")->required();
  rates
      ->add_option("--claim", claim_strs,
                   "series:x:exponent[:tail[:tol[:band]]]; x may be a column "
                   "or 'exp'")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      tikhoprox::ExperimentSpec spec =
          tikhoprox::load_experiment(tikhoprox::parse_spec_file(run_spec));
      tikhoprox::cmd_run(spec, out_dir, log_stream(), quiet);
      return 0;
    }
    if (compare->parsed()) {
      if (compare_specs.size() < 2) {
        std::cerr << "error: compare needs at least two spec files\n";
        return 2;
      }
      std::vector<tikhoprox::ExperimentSpec> specs;
      for (const auto& path : compare_specs)
        specs.push_back(
            tikhoprox::load_experiment(tikhoprox::parse_spec_file(path)));
      tikhoprox::cmd_compare(specs, out_dir, log_stream(), quiet);
      return 0;
    }
    if (check->parsed()) {
      tikhoprox::ScheduleCheckResult res = tikhoprox::cmd_check_schedule(
          sched_str, check_c, check_mu, horizon, log_stream(), quiet);
      return res.pass ? 0 : 3;
    }
    if (rates->parsed()) {
      std::vector<tikhoprox::RateClaim> claims;
      for (const auto& text : claim_strs)
        claims.push_back(tikhoprox::parse_rate_claim(text));
      std::vector<tikhoprox::RateReport> reports =
          tikhoprox::cmd_rates(rates_csv, claims, log_stream(), quiet);
      for (const auto& r : reports)
        if (r.verdict != "pass") return 1;
      return 0;
    }
  } catch (const tikhoprox::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
