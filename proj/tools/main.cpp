#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sradam/bench/aggregate.hpp"
#include "sradam/bench/plots.hpp"
#include "sradam/bench/report.hpp"
#include "sradam/bench/runner.hpp"
#include "sradam/risk.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override,
            int jobs) {
  sradam::bench::RunConfig cfg = sradam::bench::parse_config_file(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;

  sradam::bench::GridOptions opts;
  opts.jobs = jobs;
  opts.log = [](const std::string& line) { std::cout << line << '\n'; };

  const auto outcome = sradam::bench::run_grid(cfg, opts);
  std::cout << "completed " << outcome.completed << ", skipped "
            << outcome.skipped << ", failed " << outcome.failed << '\n';
  for (const auto& e : outcome.errors) std::cerr << "error: " << e << '\n';
  return outcome.failed == 0 ? 0 : 1;
}

int cmd_aggregate(const std::string& dir) {
  const auto loaded = sradam::bench::load_records(dir);
  if (loaded.incomplete > 0 || loaded.unreadable > 0) {
    std::cerr << "note: skipped " << loaded.incomplete << " incomplete and "
              << loaded.unreadable << " unreadable record files\n";
  }
  if (loaded.records.empty()) {
    std::cerr << "no completed records under " << dir << '\n';
    return 1;
  }
  const auto rows = sradam::bench::aggregate(loaded.records);
  sradam::bench::write_aggregate_csv(std::cout, rows);
  return 0;
}

int cmd_ttest(const std::string& dir, const std::string& a,
              const std::string& b) {
  const auto loaded = sradam::bench::load_records(dir);
  const auto rows = sradam::bench::paired_compare(loaded.records, a, b);
  if (rows.empty()) {
    std::cerr << "no slices with >= 2 common seeds for " << a << " vs " << b
              << '\n';
    return 1;
  }
  sradam::bench::write_ttest_csv(std::cout, rows);
  return 0;
}

int cmd_report(const std::string& dir) {
  const auto path = sradam::bench::write_report(dir);
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_risk(int p, double sigma2, std::vector<double> grid,
             std::size_t trials, std::uint64_t seed, double tau2) {
  using sradam::EstimatorKind;
  std::vector<sradam::RiskEstimate> rows;
  for (EstimatorKind est : {EstimatorKind::UE, EstimatorKind::JS,
                            EstimatorKind::JSPlus, EstimatorKind::Bayes}) {
    // Same seed for every estimator: identical noise (paired comparison).
    const auto curve = sradam::risk_curve(est, static_cast<std::size_t>(p),
                                          sigma2, grid, trials, seed, tau2);
    rows.insert(rows.end(), curve.begin(), curve.end());
  }
  sradam::write_risk_csv(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shrunk-gradient optimizer benchmark lab"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir, opt_a, opt_b;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "train a grid of runs from a config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_option("--jobs", jobs, "parallel workers")->check(CLI::Range(1, 64));

  auto* agg = app.add_subcommand("aggregate", "summarize records as CSV");
  agg->add_option("--in", in_dir, "run directory")->required();

  auto* ttest = app.add_subcommand("ttest", "paired t-test between optimizers");
  ttest->add_option("--in", in_dir, "run directory")->required();
  ttest->add_option("--a", opt_a, "baseline optimizer id")->required();
  ttest->add_option("--b", opt_b, "candidate optimizer id")->required();

  auto* report = app.add_subcommand("report", "write report.md with plots");
  report->add_option("--in", in_dir, "run directory")->required();

  int risk_p = 10;
  double risk_sigma2 = 1.0, risk_tau2 = 1.0;
  std::vector<double> risk_grid{0.0, 1.0, 3.0, 10.0};
  std::size_t risk_trials = 100000;
  std::uint64_t risk_seed = 42;
  auto* risk = app.add_subcommand("risk", "Monte Carlo estimator risk CSV");
  risk->add_option("--p", risk_p, "dimension (>= 3)")->required();
  risk->add_option("--sigma2", risk_sigma2, "noise variance")->required();
  risk->add_option("--grid", risk_grid, "mu norms (comma separated)")
      ->required()
      ->delimiter(',');
  risk->add_option("--trials", risk_trials, "Monte Carlo trials")->required();
  risk->add_option("--seed", risk_seed, "rng seed");
  risk->add_option("--tau2", risk_tau2, "prior variance for the Bayes rule");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, jobs);
    if (agg->parsed()) return cmd_aggregate(in_dir);
    if (ttest->parsed()) return cmd_ttest(in_dir, opt_a, opt_b);
    if (report->parsed()) return cmd_report(in_dir);
    if (risk->parsed())
      return cmd_risk(risk_p, risk_sigma2, risk_grid, risk_trials, risk_seed,
                      risk_tau2);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
