#include "sradam/bench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "sradam/bench/aggregate.hpp"
#include "sradam/bench/plots.hpp"

namespace sradam::bench {

namespace {

std::string fmt(double x, const char* spec = "%.4f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

}  // namespace

std::string render_report(std::span<const RunRecord> records,
                          std::span<const std::string> plot_files) {
  std::ostringstream os;
  os << "# Benchmark report\n\n";
  os << records.size() << " completed runs.\n\n";
  if (records.empty()) return os.str();

  const auto agg = aggregate(records);
  os << "## Results\n\n" << render_aggregate_markdown(agg) << '\n';

  // Pairwise tests: every shrunk variant against plain adam, when both ran.
  std::set<std::string> optimizers;
  for (const auto& r : records) optimizers.insert(r.cell.optimizer);
  if (optimizers.count("adam")) {
    for (const auto& opt : optimizers) {
      if (opt.rfind("sr_adam", 0) != 0) continue;
      const auto pairs = paired_compare(records, "adam", opt);
      if (pairs.empty()) continue;
      os << "## Paired t-test: " << opt << " vs adam (best accuracy)\n\n";
      os << render_ttest_markdown(pairs) << '\n';
    }
  }

  // Shrinkage activity.
  std::ostringstream shrink;
  for (const auto& r : records) {
    if (r.shrink.applied_steps == 0) continue;
    shrink << "| " << r.cell.to_string() << " | " << r.shrink.applied_steps
           << "/" << r.shrink.total_steps << " | " << fmt(r.shrink.c_min) << " | "
           << fmt(r.shrink.c_max) << " |\n";
  }
  if (!shrink.str().empty()) {
    os << "## Shrinkage activity\n\n";
    os << "| run | applied/total group steps | c min | c max |\n";
    os << "|---|---|---|---|\n";
    os << shrink.str() << '\n';
  }

  if (!plot_files.empty()) {
    os << "## Plots\n\n";
    for (const auto& f : plot_files) {
      if (f.size() >= 4 && f.substr(f.size() - 4) == ".svg") {
        os << "![" << f << "](" << f << ")\n\n";
      }
    }
  }
  return os.str();
}

std::filesystem::path write_report(const std::filesystem::path& dir) {
  const LoadResult loaded = load_records(dir);
  if (loaded.records.empty()) {
    throw std::runtime_error("no completed records under " + dir.string());
  }
  const auto plots = emit_plots(loaded.records, dir);

  {
    std::ofstream csv(dir / "aggregate.csv", std::ios::trunc);
    const auto agg = aggregate(loaded.records);
    write_aggregate_csv(csv, agg);
  }
  {
    std::set<std::string> optimizers;
    for (const auto& r : loaded.records) optimizers.insert(r.cell.optimizer);
    std::ofstream csv(dir / "ttests.csv", std::ios::trunc);
    bool wrote_header = false;
    for (const auto& opt : optimizers) {
      if (opt.rfind("sr_adam", 0) != 0 || !optimizers.count("adam")) continue;
      const auto pairs = paired_compare(loaded.records, "adam", opt);
      if (pairs.empty()) continue;
      if (!wrote_header) {
        write_ttest_csv(csv, pairs);
        wrote_header = true;
      } else {
        std::ostringstream body;
        write_ttest_csv(body, pairs);
        const std::string text = body.str();
        csv << text.substr(text.find('\n') + 1);
      }
    }
  }

  const std::filesystem::path report = dir / "report.md";
  std::ofstream out(report, std::ios::trunc);
  out << render_report(loaded.records, plots);
  return report;
}

}  // namespace sradam::bench
