#pragma once

#include <functional>
#include <string>

#include "sradam/bench/config.hpp"
#include "sradam/bench/record.hpp"

namespace sradam::bench {

/// Trains one grid cell from scratch and returns the finished record.
/// Deterministic: everything derives from cell.seed (init, shuffles, noise,
/// dropout) and the dataset id (synthetic data content).
RunRecord train_single_run(const RunConfig& cfg, const CellKey& cell);

struct GridOptions {
  int jobs = 1;
  bool resume = true;  ///< skip cells whose record file is already complete
  std::function<void(const std::string&)> log;  ///< optional progress sink
};

struct GridOutcome {
  int completed = 0;
  int skipped = 0;
  int failed = 0;
  std::vector<std::string> errors;
};

/// Expands the grid, skips finished cells, runs the rest on a small thread
/// pool (datasets are shared read-only), and writes records + manifest under
/// cfg.out_dir.
GridOutcome run_grid(const RunConfig& cfg, const GridOptions& opts = {});

}  // namespace sradam::bench
