#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "sradam/bench/record.hpp"
#include "sradam/stats.hpp"

namespace sradam::bench {

/// Grid coordinates with the seed marginalized out.
struct SliceKey {
  std::string dataset;
  std::string model;
  std::string optimizer;
  double noise = 0.0;
  int batch_size = 0;

  auto tie() const { return std::tie(dataset, model, optimizer, noise, batch_size); }
  bool operator<(const SliceKey& o) const { return tie() < o.tie(); }
  bool operator==(const SliceKey& o) const { return tie() == o.tie(); }
};

struct AggRow {
  SliceKey key;
  std::size_t n_seeds = 0;
  double acc_mean = 0.0, acc_std = 0.0;
  double loss_mean = 0.0, loss_std = 0.0;
  double epoch_wall_mean = 0.0;
  bool best_acc_in_slice = false;   ///< best mean acc among optimizers at same coords
  bool best_loss_in_slice = false;
};

/// Groups complete records over seeds. Std uses the n-1 divisor and is 0 for
/// a single seed. Rows come back sorted by key.
std::vector<AggRow> aggregate(std::span<const RunRecord> records);

void write_aggregate_csv(std::ostream& os, std::span<const AggRow> rows);
std::string render_aggregate_markdown(std::span<const AggRow> rows);

struct PairRow {
  std::string dataset, model;
  double noise = 0.0;
  int batch_size = 0;
  std::string opt_a, opt_b;
  std::size_t n = 0;  ///< seeds present for both optimizers
  double acc_mean_a = 0.0, acc_mean_b = 0.0;
  double loss_mean_a = 0.0, loss_mean_b = 0.0;
  TTestResult acc_test;   ///< paired over seeds, b - a
  TTestResult loss_test;
};

/// Pairs runs of two optimizers by seed within each slice. Slices with
/// fewer than 2 common seeds are dropped.
std::vector<PairRow> paired_compare(std::span<const RunRecord> records,
                                    const std::string& opt_a,
                                    const std::string& opt_b);

void write_ttest_csv(std::ostream& os, std::span<const PairRow> rows);
std::string render_ttest_markdown(std::span<const PairRow> rows);

struct CurvePoint {
  int epoch = 0;
  double loss_mean = 0.0, loss_std = 0.0;
  double acc_mean = 0.0, acc_std = 0.0;
};

struct Curve {
  SliceKey key;
  std::vector<CurvePoint> points;
};

/// Per-epoch test metrics averaged over seeds, one curve per slice.
std::vector<Curve> epoch_curves(std::span<const RunRecord> records);

}  // namespace sradam::bench
