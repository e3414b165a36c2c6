#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sradam/bench/config.hpp"

namespace sradam::bench {

struct EpochMetric {
  int epoch = 0;  ///< 1-based
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  double wall_s = 0.0;
};

/// Shrinkage activity over a whole run. c_min/c_max cover applied steps
/// only; with zero applied steps they stay at their empty-range sentinels
/// (c_min = 1, c_max = 0).
struct ShrinkSummary {
  std::int64_t applied_steps = 0;
  std::int64_t total_steps = 0;
  double c_min = 1.0;
  double c_max = 0.0;
};

struct RunRecord {
  CellKey cell;
  std::string precision = "float";
  int epochs_planned = 0;
  std::vector<EpochMetric> epochs;
  double best_acc = 0.0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::uint64_t pipeline_hash = 0;  ///< init bytes + shuffle orders + noise seeds
  ShrinkSummary shrink;
  bool complete = false;
};

std::filesystem::path record_path(const std::filesystem::path& dir,
                                  const CellKey& cell);

/// One JSON object per line: a config line, one line per epoch, and a final
/// summary line. Written to a temp file and renamed, so readers never see a
/// half-written record.
void write_record(const std::filesystem::path& dir, const RunRecord& record);

/// Parses one record file. Returns nullopt for unreadable/foreign files.
/// A record missing its summary line (killed run) comes back with
/// complete = false.
std::optional<RunRecord> read_record(const std::filesystem::path& file);

struct LoadResult {
  std::vector<RunRecord> records;  ///< complete records, sorted by cell key
  int incomplete = 0;
  int unreadable = 0;
};

/// Scans dir/records/*.jsonl.
LoadResult load_records(const std::filesystem::path& dir);

/// Appends a completed run to dir/manifest.jsonl (summary only; the record
/// files stay authoritative).
void append_manifest(const std::filesystem::path& dir, const RunRecord& record);

}  // namespace sradam::bench
