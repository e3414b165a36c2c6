#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "sradam/bench/record.hpp"

namespace sradam::bench {

/// Markdown summary: run counts, aggregate table, shrunk-vs-plain paired
/// t-tests where both sides exist, shrinkage activity, and plot links.
/// Sections without data are omitted.
std::string render_report(std::span<const RunRecord> records,
                          std::span<const std::string> plot_files);

/// Loads records under dir, emits plots, and writes report.md plus
/// aggregate.csv / ttests.csv. Returns the report path.
std::filesystem::path write_report(const std::filesystem::path& dir);

}  // namespace sradam::bench
