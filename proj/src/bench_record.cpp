#include "sradam/bench/record.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sradam::bench {

namespace {

using nlohmann::json;

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::uint64_t hash_from_hex(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

json cell_json(const CellKey& cell) {
  return json{{"dataset", cell.dataset},   {"model", cell.model},
              {"optimizer", cell.optimizer}, {"noise", cell.noise},
              {"batch_size", cell.batch_size}, {"seed", cell.seed}};
}

CellKey cell_from_json(const json& j) {
  CellKey c;
  c.dataset = j.at("dataset").get<std::string>();
  c.model = j.at("model").get<std::string>();
  c.optimizer = j.at("optimizer").get<std::string>();
  c.noise = j.at("noise").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::filesystem::path record_path(const std::filesystem::path& dir,
                                  const CellKey& cell) {
  return dir / "records" / (cell.to_string() + ".jsonl");
}

void write_record(const std::filesystem::path& dir, const RunRecord& record) {
  const std::filesystem::path path = record_path(dir, record.cell);
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    json header{{"type", "config"},
                {"cell", cell_json(record.cell)},
                {"precision", record.precision},
                {"epochs_planned", record.epochs_planned}};
    out << header.dump() << '\n';
    for (const auto& e : record.epochs) {
      json ej{{"type", "epoch"},       {"epoch", e.epoch},
              {"train_loss", e.train_loss}, {"test_loss", e.test_loss},
              {"test_acc", e.test_acc},     {"wall_s", e.wall_s}};
      out << ej.dump() << '\n';
    }
    if (record.complete) {
      json sj{{"type", "summary"},
              {"best_acc", record.best_acc},
              {"best_loss", record.best_loss},
              {"pipeline_hash", hash_hex(record.pipeline_hash)},
              {"shrink",
               {{"applied_steps", record.shrink.applied_steps},
                {"total_steps", record.shrink.total_steps},
                {"c_min", record.shrink.c_min},
                {"c_max", record.shrink.c_max}}},
              {"complete", true}};
      out << sj.dump() << '\n';
    }
    if (!out) {
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::optional<RunRecord> read_record(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  RunRecord rec;
  bool saw_config = false;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "config") {
        rec.cell = cell_from_json(j.at("cell"));
        rec.precision = j.at("precision").get<std::string>();
        rec.epochs_planned = j.at("epochs_planned").get<int>();
        saw_config = true;
      } else if (type == "epoch") {
        EpochMetric e;
        e.epoch = j.at("epoch").get<int>();
        e.train_loss = j.at("train_loss").get<double>();
        e.test_loss = j.at("test_loss").get<double>();
        e.test_acc = j.at("test_acc").get<double>();
        e.wall_s = j.at("wall_s").get<double>();
        rec.epochs.push_back(e);
      } else if (type == "summary") {
        rec.best_acc = j.at("best_acc").get<double>();
        rec.best_loss = j.at("best_loss").get<double>();
        rec.pipeline_hash = hash_from_hex(j.at("pipeline_hash").get<std::string>());
        const auto& sh = j.at("shrink");
        rec.shrink.applied_steps = sh.at("applied_steps").get<std::int64_t>();
        rec.shrink.total_steps = sh.at("total_steps").get<std::int64_t>();
        rec.shrink.c_min = sh.at("c_min").get<double>();
        rec.shrink.c_max = sh.at("c_max").get<double>();
        rec.complete = j.at("complete").get<bool>();
      }
    }
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (!saw_config) return std::nullopt;
  if (rec.complete &&
      rec.epochs.size() != static_cast<std::size_t>(rec.epochs_planned)) {
    // Summary present but epochs missing: treat as damaged, redo.
    rec.complete = false;
  }
  return rec;
}

LoadResult load_records(const std::filesystem::path& dir) {
  LoadResult res;
  const std::filesystem::path rec_dir = dir / "records";
  if (!std::filesystem::is_directory(rec_dir)) return res;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(rec_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto rec = read_record(f);
    if (!rec) {
      ++res.unreadable;
      continue;
    }
    if (!rec->complete) {
      ++res.incomplete;
      continue;
    }
    res.records.push_back(std::move(*rec));
  }
  return res;
}

void append_manifest(const std::filesystem::path& dir, const RunRecord& record) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "manifest.jsonl", std::ios::app);
  if (!out) {
    throw std::runtime_error("cannot append manifest in " + dir.string());
  }
  json j{{"key", record.cell.to_string()},
         {"file", "records/" + record.cell.to_string() + ".jsonl"},
         {"best_acc", record.best_acc},
         {"best_loss", record.best_loss},
         {"epochs", record.epochs.size()},
         {"pipeline_hash", hash_hex(record.pipeline_hash)}};
  out << j.dump() << '\n';
}

}  // namespace sradam::bench
