#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "sradam/bench/aggregate.hpp"
#include "sradam/bench/config.hpp"
#include "sradam/bench/plots.hpp"
#include "sradam/bench/record.hpp"
#include "sradam/bench/report.hpp"
#include "sradam/bench/runner.hpp"

using namespace sradam;
using namespace sradam::bench;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("sradam_bench_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunRecord fake_record(const std::string& optimizer, std::uint64_t seed,
                      double acc, double loss, int epochs = 2) {
  RunRecord r;
  r.cell = CellKey{"synthvec", "logistic", optimizer, 0.0, 64, seed};
  r.precision = "double";
  r.epochs_planned = epochs;
  for (int e = 1; e <= epochs; ++e) {
    EpochMetric m;
    m.epoch = e;
    m.train_loss = loss + 0.1 * (epochs - e);
    m.test_loss = loss + 0.05 * (epochs - e);
    m.test_acc = acc - 0.01 * (epochs - e);
    m.wall_s = 0.5;
    r.epochs.push_back(m);
    r.best_acc = std::max(r.best_acc, m.test_acc);
    r.best_loss = std::min(r.best_loss, m.test_loss);
  }
  r.pipeline_hash = 0xabcdef0123456789ull ^ seed;
  r.complete = true;
  return r;
}

}  // namespace

TEST_CASE("config text parses lists, scalars, comments") {
  const char* text = R"(
# experiment grid
dataset = synthvec, synth10
optimizer = adam, sr_adam, sgd
noise = 0, 0.05
batch_size = 64
seeds = 1, 2, 3
epochs = 3
precision = double
alpha = 0.002
tau = 7
whiten = false
out = /tmp/xyz
)";
  auto cfg = parse_config_text(text);
  CHECK(cfg.datasets == std::vector<std::string>{"synthvec", "synth10"});
  CHECK(cfg.optimizers == std::vector<std::string>{"adam", "sr_adam", "sgd"});
  CHECK(cfg.noise_stds == std::vector<double>{0.0, 0.05});
  CHECK(cfg.batch_sizes == std::vector<int>{64});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(cfg.epochs == 3);
  CHECK(cfg.precision == "double");
  CHECK(cfg.alpha == doctest::Approx(0.002));
  CHECK(cfg.tau == 7);
  CHECK_FALSE(cfg.whiten);
  CHECK(cfg.out_dir == "/tmp/xyz");
}

TEST_CASE("unknown keys and bad values are rejected with context") {
  bool threw = false;
  try {
    parse_config_text("bogus_key = 1\n", "test.cfg");
  } catch (const std::invalid_argument& e) {
    threw = true;
    CHECK(std::string(e.what()).find("test.cfg:1") != std::string::npos);
  }
  CHECK(threw);
  CHECK_THROWS_AS(parse_config_text("epochs = zero\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("optimizer = warp_drive\n").validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("precision = half\n").validate(),
                  std::invalid_argument);
}

TEST_CASE("grid expansion is a full cartesian product in fixed order") {
  RunConfig cfg;
  cfg.datasets = {"synthvec"};
  cfg.models = {"logistic"};
  cfg.optimizers = {"adam", "sr_adam"};
  cfg.noise_stds = {0.0, 0.1};
  cfg.batch_sizes = {32};
  cfg.seeds = {1, 2};
  auto cells = expand_grid(cfg);
  REQUIRE(cells.size() == 8);
  CHECK(cells[0].optimizer == "adam");
  CHECK(cells[0].noise == 0.0);
  CHECK(cells[0].seed == 1);
  CHECK(cells[1].seed == 2);  // seed varies fastest
  CHECK(cells[2].noise == 0.1);
  CHECK(cells[4].optimizer == "sr_adam");
  CHECK(cells[0].to_string() == "synthvec__logistic__adam__n0__b32__s1");
  CHECK(cells[2].to_string() == "synthvec__logistic__adam__n0.1__b32__s1");
}

TEST_CASE("optimizer ids map to kind, scope, and debias defaults") {
  auto adam = parse_optimizer_id("adam");
  CHECK(adam.kind == OptimizerKind::Adam);
  CHECK(adam.bias_correction);

  auto sr = parse_optimizer_id("sr_adam");
  CHECK(sr.kind == OptimizerKind::SrAdam);
  CHECK(sr.scope == Scope::ConvOnly);
  CHECK_FALSE(sr.bias_correction);

  auto sr_all = parse_optimizer_id("sr_adam_all");
  CHECK(sr_all.scope == Scope::AllWeights);

  auto sr_none = parse_optimizer_id("sr_adam_none");
  CHECK(sr_none.kind == OptimizerKind::SrAdam);
  CHECK(sr_none.scope == Scope::None);

  CHECK(parse_optimizer_id("sgd").kind == OptimizerKind::Sgd);
  CHECK(parse_optimizer_id("momentum").kind == OptimizerKind::Momentum);
  CHECK_THROWS_AS(parse_optimizer_id("adamw"), std::invalid_argument);

  RunConfig cfg;
  cfg.bias_correction = 1;  // force debiasing everywhere
  auto oc = optim_config_for(cfg, "sr_adam");
  CHECK(oc.bias_correction);
  cfg.bias_correction = -1;
  auto oc2 = optim_config_for(cfg, "sr_adam");
  CHECK_FALSE(oc2.bias_correction);
  auto oc3 = optim_config_for(cfg, "sgd");
  CHECK(oc3.alpha == doctest::Approx(cfg.sgd_alpha));
}

TEST_CASE("records round-trip through the jsonl file") {
  auto dir = fresh_dir("roundtrip");
  auto rec = fake_record("adam", 3, 0.91, 0.42);
  rec.shrink.applied_steps = 7;
  rec.shrink.total_steps = 40;
  rec.shrink.c_min = 0.37;
  rec.shrink.c_max = 0.99;
  write_record(dir, rec);

  auto file = record_path(dir, rec.cell);
  REQUIRE(fs::exists(file));
  auto back = read_record(file);
  REQUIRE(back.has_value());
  CHECK(back->cell.dataset == "synthvec");
  CHECK(back->cell.optimizer == "adam");
  CHECK(back->cell.seed == 3);
  CHECK(back->precision == "double");
  CHECK(back->epochs_planned == 2);
  REQUIRE(back->epochs.size() == 2);
  CHECK(back->epochs[1].test_acc == doctest::Approx(rec.epochs[1].test_acc));
  CHECK(back->best_acc == doctest::Approx(rec.best_acc));
  CHECK(back->pipeline_hash == rec.pipeline_hash);
  CHECK(back->shrink.applied_steps == 7);
  CHECK(back->shrink.c_min == doctest::Approx(0.37));
  CHECK(back->complete);

  // No stray temp files left behind.
  int files = 0;
  for (auto& e : fs::directory_iterator(dir / "records")) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  fs::remove_all(dir);
}

TEST_CASE("a record without its summary line reads as incomplete") {
  auto dir = fresh_dir("truncated");
  auto rec = fake_record("adam", 1, 0.9, 0.5);
  write_record(dir, rec);
  auto file = record_path(dir, rec.cell);

  // Drop the last line to simulate a killed run.
  std::ifstream in(file);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();
  auto cut = text.find_last_of('\n', text.size() - 2);
  std::ofstream out(file, std::ios::trunc);
  out << text.substr(0, cut + 1);
  out.close();

  auto back = read_record(file);
  REQUIRE(back.has_value());
  CHECK_FALSE(back->complete);

  auto loaded = load_records(dir);
  CHECK(loaded.records.empty());
  CHECK(loaded.incomplete == 1);
  fs::remove_all(dir);
}

TEST_CASE("garbage files count as unreadable") {
  auto dir = fresh_dir("garbage");
  fs::create_directories(dir / "records");
  std::ofstream(dir / "records" / "junk.jsonl") << "not json at all\n";
  auto loaded = load_records(dir);
  CHECK(loaded.records.empty());
  CHECK(loaded.unreadable == 1);
  fs::remove_all(dir);
}

TEST_CASE("aggregation averages over seeds and flags winners") {
  std::vector<RunRecord> recs;
  recs.push_back(fake_record("adam", 1, 0.80, 0.50));
  recs.push_back(fake_record("adam", 2, 0.82, 0.48));
  recs.push_back(fake_record("sr_adam", 1, 0.85, 0.44));
  recs.push_back(fake_record("sr_adam", 2, 0.87, 0.42));

  auto rows = aggregate(recs);
  REQUIRE(rows.size() == 2);
  // Sorted by key: adam before sr_adam.
  CHECK(rows[0].key.optimizer == "adam");
  CHECK(rows[0].n_seeds == 2);
  CHECK(rows[0].acc_mean == doctest::Approx(0.81));
  CHECK(rows[0].acc_std == doctest::Approx(std::sqrt(0.0002)));
  CHECK(rows[1].key.optimizer == "sr_adam");
  CHECK(rows[1].best_acc_in_slice);
  CHECK(rows[1].best_loss_in_slice);
  CHECK_FALSE(rows[0].best_acc_in_slice);

  std::ostringstream csv;
  write_aggregate_csv(csv, rows);
  CHECK(csv.str().find("dataset,model,optimizer,noise,batch_size,n_seeds") !=
        std::string::npos);
  auto md = render_aggregate_markdown(rows);
  CHECK(md.find("**") != std::string::npos);  // winners set in bold
}

TEST_CASE("paired comparison runs the t-test over common seeds") {
  std::vector<RunRecord> recs;
  for (std::uint64_t s : {1u, 2u, 3u, 4u}) {
    recs.push_back(fake_record("adam", s, 0.80 + 0.002 * s, 0.50));
    recs.push_back(
        fake_record("sr_adam", s, 0.84 + 0.003 * s, 0.45));
  }
  // A seed only one side has must be ignored.
  recs.push_back(fake_record("adam", 9, 0.99, 0.1));

  auto rows = paired_compare(recs, "adam", "sr_adam");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n == 4);
  CHECK(rows[0].opt_a == "adam");
  CHECK(rows[0].acc_mean_b > rows[0].acc_mean_a);
  CHECK(rows[0].acc_test.mean_diff > 0.0);
  CHECK(rows[0].acc_test.p < 0.05);  // consistent gap, tiny spread

  // Fewer than two common seeds: no row.
  std::vector<RunRecord> thin;
  thin.push_back(fake_record("adam", 1, 0.8, 0.5));
  thin.push_back(fake_record("sr_adam", 1, 0.9, 0.4));
  CHECK(paired_compare(thin, "adam", "sr_adam").empty());
}

TEST_CASE("epoch curves average per epoch across seeds") {
  std::vector<RunRecord> recs;
  recs.push_back(fake_record("adam", 1, 0.80, 0.50, 3));
  recs.push_back(fake_record("adam", 2, 0.84, 0.46, 3));
  auto curves = epoch_curves(recs);
  REQUIRE(curves.size() == 1);
  REQUIRE(curves[0].points.size() == 3);
  CHECK(curves[0].points[0].epoch == 1);
  // Epoch 3 accs are 0.80 and 0.84.
  CHECK(curves[0].points[2].acc_mean == doctest::Approx(0.82));
  CHECK(curves[0].points[2].acc_std > 0.0);
}

TEST_CASE("svg charts are written with labels, series, and band") {
  auto dir = fresh_dir("svg");
  Series s;
  s.label = "adam";
  s.x = {1.0, 2.0, 3.0};
  s.y = {0.9, 0.7, 0.6};
  s.y_lo = {0.85, 0.65, 0.55};
  s.y_hi = {0.95, 0.75, 0.65};
  std::vector<Series> all{s};
  auto path = dir / "chart.svg";
  write_line_chart_svg(path, "loss over epochs", "epoch", "loss", all);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("loss over epochs") != std::string::npos);
  CHECK(text.find("polyline") != std::string::npos);
  CHECK(text.find("polygon") != std::string::npos);  // error band
  CHECK(text.find("adam") != std::string::npos);

  std::vector<Bar> bars{{"adam", 0.8, 0.02}, {"sr_adam", 0.85, 0.01}};
  auto bpath = dir / "bars.svg";
  write_bar_chart_svg(bpath, "best accuracy", "accuracy", bars);
  std::ifstream bin(bpath);
  std::string btext((std::istreambuf_iterator<char>(bin)),
                    std::istreambuf_iterator<char>());
  CHECK(btext.find("<rect") != std::string::npos);
  CHECK(btext.find("sr_adam") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("plot emission writes svg and csv sidecars per slice") {
  auto dir = fresh_dir("plots");
  std::vector<RunRecord> recs;
  recs.push_back(fake_record("adam", 1, 0.80, 0.50, 3));
  recs.push_back(fake_record("sr_adam", 1, 0.85, 0.45, 3));
  auto files = emit_plots(recs, dir);
  CHECK(files.size() >= 4);  // loss svg+csv, acc svg+csv
  for (const auto& f : files) {
    CHECK(fs::exists(dir / f));
  }
  bool has_loss_svg = false, has_acc_csv = false;
  for (const auto& f : files) {
    if (f.find("loss__") != std::string::npos && f.ends_with(".svg")) {
      has_loss_svg = true;
    }
    if (f.find("acc__") != std::string::npos && f.ends_with(".csv")) {
      has_acc_csv = true;
    }
  }
  CHECK(has_loss_svg);
  CHECK(has_acc_csv);
  fs::remove_all(dir);
}

TEST_CASE("report assembles counts, tables, and links") {
  auto dir = fresh_dir("report");
  std::vector<RunRecord> recs;
  for (std::uint64_t s : {1u, 2u, 3u}) {
    recs.push_back(fake_record("adam", s, 0.80 + 0.01 * s, 0.50));
    auto sr = fake_record("sr_adam", s, 0.84 + 0.01 * s, 0.45);
    sr.shrink.applied_steps = 10;
    sr.shrink.total_steps = 100;
    sr.shrink.c_min = 0.3;
    sr.shrink.c_max = 0.9;
    recs.push_back(sr);
  }
  for (const auto& r : recs) write_record(dir, r);

  auto report = write_report(dir);
  REQUIRE(fs::exists(report));
  std::ifstream in(report);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("adam") != std::string::npos);
  CHECK(text.find("sr_adam") != std::string::npos);
  CHECK(text.find("| ") != std::string::npos);       // markdown tables
  CHECK(text.find(".svg") != std::string::npos);     // plot links
  CHECK(fs::exists(dir / "aggregate.csv"));
  CHECK(fs::exists(dir / "ttests.csv"));

  // Empty directory: loading finds nothing and reporting refuses.
  auto empty = fresh_dir("report_empty");
  CHECK_THROWS_AS(write_report(empty), std::runtime_error);
  fs::remove_all(dir);
  fs::remove_all(empty);
}

TEST_CASE("single training run is deterministic end to end") {
  RunConfig cfg;
  cfg.datasets = {"synthvec"};
  cfg.models = {"logistic"};
  cfg.optimizers = {"adam"};
  cfg.precision = "double";
  cfg.epochs = 2;
  cfg.synth_train = 200;
  cfg.synth_test = 50;
  cfg.batch_sizes = {50};

  CellKey cell{"synthvec", "logistic", "adam", 0.0, 50, 7};
  auto a = train_single_run(cfg, cell);
  auto b = train_single_run(cfg, cell);
  CHECK(a.complete);
  REQUIRE(a.epochs.size() == 2);
  CHECK(a.pipeline_hash == b.pipeline_hash);
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    CHECK(a.epochs[e].train_loss == b.epochs[e].train_loss);
    CHECK(a.epochs[e].test_loss == b.epochs[e].test_loss);
    CHECK(a.epochs[e].test_acc == b.epochs[e].test_acc);
  }
  // Loss should actually drop on this separable toy problem.
  CHECK(a.epochs.back().train_loss < a.epochs.front().train_loss);
  CHECK(a.best_acc > 0.25);  // 10 classes: chance is 0.1

  // A different seed changes the pipeline (init + shuffles).
  CellKey cell2 = cell;
  cell2.seed = 8;
  auto c = train_single_run(cfg, cell2);
  CHECK(c.pipeline_hash != a.pipeline_hash);
}

TEST_CASE("pipeline hash is optimizer-independent") {
  RunConfig cfg;
  cfg.datasets = {"synthvec"};
  cfg.models = {"mlp"};
  cfg.optimizers = {"adam", "sr_adam_all", "sgd"};
  cfg.precision = "double";
  cfg.epochs = 1;
  cfg.synth_train = 120;
  cfg.synth_test = 40;
  cfg.batch_sizes = {40};
  cfg.tau = 0;

  CellKey base{"synthvec", "mlp", "adam", 0.05, 40, 3};
  auto a = train_single_run(cfg, base);
  CellKey sr = base;
  sr.optimizer = "sr_adam_all";
  auto b = train_single_run(cfg, sr);
  CellKey sg = base;
  sg.optimizer = "sgd";
  auto c = train_single_run(cfg, sg);
  CHECK(a.pipeline_hash == b.pipeline_hash);
  CHECK(a.pipeline_hash == c.pipeline_hash);
  // The shrunk run past warm-up actually shrank something.
  CHECK(b.shrink.applied_steps > 0);
  CHECK(b.shrink.c_min >= cfg.clip_floor);
  CHECK(b.shrink.c_max <= cfg.clip_ceil);
}

TEST_CASE("grid runner writes records and resumes by skipping") {
  auto dir = fresh_dir("grid");
  RunConfig cfg;
  cfg.datasets = {"synthvec"};
  cfg.models = {"logistic"};
  cfg.optimizers = {"adam", "sr_adam_all"};
  cfg.precision = "double";
  cfg.epochs = 1;
  cfg.synth_train = 120;
  cfg.synth_test = 40;
  cfg.batch_sizes = {40};
  cfg.seeds = {1, 2};
  cfg.out_dir = dir.string();

  GridOptions opts;
  opts.jobs = 2;
  auto first = run_grid(cfg, opts);
  CHECK(first.completed == 4);
  CHECK(first.skipped == 0);
  CHECK(first.failed == 0);

  auto loaded = load_records(dir);
  CHECK(loaded.records.size() == 4);
  CHECK(fs::exists(dir / "manifest.jsonl"));

  // Second invocation: every cell is already complete.
  auto second = run_grid(cfg, opts);
  CHECK(second.completed == 0);
  CHECK(second.skipped == 4);

  // Changing the epoch budget invalidates the resume match.
  cfg.epochs = 2;
  auto third = run_grid(cfg, opts);
  CHECK(third.completed == 4);
  CHECK(third.skipped == 0);
  fs::remove_all(dir);
}
