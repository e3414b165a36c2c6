#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sradam/optim.hpp"

namespace sradam::bench {

/// Fully expanded experiment description. List-valued fields span a grid;
/// scalars apply to every cell.
struct RunConfig {
  std::vector<std::string> datasets = {"synth10"};
  std::vector<std::string> models = {"simple_cnn"};
  std::vector<std::string> optimizers = {"adam", "sr_adam"};
  std::vector<double> noise_stds = {0.0};
  std::vector<int> batch_sizes = {512};
  std::vector<std::uint64_t> seeds = {1};
  int epochs = 5;
  std::string out_dir = "runs";
  std::string data_dir = "data";
  std::string precision = "float";  ///< float | double
  int synth_train = 5000;
  int synth_test = 1000;

  // Adam-family knobs.
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::int64_t tau = 10;
  int bias_correction = -1;  ///< -1 per-optimizer default, else forced 0/1
  bool v_uses_raw_grad = false;

  // Shrinkage knobs.
  double clip_floor = 0.1;
  double clip_ceil = 1.0;
  bool whiten = true;
  std::size_t min_dim = 3;

  // Plain-SGD and heavy-ball knobs.
  double sgd_alpha = 0.05;
  double momentum_alpha = 0.05;
  double momentum_mu = 0.9;

  void validate() const;
};

/// Key=value format, one pair per line, '#' comments, commas make lists.
/// Unknown keys are errors.
RunConfig parse_config_text(std::string_view text,
                            const std::string& origin = "<string>");
RunConfig parse_config_file(const std::filesystem::path& path);

/// One cell of the experiment grid.
struct CellKey {
  std::string dataset;
  std::string model;
  std::string optimizer;
  double noise = 0.0;
  int batch_size = 512;
  std::uint64_t seed = 1;

  /// Filesystem-safe, e.g. synth10__simple_cnn__adam__n0.05__b512__s1.
  std::string to_string() const;
};

/// Cartesian product in dataset, model, optimizer, noise, batch, seed order.
std::vector<CellKey> expand_grid(const RunConfig& cfg);

/// Optimizer id: sgd | momentum | adam | sr_adam | sr_adam_all | sr_adam_none.
/// The suffix picks the shrinkage scope; plain Adam debiases moments while
/// the shrunk variants run raw EMAs unless bias_correction is forced.
struct OptimizerId {
  OptimizerKind kind = OptimizerKind::Adam;
  Scope scope = Scope::None;
  bool bias_correction = true;
};

OptimizerId parse_optimizer_id(const std::string& id);

/// Assembles the per-cell OptimConfig for an optimizer id.
OptimConfig optim_config_for(const RunConfig& cfg, const std::string& id);

}  // namespace sradam::bench
