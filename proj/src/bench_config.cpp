#include "sradam/bench/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sradam::bench {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& why) {
  throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " + why);
}

double to_double(const std::string& s, const std::string& origin, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(origin, line, "not a number: '" + s + "'");
  }
}

std::int64_t to_int(const std::string& s, const std::string& origin, int line) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(origin, line, "not an integer: '" + s + "'");
  }
}

bool to_bool(const std::string& s, const std::string& origin, int line) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(origin, line, "not a boolean: '" + s + "'");
}

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& why) {
    if (!ok) throw std::invalid_argument("RunConfig: " + why);
  };
  need(!datasets.empty(), "no datasets");
  need(!models.empty(), "no models");
  need(!optimizers.empty(), "no optimizers");
  need(!noise_stds.empty(), "no noise levels");
  need(!batch_sizes.empty(), "no batch sizes");
  need(!seeds.empty(), "no seeds");
  need(epochs >= 1, "epochs must be >= 1");
  need(synth_train >= 1 && synth_test >= 1, "synthetic sizes must be positive");
  need(precision == "float" || precision == "double",
       "precision must be float or double");
  for (double nstd : noise_stds) {
    need(nstd >= 0.0 && std::isfinite(nstd), "noise std must be >= 0");
  }
  for (int b : batch_sizes) need(b >= 1, "batch size must be >= 1");
  for (const auto& opt : optimizers) parse_optimizer_id(opt);
  for (const auto& m : models) {
    need(m == "simple_cnn" || m == "mlp" || m == "logistic",
         "unknown model '" + m + "'");
  }
  for (const auto& d : datasets) {
    need(d == "synth10" || d == "synthvec" || d == "cifar10" || d == "cifar100",
         "unknown dataset '" + d + "'");
  }
  // Full OptimConfig validation, once per optimizer id.
  for (const auto& opt : optimizers) optim_config_for(*this, opt).validate();
}

RunConfig parse_config_text(std::string_view text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, lineno, "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) fail(origin, lineno, "empty value for '" + key + "'");

    if (key == "dataset" || key == "datasets") {
      cfg.datasets = split_list(val);
    } else if (key == "model" || key == "models") {
      cfg.models = split_list(val);
    } else if (key == "optimizer" || key == "optimizers") {
      cfg.optimizers = split_list(val);
    } else if (key == "noise") {
      cfg.noise_stds.clear();
      for (const auto& s : split_list(val))
        cfg.noise_stds.push_back(to_double(s, origin, lineno));
    } else if (key == "batch_size" || key == "batch_sizes") {
      cfg.batch_sizes.clear();
      for (const auto& s : split_list(val))
        cfg.batch_sizes.push_back(static_cast<int>(to_int(s, origin, lineno)));
    } else if (key == "seeds" || key == "seed") {
      cfg.seeds.clear();
      for (const auto& s : split_list(val))
        cfg.seeds.push_back(static_cast<std::uint64_t>(to_int(s, origin, lineno)));
    } else if (key == "epochs") {
      cfg.epochs = static_cast<int>(to_int(val, origin, lineno));
    } else if (key == "out") {
      cfg.out_dir = val;
    } else if (key == "data_dir") {
      cfg.data_dir = val;
    } else if (key == "precision") {
      cfg.precision = val;
    } else if (key == "synth_train") {
      cfg.synth_train = static_cast<int>(to_int(val, origin, lineno));
    } else if (key == "synth_test") {
      cfg.synth_test = static_cast<int>(to_int(val, origin, lineno));
    } else if (key == "alpha") {
      cfg.alpha = to_double(val, origin, lineno);
    } else if (key == "beta1") {
      cfg.beta1 = to_double(val, origin, lineno);
    } else if (key == "beta2") {
      cfg.beta2 = to_double(val, origin, lineno);
    } else if (key == "eps") {
      cfg.eps = to_double(val, origin, lineno);
    } else if (key == "weight_decay") {
      cfg.weight_decay = to_double(val, origin, lineno);
    } else if (key == "tau") {
      cfg.tau = to_int(val, origin, lineno);
    } else if (key == "bias_correction") {
      cfg.bias_correction = to_bool(val, origin, lineno) ? 1 : 0;
    } else if (key == "v_uses_raw_grad") {
      cfg.v_uses_raw_grad = to_bool(val, origin, lineno);
    } else if (key == "clip_floor") {
      cfg.clip_floor = to_double(val, origin, lineno);
    } else if (key == "clip_ceil") {
      cfg.clip_ceil = to_double(val, origin, lineno);
    } else if (key == "whiten") {
      cfg.whiten = to_bool(val, origin, lineno);
    } else if (key == "min_dim") {
      cfg.min_dim = static_cast<std::size_t>(to_int(val, origin, lineno));
    } else if (key == "sgd_alpha") {
      cfg.sgd_alpha = to_double(val, origin, lineno);
    } else if (key == "momentum_alpha") {
      cfg.momentum_alpha = to_double(val, origin, lineno);
    } else if (key == "momentum_mu") {
      cfg.momentum_mu = to_double(val, origin, lineno);
    } else {
      fail(origin, lineno, "unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string CellKey::to_string() const {
  return dataset + "__" + model + "__" + optimizer + "__n" + fmt_g(noise) +
         "__b" + std::to_string(batch_size) + "__s" + std::to_string(seed);
}

std::vector<CellKey> expand_grid(const RunConfig& cfg) {
  std::vector<CellKey> cells;
  for (const auto& d : cfg.datasets)
    for (const auto& m : cfg.models)
      for (const auto& o : cfg.optimizers)
        for (double nstd : cfg.noise_stds)
          for (int b : cfg.batch_sizes)
            for (std::uint64_t s : cfg.seeds)
              cells.push_back(CellKey{d, m, o, nstd, b, s});
  return cells;
}

OptimizerId parse_optimizer_id(const std::string& id) {
  if (id == "sgd") return {OptimizerKind::Sgd, Scope::None, true};
  if (id == "momentum") return {OptimizerKind::Momentum, Scope::None, true};
  if (id == "adam") return {OptimizerKind::Adam, Scope::None, true};
  if (id == "sr_adam") return {OptimizerKind::SrAdam, Scope::ConvOnly, false};
  if (id == "sr_adam_all") return {OptimizerKind::SrAdam, Scope::AllWeights, false};
  if (id == "sr_adam_none") return {OptimizerKind::SrAdam, Scope::None, false};
  throw std::invalid_argument("unknown optimizer '" + id + "'");
}

OptimConfig optim_config_for(const RunConfig& cfg, const std::string& id) {
  const OptimizerId oid = parse_optimizer_id(id);
  OptimConfig oc;
  oc.beta1 = cfg.beta1;
  oc.beta2 = cfg.beta2;
  oc.eps = cfg.eps;
  oc.weight_decay = cfg.weight_decay;
  oc.tau = cfg.tau;
  oc.v_uses_raw_grad = cfg.v_uses_raw_grad;
  oc.scope = oid.scope;
  oc.bias_correction =
      cfg.bias_correction < 0 ? oid.bias_correction : cfg.bias_correction != 0;
  oc.shrinkage.clip_floor = cfg.clip_floor;
  oc.shrinkage.clip_ceil = cfg.clip_ceil;
  oc.shrinkage.whiten = cfg.whiten;
  oc.shrinkage.min_dim = cfg.min_dim;
  oc.momentum = cfg.momentum_mu;
  switch (oid.kind) {
    case OptimizerKind::Sgd:
      oc.alpha = cfg.sgd_alpha;
      break;
    case OptimizerKind::Momentum:
      oc.alpha = cfg.momentum_alpha;
      break;
    case OptimizerKind::Adam:
    case OptimizerKind::SrAdam:
      oc.alpha = cfg.alpha;
      break;
  }
  return oc;
}

}  // namespace sradam::bench
