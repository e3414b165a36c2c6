#include "sradam/bench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>

#include "sradam/data.hpp"
#include "sradam/model.hpp"

namespace sradam::bench {

namespace {

template <class T>
struct Pack {
  Dataset<T> train;
  Dataset<T> test;
};

// Synthetic content depends on the dataset id only: every optimizer and
// every seed trains on the same samples.
template <class T>
Pack<T> load_pack(const RunConfig& cfg, const std::string& id) {
  const std::uint64_t dseed = fnv1a64("dataset:" + id);
  const std::size_t total =
      static_cast<std::size_t>(cfg.synth_train) + cfg.synth_test;
  if (id == "synth10") {
    auto [train, test] = split_dataset(
        synth_image_dataset<T>(total, 3, 32, 32, 10, dseed),
        static_cast<std::size_t>(cfg.synth_train));
    return {std::move(train), std::move(test)};
  }
  if (id == "synthvec") {
    auto [train, test] =
        split_dataset(synth_vector_dataset<T>(total, 64, 10, dseed),
                      static_cast<std::size_t>(cfg.synth_train));
    return {std::move(train), std::move(test)};
  }
  if (id == "cifar10") {
    auto [train, test] = load_cifar10<T>(cfg.data_dir);
    return {std::move(train), std::move(test)};
  }
  if (id == "cifar100") {
    auto [train, test] = load_cifar100<T>(cfg.data_dir);
    return {std::move(train), std::move(test)};
  }
  throw std::invalid_argument("unknown dataset '" + id + "'");
}

template <class T>
ModelSpec model_for(const std::string& model, const Dataset<T>& train) {
  const int K = train.num_classes;
  if (model == "simple_cnn") {
    if (train.inputs.h != train.inputs.w || train.inputs.h % 4 != 0) {
      throw std::invalid_argument("simple_cnn needs square input, side % 4 == 0");
    }
    return ModelSpec::simple_cnn(train.inputs.c, train.inputs.h, K);
  }
  if (model == "mlp") {
    return ModelSpec::mlp(train.inputs.features(), 128, K);
  }
  if (model == "logistic") {
    return ModelSpec::logistic(train.inputs.features(), K);
  }
  throw std::invalid_argument("unknown model '" + model + "'");
}

template <class T>
std::pair<double, double> evaluate(const ModelSpec& spec,
                                   std::span<const ParamVector> params,
                                   const Dataset<T>& test,
                                   const NoiseSpec& noise, const Rng& root,
                                   int epoch) {
  const Params<T> pt = cast_params<T>(params);
  constexpr std::size_t kEvalBatch = 1024;
  double loss_sum = 0.0;
  double hit_sum = 0.0;
  std::vector<std::size_t> idx;
  int bi = 0;
  for (std::size_t off = 0; off < test.size(); off += kEvalBatch, ++bi) {
    const std::size_t m = std::min(kEvalBatch, test.size() - off);
    idx.resize(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = off + i;
    Batch<T> batch = take_batch(test, idx);
    Rng noise_rng = root.child("noise:test:" + std::to_string(epoch) + ":" +
                               std::to_string(bi));
    batch = inject_noise(batch, noise, noise_rng);
    const auto cache = forward(spec, pt, batch.inputs, Mode::Eval);
    const auto& logits = cache.logits();
    loss_sum += cross_entropy(logits, batch.labels) * static_cast<double>(m);
    hit_sum += accuracy(logits, batch.labels) * static_cast<double>(m);
  }
  const double n = static_cast<double>(test.size());
  return {loss_sum / n, hit_sum / n};
}

template <class T>
RunRecord run_one(const RunConfig& cfg, const CellKey& cell,
                  const Pack<T>& pack) {
  const ModelSpec spec = model_for(cell.model, pack.train);
  const OptimizerId oid = parse_optimizer_id(cell.optimizer);
  const OptimConfig ocfg = optim_config_for(cfg, cell.optimizer);

  const Rng root(cell.seed);
  Rng init_rng = root.child("init");
  std::vector<ParamVector> params = init_params(spec, init_rng);

  // Fairness hash: everything the data pipeline feeds the optimizer, and
  // nothing the optimizer feeds back. Identical across optimizer ids.
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const auto& pv : params) {
    hash = fnv1a64(pv.values().data(), pv.size() * sizeof(double), hash);
  }

  Optimizer optim(oid.kind, ocfg, spec.param_groups());

  RunRecord rec;
  rec.cell = cell;
  rec.precision = std::is_same_v<T, float> ? "float" : "double";
  rec.epochs_planned = cfg.epochs;

  const NoiseSpec noise{cell.noise};
  const std::size_t n_train = pack.train.size();
  const std::size_t bs = static_cast<std::size_t>(cell.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng = root.child("shuffle:" + std::to_string(epoch));
    const std::vector<std::size_t> perm = shuffled_indices(n_train, shuffle_rng);
    hash = fnv1a64(perm.data(), perm.size() * sizeof(std::size_t), hash);

    double loss_sum = 0.0;
    int bi = 0;
    for (std::size_t off = 0; off < n_train; off += bs, ++bi) {
      const std::size_t m = std::min(bs, n_train - off);
      Batch<T> batch =
          take_batch(pack.train, std::span(perm).subspan(off, m));

      const std::string batch_tag =
          std::to_string(epoch) + ":" + std::to_string(bi);
      Rng noise_rng = root.child("noise:train:" + batch_tag);
      const std::uint64_t nseed = noise_rng.seed();
      hash = fnv1a64(&nseed, sizeof(nseed), hash);
      batch = inject_noise(batch, noise, noise_rng);

      Rng drop_rng = root.child("drop:" + batch_tag);
      const Params<T> pt = cast_params<T>(params);
      const LossGrad lg =
          loss_and_grad(spec, pt, batch.inputs, batch.labels, &drop_rng);
      const auto traces = optim.step(params, lg.grads);

      for (const auto& tr : traces) {
        ++rec.shrink.total_steps;
        if (tr.shrinkage.applied) {
          ++rec.shrink.applied_steps;
          rec.shrink.c_min = std::min(rec.shrink.c_min, tr.shrinkage.c_clipped);
          rec.shrink.c_max = std::max(rec.shrink.c_max, tr.shrinkage.c_clipped);
        }
      }
      loss_sum += lg.loss * static_cast<double>(m);
    }

    const auto [test_loss, test_acc] =
        evaluate(spec, params, pack.test, noise, root, epoch);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    rec.epochs.push_back(EpochMetric{epoch,
                                     loss_sum / static_cast<double>(n_train),
                                     test_loss, test_acc, wall});
  }

  for (const auto& e : rec.epochs) {
    rec.best_acc = std::max(rec.best_acc, e.test_acc);
    rec.best_loss = std::min(rec.best_loss, e.test_loss);
  }
  rec.pipeline_hash = hash;
  rec.complete = true;
  return rec;
}

template <class T>
GridOutcome run_grid_impl(const RunConfig& cfg, const GridOptions& opts) {
  const std::filesystem::path out_dir = cfg.out_dir;
  std::filesystem::create_directories(out_dir / "records");

  GridOutcome out;
  std::vector<CellKey> todo;
  for (const auto& cell : expand_grid(cfg)) {
    if (opts.resume) {
      const auto existing = read_record(record_path(out_dir, cell));
      if (existing && existing->complete &&
          existing->epochs_planned == cfg.epochs) {
        ++out.skipped;
        continue;
      }
    }
    todo.push_back(cell);
  }
  if (todo.empty()) return out;

  std::map<std::string, Pack<T>> packs;
  std::mutex pack_mu;
  auto get_pack = [&](const std::string& id) -> const Pack<T>& {
    std::lock_guard lock(pack_mu);
    auto it = packs.find(id);
    if (it == packs.end()) {
      it = packs.emplace(id, load_pack<T>(cfg, id)).first;
    }
    return it->second;
  };

  std::atomic<std::size_t> next{0};
  std::mutex io_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) break;
      const CellKey& cell = todo[i];
      try {
        const Pack<T>& pack = get_pack(cell.dataset);
        RunRecord rec = run_one<T>(cfg, cell, pack);
        std::lock_guard lock(io_mu);
        write_record(out_dir, rec);
        append_manifest(out_dir, rec);
        ++out.completed;
        if (opts.log) {
          char buf[160];
          std::snprintf(buf, sizeof(buf), "done %-56s best_acc=%.4f best_loss=%.4f",
                        cell.to_string().c_str(), rec.best_acc, rec.best_loss);
          opts.log(buf);
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(io_mu);
        ++out.failed;
        out.errors.push_back(cell.to_string() + ": " + e.what());
        if (opts.log) opts.log("FAILED " + out.errors.back());
      }
    }
  };

  const int jobs = std::clamp<int>(opts.jobs, 1,
                                   static_cast<int>(std::min<std::size_t>(todo.size(), 64)));
  std::vector<std::thread> threads;
  for (int j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();
  return out;
}

}  // namespace

RunRecord train_single_run(const RunConfig& cfg, const CellKey& cell) {
  cfg.validate();
  if (cfg.precision == "double") {
    const auto pack = load_pack<double>(cfg, cell.dataset);
    return run_one<double>(cfg, cell, pack);
  }
  const auto pack = load_pack<float>(cfg, cell.dataset);
  return run_one<float>(cfg, cell, pack);
}

GridOutcome run_grid(const RunConfig& cfg, const GridOptions& opts) {
  cfg.validate();
  if (cfg.precision == "double") {
    return run_grid_impl<double>(cfg, opts);
  }
  return run_grid_impl<float>(cfg, opts);
}

}  // namespace sradam::bench
