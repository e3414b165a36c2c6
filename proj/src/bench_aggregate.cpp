#include "sradam/bench/aggregate.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

namespace sradam::bench {

namespace {

std::string fmt(double x, const char* spec = "%.4f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

// (dataset, model, noise, batch): the coordinates optimizers compete within.
using CompetitionKey = std::tuple<std::string, std::string, double, int>;

CompetitionKey competition_of(const SliceKey& k) {
  return {k.dataset, k.model, k.noise, k.batch_size};
}

std::map<SliceKey, std::vector<const RunRecord*>> group_by_slice(
    std::span<const RunRecord> records) {
  std::map<SliceKey, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    if (!r.complete) continue;
    const SliceKey key{r.cell.dataset, r.cell.model, r.cell.optimizer,
                       r.cell.noise, r.cell.batch_size};
    groups[key].push_back(&r);
  }
  for (auto& [key, runs] : groups) {
    std::sort(runs.begin(), runs.end(),
              [](const RunRecord* a, const RunRecord* b) {
                return a->cell.seed < b->cell.seed;
              });
  }
  return groups;
}

double std_or_zero(std::span<const double> xs) {
  return xs.size() >= 2 ? sample_std(xs) : 0.0;
}

}  // namespace

std::vector<AggRow> aggregate(std::span<const RunRecord> records) {
  const auto groups = group_by_slice(records);
  std::vector<AggRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, runs] : groups) {
    AggRow row;
    row.key = key;
    row.n_seeds = runs.size();
    std::vector<double> accs, losses, walls;
    for (const RunRecord* r : runs) {
      accs.push_back(r->best_acc);
      losses.push_back(r->best_loss);
      double wall = 0.0;
      for (const auto& e : r->epochs) wall += e.wall_s;
      walls.push_back(r->epochs.empty() ? 0.0
                                        : wall / static_cast<double>(r->epochs.size()));
    }
    row.acc_mean = mean(accs);
    row.acc_std = std_or_zero(accs);
    row.loss_mean = mean(losses);
    row.loss_std = std_or_zero(losses);
    row.epoch_wall_mean = mean(walls);
    rows.push_back(std::move(row));
  }

  // Flag winners within each competition.
  std::map<CompetitionKey, std::pair<double, double>> best;  // max acc, min loss
  for (const auto& row : rows) {
    const auto ck = competition_of(row.key);
    auto it = best.find(ck);
    if (it == best.end()) {
      best[ck] = {row.acc_mean, row.loss_mean};
    } else {
      it->second.first = std::max(it->second.first, row.acc_mean);
      it->second.second = std::min(it->second.second, row.loss_mean);
    }
  }
  for (auto& row : rows) {
    const auto& [acc_best, loss_best] = best.at(competition_of(row.key));
    row.best_acc_in_slice = row.acc_mean == acc_best;
    row.best_loss_in_slice = row.loss_mean == loss_best;
  }
  return rows;
}

void write_aggregate_csv(std::ostream& os, std::span<const AggRow> rows) {
  os << "dataset,model,optimizer,noise,batch_size,n_seeds,acc_mean,acc_std,"
        "loss_mean,loss_std,epoch_wall_s\n";
  for (const auto& r : rows) {
    os << r.key.dataset << ',' << r.key.model << ',' << r.key.optimizer << ','
       << fmt(r.key.noise, "%g") << ',' << r.key.batch_size << ',' << r.n_seeds
       << ',' << fmt(r.acc_mean, "%.6f") << ',' << fmt(r.acc_std, "%.6f") << ','
       << fmt(r.loss_mean, "%.6f") << ',' << fmt(r.loss_std, "%.6f") << ','
       << fmt(r.epoch_wall_mean, "%.3f") << '\n';
  }
}

std::string render_aggregate_markdown(std::span<const AggRow> rows) {
  if (rows.empty()) return {};
  std::ostringstream os;
  os << "| dataset | model | optimizer | noise | batch | seeds | best acc | "
        "best loss | s/epoch |\n";
  os << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const std::string acc = fmt(r.acc_mean) + " +/- " + fmt(r.acc_std);
    const std::string loss = fmt(r.loss_mean) + " +/- " + fmt(r.loss_std);
    os << "| " << r.key.dataset << " | " << r.key.model << " | "
       << r.key.optimizer << " | " << fmt(r.key.noise, "%g") << " | "
       << r.key.batch_size << " | " << r.n_seeds << " | "
       << (r.best_acc_in_slice ? "**" + acc + "**" : acc) << " | "
       << (r.best_loss_in_slice ? "**" + loss + "**" : loss) << " | "
       << fmt(r.epoch_wall_mean, "%.2f") << " |\n";
  }
  return os.str();
}

std::vector<PairRow> paired_compare(std::span<const RunRecord> records,
                                    const std::string& opt_a,
                                    const std::string& opt_b) {
  // (competition key) -> seed -> (acc, loss), per side.
  using SeedMap = std::map<std::uint64_t, std::pair<double, double>>;
  std::map<CompetitionKey, std::pair<SeedMap, SeedMap>> table;
  for (const auto& r : records) {
    if (!r.complete) continue;
    const bool is_a = r.cell.optimizer == opt_a;
    const bool is_b = r.cell.optimizer == opt_b;
    if (!is_a && !is_b) continue;
    const CompetitionKey ck{r.cell.dataset, r.cell.model, r.cell.noise,
                            r.cell.batch_size};
    SeedMap& side = is_a ? table[ck].first : table[ck].second;
    side[r.cell.seed] = {r.best_acc, r.best_loss};
  }

  std::vector<PairRow> rows;
  for (const auto& [ck, sides] : table) {
    std::vector<double> acc_a, acc_b, loss_a, loss_b;
    for (const auto& [seed, ab] : sides.first) {
      const auto it = sides.second.find(seed);
      if (it == sides.second.end()) continue;
      acc_a.push_back(ab.first);
      loss_a.push_back(ab.second);
      acc_b.push_back(it->second.first);
      loss_b.push_back(it->second.second);
    }
    if (acc_a.size() < 2) continue;
    PairRow row;
    row.dataset = std::get<0>(ck);
    row.model = std::get<1>(ck);
    row.noise = std::get<2>(ck);
    row.batch_size = std::get<3>(ck);
    row.opt_a = opt_a;
    row.opt_b = opt_b;
    row.n = acc_a.size();
    row.acc_mean_a = mean(acc_a);
    row.acc_mean_b = mean(acc_b);
    row.loss_mean_a = mean(loss_a);
    row.loss_mean_b = mean(loss_b);
    row.acc_test = paired_ttest(acc_a, acc_b);
    row.loss_test = paired_ttest(loss_a, loss_b);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ttest_csv(std::ostream& os, std::span<const PairRow> rows) {
  os << "dataset,model,noise,batch_size,opt_a,opt_b,n,acc_a,acc_b,acc_t,acc_p,"
        "loss_a,loss_b,loss_t,loss_p\n";
  for (const auto& r : rows) {
    os << r.dataset << ',' << r.model << ',' << fmt(r.noise, "%g") << ','
       << r.batch_size << ',' << r.opt_a << ',' << r.opt_b << ',' << r.n << ','
       << fmt(r.acc_mean_a, "%.6f") << ',' << fmt(r.acc_mean_b, "%.6f") << ','
       << fmt(r.acc_test.t, "%.4f") << ',' << fmt(r.acc_test.p, "%.6f") << ','
       << fmt(r.loss_mean_a, "%.6f") << ',' << fmt(r.loss_mean_b, "%.6f") << ','
       << fmt(r.loss_test.t, "%.4f") << ',' << fmt(r.loss_test.p, "%.6f")
       << '\n';
  }
}

std::string render_ttest_markdown(std::span<const PairRow> rows) {
  if (rows.empty()) return {};
  std::ostringstream os;
  os << "| dataset | model | noise | batch | n | acc " << rows[0].opt_a
     << " | acc " << rows[0].opt_b << " | t | p |\n";
  os << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.dataset << " | " << r.model << " | " << fmt(r.noise, "%g")
       << " | " << r.batch_size << " | " << r.n << " | "
       << fmt(r.acc_mean_a) << " | " << fmt(r.acc_mean_b) << " | "
       << (r.acc_test.degenerate ? std::string("-") : fmt(r.acc_test.t, "%.3f"))
       << " | "
       << (r.acc_test.degenerate ? std::string("-") : fmt(r.acc_test.p, "%.4f"))
       << " |\n";
  }
  return os.str();
}

std::vector<Curve> epoch_curves(std::span<const RunRecord> records) {
  const auto groups = group_by_slice(records);
  std::vector<Curve> curves;
  for (const auto& [key, runs] : groups) {
    std::size_t max_epochs = 0;
    for (const RunRecord* r : runs) {
      max_epochs = std::max(max_epochs, r->epochs.size());
    }
    Curve curve;
    curve.key = key;
    for (std::size_t e = 0; e < max_epochs; ++e) {
      std::vector<double> losses, accs;
      for (const RunRecord* r : runs) {
        if (e < r->epochs.size()) {
          losses.push_back(r->epochs[e].test_loss);
          accs.push_back(r->epochs[e].test_acc);
        }
      }
      if (losses.empty()) continue;
      CurvePoint pt;
      pt.epoch = static_cast<int>(e + 1);
      pt.loss_mean = mean(losses);
      pt.loss_std = std_or_zero(losses);
      pt.acc_mean = mean(accs);
      pt.acc_std = std_or_zero(accs);
      curve.points.push_back(pt);
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace sradam::bench
