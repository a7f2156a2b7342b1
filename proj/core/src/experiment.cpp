#include "advforge/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include "advforge/errors.hpp"
#include "advforge/log.hpp"
#include "advforge/rng.hpp"
#include "json.hpp"

namespace advforge {

namespace {

// Seed families for per-run derivation from the experiment master seed.
constexpr std::uint64_t kModelSeedFamily = 1;
constexpr std::uint64_t kTrainSeedFamily = 2;
// Families under the attack seed for pool sampling substreams.
constexpr std::uint64_t kFixedPoolFamily = 1;
constexpr std::uint64_t kPerRunPoolFamily = 2;

std::vector<PerturbationRecord> build_pool(const CnnModel& reference,
                                           const std::vector<std::pair<CandleWindow, PatternLabel>>& windows,
                                           const Dataset& clean, const ExperimentConfig& cfg,
                                           int run_index) {
  Predictor pred = [&reference](const GafTensor& t) { return predict(reference, t); };
  std::vector<PerturbationRecord> pool;
  for (std::size_t g = 0; g < windows.size(); ++g) {
    AttackSource source;
    source.window = windows[g].first;
    source.label = windows[g].second;
    source.window_id = clean.items[g].window_id;
    Rng rng(cfg.per_run_pool
                ? derive_seed(cfg.attack.seed,
                              {kPerRunPoolFamily, std::uint64_t(run_index), g})
                : derive_seed(cfg.attack.seed, {kFixedPoolFamily, g}));
    auto records =
        sample_adversarial(pred, source, cfg.attack, cfg.generator.rule_params, rng);
    pool.insert(pool.end(), std::make_move_iterator(records.begin()),
                std::make_move_iterator(records.end()));
  }
  return pool;
}

double clean_origin_accuracy(const CnnModel& model, const Dataset& dataset,
                             const std::vector<std::size_t>& val_indices) {
  std::vector<std::size_t> kept;
  for (std::size_t idx : val_indices)
    if (dataset.items[idx].origin == ItemOrigin::Clean) kept.push_back(idx);
  if (kept.empty())
    throw InvariantError("validation split holds no clean-origin items");
  return accuracy(model, dataset.items, kept);
}

void write_checkpoint(const std::filesystem::path& dir, const RunRecord& rec) {
  std::filesystem::create_directories(dir);
  char name[32];
  std::snprintf(name, sizeof(name), "run_%03d.json", rec.run_index);
  nlohmann::ordered_json j;
  j["schema"] = "advforge-run/1";
  j["run_index"] = rec.run_index;
  j["model_seed"] = rec.model_seed;
  j["train_seed"] = rec.train_seed;
  j["clean"] = {{"accuracy", rec.clean_accuracy}, {"best_epoch", rec.clean_best_epoch}};
  j["merged"] = {{"accuracy", rec.merged_accuracy}, {"best_epoch", rec.merged_best_epoch}};
  std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
  if (!out) throw InvariantError("cannot write checkpoint " + (dir / name).string());
  out << j.dump(2) << "\n";
}

}  // namespace

void validate(const MergeConfig& cfg) {
  if (!(cfg.clean_fraction > 0.0 && cfg.clean_fraction < 1.0))
    throw ConfigError("merge clean_fraction must be in (0,1)");
}

Dataset merge_datasets(const Dataset& clean, const Dataset& adversarial,
                       const MergeConfig& cfg) {
  validate(cfg);
  std::array<std::vector<std::size_t>, kNumLabels> pool_by_class;
  for (std::size_t i = 0; i < adversarial.items.size(); ++i)
    pool_by_class[std::size_t(int(adversarial.items[i].label) - 1)].push_back(i);
  auto clean_counts = clean.class_counts();

  Dataset out;
  out.provenance = Provenance::Merged;
  out.seed = cfg.seed;
  out.items = clean.items;
  for (int c = 0; c < kNumLabels; ++c) {
    std::size_t have = clean_counts[std::size_t(c)];
    if (have == 0) continue;
    auto target = std::size_t(std::llround(double(have) / cfg.clean_fraction));
    std::size_t needed = target > have ? target - have : 0;
    auto& pool = pool_by_class[std::size_t(c)];
    if (pool.size() < needed)
      throw InsufficientAdversarial(c + 1, needed, pool.size());
    Rng rng(derive_seed(cfg.seed, {std::uint64_t(c)}));
    rng.shuffle(pool);
    for (std::size_t k = 0; k < needed; ++k)
      out.items.push_back(adversarial.items[pool[k]]);
  }
  return out;
}

Dataset pool_to_dataset(const std::vector<PerturbationRecord>& records,
                        std::uint64_t seed) {
  Dataset out;
  out.provenance = Provenance::Adversarial;
  out.seed = seed;
  out.items.reserve(records.size());
  for (const auto& rec : records) {
    DatasetItem item;
    item.tensor = rec.tensor;
    item.label = rec.label;
    item.window_id = rec.source_window_id;
    item.origin = ItemOrigin::Adversarial;
    item.attack = AttackMeta{std::uint32_t(rec.episode_index),
                             std::uint32_t(rec.perturb_depth), rec.rule_consistent};
    out.items.push_back(std::move(item));
  }
  return out;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n_runs < 2) throw ConfigError("experiment n_runs must be >= 2");
  validate(cfg.generator);
  validate(cfg.train);
  validate(cfg.attack);
  validate(cfg.merge);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunHook* hook) {
  validate(cfg);
  const Dataset clean = build_dataset(cfg.generator);
  const auto windows = build_windows(cfg.generator);

  ExperimentReport report;
  report.runs.reserve(std::size_t(cfg.n_runs));
  report.clean_best_accuracy = -1.0;
  report.merged_best_accuracy = -1.0;
  CnnModel best_clean, best_merged;
  Dataset merged;  // shared across runs unless per_run_pool

  for (int run = 0; run < cfg.n_runs; ++run) {
    RunRecord rec;
    rec.run_index = run;
    rec.model_seed = derive_seed(cfg.seed, {kModelSeedFamily, std::uint64_t(run)});
    rec.train_seed = derive_seed(cfg.seed, {kTrainSeedFamily, std::uint64_t(run)});
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = rec.train_seed;

    TrainResult clean_res = train(rec.model_seed, clean, train_cfg);
    rec.clean_accuracy =
        clean_origin_accuracy(clean_res.model, clean, clean_res.validation_indices);
    rec.clean_best_epoch = clean_res.best_epoch;

    if (cfg.per_run_pool || run == 0) {
      auto pool = build_pool(clean_res.model, windows, clean, cfg, run);
      report.pool_size = pool.size();
      Dataset pool_ds = pool_to_dataset(pool, cfg.attack.seed);
      MergeConfig merge_cfg = cfg.merge;
      if (cfg.per_run_pool)
        merge_cfg.seed = derive_seed(cfg.merge.seed, {std::uint64_t(run)});
      merged = merge_datasets(clean, pool_ds, merge_cfg);
      report.merged_size = merged.items.size();
      log_info("adversarial pool " + std::to_string(pool.size()) +
               " records, merged dataset " + std::to_string(merged.items.size()) +
               " items");
    }

    TrainResult merged_res = train(rec.model_seed, merged, train_cfg);
    rec.merged_accuracy =
        clean_origin_accuracy(merged_res.model, merged, merged_res.validation_indices);
    rec.merged_best_epoch = merged_res.best_epoch;

    if (rec.clean_accuracy > report.clean_best_accuracy) {
      report.clean_best_accuracy = rec.clean_accuracy;
      report.clean_best_run = run;
      best_clean = std::move(clean_res.model);
    }
    if (rec.merged_accuracy > report.merged_best_accuracy) {
      report.merged_best_accuracy = rec.merged_accuracy;
      report.merged_best_run = run;
      best_merged = std::move(merged_res.model);
    }

    if (!cfg.checkpoint_dir.empty()) write_checkpoint(cfg.checkpoint_dir, rec);
    if (hook) (*hook)(rec);
    report.runs.push_back(rec);
  }

  std::vector<double> clean_accs, merged_accs, diffs;
  for (const RunRecord& rec : report.runs) {
    clean_accs.push_back(rec.clean_accuracy);
    merged_accs.push_back(rec.merged_accuracy);
    diffs.push_back(rec.merged_accuracy - rec.clean_accuracy);
  }
  report.clean_stats = describe(clean_accs);
  report.merged_stats = describe(merged_accs);
  StatSummary diff_stats = describe(diffs);
  report.diff_mean = diff_stats.mean;
  report.diff_std = diff_stats.sample_std;
  report.ttest = paired_ttest(merged_accs, clean_accs);

  Predictor clean_pred = [&best_clean](const GafTensor& t) { return predict(best_clean, t); };
  Predictor merged_pred = [&best_merged](const GafTensor& t) {
    return predict(best_merged, t);
  };
  report.clean_attack = attack_eval(clean_pred, clean, cfg.attack);
  report.merged_attack = attack_eval(merged_pred, clean, cfg.attack);
  return report;
}

}  // namespace advforge
