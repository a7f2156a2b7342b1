#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "advforge/attack.hpp"
#include "advforge/cnn.hpp"
#include "advforge/datagen.hpp"
#include "advforge/dataset.hpp"
#include "advforge/stats.hpp"

namespace advforge {

struct MergeConfig {
  double clean_fraction = 0.5;  // clean share of the merged dataset, in (0,1)
  std::uint64_t seed = 0;       // drives the per-class adversarial draws
};

/// Throws ConfigError unless 0 < clean_fraction < 1.
void validate(const MergeConfig& cfg);

/// Combines every clean item with per-class adversarial draws so that each
/// class ends up with round(clean_count / clean_fraction) items. Draws are
/// without replacement from the pool's items of that class, seeded per class.
/// Throws InsufficientAdversarial when a class's pool is too small.
Dataset merge_datasets(const Dataset& clean, const Dataset& adversarial,
                       const MergeConfig& cfg);

/// Converts collected perturbation records into an Adversarial dataset.
Dataset pool_to_dataset(const std::vector<PerturbationRecord>& records, std::uint64_t seed);

struct ExperimentConfig {
  int n_runs = 20;
  /// Master seed; per-run model and data-order seeds derive from it, shared
  /// between the clean and merged arms so runs are paired.
  std::uint64_t seed = 0;
  /// Regenerate the adversarial pool from each run's own clean model instead
  /// of once from the run-0 reference model.
  bool per_run_pool = false;
  /// When non-empty, one JSON checkpoint per completed run is written here.
  std::filesystem::path checkpoint_dir;

  GeneratorConfig generator;
  TrainConfig train;    // seed field is ignored; per-run seeds come from `seed`
  AttackConfig attack;  // seed drives pool sampling and the final evaluation
  MergeConfig merge;
};

/// Throws ConfigError unless n_runs >= 2 and every component config is valid.
void validate(const ExperimentConfig& cfg);

struct RunRecord {
  int run_index = 0;
  std::uint64_t model_seed = 0;  // weight initialization, shared by both arms
  std::uint64_t train_seed = 0;  // split and batch order, shared by both arms
  double clean_accuracy = 0;     // clean-trained model, held-out clean items
  double merged_accuracy = 0;    // merged-trained model, held-out clean items
  int clean_best_epoch = 0;
  int merged_best_epoch = 0;
};

using RunHook = std::function<void(const RunRecord&)>;

struct ExperimentReport {
  std::vector<RunRecord> runs;
  StatSummary clean_stats;   // over per-run clean-arm accuracies
  StatSummary merged_stats;  // over per-run merged-arm accuracies
  double diff_mean = 0;      // mean of merged - clean differences
  double diff_std = 0;       // sample std of the differences
  TTestResult ttest;         // paired_ttest(merged accuracies, clean accuracies)
  int clean_best_run = 0;    // run index of the highest-accuracy model per arm
  int merged_best_run = 0;
  double clean_best_accuracy = 0;
  double merged_best_accuracy = 0;
  AttackEvalResult clean_attack;   // search against the best clean-trained model
  AttackEvalResult merged_attack;  // search against the best merged-trained model
  std::size_t pool_size = 0;       // adversarial records collected (run-0 pool
                                   // in fixed mode, last run's pool otherwise)
  std::size_t merged_size = 0;     // items in the merged dataset
};

/// Full protocol: synthesize the clean dataset once, then per run train a
/// clean model and a merged model with shared per-run seeds and record paired
/// held-out accuracies on clean items. The adversarial pool comes from the
/// run-0 clean model (or per run when per_run_pool). Afterwards both arms are
/// summarized, differenced with a paired t-test, and the highest-accuracy
/// model of each arm (ties to the lowest run index) faces the perturbation
/// search over the whole clean dataset.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunHook* hook = nullptr);

}  // namespace advforge
