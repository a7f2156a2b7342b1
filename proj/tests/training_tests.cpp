// Learning-behavior checks that train real models and therefore run for
// minutes rather than milliseconds. They live in their own binary so the
// unit suite stays fast.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "advforge/cnn.hpp"
#include "advforge/datagen.hpp"
#include "advforge/dataset.hpp"
#include "advforge/experiment.hpp"
#include "advforge/report.hpp"
#include "advforge/rng.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/util.hpp"

namespace {

using namespace advforge;

GeneratorConfig tiny_generator(std::size_t per_class, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.per_class = per_class;
  cfg.seed = seed;
  return cfg;
}

/// Small but trainable setup: two runs finish in well under a minute while
/// still exercising the full experiment protocol.
ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.n_runs = 2;
  cfg.seed = 404;
  cfg.generator = tiny_generator(24, 11);
  cfg.train.epochs = 40;
  cfg.train.batch_size = 8;
  cfg.attack.episodes = 4;
  cfg.attack.reset_period = 2;
  cfg.attack.seed = 21;
  cfg.merge.clean_fraction = 0.9;
  cfg.merge.seed = 9;
  return cfg;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("training is bitwise deterministic in all of its seeds") {
  Dataset ds = build_dataset(tiny_generator(16, 5));
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.seed = 77;

  TrainResult a = train(123, ds, cfg);
  TrainResult b = train(123, ds, cfg);
  REQUIRE(a.model.params.size() == b.model.params.size());
  CHECK(a.model.params == b.model.params);
  CHECK(a.validation_accuracy == b.validation_accuracy);
  CHECK(a.best_epoch == b.best_epoch);
  CHECK(a.validation_indices == b.validation_indices);

  TrainResult other_model = train(124, ds, cfg);
  CHECK(other_model.model.params != a.model.params);

  TrainConfig shifted = cfg;
  shifted.seed = 78;
  TrainResult other_split = train(123, ds, shifted);
  CHECK(other_split.model.params != a.model.params);
}

TEST_CASE("default training reaches competent validation accuracy") {
  // One run at the bundled default scale (200 windows per class, 30 epochs).
  // This exact seed combination lands at 0.85625 and the whole computation is
  // deterministic, so the floor asserts the optimizer keeps learning rather
  // than a lucky margin.
  Dataset ds = build_dataset(tiny_generator(200, 0));
  TrainConfig cfg;
  TrainResult r = train(0, ds, cfg);
  CHECK(r.validation_accuracy >= 0.85);
  CHECK(r.best_epoch >= 1);
  CHECK(r.best_epoch <= cfg.epochs);
  CHECK(r.validation_indices.size() == 320);  // 20% of 1600, stratified
}

TEST_CASE("experiment produces a structurally coherent paired report") {
  ExperimentConfig cfg = small_experiment();
  test_util::TempDir dir;
  cfg.checkpoint_dir = dir.path() / "runs";

  std::vector<RunRecord> seen;
  RunHook hook = [&seen](const RunRecord& rec) { seen.push_back(rec); };
  ExperimentReport report = run_experiment(cfg, &hook);

  REQUIRE(report.runs.size() == 2);
  CHECK(seen.size() == 2);
  for (int i = 0; i < 2; ++i) {
    const RunRecord& rec = report.runs[std::size_t(i)];
    CHECK(rec.run_index == i);
    CHECK(rec.model_seed == derive_seed(cfg.seed, {1, std::uint64_t(i)}));
    CHECK(rec.train_seed == derive_seed(cfg.seed, {2, std::uint64_t(i)}));
    CHECK(rec.clean_accuracy >= 0.0);
    CHECK(rec.clean_accuracy <= 1.0);
    CHECK(rec.merged_accuracy >= 0.0);
    CHECK(rec.merged_accuracy <= 1.0);
    CHECK(rec.clean_best_epoch >= 1);
    CHECK(rec.merged_best_epoch >= 1);
    CHECK(seen[std::size_t(i)].run_index == i);
    CHECK(seen[std::size_t(i)].clean_accuracy == rec.clean_accuracy);
  }

  // Paired statistics over two runs leave one degree of freedom.
  CHECK(report.ttest.df == 1);
  CHECK(report.clean_stats.n == 2);
  CHECK(report.merged_stats.n == 2);
  double clean_mean = (report.runs[0].clean_accuracy + report.runs[1].clean_accuracy) / 2;
  CHECK(report.clean_stats.mean == doctest::Approx(clean_mean).epsilon(1e-12));
  CHECK(report.diff_mean ==
        doctest::Approx(report.merged_stats.mean - report.clean_stats.mean)
            .epsilon(1e-9));

  // Best-model bookkeeping: highest accuracy, earliest run on ties.
  int expect_clean_best =
      report.runs[1].clean_accuracy > report.runs[0].clean_accuracy ? 1 : 0;
  int expect_merged_best =
      report.runs[1].merged_accuracy > report.runs[0].merged_accuracy ? 1 : 0;
  CHECK(report.clean_best_run == expect_clean_best);
  CHECK(report.merged_best_run == expect_merged_best);
  CHECK(report.clean_best_accuracy ==
        report.runs[std::size_t(report.clean_best_run)].clean_accuracy);
  CHECK(report.merged_best_accuracy ==
        report.runs[std::size_t(report.merged_best_run)].merged_accuracy);

  // Attack evaluation covers the full clean dataset for both arms.
  for (const AttackEvalResult* eval : {&report.clean_attack, &report.merged_attack}) {
    for (int c = 0; c < kNumLabels; ++c) {
      CHECK(eval->per_label[std::size_t(c)].total == cfg.generator.per_class);
      CHECK(eval->per_label[std::size_t(c)].successes <= cfg.generator.per_class);
    }
    CHECK(eval->average_rate >= 0.0);
    CHECK(eval->average_rate <= 1.0);
  }

  // Merge targets llround(per_class / clean_fraction) items per class.
  CHECK(report.merged_size == 8 * 27);  // llround(24 / 0.9) = 27
  CHECK(report.pool_size > 0);

  // Checkpoints mirror the run records.
  for (int i = 0; i < 2; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%03d.json", i);
    std::filesystem::path path = cfg.checkpoint_dir / name;
    REQUIRE(std::filesystem::exists(path));
    auto j = nlohmann::json::parse(test_util::read_file(path));
    CHECK(j.at("schema") == "advforge-run/1");
    CHECK(j.at("run_index").get<int>() == i);
    CHECK(j.at("model_seed").get<std::uint64_t>() == report.runs[std::size_t(i)].model_seed);
    CHECK(j.at("clean").at("accuracy").get<double>() ==
          report.runs[std::size_t(i)].clean_accuracy);
    CHECK(j.at("merged").at("accuracy").get<double>() ==
          report.runs[std::size_t(i)].merged_accuracy);
  }
}

TEST_CASE("identical master seeds reproduce the report byte for byte") {
  ExperimentConfig cfg = small_experiment();
  ExperimentReport first = run_experiment(cfg);
  ExperimentReport second = run_experiment(cfg);
  CHECK(report_json(first) == report_json(second));

  // 406 rather than 405: a viable master seed must give the run-0 model
  // enough attack survivors in every class for the merge to be satisfiable.
  ExperimentConfig other = cfg;
  other.seed = 406;
  ExperimentReport third = run_experiment(other);
  CHECK(report_json(third) != report_json(first));
}

}
