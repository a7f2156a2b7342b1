// gaf-advforge: one binary covering the whole workflow, from synthesizing
// labeled candlestick windows to the paired adversarial-training experiment.
// Every step is driven by a single JSON config and recorded in a manifest of
// artifact hashes, so runs can be verified and reproduced byte for byte.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "advforge/attack.hpp"
#include "advforge/cnn.hpp"
#include "advforge/config.hpp"
#include "advforge/datagen.hpp"
#include "advforge/dataset.hpp"
#include "advforge/errors.hpp"
#include "advforge/experiment.hpp"
#include "advforge/log.hpp"
#include "advforge/manifest.hpp"
#include "advforge/report.hpp"
#include "json.hpp"

namespace {

using namespace advforge;
namespace fs = std::filesystem;

constexpr int kExitUsage = 2;      // bad flags or config
constexpr int kExitData = 3;       // missing, malformed or inconsistent data
constexpr int kExitNumerical = 4;  // numerical failure inside a computation

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;  // upper bound on workers; current implementation runs on one
  std::string manifest_path;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file (defaults when omitted)");
  cmd->add_option("--seed", opts.seed, "override the seed this command consumes");
  cmd->add_option("--jobs", opts.jobs, "worker thread bound")->check(CLI::PositiveNumber);
  cmd->add_option("--manifest", opts.manifest_path,
                  "manifest file (default: manifest.json next to --out)");
}

AppConfig load_or_default(const CommonOpts& opts) {
  if (opts.config_path.empty()) return parse_config("{}");
  return load_config(opts.config_path);
}

fs::path manifest_location(const CommonOpts& opts, const fs::path& out) {
  if (!opts.manifest_path.empty()) return opts.manifest_path;
  fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  return dir / "manifest.json";
}

/// A dataset on disk is the tensor file plus its JSON sidecar; both get hashed.
std::vector<fs::path> dataset_artifacts(const fs::path& path) {
  return {path, fs::path(path.string() + ".meta.json")};
}

/// Loads the manifest when present and checks that every input this step
/// consumes still matches its recorded hash.
RunManifest open_manifest(const fs::path& manifest_path, const CommonOpts& opts,
                          const std::vector<fs::path>& inputs) {
  RunManifest manifest;
  if (fs::exists(manifest_path)) manifest = load_manifest(manifest_path);
  if (!opts.config_path.empty()) manifest.config_path = opts.config_path;
  for (const fs::path& input : inputs)
    if (const ManifestEntry* entry = find_artifact(manifest, input)) {
      if (!fs::exists(input))
        throw InvariantError("recorded input missing: " + input.string());
      if (sha256_file(input) != entry->sha256)
        throw InvariantError("recorded input modified since step \"" + entry->step +
                             "\": " + input.string());
    }
  return manifest;
}

/// Records this step's outputs, re-verifies everything and saves the manifest.
void close_manifest(RunManifest& manifest, const fs::path& manifest_path,
                    const std::string& step, const std::vector<fs::path>& outputs) {
  for (const fs::path& out : outputs) record_artifact(manifest, step, out);
  verify_artifacts(manifest);
  save_manifest(manifest, manifest_path);
}

void print_class_counts(const Dataset& ds) {
  auto counts = ds.class_counts();
  for (int c = 0; c < kNumLabels; ++c)
    std::printf("label %d %-16s %zu\n", c + 1, label_name(PatternLabel(c + 1)),
                counts[std::size_t(c)]);
  std::printf("total %zu\n", ds.items.size());
}

int cmd_synth(const CommonOpts& opts, const std::string& out) {
  AppConfig cfg = load_or_default(opts);
  if (opts.seed) cfg.experiment.generator.seed = *opts.seed;
  fs::path manifest_path = manifest_location(opts, out);
  RunManifest manifest = open_manifest(manifest_path, opts, {});
  manifest.master_seed = cfg.experiment.generator.seed;

  Dataset ds = build_dataset(cfg.experiment.generator);
  save_dataset(ds, out);
  print_class_counts(ds);
  close_manifest(manifest, manifest_path, "synth", dataset_artifacts(out));
  return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& data, const std::string& out) {
  AppConfig cfg = load_or_default(opts);
  if (opts.seed) cfg.experiment.train.seed = *opts.seed;
  fs::path manifest_path = manifest_location(opts, out);
  RunManifest manifest = open_manifest(manifest_path, opts, dataset_artifacts(data));

  Dataset ds = load_dataset(data);
  TrainResult result = train(cfg.model_seed, ds, cfg.experiment.train);
  save_model(result.model, out);
  std::printf("validation_accuracy %.6f\n", result.validation_accuracy);
  std::printf("best_epoch %d\n", result.best_epoch);
  close_manifest(manifest, manifest_path, "train", {out});
  return 0;
}

int cmd_attack_sample(const CommonOpts& opts, const std::string& model_path,
                      const std::string& out) {
  AppConfig cfg = load_or_default(opts);
  if (opts.seed) cfg.experiment.attack.seed = *opts.seed;
  fs::path manifest_path = manifest_location(opts, out);
  RunManifest manifest = open_manifest(manifest_path, opts, {model_path});

  CnnModel model = load_model(model_path);
  Predictor pred = [&model](const GafTensor& t) { return predict(model, t); };
  // Windows are regenerated from the generator config rather than read from
  // the dataset file: the search needs the price frame, which GAFD omits.
  auto windows = build_windows(cfg.experiment.generator);
  std::vector<PerturbationRecord> pool;
  for (std::size_t g = 0; g < windows.size(); ++g) {
    AttackSource source;
    source.window = windows[g].first;
    source.label = windows[g].second;
    std::uint64_t index_in_class = g % cfg.experiment.generator.per_class;
    source.window_id = (std::uint64_t(int(source.label)) << 32) | index_in_class;
    Rng rng(derive_seed(cfg.experiment.attack.seed, {1, g}));
    auto records = sample_adversarial(pred, source, cfg.experiment.attack,
                                      cfg.experiment.generator.rule_params, rng);
    pool.insert(pool.end(), records.begin(), records.end());
  }
  Dataset ds = pool_to_dataset(pool, cfg.experiment.attack.seed);
  save_dataset(ds, out);
  print_class_counts(ds);
  close_manifest(manifest, manifest_path, "attack-sample", dataset_artifacts(out));
  return 0;
}

int cmd_merge(const CommonOpts& opts, const std::string& clean_path,
              const std::string& adversarial_path, const std::string& out) {
  AppConfig cfg = load_or_default(opts);
  if (opts.seed) cfg.experiment.merge.seed = *opts.seed;
  fs::path manifest_path = manifest_location(opts, out);
  std::vector<fs::path> inputs = dataset_artifacts(clean_path);
  for (const fs::path& p : dataset_artifacts(adversarial_path)) inputs.push_back(p);
  RunManifest manifest = open_manifest(manifest_path, opts, inputs);

  Dataset clean = load_dataset(clean_path);
  Dataset adversarial = load_dataset(adversarial_path);
  Dataset merged = merge_datasets(clean, adversarial, cfg.experiment.merge);
  save_dataset(merged, out);
  print_class_counts(merged);
  close_manifest(manifest, manifest_path, "merge", dataset_artifacts(out));
  return 0;
}

int cmd_attack_eval(const CommonOpts& opts, const std::string& model_path,
                    const std::string& data, const std::string& out) {
  AppConfig cfg = load_or_default(opts);
  if (opts.seed) cfg.experiment.attack.seed = *opts.seed;

  CnnModel model = load_model(model_path);
  Dataset ds = load_dataset(data);
  Predictor pred = [&model](const GafTensor& t) { return predict(model, t); };
  AttackEvalResult result = attack_eval(pred, ds, cfg.experiment.attack);

  std::printf("%-5s  %9s  %6s  %11s\n", "Label", "Successes", "Total", "Percent (%)");
  for (int c = 0; c < kNumLabels; ++c) {
    const LabelAttackStats& s = result.per_label[std::size_t(c)];
    std::printf("%-5d  %9zu  %6zu  %11.2f\n", c + 1, s.successes, s.total,
                s.rate * 100.0);
  }
  std::printf("%-5s  %9s  %6s  %11.2f\n", "Avg", "", "", result.average_rate * 100.0);

  if (!out.empty()) {
    nlohmann::ordered_json j;
    j["schema"] = "advforge-attack-eval/1";
    j["per_label"] = nlohmann::ordered_json::array();
    for (int c = 0; c < kNumLabels; ++c) {
      const LabelAttackStats& s = result.per_label[std::size_t(c)];
      j["per_label"].push_back({{"label", c + 1},
                                {"successes", s.successes},
                                {"total", s.total},
                                {"rate", s.rate}});
    }
    j["average_rate"] = result.average_rate;
    fs::path manifest_path = manifest_location(opts, out);
    std::vector<fs::path> inputs = dataset_artifacts(data);
    inputs.push_back(model_path);
    RunManifest manifest = open_manifest(manifest_path, opts, inputs);
    if (fs::path(out).has_parent_path())
      fs::create_directories(fs::path(out).parent_path());
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw InvariantError("cannot write " + out);
    file << j.dump(2) << "\n";
    file.close();
    close_manifest(manifest, manifest_path, "attack-eval", {out});
  }
  return 0;
}

int cmd_experiment(const CommonOpts& opts, const std::string& out_dir) {
  AppConfig cfg = load_or_default(opts);
  if (opts.seed) cfg.experiment.seed = *opts.seed;
  if (cfg.experiment.checkpoint_dir.empty())
    cfg.experiment.checkpoint_dir = fs::path(out_dir) / "runs";

  fs::path manifest_path = manifest_location(opts, fs::path(out_dir) / "report.json");
  RunManifest manifest = open_manifest(manifest_path, opts, {});
  manifest.master_seed = cfg.experiment.seed;
  manifest.output_dir = out_dir;

  RunHook progress = [&](const RunRecord& rec) {
    std::printf("run %d/%d  clean %.4f  merged %.4f\n", rec.run_index + 1,
                cfg.experiment.n_runs, rec.clean_accuracy, rec.merged_accuracy);
    std::fflush(stdout);
  };
  ExperimentReport report = run_experiment(cfg.experiment, &progress);
  ReportPaths paths = write_report_files(report, out_dir);

  std::printf("clean  mean %.4f  std %.4f\n", report.clean_stats.mean,
              report.clean_stats.sample_std);
  std::printf("merged mean %.4f  std %.4f\n", report.merged_stats.mean,
              report.merged_stats.sample_std);
  std::printf("t %.4f  p %.4f  df %zu\n", report.ttest.t, report.ttest.p_two_tailed,
              report.ttest.df);
  std::printf("attack avg clean %.4f merged %.4f\n", report.clean_attack.average_rate,
              report.merged_attack.average_rate);
  std::printf("report %s\n", paths.json.string().c_str());

  close_manifest(manifest, manifest_path, "experiment",
                 {paths.json, paths.tables, paths.accuracy, paths.attack});
  return 0;
}

int cmd_report(const CommonOpts& opts, const std::string& in, const std::string& out_dir) {
  ExperimentReport report = load_report(in);
  if (out_dir.empty()) {
    std::fputs(render_tables(report).c_str(), stdout);
    return 0;
  }
  fs::path manifest_path = manifest_location(opts, fs::path(out_dir) / "report.json");
  RunManifest manifest = open_manifest(manifest_path, opts, {in});
  ReportPaths paths = write_report_files(report, out_dir);
  std::fputs(render_tables(report).c_str(), stdout);
  close_manifest(manifest, manifest_path, "report",
                 {paths.json, paths.tables, paths.accuracy, paths.attack});
  return 0;
}

void print_error(const char* type, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::fprintf(stderr, "%s\n", j.dump().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAF adversarial forging workbench"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string out, data, model_path, clean_path, adversarial_path, report_in;

  CLI::App* synth = app.add_subcommand("synth", "synthesize a labeled dataset");
  add_common(synth, opts);
  synth->add_option("--out", out, "output dataset file")->required();

  CLI::App* train_cmd = app.add_subcommand("train", "train a classifier on a dataset");
  add_common(train_cmd, opts);
  train_cmd->add_option("--data", data, "input dataset file")->required();
  train_cmd->add_option("--out", out, "output model file")->required();

  CLI::App* sample = app.add_subcommand(
      "attack-sample", "collect failed perturbation episodes as a training pool");
  add_common(sample, opts);
  sample->add_option("--model", model_path, "trained model file")->required();
  sample->add_option("--out", out, "output dataset file")->required();

  CLI::App* merge = app.add_subcommand("merge", "mix clean and adversarial datasets");
  add_common(merge, opts);
  merge->add_option("--clean", clean_path, "clean dataset file")->required();
  merge->add_option("--adversarial", adversarial_path, "adversarial dataset file")
      ->required();
  merge->add_option("--out", out, "output dataset file")->required();

  CLI::App* eval = app.add_subcommand("attack-eval",
                                      "measure perturbation success against a model");
  add_common(eval, opts);
  eval->add_option("--model", model_path, "trained model file")->required();
  eval->add_option("--data", data, "dataset to perturb")->required();
  eval->add_option("--out", out, "optional JSON result file");

  CLI::App* experiment = app.add_subcommand(
      "experiment", "paired clean-vs-merged training study with attack evaluation");
  add_common(experiment, opts);
  experiment->add_option("--out", out, "output directory")->required();

  CLI::App* report = app.add_subcommand("report", "render a saved report");
  add_common(report, opts);
  report->add_option("--in", report_in, "report JSON file")->required();
  report->add_option("--out", out, "output directory (stdout only when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    print_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(opts, out);
    if (train_cmd->parsed()) return cmd_train(opts, data, out);
    if (sample->parsed()) return cmd_attack_sample(opts, model_path, out);
    if (merge->parsed()) return cmd_merge(opts, clean_path, adversarial_path, out);
    if (eval->parsed()) return cmd_attack_eval(opts, model_path, data, out);
    if (experiment->parsed()) return cmd_experiment(opts, out);
    if (report->parsed()) return cmd_report(opts, report_in, out);
    print_error("usage", "no subcommand selected");
    return kExitUsage;
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitUsage;
  } catch (const NonFiniteActivation& e) {
    print_error("numerical", e.what());
    return kExitNumerical;
  } catch (const ZeroVariance& e) {
    print_error("numerical", e.what());
    return kExitNumerical;
  } catch (const DomainError& e) {
    print_error("numerical", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    // Everything else in the error taxonomy concerns data: parse failures,
    // invariant violations, degenerate inputs, generation failures.
    print_error("data", e.what());
    return kExitData;
  }
}
