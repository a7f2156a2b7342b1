#include "advforge/report.hpp"

#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "advforge/errors.hpp"
#include "json.hpp"

namespace advforge {

namespace {

using nlohmann::ordered_json;

ordered_json summary_json(const StatSummary& s) {
  return ordered_json{{"n", s.n}, {"mean", s.mean}, {"sample_std", s.sample_std}};
}

StatSummary summary_from(const ordered_json& j) {
  StatSummary s;
  s.n = j.at("n").get<std::size_t>();
  s.mean = j.at("mean").get<double>();
  s.sample_std = j.at("sample_std").get<double>();
  return s;
}

ordered_json attack_json(const AttackEvalResult& a) {
  ordered_json labels = ordered_json::array();
  for (int c = 0; c < kNumLabels; ++c) {
    const LabelAttackStats& s = a.per_label[std::size_t(c)];
    labels.push_back(ordered_json{{"label", c + 1},
                                  {"successes", s.successes},
                                  {"total", s.total},
                                  {"rate", s.rate}});
  }
  return ordered_json{{"per_label", labels}, {"average_rate", a.average_rate}};
}

AttackEvalResult attack_from(const ordered_json& j) {
  AttackEvalResult a;
  const auto& labels = j.at("per_label");
  if (!labels.is_array() || labels.size() != std::size_t(kNumLabels))
    throw InvariantError("report: attack table must list all eight labels");
  for (const auto& entry : labels) {
    int label = entry.at("label").get<int>();
    if (label < 1 || label > kNumLabels)
      throw InvariantError("report: attack label out of range");
    LabelAttackStats& s = a.per_label[std::size_t(label - 1)];
    s.successes = entry.at("successes").get<std::size_t>();
    s.total = entry.at("total").get<std::size_t>();
    s.rate = entry.at("rate").get<double>();
  }
  a.average_rate = j.at("average_rate").get<double>();
  return a;
}

void append(std::string& out, const char* fmt, ...) {
  char line[200];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(line, sizeof(line), fmt, args);
  va_end(args);
  out += line;
}

void append_attack_table(std::string& out, const char* arm, int best_run,
                         double best_accuracy, const AttackEvalResult& a) {
  append(out, "Attack success, best %s-trained model (run %d, accuracy %.2f%%)\n", arm,
         best_run, best_accuracy * 100.0);
  append(out, "%-5s  %9s  %6s  %11s\n", "Label", "Successes", "Total", "Percent (%)");
  for (int c = 0; c < kNumLabels; ++c) {
    const LabelAttackStats& s = a.per_label[std::size_t(c)];
    append(out, "%-5d  %9zu  %6zu  %11.2f\n", c + 1, s.successes, s.total,
           s.rate * 100.0);
  }
  append(out, "%-5s  %9s  %6s  %11.2f\n", "Avg", "", "", a.average_rate * 100.0);
}

}  // namespace

std::string report_json(const ExperimentReport& report) {
  ordered_json j;
  j["schema"] = "advforge-report/1";
  j["runs"] = ordered_json::array();
  for (const RunRecord& rec : report.runs)
    j["runs"].push_back(ordered_json{{"run_index", rec.run_index},
                                     {"model_seed", rec.model_seed},
                                     {"train_seed", rec.train_seed},
                                     {"clean_accuracy", rec.clean_accuracy},
                                     {"merged_accuracy", rec.merged_accuracy},
                                     {"clean_best_epoch", rec.clean_best_epoch},
                                     {"merged_best_epoch", rec.merged_best_epoch}});
  j["accuracy"] = ordered_json{{"clean", summary_json(report.clean_stats)},
                               {"merged", summary_json(report.merged_stats)}};
  j["paired_ttest"] = ordered_json{{"diff_mean", report.diff_mean},
                                   {"diff_std", report.diff_std},
                                   {"t", report.ttest.t},
                                   {"p_two_tailed", report.ttest.p_two_tailed},
                                   {"df", report.ttest.df}};
  j["best_models"] =
      ordered_json{{"clean", ordered_json{{"run_index", report.clean_best_run},
                                          {"accuracy", report.clean_best_accuracy}}},
                   {"merged", ordered_json{{"run_index", report.merged_best_run},
                                           {"accuracy", report.merged_best_accuracy}}}};
  j["attack"] = ordered_json{{"clean", attack_json(report.clean_attack)},
                             {"merged", attack_json(report.merged_attack)}};
  j["pool_size"] = report.pool_size;
  j["merged_size"] = report.merged_size;
  return j.dump(2) + "\n";
}

ExperimentReport parse_report_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvariantError("report: not valid JSON");
  try {
    if (j.at("schema").get<std::string>() != "advforge-report/1")
      throw InvariantError("report: unknown schema");
    ExperimentReport report;
    for (const auto& entry : j.at("runs")) {
      RunRecord rec;
      rec.run_index = entry.at("run_index").get<int>();
      rec.model_seed = entry.at("model_seed").get<std::uint64_t>();
      rec.train_seed = entry.at("train_seed").get<std::uint64_t>();
      rec.clean_accuracy = entry.at("clean_accuracy").get<double>();
      rec.merged_accuracy = entry.at("merged_accuracy").get<double>();
      rec.clean_best_epoch = entry.at("clean_best_epoch").get<int>();
      rec.merged_best_epoch = entry.at("merged_best_epoch").get<int>();
      report.runs.push_back(rec);
    }
    report.clean_stats = summary_from(j.at("accuracy").at("clean"));
    report.merged_stats = summary_from(j.at("accuracy").at("merged"));
    const auto& tt = j.at("paired_ttest");
    report.diff_mean = tt.at("diff_mean").get<double>();
    report.diff_std = tt.at("diff_std").get<double>();
    report.ttest.t = tt.at("t").get<double>();
    report.ttest.p_two_tailed = tt.at("p_two_tailed").get<double>();
    report.ttest.df = tt.at("df").get<std::size_t>();
    const auto& best = j.at("best_models");
    report.clean_best_run = best.at("clean").at("run_index").get<int>();
    report.clean_best_accuracy = best.at("clean").at("accuracy").get<double>();
    report.merged_best_run = best.at("merged").at("run_index").get<int>();
    report.merged_best_accuracy = best.at("merged").at("accuracy").get<double>();
    report.clean_attack = attack_from(j.at("attack").at("clean"));
    report.merged_attack = attack_from(j.at("attack").at("merged"));
    report.pool_size = j.at("pool_size").get<std::size_t>();
    report.merged_size = j.at("merged_size").get<std::size_t>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw InvariantError(std::string("report: ") + e.what());
  }
}

void save_report(const ExperimentReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvariantError("cannot write report " + path.string());
  out << report_json(report);
}

ExperimentReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvariantError("cannot read report " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report_json(buf.str());
}

std::string render_tables(const ExperimentReport& report) {
  std::string out;
  append(out, "Accuracy over %zu paired runs\n", report.clean_stats.n);
  append(out, "%-8s  %22s  %21s\n", "Arm", "Mean of Accuracies (%)", "Std of Accuracies (%)");
  append(out, "%-8s  %22.2f  %21.4f\n", "clean", report.clean_stats.mean * 100.0,
         report.clean_stats.sample_std * 100.0);
  append(out, "%-8s  %22.2f  %21.4f\n", "merged", report.merged_stats.mean * 100.0,
         report.merged_stats.sample_std * 100.0);
  out += "\n";

  append(out, "Dependent paired t-test (merged - clean)\n");
  append(out, "%-5s  %9s  %9s  %9s  %9s  %3s\n", "N", "Mean", "Std", "T-value", "P-value",
         "df");
  append(out, "%-5zu  %9.4f  %9.4f  %9.4f  %9.4f  %3zu\n", report.ttest.df + 1,
         report.diff_mean, report.diff_std, report.ttest.t, report.ttest.p_two_tailed,
         report.ttest.df);
  out += "\n";

  append_attack_table(out, "clean", report.clean_best_run, report.clean_best_accuracy,
                      report.clean_attack);
  out += "\n";
  append_attack_table(out, "merged", report.merged_best_run, report.merged_best_accuracy,
                      report.merged_attack);
  return out;
}

std::string accuracy_csv(const ExperimentReport& report) {
  std::string out = "run_index,clean_accuracy,merged_accuracy\n";
  for (const RunRecord& rec : report.runs)
    append(out, "%d,%.17g,%.17g\n", rec.run_index, rec.clean_accuracy,
           rec.merged_accuracy);
  return out;
}

std::string attack_csv(const ExperimentReport& report) {
  std::string out = "arm,label,successes,total,rate\n";
  auto rows = [&](const char* arm, const AttackEvalResult& a) {
    for (int c = 0; c < kNumLabels; ++c) {
      const LabelAttackStats& s = a.per_label[std::size_t(c)];
      append(out, "%s,%d,%zu,%zu,%.17g\n", arm, c + 1, s.successes, s.total, s.rate);
    }
  };
  rows("clean", report.clean_attack);
  rows("merged", report.merged_attack);
  return out;
}

ReportPaths write_report_files(const ExperimentReport& report,
                               const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  ReportPaths paths{dir / "report.json", dir / "tables.txt", dir / "accuracy.csv",
                    dir / "attack.csv"};
  save_report(report, paths.json);
  auto write = [](const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw InvariantError("cannot write " + p.string());
    out << content;
  };
  write(paths.tables, render_tables(report));
  write(paths.accuracy, accuracy_csv(report));
  write(paths.attack, attack_csv(report));
  return paths;
}

}  // namespace advforge
