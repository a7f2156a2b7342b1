#pragma once

#include <filesystem>
#include <string>

#include "advforge/experiment.hpp"

namespace advforge {

/// Canonical JSON document for a report: 2-space indent, key order fixed,
/// doubles at full round-trip precision, trailing newline. The same report
/// always serializes to the same bytes.
std::string report_json(const ExperimentReport& report);

/// Inverse of report_json. Throws InvariantError on malformed or
/// wrong-schema documents.
ExperimentReport parse_report_json(const std::string& text);

void save_report(const ExperimentReport& report, const std::filesystem::path& path);
ExperimentReport load_report(const std::filesystem::path& path);

/// Aligned-column text rendering: accuracy summary per arm, the paired
/// t-test, and one attack-success table per arm.
std::string render_tables(const ExperimentReport& report);

/// Per-run paired accuracies, one row per run.
std::string accuracy_csv(const ExperimentReport& report);

/// Per-label attack success rates for both arms, one row per (arm, label).
std::string attack_csv(const ExperimentReport& report);

struct ReportPaths {
  std::filesystem::path json;
  std::filesystem::path tables;
  std::filesystem::path accuracy;
  std::filesystem::path attack;
};

/// Writes report.json, tables.txt, accuracy.csv and attack.csv into dir
/// (created if needed) and returns the paths.
ReportPaths write_report_files(const ExperimentReport& report,
                               const std::filesystem::path& dir);

}  // namespace advforge
