#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace advforge {

/// Lowercase hex SHA-256 of a byte buffer.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& data);

/// Hash of a file's contents. Throws InvariantError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string step;            // producing command, e.g. "synth"
  std::filesystem::path path;  // artifact location
  std::string sha256;          // content hash when the entry was recorded
};

/// Records which artifacts a sequence of commands produced, so later steps
/// can verify their inputs and reruns can prove byte-identical outputs.
struct RunManifest {
  std::filesystem::path config_path;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir;
  std::vector<ManifestEntry> artifacts;
};

/// Hashes the file now and records (or refreshes) its entry.
void record_artifact(RunManifest& manifest, const std::string& step,
                     const std::filesystem::path& path);

/// Entry for the path, or nullptr.
const ManifestEntry* find_artifact(const RunManifest& manifest,
                                   const std::filesystem::path& path);

/// Re-hashes every recorded artifact. Throws InvariantError naming the first
/// missing or modified file.
void verify_artifacts(const RunManifest& manifest);

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace advforge
