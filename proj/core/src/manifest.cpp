#include "advforge/manifest.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "advforge/errors.hpp"
#include "json.hpp"

namespace advforge {

namespace {

std::string to_hex(const unsigned char* digest, unsigned len) {
  std::string hex(std::size_t(len) * 2, '\0');
  for (unsigned i = 0; i < len; ++i)
    std::snprintf(hex.data() + 2 * i, 3, "%02x", digest[i]);
  return hex;
}

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (!EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr))
    throw InvariantError("sha256 digest failed");
  return to_hex(digest, len);
}

std::string sha256_hex(const std::string& data) {
  return sha256_hex(data.data(), data.size());
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvariantError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw InvariantError("sha256 context allocation failed");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    EVP_DigestUpdate(ctx, buf, std::size_t(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  return to_hex(digest, len);
}

void record_artifact(RunManifest& manifest, const std::string& step,
                     const std::filesystem::path& path) {
  std::string hash = sha256_file(path);
  for (ManifestEntry& entry : manifest.artifacts)
    if (entry.path == path) {
      entry.step = step;
      entry.sha256 = hash;
      return;
    }
  manifest.artifacts.push_back(ManifestEntry{step, path, hash});
}

const ManifestEntry* find_artifact(const RunManifest& manifest,
                                   const std::filesystem::path& path) {
  for (const ManifestEntry& entry : manifest.artifacts)
    if (entry.path == path) return &entry;
  return nullptr;
}

void verify_artifacts(const RunManifest& manifest) {
  for (const ManifestEntry& entry : manifest.artifacts) {
    if (!std::filesystem::exists(entry.path))
      throw InvariantError("manifest artifact missing: " + entry.path.string());
    if (sha256_file(entry.path) != entry.sha256)
      throw InvariantError("manifest artifact modified: " + entry.path.string());
  }
}

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["schema"] = "advforge-manifest/1";
  j["config_path"] = manifest.config_path.string();
  j["master_seed"] = manifest.master_seed;
  j["output_dir"] = manifest.output_dir.string();
  j["artifacts"] = nlohmann::ordered_json::array();
  for (const ManifestEntry& entry : manifest.artifacts)
    j["artifacts"].push_back({{"step", entry.step},
                              {"path", entry.path.string()},
                              {"sha256", entry.sha256}});
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvariantError("cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvariantError("cannot read manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw InvariantError("manifest: not valid JSON");
  try {
    if (j.at("schema").get<std::string>() != "advforge-manifest/1")
      throw InvariantError("manifest: unknown schema");
    RunManifest m;
    m.config_path = j.at("config_path").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.output_dir = j.at("output_dir").get<std::string>();
    for (const auto& entry : j.at("artifacts"))
      m.artifacts.push_back(ManifestEntry{entry.at("step").get<std::string>(),
                                          entry.at("path").get<std::string>(),
                                          entry.at("sha256").get<std::string>()});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvariantError(std::string("manifest: ") + e.what());
  }
}

}  // namespace advforge
