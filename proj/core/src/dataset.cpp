#include "advforge/dataset.hpp"

#include <cstdint>

#include "advforge/errors.hpp"
#include "advforge/rng.hpp"
#include "binio.hpp"
#include "json.hpp"

namespace advforge {

namespace {

using nlohmann::ordered_json;
using namespace binio;

constexpr char kMagic[4] = {'G', 'A', 'F', 'D'};
constexpr std::uint32_t kVersion = 1;

const char* origin_name(ItemOrigin o) { return o == ItemOrigin::Clean ? "clean" : "adversarial"; }

ItemOrigin origin_from_name(const std::string& s) {
  if (s == "clean") return ItemOrigin::Clean;
  if (s == "adversarial") return ItemOrigin::Adversarial;
  throw InvariantError("unknown item origin '" + s + "' in dataset sidecar");
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta.json");
}

}  // namespace

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Clean: return "clean";
    case Provenance::Adversarial: return "adversarial";
    case Provenance::Merged: return "merged";
  }
  return "clean";
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "clean") return Provenance::Clean;
  if (name == "adversarial") return Provenance::Adversarial;
  if (name == "merged") return Provenance::Merged;
  throw InvariantError("unknown provenance '" + name + "'");
}

std::array<std::size_t, kNumLabels> Dataset::class_counts() const {
  std::array<std::size_t, kNumLabels> counts{};
  for (const auto& item : items) {
    int idx = int(item.label) - 1;
    if (idx < 0 || idx >= kNumLabels) throw InvariantError("dataset item label out of range");
    ++counts[size_t(idx)];
  }
  return counts;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());

  std::string buf;
  buf.reserve(24 + ds.items.size() * (1 + 8 + GafTensor::kValues * 4));
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, std::uint32_t(ds.items.size()));
  put_u32(buf, std::uint32_t(GafTensor::kDim));
  put_u32(buf, std::uint32_t(GafTensor::kDim));
  put_u32(buf, std::uint32_t(GafTensor::kChannels));
  for (const auto& item : ds.items) {
    buf.push_back(char(std::uint8_t(int(item.label))));
    put_u64(buf, item.window_id);
    for (double v : item.tensor.values) put_f32(buf, float(v));
  }
  write_text(path, buf);

  ordered_json meta;
  meta["schema"] = "gafd-meta/1";
  meta["provenance"] = provenance_name(ds.provenance);
  meta["seed"] = ds.seed;
  meta["rng"] = kRngFamily;
  ordered_json origins = ordered_json::array();
  ordered_json episodes = ordered_json::array();
  ordered_json depths = ordered_json::array();
  ordered_json consistent = ordered_json::array();
  bool any_attack = false;
  for (const auto& item : ds.items) {
    origins.push_back(origin_name(item.origin));
    if (item.attack) {
      any_attack = true;
      episodes.push_back(item.attack->episode_index);
      depths.push_back(item.attack->perturb_depth);
      consistent.push_back(item.attack->rule_consistent);
    } else {
      episodes.push_back(nullptr);
      depths.push_back(nullptr);
      consistent.push_back(nullptr);
    }
  }
  meta["item_origin"] = std::move(origins);
  if (any_attack) {
    meta["episode_index"] = std::move(episodes);
    meta["perturb_depth"] = std::move(depths);
    meta["rule_consistent"] = std::move(consistent);
  }
  write_text(sidecar_path(path), meta.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::string buf = read_text(path);
  Reader r{buf};
  if (buf.size() < 4 || std::string_view(buf.data(), 4) != std::string_view(kMagic, 4))
    throw InvariantError("not a GAFD dataset: " + path.string());
  r.pos = 4;
  std::uint32_t version = r.u32();
  if (version != kVersion)
    throw InvariantError("unsupported GAFD version " + std::to_string(version));
  std::uint32_t count = r.u32();
  std::uint32_t h = r.u32(), w = r.u32(), c = r.u32();
  if (h != GafTensor::kDim || w != GafTensor::kDim || c != GafTensor::kChannels)
    throw InvariantError("unexpected tensor shape in " + path.string());

  Dataset ds;
  ds.items.resize(count);
  for (auto& item : ds.items) {
    int label = int(r.u8());
    if (label < 1 || label > kNumLabels)
      throw InvariantError("label out of range in " + path.string());
    item.label = PatternLabel(label);
    item.window_id = r.u64();
    for (double& v : item.tensor.values) v = double(r.f32());
  }
  if (r.pos != buf.size()) throw InvariantError("trailing bytes in " + path.string());

  auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    auto meta = nlohmann::json::parse(read_text(side));
    ds.provenance = provenance_from_name(meta.at("provenance").get<std::string>());
    ds.seed = meta.at("seed").get<std::uint64_t>();
    if (meta.contains("item_origin")) {
      const auto& origins = meta.at("item_origin");
      if (origins.size() != ds.items.size())
        throw InvariantError("sidecar origin count mismatch for " + path.string());
      for (std::size_t i = 0; i < ds.items.size(); ++i)
        ds.items[i].origin = origin_from_name(origins[i].get<std::string>());
    }
    if (meta.contains("episode_index")) {
      const auto& ep = meta.at("episode_index");
      const auto& dp = meta.at("perturb_depth");
      const auto& rc = meta.at("rule_consistent");
      if (ep.size() != ds.items.size() || dp.size() != ds.items.size() ||
          rc.size() != ds.items.size())
        throw InvariantError("sidecar attack metadata mismatch for " + path.string());
      for (std::size_t i = 0; i < ds.items.size(); ++i) {
        if (ep[i].is_null()) continue;
        AttackMeta m;
        m.episode_index = ep[i].get<std::uint32_t>();
        m.perturb_depth = dp[i].get<std::uint32_t>();
        m.rule_consistent = rc[i].get<bool>();
        ds.items[i].attack = m;
      }
    }
  } else {
    ItemOrigin fallback = ds.provenance == Provenance::Adversarial ? ItemOrigin::Adversarial
                                                                   : ItemOrigin::Clean;
    for (auto& item : ds.items) item.origin = fallback;
  }
  return ds;
}

}  // namespace advforge
