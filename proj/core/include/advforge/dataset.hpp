#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "advforge/candlestick.hpp"
#include "advforge/gaf.hpp"

namespace advforge {

enum class Provenance { Clean, Adversarial, Merged };
enum class ItemOrigin { Clean, Adversarial };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

/// Attack bookkeeping for items that came out of the perturbation search.
struct AttackMeta {
  std::uint32_t episode_index = 0;
  std::uint32_t perturb_depth = 0;
  bool rule_consistent = false;
};

struct DatasetItem {
  GafTensor tensor;
  PatternLabel label = PatternLabel::MorningStar;
  std::uint64_t window_id = 0;
  ItemOrigin origin = ItemOrigin::Clean;
  std::optional<AttackMeta> attack;
};

struct Dataset {
  std::vector<DatasetItem> items;
  Provenance provenance = Provenance::Clean;
  std::uint64_t seed = 0;

  /// Items per label, index 0 holds label 1.
  std::array<std::size_t, kNumLabels> class_counts() const;
};

/// Binary container: magic "GAFD", version u32=1, then item count and tensor
/// dims (u32 each), then per item label u8, window_id u64 and 400 f32 values
/// in channel-major order. All integers and floats little-endian. Per-item
/// origin and attack metadata travel in a JSON sidecar at path + ".meta.json".
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace advforge
