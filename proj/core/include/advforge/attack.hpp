#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "advforge/candlestick.hpp"
#include "advforge/dataset.hpp"
#include "advforge/gaf.hpp"
#include "advforge/rng.hpp"

namespace advforge {

struct ScalePair {
  double low = 0.99;
  double high = 1.01;
};

struct AttackConfig {
  int episodes = 10;     // R
  int reset_period = 3;  // restore the pristine tensor every this many episodes
  double scale_low = 0.99;
  double scale_high = 1.01;
  /// Optional per-diagonal-position intervals overriding scale_low/high,
  /// index l = bar position 0..9.
  std::optional<std::array<ScalePair, GafTensor::kDim>> schedule;
  /// Draw one scale per position and reuse it for all four channels instead
  /// of independent per-channel draws.
  bool share_channel_draws = false;
  /// Keep only records whose perturbed window still satisfies its rule.
  bool collect_only_rule_consistent = false;
  std::uint64_t seed = 0;
};

/// Throws ConfigError unless episodes >= 1, reset_period >= 1 and every scale
/// interval satisfies 0 < low <= 1 <= high.
void validate(const AttackConfig& cfg);

/// Classifier abstraction so the search can run against stub models in tests.
using Predictor = std::function<PatternLabel(const GafTensor&)>;

/// One perturbation episode: scale every channel's diagonal entries by
/// per-position uniform draws (channel-major draw order: all positions of
/// channel 0, then channel 1, ... unless share_channel_draws), clamp the
/// products into [-1, 1], decode each diagonal back to a normalized series
/// and re-encode it, so off-diagonals stay consistent with the new diagonal.
GafTensor perturb_diagonals(const GafTensor& tensor, const AttackConfig& cfg, Rng& rng);

struct PerturbationRecord {
  GafTensor tensor;
  std::uint64_t source_window_id = 0;
  PatternLabel label = PatternLabel::MorningStar;
  int episode_index = 0;  // 1-based episode that produced this record
  int perturb_depth = 0;  // 1..reset_period, episodes since the last reset
  bool rule_consistent = false;
};

struct AttackSource {
  CandleWindow window;  // pristine window, provides tensor and price frame
  std::uint64_t window_id = 0;
  PatternLabel label = PatternLabel::MorningStar;
};

/// Test hook observing each episode's working tensor before and after the
/// perturbation (after any reset).
struct EpisodeObservation {
  int episode_index = 0;
  int perturb_depth = 0;
  const GafTensor& before;
  const GafTensor& after;
};
using EpisodeHook = std::function<void(const EpisodeObservation&)>;

/// Runs cfg.episodes perturbation episodes against the source window's
/// tensor, restoring the pristine tensor every reset_period episodes. Each
/// episode whose perturbed tensor the model still classifies as the true
/// label (a failed attack) is collected. rule_consistent reports whether the
/// perturbed tensor, mapped back to prices with the original window's
/// per-channel extents, still satisfies the source label's rule.
std::vector<PerturbationRecord> sample_adversarial(const Predictor& predict,
                                                   const AttackSource& source,
                                                   const AttackConfig& cfg,
                                                   const RuleParams& rules, Rng& rng,
                                                   const EpisodeHook* hook = nullptr);

/// Decode a perturbed tensor into price bars using the source window's
/// extents and re-check the label's rule; violations of basic bar geometry
/// count as inconsistent rather than erroring.
bool perturbed_rule_consistent(const GafTensor& tensor, const ChannelExtents& extents,
                               PatternLabel label, const RuleParams& rules);

struct AttackOutcome {
  bool success = false;
  int episodes_used = 0;  // episodes consumed until the first flip, else R
};

/// Episode loop with the same reset schedule as sample_adversarial, stopping
/// at the first episode whose prediction differs from the label.
AttackOutcome attack_item(const Predictor& predict, const GafTensor& tensor, PatternLabel label,
                          const AttackConfig& cfg, Rng& rng);

struct LabelAttackStats {
  std::size_t successes = 0;
  std::size_t total = 0;
  double rate = 0;  // successes / total, 0 when the label is absent
};

struct AttackEvalResult {
  std::array<LabelAttackStats, kNumLabels> per_label{};
  double average_rate = 0;  // unweighted mean over labels present in the dataset
};

/// Per-item RNG substreams derive from (cfg.seed, item index), so results do
/// not depend on evaluation order.
AttackEvalResult attack_eval(const Predictor& predict, const Dataset& dataset,
                             const AttackConfig& cfg);

}  // namespace advforge
