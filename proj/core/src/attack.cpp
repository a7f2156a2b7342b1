#include "advforge/attack.hpp"

#include <algorithm>
#include <cmath>

#include "advforge/errors.hpp"

namespace advforge {

namespace {

constexpr std::size_t kDim = GafTensor::kDim;
constexpr std::size_t kChannels = GafTensor::kChannels;

void check_interval(double low, double high) {
  if (!(low > 0) || !(low <= 1.0) || !(high >= 1.0))
    throw ConfigError("attack scale interval must satisfy 0 < low <= 1 <= high");
}

ScalePair interval_at(const AttackConfig& cfg, std::size_t l) {
  if (cfg.schedule) return (*cfg.schedule)[l];
  return ScalePair{cfg.scale_low, cfg.scale_high};
}

}  // namespace

void validate(const AttackConfig& cfg) {
  if (cfg.episodes < 1) throw ConfigError("attack episodes must be >= 1");
  if (cfg.reset_period < 1) throw ConfigError("attack reset_period must be >= 1");
  check_interval(cfg.scale_low, cfg.scale_high);
  if (cfg.schedule)
    for (const auto& pair : *cfg.schedule) check_interval(pair.low, pair.high);
}

GafTensor perturb_diagonals(const GafTensor& tensor, const AttackConfig& cfg, Rng& rng) {
  GafTensor out = tensor;
  if (cfg.share_channel_draws) {
    for (std::size_t l = 0; l < kDim; ++l) {
      ScalePair s = interval_at(cfg, l);
      double r = rng.uniform(s.low, s.high);
      for (std::size_t c = 0; c < kChannels; ++c) out.at(c, l, l) *= r;
    }
  } else {
    for (std::size_t c = 0; c < kChannels; ++c)
      for (std::size_t l = 0; l < kDim; ++l) {
        ScalePair s = interval_at(cfg, l);
        out.at(c, l, l) *= rng.uniform(s.low, s.high);
      }
  }

  // Clamp, invert the diagonal to a normalized series and re-encode so the
  // whole matrix describes one consistent series again.
  for (std::size_t c = 0; c < kChannels; ++c) {
    GafMatrix m(kDim);
    for (std::size_t i = 0; i < kDim; ++i)
      m.at(i, i) = std::clamp(out.at(c, i, i), -1.0, 1.0);
    NormalizedSeries series = decode_diagonal(m);
    GafMatrix full = encode_normalized(series);
    for (std::size_t i = 0; i < kDim; ++i)
      for (std::size_t j = 0; j < kDim; ++j) out.at(c, i, j) = full.at(i, j);
  }
  return out;
}

bool perturbed_rule_consistent(const GafTensor& tensor, const ChannelExtents& extents,
                               PatternLabel label, const RuleParams& rules) {
  CandleWindow w;
  for (std::size_t c = 0; c < kChannels; ++c) {
    GafMatrix m(kDim);
    for (std::size_t i = 0; i < kDim; ++i) m.at(i, i) = tensor.at(c, i, i);
    NormalizedSeries series;
    try {
      series = decode_diagonal(m);
    } catch (const DomainError&) {
      return false;
    }
    double span = extents.max[c] - extents.min[c];
    for (std::size_t i = 0; i < kDim; ++i) {
      double price = extents.min[c] + series[i] * span;
      switch (c) {
        case 0: w.bars[i].open = price; break;
        case 1: w.bars[i].high = price; break;
        case 2: w.bars[i].low = price; break;
        case 3: w.bars[i].close = price; break;
      }
    }
  }
  try {
    return rule_check(w, label, rules);
  } catch (const InvariantError&) {
    return false;  // perturbation broke basic bar geometry
  } catch (const DegenerateWindow&) {
    return false;
  }
}

std::vector<PerturbationRecord> sample_adversarial(const Predictor& predict,
                                                   const AttackSource& source,
                                                   const AttackConfig& cfg,
                                                   const RuleParams& rules, Rng& rng,
                                                   const EpisodeHook* hook) {
  validate(cfg);
  const GafTensor original = encode_window(source.window);
  const ChannelExtents extents = channel_extents(source.window);

  std::vector<PerturbationRecord> records;
  GafTensor current = original;
  int depth = 0;
  for (int episode = 1; episode <= cfg.episodes; ++episode) {
    if (depth == cfg.reset_period) {
      current = original;
      depth = 0;
    }
    GafTensor next = perturb_diagonals(current, cfg, rng);
    ++depth;
    if (hook) (*hook)(EpisodeObservation{episode, depth, current, next});
    current = next;
    if (predict(current) == source.label) {  // attack failed: keep as training data
      PerturbationRecord rec;
      rec.tensor = current;
      rec.source_window_id = source.window_id;
      rec.label = source.label;
      rec.episode_index = episode;
      rec.perturb_depth = depth;
      rec.rule_consistent = perturbed_rule_consistent(current, extents, source.label, rules);
      if (!cfg.collect_only_rule_consistent || rec.rule_consistent)
        records.push_back(std::move(rec));
    }
  }
  return records;
}

AttackOutcome attack_item(const Predictor& predict, const GafTensor& tensor, PatternLabel label,
                          const AttackConfig& cfg, Rng& rng) {
  GafTensor current = tensor;
  int depth = 0;
  AttackOutcome out;
  for (int episode = 1; episode <= cfg.episodes; ++episode) {
    if (depth == cfg.reset_period) {
      current = tensor;
      depth = 0;
    }
    current = perturb_diagonals(current, cfg, rng);
    ++depth;
    out.episodes_used = episode;
    if (predict(current) != label) {
      out.success = true;
      return out;
    }
  }
  return out;
}

AttackEvalResult attack_eval(const Predictor& predict, const Dataset& dataset,
                             const AttackConfig& cfg) {
  validate(cfg);
  AttackEvalResult result;
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const DatasetItem& item = dataset.items[i];
    Rng rng(derive_seed(cfg.seed, {i}));
    AttackOutcome outcome = attack_item(predict, item.tensor, item.label, cfg, rng);
    auto& stats = result.per_label[std::size_t(int(item.label) - 1)];
    ++stats.total;
    if (outcome.success) ++stats.successes;
  }
  int present = 0;
  double sum = 0;
  for (auto& stats : result.per_label) {
    if (stats.total == 0) continue;
    stats.rate = double(stats.successes) / double(stats.total);
    sum += stats.rate;
    ++present;
  }
  result.average_rate = present ? sum / double(present) : 0.0;
  return result;
}

}  // namespace advforge
