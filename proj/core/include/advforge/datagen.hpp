#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "advforge/candlestick.hpp"
#include "advforge/dataset.hpp"
#include "advforge/rng.hpp"

namespace advforge {

struct GeneratorConfig {
  std::size_t per_class = 200;
  double base_price = 1.10;   // price level the synthetic series hovers around
  double volatility = 0.002;  // per-bar scale as a fraction of base_price
  std::uint64_t seed = 0;
  RuleParams rule_params;
};

/// Throws ConfigError unless per_class >= 1, base_price > 0, volatility > 0
/// and the rule params themselves validate.
void validate(const GeneratorConfig& cfg);

/// Builds a window whose trend segment and three pattern bars satisfy exactly
/// the requested label's predicate, resampling internally until match_pattern
/// agrees (at most 1000 attempts, then GenerationFailed). Deterministic in the
/// rng state.
CandleWindow synthesize_window(PatternLabel label, const GeneratorConfig& cfg, Rng& rng);

/// Parses `timestamp,open,high,low,close` CSV (RFC-4180 quoting, CRLF or LF).
/// Throws ParseError with 1-based row/column on malformed input and
/// InvariantError naming the row when a bar violates OHLC ordering.
std::vector<OhlcBar> load_ohlc_csv(const std::filesystem::path& path);

struct ScanHit {
  std::size_t offset = 0;  // index of the window's first bar in the stream
  CandleWindow window;
  PatternLabel label = PatternLabel::MorningStar;
};

/// Slides a 10-bar window with stride 1 over the stream and keeps every
/// position where match_pattern yields a label. Overlaps allowed. Requires at
/// least 10 bars.
std::vector<ScanHit> scan_and_label(const std::vector<OhlcBar>& bars, const RuleParams& params);

/// per_class windows per label, encoded with encode_window; provenance Clean.
/// Item substreams derive from (seed, label, index), so the result does not
/// depend on generation order. window_id = label << 32 | index.
Dataset build_dataset(const GeneratorConfig& cfg);

/// The windows behind build_dataset, in the same order, without encoding.
std::vector<std::pair<CandleWindow, PatternLabel>> build_windows(const GeneratorConfig& cfg);

}  // namespace advforge
