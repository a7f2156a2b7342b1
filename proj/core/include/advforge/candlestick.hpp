#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

namespace advforge {

struct OhlcBar {
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
};

/// Returns nullptr if the bar satisfies high >= max(open,close),
/// low <= min(open,close), all finite and > 0; otherwise a reason string.
const char* bar_violation(const OhlcBar& bar);

enum class BarColor { White, Black, Doji };

struct BarGeometry {
  double body = 0;  // |close - open|
  BarColor color = BarColor::Doji;
  double upper_shadow = 0;  // high - max(open, close)
  double lower_shadow = 0;  // min(open, close) - low
};

BarGeometry geometry(const OhlcBar& bar);

/// 10 time-ordered bars: trend segment bars[0..7), pattern segment bars[7..10).
struct CandleWindow {
  static constexpr std::size_t kBars = 10;
  static constexpr std::size_t kTrendBars = 7;
  std::array<OhlcBar, kBars> bars{};
};

enum class PatternLabel : int {
  MorningStar = 1,
  EveningStar = 2,
  BullishEngulfing = 3,
  BearishEngulfing = 4,
  ShootingStar = 5,
  InvertedHammer = 6,
  BullishHarami = 7,
  BearishHarami = 8,
};
inline constexpr int kNumLabels = 8;

/// Labels in report order 1..8.
std::array<PatternLabel, kNumLabels> all_labels();
const char* label_name(PatternLabel label);

enum class Trend { Up, Down, Flat };

struct RuleParams {
  double long_body_factor = 1.2;    // "long" body >= factor * window mean body
  double short_body_factor = 0.6;   // "short" body <= factor * window mean body
  double long_shadow_factor = 1.0;  // "long" shadow >= factor * floored own body
  double trend_slope_threshold = 0.1;  // |normalized slope| above which a trend exists
  // Chart references disagree on which shadow makes an Inverted Hammer: some
  // use the lower shadow of the middle bar, classic charting uses the upper.
  // The default keeps the lower-shadow reading.
  bool inverted_hammer_upper_shadow = false;
};

/// Throws ConfigError unless long > short > 0, shadow factor > 0, threshold > 0.
void validate(const RuleParams& params);

/// Least-squares slope of the 7 close prices over bar index, divided by the
/// mean bar range (high - low). Up if the ratio exceeds the threshold, Down if
/// below its negation, else Flat. Throws DegenerateWindow on zero mean range,
/// InvariantError unless exactly 7 bars are passed.
Trend detect_trend(std::span<const OhlcBar> trend_bars, const RuleParams& params);

/// All pattern predicates that hold for the window, in label order.
/// Disjoint by construction whenever params satisfy the RuleParams invariant,
/// so the result has at most one element for validated params.
std::array<bool, kNumLabels> match_all(const CandleWindow& w, const RuleParams& params);

/// The unique matching label, or nullopt when no predicate holds.
/// Throws AmbiguousMatch if more than one predicate holds.
std::optional<PatternLabel> match_pattern(const CandleWindow& w, const RuleParams& params);

/// True iff match_pattern(w) == expected; an ambiguous match counts as false.
bool rule_check(const CandleWindow& w, PatternLabel expected, const RuleParams& params);

}  // namespace advforge
