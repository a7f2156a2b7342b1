#include "advforge/candlestick.hpp"

#include <cmath>
#include <cstdio>

#include "advforge/errors.hpp"

namespace advforge {

const char* bar_violation(const OhlcBar& bar) {
  if (!(std::isfinite(bar.open) && std::isfinite(bar.high) && std::isfinite(bar.low) &&
        std::isfinite(bar.close)))
    return "non-finite price";
  if (!(bar.open > 0 && bar.high > 0 && bar.low > 0 && bar.close > 0))
    return "non-positive price";
  if (bar.high < bar.open || bar.high < bar.close) return "high below open/close";
  if (bar.low > bar.open || bar.low > bar.close) return "low above open/close";
  return nullptr;
}

BarGeometry geometry(const OhlcBar& bar) {
  BarGeometry g;
  g.body = std::fabs(bar.close - bar.open);
  g.color = bar.close > bar.open   ? BarColor::White
            : bar.close < bar.open ? BarColor::Black
                                   : BarColor::Doji;
  g.upper_shadow = bar.high - std::max(bar.open, bar.close);
  g.lower_shadow = std::min(bar.open, bar.close) - bar.low;
  return g;
}

std::array<PatternLabel, kNumLabels> all_labels() {
  return {PatternLabel::MorningStar,      PatternLabel::EveningStar,
          PatternLabel::BullishEngulfing, PatternLabel::BearishEngulfing,
          PatternLabel::ShootingStar,     PatternLabel::InvertedHammer,
          PatternLabel::BullishHarami,    PatternLabel::BearishHarami};
}

const char* label_name(PatternLabel label) {
  switch (label) {
    case PatternLabel::MorningStar: return "MorningStar";
    case PatternLabel::EveningStar: return "EveningStar";
    case PatternLabel::BullishEngulfing: return "BullishEngulfing";
    case PatternLabel::BearishEngulfing: return "BearishEngulfing";
    case PatternLabel::ShootingStar: return "ShootingStar";
    case PatternLabel::InvertedHammer: return "InvertedHammer";
    case PatternLabel::BullishHarami: return "BullishHarami";
    case PatternLabel::BearishHarami: return "BearishHarami";
  }
  return "Unknown";
}

void validate(const RuleParams& p) {
  if (!(p.short_body_factor > 0) || !(p.long_body_factor > p.short_body_factor))
    throw ConfigError("rule params require long_body_factor > short_body_factor > 0");
  if (!(p.long_shadow_factor > 0)) throw ConfigError("long_shadow_factor must be > 0");
  if (!(p.trend_slope_threshold > 0)) throw ConfigError("trend_slope_threshold must be > 0");
}

Trend detect_trend(std::span<const OhlcBar> trend_bars, const RuleParams& params) {
  if (trend_bars.size() != CandleWindow::kTrendBars)
    throw InvariantError("detect_trend expects exactly 7 bars");
  const int n = int(CandleWindow::kTrendBars);
  // Least squares over x = 0..6: slope = sum((x - mean_x) * y) / sum((x - mean_x)^2).
  double mean_x = double(n - 1) / 2.0;
  double num = 0, den = 0, range_sum = 0;
  for (int i = 0; i < n; ++i) {
    double dx = double(i) - mean_x;
    num += dx * trend_bars[size_t(i)].close;
    den += dx * dx;
    range_sum += trend_bars[size_t(i)].high - trend_bars[size_t(i)].low;
  }
  double mean_range = range_sum / double(n);
  if (!(mean_range > 0)) throw DegenerateWindow("zero mean bar range in trend segment");
  double ratio = (num / den) / mean_range;
  if (ratio > params.trend_slope_threshold) return Trend::Up;
  if (ratio < -params.trend_slope_threshold) return Trend::Down;
  return Trend::Flat;
}

namespace {

// Per-bar predicates evaluated once against the window mean body. The long
// shadow threshold floors the reference body at 10% of the mean body so doji
// wicks still register.
struct BarFacts {
  BarGeometry g;
  bool long_body = false;
  bool short_body = false;
  bool long_upper = false;
  bool long_lower = false;
  bool white = false;
  bool black = false;
};

BarFacts facts(const OhlcBar& bar, double mean_body, const RuleParams& p) {
  BarFacts f;
  f.g = geometry(bar);
  f.long_body = f.g.body >= p.long_body_factor * mean_body;
  f.short_body = f.g.body <= p.short_body_factor * mean_body;
  double ref = std::max(f.g.body, 0.1 * mean_body);
  f.long_upper = f.g.upper_shadow >= p.long_shadow_factor * ref;
  f.long_lower = f.g.lower_shadow >= p.long_shadow_factor * ref;
  f.white = f.g.color == BarColor::White;
  f.black = f.g.color == BarColor::Black;
  return f;
}

// Strict containment of b's body price range inside a's.
bool body_inside(const OhlcBar& inner, const OhlcBar& outer) {
  double in_lo = std::min(inner.open, inner.close);
  double in_hi = std::max(inner.open, inner.close);
  double out_lo = std::min(outer.open, outer.close);
  double out_hi = std::max(outer.open, outer.close);
  return out_lo < in_lo && in_hi < out_hi;
}

}  // namespace

std::array<bool, kNumLabels> match_all(const CandleWindow& w, const RuleParams& params) {
  for (const auto& bar : w.bars) {
    if (const char* why = bar_violation(bar)) throw InvariantError(why);
  }
  Trend trend = detect_trend(std::span<const OhlcBar>(w.bars.data(), CandleWindow::kTrendBars),
                             params);

  double mean_body = 0;
  for (const auto& bar : w.bars) mean_body += std::fabs(bar.close - bar.open);
  mean_body /= double(CandleWindow::kBars);
  if (!(mean_body > 0)) throw DegenerateWindow("all bars in window are doji");

  const OhlcBar& p1 = w.bars[7];
  const OhlcBar& p2 = w.bars[8];
  const OhlcBar& p3 = w.bars[9];
  BarFacts f1 = facts(p1, mean_body, params);
  BarFacts f2 = facts(p2, mean_body, params);
  BarFacts f3 = facts(p3, mean_body, params);
  bool engulf_21 = body_inside(p1, p2);
  bool inside_21 = body_inside(p2, p1);
  bool down = trend == Trend::Down;
  bool up = trend == Trend::Up;
  bool colored2 = f2.white || f2.black;
  bool ih_shadow = params.inverted_hammer_upper_shadow ? f2.long_upper : f2.long_lower;

  std::array<bool, kNumLabels> m{};
  // Morning Star: long black, short star with a long lower wick, long white confirm.
  m[0] = down && f1.long_body && f1.black && f2.short_body && colored2 && f2.long_lower &&
         f3.long_body && f3.white;
  // Evening Star: the star gaps clear of the first body and lacks a long upper wick.
  m[1] = up && f1.long_body && f1.white && f2.short_body && colored2 && !f2.long_upper &&
         !inside_21 && f3.black;
  // Bullish Engulfing: white body strictly covering the prior black body.
  m[2] = down && f1.short_body && f1.black && f2.long_body && f2.white && engulf_21 && f3.white;
  // Bearish Engulfing.
  m[3] = up && f1.short_body && f1.white && f2.long_body && f2.black && engulf_21 && f3.black;
  // Shooting Star: small body, long upper wick, black confirm after an up trend.
  m[4] = up && f1.long_body && f1.white && f2.short_body && colored2 && f2.long_upper &&
         f3.black;
  // Inverted Hammer: like Morning Star but with a modest (not long) white confirm
  // and the configured hammer shadow.
  m[5] = down && f1.long_body && f1.black && f2.short_body && colored2 && ih_shadow &&
         f3.white && !f3.long_body;
  // Bullish Harami: small white body inside the long black one, quiet wicks.
  m[6] = down && f1.long_body && f1.black && f2.short_body && f2.white && inside_21 &&
         !f2.long_lower && !f2.long_upper && f3.white;
  // Bearish Harami.
  m[7] = up && f1.long_body && f1.white && f2.short_body && f2.black && inside_21 &&
         !f2.long_upper && !f2.long_lower && f3.black;
  return m;
}

std::optional<PatternLabel> match_pattern(const CandleWindow& w, const RuleParams& params) {
  auto m = match_all(w, params);
  std::optional<PatternLabel> found;
  for (int i = 0; i < kNumLabels; ++i) {
    if (!m[size_t(i)]) continue;
    if (found) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "window matches both %s and %s",
                    label_name(*found), label_name(PatternLabel(i + 1)));
      throw AmbiguousMatch(buf);
    }
    found = PatternLabel(i + 1);
  }
  return found;
}

bool rule_check(const CandleWindow& w, PatternLabel expected, const RuleParams& params) {
  try {
    auto got = match_pattern(w, params);
    return got.has_value() && *got == expected;
  } catch (const AmbiguousMatch&) {
    return false;
  }
}

}  // namespace advforge
