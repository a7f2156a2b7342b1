#include "advforge/candlestick.hpp"

#include <cmath>

#include "advforge/errors.hpp"
#include "advforge/rng.hpp"
#include "doctest.h"
#include "support/util.hpp"

using namespace advforge;

namespace {

OhlcBar doji_bar(double close, double half_range) {
  return OhlcBar{close, close + half_range, close - half_range, close};
}

/// Seven black bars with closes descending by 0.2 and total range 0.2 each:
/// least-squares slope -0.2, mean range 0.2, ratio -1.0 -> Down.
std::array<OhlcBar, 7> down_trend_segment() {
  std::array<OhlcBar, 7> bars{};
  for (int i = 0; i < 7; ++i) {
    double close = 10.0 - 0.2 * double(i);
    double open = close + 0.1;
    bars[size_t(i)] = OhlcBar{open, open + 0.05, close - 0.05, close};
  }
  return bars;
}

CandleWindow with_pattern(const std::array<OhlcBar, 7>& trend, OhlcBar b1, OhlcBar b2,
                          OhlcBar b3) {
  CandleWindow w;
  for (int i = 0; i < 7; ++i) w.bars[size_t(i)] = trend[size_t(i)];
  w.bars[7] = b1;
  w.bars[8] = b2;
  w.bars[9] = b3;
  return w;
}

/// Down trend; long black; short white star with long lower shadow; long white
/// confirmation. Mean body = (7*0.1 + 0.8 + 0.05 + 0.8)/10 = 0.235.
CandleWindow morning_star_window() {
  return with_pattern(down_trend_segment(),
                      OhlcBar{8.80, 8.85, 7.95, 8.00},   // body 0.80 black
                      OhlcBar{7.90, 7.96, 7.75, 7.95},   // body 0.05 white, lower shadow 0.15
                      OhlcBar{7.93, 8.78, 7.88, 8.73});  // body 0.80 white
}

/// Down trend; short black; long white engulfing it; white confirmation.
/// Mean body = (7*0.1 + 0.08 + 0.85 + 0.45)/10 = 0.208.
CandleWindow bullish_engulfing_window() {
  return with_pattern(down_trend_segment(),
                      OhlcBar{8.80, 8.82, 8.70, 8.72},   // body 0.08 black
                      OhlcBar{8.65, 9.55, 8.60, 9.50},   // body 0.85 white, engulfs
                      OhlcBar{9.40, 9.90, 9.35, 9.85});  // body 0.45 white
}

CandleWindow scaled(const CandleWindow& w, double lambda) {
  CandleWindow out = w;
  for (auto& b : out.bars) {
    b.open *= lambda;
    b.high *= lambda;
    b.low *= lambda;
    b.close *= lambda;
  }
  return out;
}

/// Time reversal with open/close swapped per bar.
std::array<OhlcBar, 7> mirrored(const std::array<OhlcBar, 7>& bars) {
  std::array<OhlcBar, 7> out{};
  for (int i = 0; i < 7; ++i) {
    const OhlcBar& b = bars[size_t(6 - i)];
    out[size_t(i)] = OhlcBar{b.close, b.high, b.low, b.open};
  }
  return out;
}

}  // namespace

TEST_SUITE("candlestick") {
  TEST_CASE("geometry of white, black and doji bars") {
    auto g = geometry(OhlcBar{10, 12, 9, 11});
    CHECK(g.body == 1.0);
    CHECK(g.color == BarColor::White);
    CHECK(g.upper_shadow == 1.0);
    CHECK(g.lower_shadow == 1.0);

    g = geometry(OhlcBar{11, 12, 9, 10});
    CHECK(g.body == 1.0);
    CHECK(g.color == BarColor::Black);
    CHECK(g.upper_shadow == 1.0);
    CHECK(g.lower_shadow == 1.0);

    g = geometry(OhlcBar{10, 10, 10, 10});
    CHECK(g.body == 0.0);
    CHECK(g.color == BarColor::Doji);
    CHECK(g.upper_shadow == 0.0);
    CHECK(g.lower_shadow == 0.0);
  }

  TEST_CASE("geometry recomposition is bit-exact") {
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
      double open = rng.uniform(1.0, 100.0);
      double close = rng.uniform(1.0, 100.0);
      double hi = std::max(open, close) + rng.uniform(0.0, 5.0);
      double lo = std::min(open, close) - rng.uniform(0.0, 5.0);
      OhlcBar b{open, hi, lo, close};
      auto g = geometry(b);
      CHECK(g.body == std::fabs(b.close - b.open));
      CHECK(g.upper_shadow == b.high - std::max(b.open, b.close));
      CHECK(g.lower_shadow == std::min(b.open, b.close) - b.low);
    }
  }

  TEST_CASE("bar_violation flags invalid bars") {
    CHECK(bar_violation(OhlcBar{10, 12, 9, 11}) == nullptr);
    CHECK(bar_violation(OhlcBar{10, 10.5, 9, 11}) != nullptr);   // high < close
    CHECK(bar_violation(OhlcBar{10, 12, 10.5, 11}) != nullptr);  // low > open
    CHECK(bar_violation(OhlcBar{-1, 12, -2, 11}) != nullptr);    // non-positive
    CHECK(bar_violation(OhlcBar{10, std::nan(""), 9, 11}) != nullptr);
  }

  TEST_CASE("detect_trend on arithmetic close sequences") {
    RuleParams params;
    std::array<OhlcBar, 7> bars{};
    for (int i = 0; i < 7; ++i) bars[size_t(i)] = doji_bar(1.0 + double(i), 0.5);
    CHECK(detect_trend(bars, params) == Trend::Up);  // slope 1, mean range 1

    for (int i = 0; i < 7; ++i) bars[size_t(i)] = doji_bar(7.0 - double(i), 0.5);
    CHECK(detect_trend(bars, params) == Trend::Down);

    for (int i = 0; i < 7; ++i) bars[size_t(i)] = doji_bar(4.0, 0.5);
    CHECK(detect_trend(bars, params) == Trend::Flat);
  }

  TEST_CASE("detect_trend threshold boundaries") {
    RuleParams params;  // threshold 0.1
    std::array<OhlcBar, 7> bars{};
    auto ramp = [&](double slope) {
      for (int i = 0; i < 7; ++i) bars[size_t(i)] = doji_bar(5.0 + slope * double(i), 0.5);
    };
    ramp(0.2);
    CHECK(detect_trend(bars, params) == Trend::Up);
    ramp(0.05);
    CHECK(detect_trend(bars, params) == Trend::Flat);
    ramp(-0.05);
    CHECK(detect_trend(bars, params) == Trend::Flat);
    ramp(-0.2);
    CHECK(detect_trend(bars, params) == Trend::Down);
  }

  TEST_CASE("detect_trend rejects degenerate input") {
    RuleParams params;
    std::array<OhlcBar, 7> flat{};
    for (auto& b : flat) b = OhlcBar{3, 3, 3, 3};
    CHECK_THROWS_AS(detect_trend(flat, params), DegenerateWindow);

    std::array<OhlcBar, 6> six{};
    for (auto& b : six) b = doji_bar(3, 0.5);
    CHECK_THROWS_AS(detect_trend(six, params), InvariantError);
  }

  TEST_CASE("trend antisymmetry under time reversal with open/close mirroring") {
    RuleParams params;
    Rng rng(31);
    int flips = 0;
    for (int iter = 0; iter < 200; ++iter) {
      // Doji bars: mirroring exactly reverses the close sequence, so the
      // least-squares slope negates and mean range is unchanged.
      std::array<OhlcBar, 7> bars{};
      double level = rng.uniform(50, 60);
      double step = rng.uniform(-1.0, 1.0);
      for (int i = 0; i < 7; ++i) {
        double close = level + step * i + rng.uniform(-0.2, 0.2);
        bars[size_t(i)] = doji_bar(close, rng.uniform(0.3, 0.8));
      }
      Trend fwd = detect_trend(bars, params);
      Trend rev = detect_trend(mirrored(bars), params);
      if (fwd == Trend::Up) {
        CHECK(rev == Trend::Down);
        ++flips;
      } else if (fwd == Trend::Down) {
        CHECK(rev == Trend::Up);
        ++flips;
      } else {
        CHECK(rev == Trend::Flat);
      }
    }
    CHECK(flips > 50);  // the draw ranges make non-Flat segments common
  }

  TEST_CASE("hand-built Morning Star window matches exactly that label") {
    RuleParams params;
    auto mask = match_all(morning_star_window(), params);
    CHECK(mask[0]);
    for (int i = 1; i < kNumLabels; ++i) CHECK(!mask[size_t(i)]);
    CHECK(match_pattern(morning_star_window(), params) == PatternLabel::MorningStar);
    CHECK(rule_check(morning_star_window(), PatternLabel::MorningStar, params));
    CHECK(!rule_check(morning_star_window(), PatternLabel::EveningStar, params));
  }

  TEST_CASE("hand-built Bullish Engulfing window matches exactly that label") {
    RuleParams params;
    auto w = bullish_engulfing_window();
    CHECK(match_pattern(w, params) == PatternLabel::BullishEngulfing);
  }

  TEST_CASE("Flat trend matches nothing regardless of pattern bars") {
    RuleParams params;
    auto w = morning_star_window();
    for (int i = 0; i < 7; ++i) w.bars[size_t(i)] = doji_bar(9.0, 0.1);
    CHECK(!match_pattern(w, params).has_value());
  }

  TEST_CASE("a doji in the confirming slot matches nothing") {
    RuleParams params;
    auto w = morning_star_window();
    w.bars[9] = doji_bar(8.0, 0.3);
    CHECK(!match_pattern(w, params).has_value());
  }

  TEST_CASE("match_pattern is invariant under uniform price scaling") {
    RuleParams params;
    for (double lambda : {1e-3, 0.37, 3.0, 1e5}) {
      CHECK(match_pattern(scaled(morning_star_window(), lambda), params) ==
            PatternLabel::MorningStar);
      CHECK(match_pattern(scaled(bullish_engulfing_window(), lambda), params) ==
            PatternLabel::BullishEngulfing);
    }
  }

  TEST_CASE("invariant-violating params can produce AmbiguousMatch; rule_check maps it to false") {
    // k_long < k_short lets one body be both "long" and "short": this window
    // satisfies Morning Star and Bullish Engulfing simultaneously.
    RuleParams bad;
    bad.long_body_factor = 0.5;
    bad.short_body_factor = 0.6;
    auto w = with_pattern(down_trend_segment(),
                          OhlcBar{8.800, 8.805, 8.735, 8.740},    // body 0.060 black
                          OhlcBar{8.7385, 8.805, 8.6585, 8.8015},  // body 0.063 white, engulfs
                          OhlcBar{8.79, 9.14, 8.74, 9.09});        // body 0.30 white
    auto mask = match_all(w, bad);
    CHECK(mask[0]);
    CHECK(mask[2]);
    CHECK_THROWS_AS(match_pattern(w, bad), AmbiguousMatch);
    CHECK(!rule_check(w, PatternLabel::MorningStar, bad));
    CHECK(!rule_check(w, PatternLabel::BullishEngulfing, bad));
  }

  TEST_CASE("RuleParams validation") {
    RuleParams ok;
    CHECK_NOTHROW(validate(ok));
    RuleParams bad = ok;
    bad.short_body_factor = 1.5;  // >= long_body_factor
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = ok;
    bad.trend_slope_threshold = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = ok;
    bad.long_shadow_factor = -1;
    CHECK_THROWS_AS(validate(bad), ConfigError);
  }

  TEST_CASE("label table") {
    auto labels = all_labels();
    CHECK(int(labels[0]) == 1);
    CHECK(int(labels[7]) == 8);
    CHECK(label_name(PatternLabel::MorningStar) == std::string("MorningStar"));
    CHECK(label_name(PatternLabel::BearishHarami) == std::string("BearishHarami"));
  }
}
