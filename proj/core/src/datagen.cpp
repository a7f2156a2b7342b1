#include "advforge/datagen.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "advforge/errors.hpp"
#include "advforge/gaf.hpp"
#include "advforge/log.hpp"

namespace advforge {

namespace {

constexpr int kMaxAttempts = 1000;

/// Bars move down ahead of bullish reversals, up ahead of bearish ones.
int trend_direction(PatternLabel label) {
  switch (label) {
    case PatternLabel::MorningStar:
    case PatternLabel::BullishEngulfing:
    case PatternLabel::InvertedHammer:
    case PatternLabel::BullishHarami: return -1;
    case PatternLabel::EveningStar:
    case PatternLabel::BearishEngulfing:
    case PatternLabel::ShootingStar:
    case PatternLabel::BearishHarami: return 1;
  }
  return -1;
}

OhlcBar finish_bar(double open, double close, double upper_wick, double lower_wick) {
  OhlcBar b;
  b.open = open;
  b.close = close;
  b.high = std::max(open, close) + upper_wick;
  b.low = std::min(open, close) - lower_wick;
  return b;
}

/// Seven bars drifting dir * step per bar. Bodies stay around half the
/// per-bar scale and wicks well under it, so the slope-to-range ratio clears
/// the default trend threshold with a wide margin on every draw.
std::array<OhlcBar, 7> gen_trend_segment(int dir, double p0, double vol, Rng& rng) {
  std::array<OhlcBar, 7> out{};
  double step = rng.uniform(0.6, 1.4) * vol;
  for (int i = 0; i < 7; ++i) {
    double close = p0 + dir * step * double(i) + rng.uniform(-0.35, 0.35) * vol;
    double body = rng.uniform(0.42, 0.58) * vol;
    double open = rng.chance(0.25) ? close + dir * body : close - dir * body;
    out[size_t(i)] =
        finish_bar(open, close, rng.uniform(0.05, 0.45) * vol, rng.uniform(0.05, 0.45) * vol);
  }
  return out;
}

struct WickPlan {
  bool upper_long = false;
  bool lower_long = false;
};

/// Wick lengths are drawn relative to the same floored body reference the
/// matcher uses, leaving a gap on both sides of the long-shadow threshold.
OhlcBar rebar(double open, double close, double mean_body, const WickPlan& plan, Rng& rng) {
  double ref = std::max(std::fabs(close - open), 0.1 * mean_body);
  double uw = (plan.upper_long ? rng.uniform(1.6, 2.6) : rng.uniform(0.15, 0.45)) * ref;
  double lw = (plan.lower_long ? rng.uniform(1.6, 2.6) : rng.uniform(0.15, 0.45)) * ref;
  return finish_bar(open, close, uw, lw);
}

CandleWindow attempt_window(PatternLabel label, const GeneratorConfig& cfg, Rng& rng) {
  const double vol = cfg.volatility * cfg.base_price;
  const int dir = trend_direction(label);
  auto trend = gen_trend_segment(dir, cfg.base_price, vol, rng);

  // Bodies first: the matcher thresholds depend on the window mean body, so
  // wick and position geometry are laid out only once all ten bodies are known.
  double b1 = 0, b2 = 0, b3 = 0;
  switch (label) {
    case PatternLabel::MorningStar:
      b1 = rng.uniform(1.9, 3.0) * vol;
      b2 = rng.uniform(0.06, 0.28) * vol;
      b3 = rng.uniform(1.9, 3.0) * vol;
      break;
    case PatternLabel::InvertedHammer:
      b1 = rng.uniform(1.9, 3.0) * vol;
      b2 = rng.uniform(0.06, 0.28) * vol;
      b3 = rng.uniform(0.5, 0.9) * vol;  // confirm stays below the long threshold
      break;
    case PatternLabel::EveningStar:
    case PatternLabel::ShootingStar:
      b1 = rng.uniform(1.9, 3.0) * vol;
      b2 = rng.uniform(0.06, 0.28) * vol;
      b3 = rng.uniform(0.55, 1.0) * vol;
      break;
    case PatternLabel::BullishEngulfing:
    case PatternLabel::BearishEngulfing:
      b1 = rng.uniform(0.18, 0.32) * vol;
      b2 = rng.uniform(1.9, 3.0) * vol;
      b3 = rng.uniform(0.55, 1.0) * vol;
      break;
    case PatternLabel::BullishHarami:
    case PatternLabel::BearishHarami:
      b1 = rng.uniform(1.9, 3.0) * vol;
      b2 = rng.uniform(0.06, 0.28) * vol;
      b3 = rng.uniform(0.55, 1.0) * vol;
      break;
  }

  double mean_body = b1 + b2 + b3;
  for (const auto& bar : trend) mean_body += std::fabs(bar.close - bar.open);
  mean_body /= double(CandleWindow::kBars);

  const double c6 = trend[6].close;
  double open1 = c6 + rng.uniform(-0.2, 0.2) * vol;
  double close1 = 0, open2 = 0, close2 = 0, open3 = 0, close3 = 0;
  WickPlan w2;  // b1 and b3 always keep quiet wicks

  bool ih_upper = cfg.rule_params.inverted_hammer_upper_shadow;
  switch (label) {
    case PatternLabel::MorningStar:
    case PatternLabel::InvertedHammer: {
      close1 = open1 - b1;  // long black
      double top2 = close1 - rng.uniform(0.05, 0.35) * vol;  // star gaps below
      double bottom2 = top2 - b2;
      if (rng.chance(0.5)) {
        open2 = bottom2;
        close2 = top2;
      } else {
        open2 = top2;
        close2 = bottom2;
      }
      if (label == PatternLabel::InvertedHammer && ih_upper)
        w2.upper_long = true;
      else
        w2.lower_long = true;
      open3 = bottom2 + rng.uniform(0.2, 0.8) * b2;  // opens inside the star body
      close3 = open3 + b3;                           // white confirm
      break;
    }
    case PatternLabel::EveningStar:
    case PatternLabel::ShootingStar: {
      close1 = open1 + b1;  // long white
      double bottom2 = close1 + rng.uniform(0.05, 0.35) * vol;  // star gaps above
      double top2 = bottom2 + b2;
      if (rng.chance(0.5)) {
        open2 = bottom2;
        close2 = top2;
      } else {
        open2 = top2;
        close2 = bottom2;
      }
      if (label == PatternLabel::ShootingStar) w2.upper_long = true;
      open3 = bottom2 + rng.uniform(0.2, 0.8) * b2;
      close3 = open3 - b3;  // black confirm
      break;
    }
    case PatternLabel::BullishEngulfing: {
      close1 = open1 - b1;  // short black
      double overhang = b2 - b1;
      open2 = close1 - rng.uniform(0.25, 0.75) * overhang;
      close2 = open2 + b2;  // white body strictly covers the black one
      open3 = open2 + rng.uniform(0.2, 0.8) * b2;
      close3 = open3 + b3;
      break;
    }
    case PatternLabel::BearishEngulfing: {
      close1 = open1 + b1;  // short white
      double overhang = b2 - b1;
      open2 = close1 + rng.uniform(0.25, 0.75) * overhang;
      close2 = open2 - b2;
      open3 = close2 + rng.uniform(0.2, 0.8) * b2;
      close3 = open3 - b3;
      break;
    }
    case PatternLabel::BullishHarami: {
      close1 = open1 - b1;  // long black
      double bottom2 = close1 + rng.uniform(0.1, 0.9) * (b1 - b2);
      open2 = bottom2;
      close2 = bottom2 + b2;  // small white strictly inside
      open3 = bottom2 + rng.uniform(0.2, 0.8) * b2;
      close3 = open3 + b3;
      break;
    }
    case PatternLabel::BearishHarami: {
      close1 = open1 + b1;  // long white
      double top2 = close1 - rng.uniform(0.1, 0.9) * (b1 - b2);
      open2 = top2;
      close2 = top2 - b2;  // small black strictly inside
      open3 = close2 + rng.uniform(0.2, 0.8) * b2;
      close3 = open3 - b3;
      break;
    }
  }

  CandleWindow w;
  for (int i = 0; i < 7; ++i) w.bars[size_t(i)] = trend[size_t(i)];
  w.bars[7] = rebar(open1, close1, mean_body, WickPlan{}, rng);
  w.bars[8] = rebar(open2, close2, mean_body, w2, rng);
  w.bars[9] = rebar(open3, close3, mean_body, WickPlan{}, rng);
  return w;
}

}  // namespace

void validate(const GeneratorConfig& cfg) {
  if (cfg.per_class < 1) throw ConfigError("generator per_class must be >= 1");
  if (!(cfg.base_price > 0)) throw ConfigError("generator base_price must be > 0");
  if (!(cfg.volatility > 0)) throw ConfigError("generator volatility must be > 0");
  validate(cfg.rule_params);
}

CandleWindow synthesize_window(PatternLabel label, const GeneratorConfig& cfg, Rng& rng) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    CandleWindow w = attempt_window(label, cfg, rng);
    if (match_pattern(w, cfg.rule_params) == label) return w;
  }
  throw GenerationFailed(std::string("could not synthesize ") + label_name(label) + " in " +
                         std::to_string(kMaxAttempts) + " attempts; rule params too strict");
}

namespace {

struct CsvCursor {
  const std::string& text;
  std::size_t pos = 0;
  std::size_t row = 1;

  bool done() const { return pos >= text.size(); }

  /// One RFC-4180 record; `column` reported 1-based on error.
  std::vector<std::string> record() {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    std::size_t col = 1;
    while (true) {
      if (pos >= text.size()) {
        if (quoted) throw ParseError(row, col, "unterminated quoted field");
        break;
      }
      char ch = text[pos];
      if (quoted) {
        if (ch == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            field.push_back('"');
            pos += 2;
          } else {
            quoted = false;
            ++pos;
          }
        } else {
          field.push_back(ch);
          ++pos;
        }
        continue;
      }
      if (ch == '"') {
        if (!field.empty()) throw ParseError(row, col, "quote inside unquoted field");
        quoted = true;
        ++pos;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        ++col;
        ++pos;
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
        ++pos;
        break;
      } else {
        field.push_back(ch);
        ++pos;
      }
    }
    fields.push_back(std::move(field));
    return fields;
  }
};

double parse_price(const std::string& field, std::size_t row, std::size_t column) {
  if (field.empty()) throw ParseError(row, column, "empty price field");
  const char* begin = field.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + field.size()) throw ParseError(row, column, "not a number: '" + field + "'");
  return v;
}

}  // namespace

std::vector<OhlcBar> load_ohlc_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, 0, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();

  CsvCursor cur{text};
  auto header = cur.record();
  const std::vector<std::string> expected = {"timestamp", "open", "high", "low", "close"};
  if (header != expected)
    throw ParseError(1, 1, "expected header 'timestamp,open,high,low,close'");

  std::vector<OhlcBar> bars;
  while (!cur.done()) {
    ++cur.row;
    std::size_t row = cur.row;
    auto fields = cur.record();
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line / trailing newline
    if (fields.size() != 5)
      throw ParseError(row, fields.size(), "expected 5 fields, got " +
                                               std::to_string(fields.size()));
    OhlcBar bar;
    bar.open = parse_price(fields[1], row, 2);
    bar.high = parse_price(fields[2], row, 3);
    bar.low = parse_price(fields[3], row, 4);
    bar.close = parse_price(fields[4], row, 5);
    if (const char* why = bar_violation(bar)) throw InvariantError(row, why);
    bars.push_back(bar);
  }
  return bars;
}

std::vector<ScanHit> scan_and_label(const std::vector<OhlcBar>& bars, const RuleParams& params) {
  if (bars.size() < CandleWindow::kBars)
    throw InvariantError("scan_and_label needs at least 10 bars");
  std::vector<ScanHit> hits;
  for (std::size_t off = 0; off + CandleWindow::kBars <= bars.size(); ++off) {
    CandleWindow w;
    for (std::size_t i = 0; i < CandleWindow::kBars; ++i) w.bars[i] = bars[off + i];
    std::optional<PatternLabel> label;
    try {
      label = match_pattern(w, params);
    } catch (const DegenerateWindow&) {
      continue;  // all-doji or zero-range stretches carry no pattern
    }
    if (label) hits.push_back(ScanHit{off, w, *label});
  }
  return hits;
}

std::vector<std::pair<CandleWindow, PatternLabel>> build_windows(const GeneratorConfig& cfg) {
  validate(cfg);
  std::vector<std::pair<CandleWindow, PatternLabel>> out;
  out.reserve(cfg.per_class * std::size_t(kNumLabels));
  for (PatternLabel label : all_labels()) {
    for (std::size_t i = 0; i < cfg.per_class; ++i) {
      Rng rng(derive_seed(cfg.seed, {std::uint64_t(int(label)), i}));
      out.emplace_back(synthesize_window(label, cfg, rng), label);
    }
  }
  return out;
}

Dataset build_dataset(const GeneratorConfig& cfg) {
  Dataset ds;
  ds.provenance = Provenance::Clean;
  ds.seed = cfg.seed;
  auto windows = build_windows(cfg);
  ds.items.reserve(windows.size());
  std::size_t index_in_class = 0;
  PatternLabel current = PatternLabel::MorningStar;
  for (const auto& [window, label] : windows) {
    if (label != current) {
      current = label;
      index_in_class = 0;
    }
    DatasetItem item;
    item.tensor = encode_window(window);
    item.label = label;
    item.window_id = (std::uint64_t(int(label)) << 32) | std::uint64_t(index_in_class);
    item.origin = ItemOrigin::Clean;
    ds.items.push_back(item);
    ++index_in_class;
  }
  log_info("synthesized " + std::to_string(ds.items.size()) + " windows (" +
           std::to_string(cfg.per_class) + " per class)");
  return ds;
}

}  // namespace advforge
