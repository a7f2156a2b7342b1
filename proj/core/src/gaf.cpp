#include "advforge/gaf.hpp"

#include <algorithm>
#include <cmath>

#include "advforge/errors.hpp"

namespace advforge {

namespace {

void require_finite_series(const Series& series) {
  if (series.size() < 2) throw InvariantError("series needs at least 2 values");
  for (double v : series)
    if (!std::isfinite(v)) throw InvariantError("series contains a non-finite value");
}

}  // namespace

NormalizedSeries normalize(const Series& series) {
  require_finite_series(series);
  auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi) throw DegenerateSeries("constant series: max == min");
  NormalizedSeries out(series.size());
  const double range = hi - lo;
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - lo) / range;
  return out;
}

PolarSeries to_polar(const NormalizedSeries& normalized) {
  PolarSeries p;
  p.angles.resize(normalized.size());
  p.radii.resize(normalized.size());
  const double t = double(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    const double v = normalized[i];
    if (!(v >= -1.0 && v <= 1.0)) throw DomainError("value outside [-1,1] for arccos");
    p.angles[i] = std::acos(v);
    p.radii[i] = double(i + 1) / t;
  }
  return p;
}

GafMatrix encode_normalized(const NormalizedSeries& normalized) {
  const auto polar = to_polar(normalized);
  const std::size_t n = normalized.size();
  GafMatrix g(n);
  // Fill i <= j and mirror so symmetry holds exactly.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = std::cos(polar.angles[i] + polar.angles[j]);
      g.at(i, j) = v;
      g.at(j, i) = v;
    }
  return g;
}

GafMatrix encode(const Series& series) { return encode_normalized(normalize(series)); }

NormalizedSeries decode_diagonal(const GafMatrix& g) {
  constexpr double kTol = 1e-9;
  NormalizedSeries out(g.dim());
  for (std::size_t i = 0; i < g.dim(); ++i) {
    double d = g.at(i, i);
    if (d < -1.0 - kTol || d > 1.0 + kTol)
      throw DomainError("diagonal entry outside [-1,1] beyond tolerance");
    d = std::clamp(d, -1.0, 1.0);
    out[i] = std::sqrt((d + 1.0) / 2.0);
  }
  return out;
}

std::array<std::array<double, CandleWindow::kBars>, GafTensor::kChannels> channel_series(
    const CandleWindow& w) {
  std::array<std::array<double, CandleWindow::kBars>, GafTensor::kChannels> out{};
  for (std::size_t i = 0; i < CandleWindow::kBars; ++i) {
    out[0][i] = w.bars[i].open;
    out[1][i] = w.bars[i].high;
    out[2][i] = w.bars[i].low;
    out[3][i] = w.bars[i].close;
  }
  return out;
}

ChannelExtents channel_extents(const CandleWindow& w) {
  const auto series = channel_series(w);
  ChannelExtents e;
  for (std::size_t c = 0; c < GafTensor::kChannels; ++c) {
    auto [lo, hi] = std::minmax_element(series[c].begin(), series[c].end());
    e.min[c] = *lo;
    e.max[c] = *hi;
  }
  return e;
}

GafTensor encode_window(const CandleWindow& w) {
  const auto series = channel_series(w);
  GafTensor t;
  for (std::size_t c = 0; c < GafTensor::kChannels; ++c) {
    const GafMatrix g = encode(Series(series[c].begin(), series[c].end()));
    for (std::size_t i = 0; i < GafTensor::kDim; ++i)
      for (std::size_t j = 0; j < GafTensor::kDim; ++j) t.at(c, i, j) = g.at(i, j);
  }
  return t;
}

}  // namespace advforge
