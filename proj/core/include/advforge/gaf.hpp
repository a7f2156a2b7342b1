#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "advforge/candlestick.hpp"

namespace advforge {

// Summation-form Gramian Angular Field codec. A series is normalized into
// [0,1], mapped to angles arccos(x) in [0, pi/2], and encoded as the matrix of
// cos(phi_i + phi_j); the diagonal cos(2 phi_i) = 2 x_i^2 - 1 inverts back to
// the normalized series via sqrt((g+1)/2).

using Series = std::vector<double>;
using NormalizedSeries = std::vector<double>;

struct PolarSeries {
  std::vector<double> angles;  // arccos of the normalized values, in [0, pi/2]
  std::vector<double> radii;   // (i+1)/T, strictly increasing
};

class GafMatrix {
 public:
  GafMatrix() = default;
  explicit GafMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim, 0.0) {}

  std::size_t dim() const { return dim_; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  double& at(std::size_t i, std::size_t j) { return entries_[i * dim_ + j]; }
  const std::vector<double>& entries() const { return entries_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> entries_;
};

/// 4 channels in (open, high, low, close) order, each a 10x10 GAF matrix.
/// Storage is channel-major, row-major, contiguous.
struct GafTensor {
  static constexpr std::size_t kDim = 10;
  static constexpr std::size_t kChannels = 4;
  static constexpr std::size_t kValues = kChannels * kDim * kDim;

  std::array<double, kValues> values{};

  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return values[(c * kDim + i) * kDim + j];
  }
  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return values[(c * kDim + i) * kDim + j];
  }
};

/// (x - min) / (max - min). Throws DegenerateSeries when max == min,
/// InvariantError for length < 2 or non-finite input.
NormalizedSeries normalize(const Series& series);

/// Angles arccos(x) and radii (i+1)/T. Throws DomainError if any value is
/// outside [-1, 1] (cannot happen for normalize output).
PolarSeries to_polar(const NormalizedSeries& normalized);

/// normalize + encode_normalized.
GafMatrix encode(const Series& series);

/// GAF of an already-normalized series, without re-normalizing. The attack's
/// re-encode step relies on this: the perturbed series must stay in the
/// original normalization frame. Throws DomainError outside [-1, 1].
GafMatrix encode_normalized(const NormalizedSeries& normalized);

/// sqrt((g_ii + 1) / 2) per diagonal entry. Diagonal entries may exceed
/// [-1, 1] by at most 1e-9 (clamped); beyond that throws DomainError.
NormalizedSeries decode_diagonal(const GafMatrix& g);

/// Per-channel minima/maxima of a window's four price series, recorded so a
/// decoded normalized series can be mapped back to price units.
struct ChannelExtents {
  std::array<double, GafTensor::kChannels> min{};
  std::array<double, GafTensor::kChannels> max{};
};

/// The four price series of a window in channel order (open, high, low, close).
std::array<std::array<double, CandleWindow::kBars>, GafTensor::kChannels> channel_series(
    const CandleWindow& w);

ChannelExtents channel_extents(const CandleWindow& w);

/// Each channel independently normalized and encoded. Throws DegenerateSeries
/// if any channel is constant across the 10 bars.
GafTensor encode_window(const CandleWindow& w);

}  // namespace advforge
