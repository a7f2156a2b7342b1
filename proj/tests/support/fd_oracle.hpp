#pragma once

// Reference implementation of the classifier forward pass, written as plain
// nested loops over the architecture definition with channel-major internal
// storage. The production code uses im2col patch matrices and channel-last
// activations, so agreement between the two is a meaningful check rather than
// a tautology. Parameter vector offsets restate the documented flat layout.

#include <array>
#include <bitset>
#include <cmath>
#include <cstddef>
#include <vector>

#include "advforge/gaf.hpp"

namespace test_util {

namespace oracle {

constexpr std::size_t kConv1W = 0;        // [16][3][3][4]
constexpr std::size_t kConv1B = 576;      // [16]
constexpr std::size_t kConv2W = 592;      // [16][3][3][16]
constexpr std::size_t kConv2B = 2896;     // [16]
constexpr std::size_t kDense1W = 2912;    // [128][1600], input flattened (i,j,c) c-fastest
constexpr std::size_t kDense1B = 207712;  // [128]
constexpr std::size_t kDense2W = 207840;  // [8][128]
constexpr std::size_t kDense2B = 208864;  // [8]
constexpr std::size_t kParamCount = 208872;

struct Cache {
  // Channel-major [c][i][j] activations, unlike the library's channel-last.
  std::array<double, 1600> z1{}, a1{};
  std::array<double, 1600> z2{}, a2{};
  std::array<double, 128> zd1{}, h{};
  std::array<double, 8> logits{}, probs{};
  double log_sum_exp = 0;

  double loss(int label_1based) const { return log_sum_exp - logits[std::size_t(label_1based - 1)]; }

  // ReLU activation pattern, for detecting finite-difference kink crossings.
  void masks(std::bitset<1600>& m1, std::bitset<1600>& m2, std::bitset<128>& md) const {
    for (int i = 0; i < 1600; ++i) {
      m1[std::size_t(i)] = z1[std::size_t(i)] > 0;
      m2[std::size_t(i)] = z2[std::size_t(i)] > 0;
    }
    for (int i = 0; i < 128; ++i) md[std::size_t(i)] = zd1[std::size_t(i)] > 0;
  }
};

inline void forward(const std::vector<double>& P, const advforge::GafTensor& t, Cache& c) {
  auto x = [&](int ch, int i, int j) -> double {
    if (i < 0 || i > 9 || j < 0 || j > 9) return 0.0;
    return t.values[std::size_t(ch) * 100 + std::size_t(i) * 10 + std::size_t(j)];
  };

  for (int oc = 0; oc < 16; ++oc)
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        double acc = P[kConv1B + std::size_t(oc)];
        for (int kh = 0; kh < 3; ++kh)
          for (int kw = 0; kw < 3; ++kw)
            for (int ic = 0; ic < 4; ++ic)
              acc += P[kConv1W + ((std::size_t(oc) * 3 + std::size_t(kh)) * 3 + std::size_t(kw)) * 4 +
                       std::size_t(ic)] *
                     x(ic, i + kh - 1, j + kw - 1);
        std::size_t at = std::size_t(oc) * 100 + std::size_t(i) * 10 + std::size_t(j);
        c.z1[at] = acc;
        c.a1[at] = acc > 0 ? acc : 0.0;
      }

  auto a1 = [&](int ch, int i, int j) -> double {
    if (i < 0 || i > 9 || j < 0 || j > 9) return 0.0;
    return c.a1[std::size_t(ch) * 100 + std::size_t(i) * 10 + std::size_t(j)];
  };
  for (int oc = 0; oc < 16; ++oc)
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        double acc = P[kConv2B + std::size_t(oc)];
        for (int kh = 0; kh < 3; ++kh)
          for (int kw = 0; kw < 3; ++kw)
            for (int ic = 0; ic < 16; ++ic)
              acc += P[kConv2W +
                       ((std::size_t(oc) * 3 + std::size_t(kh)) * 3 + std::size_t(kw)) * 16 +
                       std::size_t(ic)] *
                     a1(ic, i + kh - 1, j + kw - 1);
        std::size_t at = std::size_t(oc) * 100 + std::size_t(i) * 10 + std::size_t(j);
        c.z2[at] = acc;
        c.a2[at] = acc > 0 ? acc : 0.0;
      }

  // Dense input index (i, j, ch) with channels fastest, per the layout contract.
  for (int n = 0; n < 128; ++n) {
    double acc = P[kDense1B + std::size_t(n)];
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j)
        for (int ch = 0; ch < 16; ++ch)
          acc += P[kDense1W + std::size_t(n) * 1600 +
                   (std::size_t(i) * 10 + std::size_t(j)) * 16 + std::size_t(ch)] *
                 c.a2[std::size_t(ch) * 100 + std::size_t(i) * 10 + std::size_t(j)];
    c.zd1[std::size_t(n)] = acc;
    c.h[std::size_t(n)] = acc > 0 ? acc : 0.0;
  }

  for (int o = 0; o < 8; ++o) {
    double acc = P[kDense2B + std::size_t(o)];
    for (int n = 0; n < 128; ++n)
      acc += P[kDense2W + std::size_t(o) * 128 + std::size_t(n)] * c.h[std::size_t(n)];
    c.logits[std::size_t(o)] = acc;
  }
  double mx = c.logits[0];
  for (double v : c.logits) mx = std::max(mx, v);
  double sum = 0;
  for (double v : c.logits) sum += std::exp(v - mx);
  c.log_sum_exp = mx + std::log(sum);
  for (int o = 0; o < 8; ++o) c.probs[std::size_t(o)] = std::exp(c.logits[std::size_t(o)] - c.log_sum_exp);
}

struct Example {
  advforge::GafTensor tensor;
  int label = 1;  // 1..8
};

inline double batch_loss(const std::vector<double>& P, const std::vector<Example>& batch) {
  Cache c;
  double loss = 0;
  for (const auto& e : batch) {
    forward(P, e.tensor, c);
    loss += c.loss(e.label);
  }
  return loss / double(batch.size());
}

/// Central finite difference of batch_loss in parameter p. Returns false when
/// a ReLU activation flips between the two evaluation points (a kink, where
/// the finite difference is not comparable to the analytic gradient).
inline bool central_difference(std::vector<double>& P, const std::vector<Example>& batch,
                               std::size_t p, double eps, double& out) {
  double saved = P[p];
  std::bitset<1600> m1a, m2a, m1b, m2b;
  std::bitset<128> mda, mdb;
  Cache c;
  double lp = 0, lm = 0;
  bool kink = false;
  for (const auto& e : batch) {
    P[p] = saved + eps;
    forward(P, e.tensor, c);
    lp += c.loss(e.label);
    c.masks(m1a, m2a, mda);
    P[p] = saved - eps;
    forward(P, e.tensor, c);
    lm += c.loss(e.label);
    c.masks(m1b, m2b, mdb);
    if (m1a != m1b || m2a != m2b || mda != mdb) kink = true;
  }
  P[p] = saved;
  out = (lp - lm) / (2.0 * eps * double(batch.size()));
  return !kink;
}

}  // namespace oracle

}  // namespace test_util
