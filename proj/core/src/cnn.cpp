#include "advforge/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "advforge/errors.hpp"
#include "advforge/log.hpp"
#include "advforge/rng.hpp"
#include "binio.hpp"

namespace advforge {

namespace {

constexpr int kDim = CnnModel::kDim;
constexpr int kIC = CnnModel::kInputChannels;
constexpr int kCC = CnnModel::kConvChannels;
constexpr int kPix = kDim * kDim;           // 100
constexpr int kCols1 = 9 * kIC;             // 36, conv1 patch width
constexpr int kCols2 = 9 * kCC;             // 144, conv2 patch width
constexpr int kFlat = CnnModel::kFlat;      // 1600
constexpr int kHidden = CnnModel::kHidden;  // 128
constexpr int kOut = CnnModel::kClasses;    // 8

// Flat parameter vector offsets, declaration order.
constexpr std::size_t kConv1W = 0;
constexpr std::size_t kConv1B = kConv1W + std::size_t(kCC) * kCols1;     // 576
constexpr std::size_t kConv2W = kConv1B + kCC;                           // 592
constexpr std::size_t kConv2B = kConv2W + std::size_t(kCC) * kCols2;     // 2896
constexpr std::size_t kDense1W = kConv2B + kCC;                          // 2912
constexpr std::size_t kDense1B = kDense1W + std::size_t(kHidden) * kFlat;  // 207712
constexpr std::size_t kDense2W = kDense1B + kHidden;                     // 207840
constexpr std::size_t kDense2B = kDense2W + std::size_t(kOut) * kHidden;  // 208864
static_assert(kDense2B + kOut == CnnModel::kParamCount);

struct Buffers {
  alignas(64) std::array<double, kPix * kIC> x;       // HWC input
  alignas(64) std::array<double, kPix * kCols1> p1;   // conv1 patches
  alignas(64) std::array<double, kPix * kCC> z1, a1;  // HWC
  alignas(64) std::array<double, kPix * kCols2> p2;   // conv2 patches
  alignas(64) std::array<double, kPix * kCC> z2, a2;
  alignas(64) std::array<double, kHidden> zd1, h;
  std::array<double, kOut> logits{}, probs{};
  double log_sum_exp = 0;
};

struct GradBuffers {
  std::array<double, kOut> dlogits{};
  alignas(64) std::array<double, kHidden> dh;
  alignas(64) std::array<double, kPix * kCC> da2;  // then reused as dz2
  alignas(64) std::array<double, kPix * kCols2> dp2;
  alignas(64) std::array<double, kPix * kCC> da1;
};

void check_finite(double probe, const char* stage) {
  if (!std::isfinite(probe)) throw NonFiniteActivation(std::string("non-finite values at ") + stage);
}

template <int IC>
void im2col(const double* src, double* dst) {
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      double* row = dst + std::size_t(i * kDim + j) * 9 * IC;
      int k = 0;
      for (int kh = -1; kh <= 1; ++kh) {
        int y = i + kh;
        for (int kw = -1; kw <= 1; ++kw) {
          int x = j + kw;
          if (y < 0 || y >= kDim || x < 0 || x >= kDim) {
            for (int c = 0; c < IC; ++c) row[k++] = 0.0;
          } else {
            const double* s = src + std::size_t(y * kDim + x) * IC;
            for (int c = 0; c < IC; ++c) row[k++] = s[c];
          }
        }
      }
    }
  }
}

template <int COLS>
void conv_forward(const double* patches, const double* w, const double* b, double* z) {
  for (int p = 0; p < kPix; ++p) {
    const double* row = patches + std::size_t(p) * COLS;
    double* zp = z + std::size_t(p) * kCC;
    for (int oc = 0; oc < kCC; ++oc) {
      const double* wr = w + std::size_t(oc) * COLS;
      double acc = b[oc];
      for (int k = 0; k < COLS; ++k) acc += row[k] * wr[k];
      zp[oc] = acc;
    }
  }
}

double relu_all(const double* z, double* a, int n) {
  double probe = 0;
  for (int i = 0; i < n; ++i) {
    double v = z[i] > 0 ? z[i] : 0.0;
    a[i] = v;
    probe += z[i];
  }
  return probe;
}

void forward_into(const CnnModel& m, const GafTensor& input, Buffers& f) {
  const double* P = m.params.data();

  double probe = 0;
  for (int c = 0; c < kIC; ++c)
    for (int p = 0; p < kPix; ++p) {
      double v = input.values[std::size_t(c) * kPix + std::size_t(p)];
      f.x[std::size_t(p) * kIC + std::size_t(c)] = v;
      probe += v;
    }
  check_finite(probe, "input");

  im2col<kIC>(f.x.data(), f.p1.data());
  conv_forward<kCols1>(f.p1.data(), P + kConv1W, P + kConv1B, f.z1.data());
  check_finite(relu_all(f.z1.data(), f.a1.data(), kPix * kCC), "conv1");

  im2col<kCC>(f.a1.data(), f.p2.data());
  conv_forward<kCols2>(f.p2.data(), P + kConv2W, P + kConv2B, f.z2.data());
  check_finite(relu_all(f.z2.data(), f.a2.data(), kPix * kCC), "conv2");

  for (int j = 0; j < kHidden; ++j) {
    const double* wr = P + kDense1W + std::size_t(j) * kFlat;
    double acc = P[kDense1B + std::size_t(j)];
    for (int k = 0; k < kFlat; ++k) acc += wr[k] * f.a2[std::size_t(k)];
    f.zd1[std::size_t(j)] = acc;
  }
  check_finite(relu_all(f.zd1.data(), f.h.data(), kHidden), "dense1");

  probe = 0;
  for (int o = 0; o < kOut; ++o) {
    const double* wr = P + kDense2W + std::size_t(o) * kHidden;
    double acc = P[kDense2B + std::size_t(o)];
    for (int k = 0; k < kHidden; ++k) acc += wr[k] * f.h[std::size_t(k)];
    f.logits[std::size_t(o)] = acc;
    probe += acc;
  }
  check_finite(probe, "logits");

  double mx = f.logits[0];
  for (double v : f.logits) mx = std::max(mx, v);
  double sum = 0;
  for (int o = 0; o < kOut; ++o) sum += std::exp(f.logits[std::size_t(o)] - mx);
  f.log_sum_exp = mx + std::log(sum);
  for (int o = 0; o < kOut; ++o)
    f.probs[std::size_t(o)] = std::exp(f.logits[std::size_t(o)] - f.log_sum_exp);
}

/// Accumulates this item's contribution (scaled by inv_batch) into g.
void backward_item(const CnnModel& m, const Buffers& f, PatternLabel label, double inv_batch,
                   double* g, GradBuffers& gb) {
  const double* P = m.params.data();
  const int y = int(label) - 1;

  for (int o = 0; o < kOut; ++o)
    gb.dlogits[std::size_t(o)] = (f.probs[std::size_t(o)] - (o == y ? 1.0 : 0.0)) * inv_batch;

  // dense2
  gb.dh.fill(0.0);
  for (int o = 0; o < kOut; ++o) {
    double dl = gb.dlogits[std::size_t(o)];
    g[kDense2B + std::size_t(o)] += dl;
    double* gw = g + kDense2W + std::size_t(o) * kHidden;
    const double* wr = P + kDense2W + std::size_t(o) * kHidden;
    for (int k = 0; k < kHidden; ++k) {
      gw[k] += dl * f.h[std::size_t(k)];
      gb.dh[std::size_t(k)] += dl * wr[k];
    }
  }

  // dense1 (dh becomes dzd1 in place under the ReLU mask)
  gb.da2.fill(0.0);
  for (int j = 0; j < kHidden; ++j) {
    double dz = f.zd1[std::size_t(j)] > 0 ? gb.dh[std::size_t(j)] : 0.0;
    if (dz == 0.0) continue;
    g[kDense1B + std::size_t(j)] += dz;
    double* gw = g + kDense1W + std::size_t(j) * kFlat;
    const double* wr = P + kDense1W + std::size_t(j) * kFlat;
    for (int k = 0; k < kFlat; ++k) {
      gw[k] += dz * f.a2[std::size_t(k)];
      gb.da2[std::size_t(k)] += dz * wr[k];
    }
  }

  // conv2 (da2 becomes dz2 in place)
  for (int i = 0; i < kPix * kCC; ++i)
    if (!(f.z2[std::size_t(i)] > 0)) gb.da2[std::size_t(i)] = 0.0;
  for (int p = 0; p < kPix; ++p) {
    const double* dz = gb.da2.data() + std::size_t(p) * kCC;
    const double* patch = f.p2.data() + std::size_t(p) * kCols2;
    double* drow = gb.dp2.data() + std::size_t(p) * kCols2;
    std::memset(drow, 0, sizeof(double) * kCols2);
    for (int oc = 0; oc < kCC; ++oc) {
      double v = dz[oc];
      if (v == 0.0) continue;
      g[kConv2B + std::size_t(oc)] += v;
      double* gw = g + kConv2W + std::size_t(oc) * kCols2;
      const double* wr = P + kConv2W + std::size_t(oc) * kCols2;
      for (int k = 0; k < kCols2; ++k) {
        gw[k] += v * patch[k];
        drow[k] += v * wr[k];
      }
    }
  }
  // col2im scatter of dp2 into da1
  gb.da1.fill(0.0);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      const double* drow = gb.dp2.data() + std::size_t(i * kDim + j) * kCols2;
      int k = 0;
      for (int kh = -1; kh <= 1; ++kh) {
        int yy = i + kh;
        for (int kw = -1; kw <= 1; ++kw) {
          int xx = j + kw;
          if (yy < 0 || yy >= kDim || xx < 0 || xx >= kDim) {
            k += kCC;
            continue;
          }
          double* dst = gb.da1.data() + std::size_t(yy * kDim + xx) * kCC;
          for (int c = 0; c < kCC; ++c) dst[c] += drow[k++];
        }
      }
    }

  // conv1 (da1 becomes dz1 in place; no input gradient needed)
  for (int i = 0; i < kPix * kCC; ++i)
    if (!(f.z1[std::size_t(i)] > 0)) gb.da1[std::size_t(i)] = 0.0;
  for (int p = 0; p < kPix; ++p) {
    const double* dz = gb.da1.data() + std::size_t(p) * kCC;
    const double* patch = f.p1.data() + std::size_t(p) * kCols1;
    for (int oc = 0; oc < kCC; ++oc) {
      double v = dz[oc];
      if (v == 0.0) continue;
      g[kConv1B + std::size_t(oc)] += v;
      double* gw = g + kConv1W + std::size_t(oc) * kCols1;
      for (int k = 0; k < kCols1; ++k) gw[k] += v * patch[k];
    }
  }
}

Buffers& scratch_buffers() {
  static thread_local Buffers f;
  return f;
}

void require_param_count(const CnnModel& m) {
  if (m.params.size() != CnnModel::kParamCount)
    throw InvariantError("model has wrong parameter count");
}

}  // namespace

const std::vector<ParamTensor>& param_layout() {
  static const std::vector<ParamTensor> layout = {
      {"conv1_w", {16, 3, 3, 4}, kConv1W, 576},
      {"conv1_b", {16}, kConv1B, 16},
      {"conv2_w", {16, 3, 3, 16}, kConv2W, 2304},
      {"conv2_b", {16}, kConv2B, 16},
      {"dense1_w", {128, 1600}, kDense1W, 204800},
      {"dense1_b", {128}, kDense1B, 128},
      {"dense2_w", {8, 128}, kDense2W, 1024},
      {"dense2_b", {8}, kDense2B, 8},
  };
  return layout;
}

CnnModel init_model(std::uint64_t seed) {
  CnnModel m;
  m.params.assign(CnnModel::kParamCount, 0.0);
  Rng rng(seed);
  struct LayerInit {
    std::size_t offset;
    std::size_t count;
    double fan_in;
    double fan_out;
  };
  const LayerInit layers[] = {
      {kConv1W, 576, double(kCols1), double(9 * kCC)},
      {kConv2W, 2304, double(kCols2), double(9 * kCC)},
      {kDense1W, 204800, double(kFlat), double(kHidden)},
      {kDense2W, 1024, double(kHidden), double(kOut)},
  };
  for (const auto& l : layers) {
    double a = std::sqrt(6.0 / (l.fan_in + l.fan_out));
    for (std::size_t i = 0; i < l.count; ++i) m.params[l.offset + i] = rng.uniform(-a, a);
  }
  return m;
}

Prediction forward(const CnnModel& model, const GafTensor& input) {
  require_param_count(model);
  Buffers& f = scratch_buffers();
  forward_into(model, input, f);
  Prediction pred;
  pred.probabilities = f.probs;
  int best = 0;
  for (int o = 1; o < kOut; ++o)
    if (f.probs[std::size_t(o)] > f.probs[std::size_t(best)]) best = o;
  pred.label = PatternLabel(best + 1);
  return pred;
}

PatternLabel predict(const CnnModel& model, const GafTensor& input) {
  return forward(model, input).label;
}

double loss_and_grad(const CnnModel& model, std::span<const DatasetItem> items,
                     std::span<const std::size_t> indices, std::span<double> grad) {
  require_param_count(model);
  if (indices.empty()) throw InvariantError("loss_and_grad needs a non-empty batch");
  if (grad.size() != CnnModel::kParamCount)
    throw InvariantError("gradient buffer has wrong size");
  static thread_local GradBuffers gb;
  Buffers& f = scratch_buffers();
  double inv_batch = 1.0 / double(indices.size());
  double loss = 0;
  for (std::size_t idx : indices) {
    const DatasetItem& item = items[idx];
    forward_into(model, item.tensor, f);
    loss += (f.log_sum_exp - f.logits[std::size_t(int(item.label) - 1)]) * inv_batch;
    backward_item(model, f, item.label, inv_batch, grad.data(), gb);
  }
  return loss;
}

double loss_batch(const CnnModel& model, std::span<const DatasetItem> items,
                  std::span<const std::size_t> indices) {
  require_param_count(model);
  if (indices.empty()) throw InvariantError("loss_batch needs a non-empty batch");
  Buffers& f = scratch_buffers();
  double inv_batch = 1.0 / double(indices.size());
  double loss = 0;
  for (std::size_t idx : indices) {
    const DatasetItem& item = items[idx];
    forward_into(model, item.tensor, f);
    loss += (f.log_sum_exp - f.logits[std::size_t(int(item.label) - 1)]) * inv_batch;
  }
  return loss;
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("train epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("train batch_size must be >= 1");
  if (!(cfg.learning_rate > 0)) throw ConfigError("train learning_rate must be > 0");
  if (!(cfg.momentum >= 0 && cfg.momentum < 1)) throw ConfigError("momentum must be in [0,1)");
  if (!(cfg.split_fraction > 0 && cfg.split_fraction < 1))
    throw ConfigError("split_fraction must be in (0,1)");
}

double accuracy(const CnnModel& model, std::span<const DatasetItem> items,
                std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvariantError("accuracy over an empty index set");
  std::size_t hits = 0;
  for (std::size_t idx : indices)
    if (predict(model, items[idx].tensor) == items[idx].label) ++hits;
  return double(hits) / double(indices.size());
}

TrainResult train(std::uint64_t model_seed, const Dataset& dataset, const TrainConfig& cfg) {
  validate(cfg);
  auto counts = dataset.class_counts();
  for (int c = 0; c < kNumLabels; ++c)
    if (counts[std::size_t(c)] < 2)
      throw EmptyClass("class " + std::to_string(c + 1) + " has " +
                       std::to_string(counts[std::size_t(c)]) +
                       " items; training needs at least 2 per class");

  // Stratified split: per class, at least one item on each side.
  std::array<std::vector<std::size_t>, kNumLabels> by_class;
  for (std::size_t i = 0; i < dataset.items.size(); ++i)
    by_class[std::size_t(int(dataset.items[i].label) - 1)].push_back(i);
  std::vector<std::size_t> train_idx, val_idx;
  Rng split_rng(derive_seed(cfg.seed, {1}));
  for (auto& cls : by_class) {
    split_rng.shuffle(cls);
    std::size_t n = cls.size();
    std::size_t n_train = std::size_t(std::floor(double(n) * cfg.split_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    train_idx.insert(train_idx.end(), cls.begin(), cls.begin() + std::ptrdiff_t(n_train));
    val_idx.insert(val_idx.end(), cls.begin() + std::ptrdiff_t(n_train), cls.end());
  }

  CnnModel model = init_model(model_seed);
  std::vector<double> velocity(CnnModel::kParamCount, 0.0);
  std::vector<double> grad(CnnModel::kParamCount, 0.0);

  TrainResult best;
  best.validation_accuracy = -1.0;
  best.validation_indices = val_idx;
  std::sort(best.validation_indices.begin(), best.validation_indices.end());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, {2, std::uint64_t(epoch)}));
    shuffle_rng.shuffle(train_idx);
    for (std::size_t start = 0; start < train_idx.size(); start += std::size_t(cfg.batch_size)) {
      std::size_t end = std::min(train_idx.size(), start + std::size_t(cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      loss_and_grad(model, dataset.items,
                    std::span<const std::size_t>(train_idx.data() + start, end - start), grad);
      for (std::size_t i = 0; i < CnnModel::kParamCount; ++i) {
        velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * grad[i];
        model.params[i] += velocity[i];
      }
    }
    double acc = accuracy(model, dataset.items, val_idx);
    if (acc > best.validation_accuracy) {
      best.model = model;
      best.validation_accuracy = acc;
      best.best_epoch = epoch;
    }
    log_debug("epoch " + std::to_string(epoch) + " val_accuracy " +
              std::to_string(acc));
  }
  return best;
}

void save_model(const CnnModel& model, const std::filesystem::path& path) {
  require_param_count(model);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::string buf;
  buf.reserve(16 + CnnModel::kParamCount * 8);
  buf.append("GCNN", 4);
  binio::put_u32(buf, 1);
  for (const auto& t : param_layout()) {
    binio::put_u32(buf, std::uint32_t(t.name.size()));
    buf.append(t.name);
    binio::put_u32(buf, std::uint32_t(t.dims.size()));
    for (auto d : t.dims) binio::put_u32(buf, d);
    for (std::size_t i = 0; i < t.count; ++i) binio::put_f64(buf, model.params[t.offset + i]);
  }
  binio::write_text(path, buf);
}

CnnModel load_model(const std::filesystem::path& path) {
  std::string buf = binio::read_text(path);
  binio::Reader r{buf};
  if (r.bytes(4) != "GCNN") throw InvariantError("not a GCNN model file: " + path.string());
  std::uint32_t version = r.u32();
  if (version != 1) throw InvariantError("unsupported GCNN version " + std::to_string(version));
  CnnModel m;
  m.params.assign(CnnModel::kParamCount, 0.0);
  for (const auto& t : param_layout()) {
    std::uint32_t name_len = r.u32();
    std::string name = r.bytes(name_len);
    if (name != t.name)
      throw InvariantError("unexpected tensor '" + name + "', wanted '" + t.name + "'");
    std::uint32_t ndims = r.u32();
    if (ndims != t.dims.size()) throw InvariantError("tensor rank mismatch for " + name);
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < ndims; ++i) {
      std::uint32_t d = r.u32();
      if (d != t.dims[i]) throw InvariantError("tensor shape mismatch for " + name);
      count *= d;
    }
    for (std::size_t i = 0; i < count; ++i) m.params[t.offset + i] = r.f64();
  }
  if (r.pos != buf.size()) throw InvariantError("trailing bytes in " + path.string());
  return m;
}

}  // namespace advforge
