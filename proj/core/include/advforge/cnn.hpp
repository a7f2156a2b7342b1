#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "advforge/candlestick.hpp"
#include "advforge/dataset.hpp"
#include "advforge/gaf.hpp"

namespace advforge {

/// Fixed 4-layer classifier over 10x10x4 inputs:
///   conv1 16@3x3 same-pad + ReLU -> conv2 16@3x3 same-pad + ReLU
///   -> dense 1600->128 + ReLU -> dense 128->8 -> softmax.
/// Parameters live in one flat f64 vector; see param_layout() for the
/// per-tensor offsets. Convolution weights are [out][kh][kw][in] and the
/// dense1 input is flattened spatially row-major with channels fastest.
struct CnnModel {
  static constexpr int kDim = 10;
  static constexpr int kInputChannels = 4;
  static constexpr int kConvChannels = 16;
  static constexpr int kKernel = 3;
  static constexpr int kFlat = kDim * kDim * kConvChannels;  // 1600
  static constexpr int kHidden = 128;
  static constexpr int kClasses = 8;
  static constexpr std::size_t kParamCount = 208872;

  std::vector<double> params;
};

struct ParamTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::size_t offset = 0;
  std::size_t count = 0;
};

/// The eight parameter tensors in declaration (and file) order.
const std::vector<ParamTensor>& param_layout();

/// Glorot-uniform weights (a = sqrt(6/(fan_in+fan_out)), conv fans counted as
/// channels x kernel area), zero biases, drawn in declaration order.
CnnModel init_model(std::uint64_t seed);

struct Prediction {
  std::array<double, CnnModel::kClasses> probabilities{};
  PatternLabel label = PatternLabel::MorningStar;
};

/// Softmax output plus argmax label (ties to the lowest label index).
/// Throws NonFiniteActivation when an intermediate diverges.
Prediction forward(const CnnModel& model, const GafTensor& input);
PatternLabel predict(const CnnModel& model, const GafTensor& input);

/// Mean cross-entropy over the indexed items and its gradient (accumulated
/// into grad, which must have kParamCount elements and arrive zeroed or with
/// contents the caller wants added to).
double loss_and_grad(const CnnModel& model, std::span<const DatasetItem> items,
                     std::span<const std::size_t> indices, std::span<double> grad);

/// Loss only, same reduction.
double loss_batch(const CnnModel& model, std::span<const DatasetItem> items,
                  std::span<const std::size_t> indices);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double split_fraction = 0.8;  // stratified train share, at least 1 item per side
  std::uint64_t seed = 0;       // split + batch shuffling
};

void validate(const TrainConfig& cfg);

struct TrainResult {
  CnnModel model;  // parameters of the best validation epoch
  double validation_accuracy = 0;
  std::vector<std::size_t> validation_indices;  // held-out items, ascending
  int best_epoch = 0;  // 1-based; earliest epoch achieving the best accuracy
};

/// Mini-batch SGD with momentum. The snapshot with the highest validation
/// accuracy wins; on ties the earliest epoch is kept. Fully determined by
/// (model_seed, cfg.seed, cfg, dataset). Throws EmptyClass when any of the
/// eight labels has fewer than two items.
TrainResult train(std::uint64_t model_seed, const Dataset& dataset, const TrainConfig& cfg);

/// Fraction of the indexed items whose predicted label matches.
double accuracy(const CnnModel& model, std::span<const DatasetItem> items,
                std::span<const std::size_t> indices);

/// Model file: magic "GCNN", version u32=1, then per tensor a name (u32
/// length + bytes), dim count u32, dims u32 each, and the values as
/// little-endian f64, in declaration order.
void save_model(const CnnModel& model, const std::filesystem::path& path);
CnnModel load_model(const std::filesystem::path& path);

}  // namespace advforge
