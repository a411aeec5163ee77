#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zonn/data.hpp"
#include "zonn/model.hpp"

namespace zonn {

/// Probabilities are clamped here before the log of the cross-entropy.
inline constexpr double probability_floor = 1e-12;

struct LayerGradient {
  Matrix weights;
  Vector bias;
};

struct LossGradient {
  double loss = 0;  // mean natural-log cross-entropy over the batch
  std::vector<LayerGradient> layers;
  Matrix inputs;  // d x n gradient of the mean loss with respect to each input column
};

/// Mean cross-entropy of a batch (columns of `inputs`) and its gradient
/// with respect to every parameter and every input.
LossGradient loss_and_gradient(const MlpModel& model, const Matrix& inputs, std::span<const int> labels);

/// Gradient of the cross-entropy at `label` with respect to the input x.
Vector input_gradient(const MlpModel& model, const InputPoint& x, int label);

/// Layer widths {d, h1, ..., C}; hidden layers use `hidden`, the output
/// layer is linear (softmax is applied by inference). Weights are uniform in
/// +-sqrt(6/(fan_in+fan_out)), biases zero.
MlpModel init_model(const std::vector<Eigen::Index>& widths, Activation hidden, std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0;      // mean of the mini-batch losses seen during the epoch
  double accuracy = 0;  // training accuracy after the epoch
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochStats> history;
};

/// Plain mini-batch SGD. Shuffling is derived from `config.seed`, so equal
/// seeds give bitwise-equal weights.
TrainResult train(const MlpModel& model, const LabeledDataset& data, const TrainConfig& config);

/// Fraction of `data` whose argmax prediction equals its label.
double accuracy(const MlpModel& model, const LabeledDataset& data);

/// Predicted class of every column.
std::vector<int> predict_labels(const MlpModel& model, const Matrix& inputs);

std::string history_csv(const std::vector<EpochStats>& history);

struct WatermarkKey {
  Matrix inputs;  // d x n
  std::vector<int> target_labels;
};

struct WatermarkResult {
  MlpModel model;
  double key_accuracy = 0;
  int epochs_run = 0;
  bool reached_target = false;
  std::vector<EpochStats> history;
};

/// Finetunes a copy of `model` on the key inputs until at least
/// `target_accuracy` of them are classified as their target labels, or the
/// configured epochs run out. Failing to reach the target is reported, not
/// thrown.
WatermarkResult watermark_finetune(const MlpModel& model, const WatermarkKey& key, const TrainConfig& config,
                                   double target_accuracy = 0.9);

}  // namespace zonn
