#include "zonn/training.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "zonn/error.hpp"
#include "zonn/random.hpp"

namespace zonn {

namespace {

void check_batch(const MlpModel& model, const Matrix& inputs, std::span<const int> labels) {
  require(inputs.cols() >= 1, ErrorKind::data, "batch is empty");
  require(inputs.rows() == model.input_dim(), ErrorKind::shape,
          "input has dimension " + std::to_string(inputs.rows()) + ", model expects " +
              std::to_string(model.input_dim()));
  require(static_cast<Eigen::Index>(labels.size()) == inputs.cols(), ErrorKind::data,
          "batch has " + std::to_string(inputs.cols()) + " inputs but " + std::to_string(labels.size()) + " labels");
  require(in_unit_cube(inputs), ErrorKind::domain, "input component outside [0, 1]");
  for (int label : labels)
    require(label >= 0 && label < model.num_classes(), ErrorKind::data,
            "label " + std::to_string(label) + " outside [0, " + std::to_string(model.num_classes()) + ")");
}

void sgd_step(std::vector<DenseLayer<double>>& layers, const std::vector<LayerGradient>& grad, double lr) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].weights -= lr * grad[l].weights;
    layers[l].bias -= lr * grad[l].bias;
  }
}

}  // namespace

LossGradient loss_and_gradient(const MlpModel& model, const Matrix& inputs, std::span<const int> labels) {
  check_batch(model, inputs, labels);
  const auto& layers = model.layers();
  const Eigen::Index n = inputs.cols();

  // activations[0] is the input; activations[l+1] the output of layer l.
  std::vector<Matrix> pre(layers.size()), activations(layers.size() + 1);
  activations[0] = inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    pre[l] = layers[l].weights * activations[l];
    pre[l].colwise() += layers[l].bias;
    activations[l + 1] = pre[l];
    activate_inplace(layers[l].activation, activations[l + 1]);
  }
  require(activations.back().allFinite(), ErrorKind::numeric, "non-finite logits");
  const Matrix probs = softmax(activations.back());

  LossGradient out;
  Matrix delta = probs;  // d(loss)/d(logits), before the 1/n factor
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto label = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
    const double p = probs(label, i);
    if (p < probability_floor) {
      // The clamped loss is flat here.
      out.loss -= std::log(probability_floor);
      delta.col(i).setZero();
    } else {
      out.loss -= std::log(p);
      delta(label, i) -= 1.0;
    }
  }
  out.loss /= static_cast<double>(n);
  delta /= static_cast<double>(n);

  out.layers.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix dz = (delta.array() *
                       activation_derivative(layers[l].activation, pre[l], activations[l + 1]).array())
                          .matrix();
    out.layers[l].weights = dz * activations[l].transpose();
    out.layers[l].bias = dz.rowwise().sum();
    delta = layers[l].weights.transpose() * dz;
  }
  out.inputs = std::move(delta);
  return out;
}

Vector input_gradient(const MlpModel& model, const InputPoint& x, int label) {
  const int labels[] = {label};
  return loss_and_gradient(model, x, labels).inputs.col(0);
}

MlpModel init_model(const std::vector<Eigen::Index>& widths, Activation hidden, std::uint64_t seed) {
  require(widths.size() >= 2, ErrorKind::parameter, "need at least input and output widths");
  for (auto w : widths) require(w >= 1, ErrorKind::parameter, "layer widths must be positive");
  const SeededStream stream(seed, 0x696e6974ULL);
  std::uint64_t counter = 0;
  std::vector<DenseLayer<double>> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Eigen::Index in = widths[l], out = widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix w(out, in);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) w(r, c) = limit * (2.0 * stream.uniform(counter++) - 1.0);
    const bool last = l + 2 == widths.size();
    layers.push_back({std::move(w), Vector::Zero(out), last ? Activation::identity : hidden});
  }
  return MlpModel(std::move(layers));
}

std::vector<int> predict_labels(const MlpModel& model, const Matrix& inputs) {
  const Matrix logits = model.logits_batch(inputs);
  std::vector<int> out(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index i = 0; i < logits.cols(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(argmax(logits.col(i)));
  return out;
}

double accuracy(const MlpModel& model, const LabeledDataset& data) {
  const auto predicted = predict_labels(model, data.inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

TrainResult train(const MlpModel& model, const LabeledDataset& data, const TrainConfig& config) {
  data.validate();
  require(data.dim() == model.input_dim(), ErrorKind::shape, "dataset dimension does not match the model");
  require(data.num_classes <= model.num_classes(), ErrorKind::data, "dataset has more classes than the model");
  require(config.learning_rate >= 0, ErrorKind::parameter, "learning rate must be non-negative");
  require(config.epochs >= 1, ErrorKind::parameter, "epochs must be positive");
  require(config.batch_size >= 1 && config.batch_size <= data.size(), ErrorKind::parameter,
          "batch size must lie in [1, dataset size]");

  const auto n = static_cast<std::size_t>(data.size());
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<DenseLayer<double>> layers = model.layers();
  TrainResult result{model, {}};
  std::vector<Eigen::Index> order(n);
  std::vector<int> batch_labels;
  Matrix batch_inputs;

  const SeededStream shuffle_stream(config.seed, 0x73687566ULL);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto epoch_stream = shuffle_stream.substream(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n - 1; i > 0; --i)
      std::swap(order[i], order[uniform_below(epoch_stream, i, i + 1)]);

    double loss_sum = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      batch_inputs.resize(data.dim(), static_cast<Eigen::Index>(count));
      batch_labels.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        batch_inputs.col(static_cast<Eigen::Index>(i)) = data.inputs.col(order[start + i]);
        batch_labels[i] = data.labels[static_cast<std::size_t>(order[start + i])];
      }
      const MlpModel current(layers);
      const LossGradient g = loss_and_gradient(current, batch_inputs, batch_labels);
      loss_sum += g.loss * static_cast<double>(count);
      sgd_step(layers, g.layers, config.learning_rate);
    }
    result.model = MlpModel(layers);
    result.history.push_back({epoch, loss_sum / static_cast<double>(n), accuracy(result.model, data)});
  }
  return result;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,loss,accuracy\n";
  for (const auto& e : history) os << e.epoch << ',' << e.loss << ',' << e.accuracy << '\n';
  return os.str();
}

WatermarkResult watermark_finetune(const MlpModel& model, const WatermarkKey& key, const TrainConfig& config,
                                   double target_accuracy) {
  require(key.inputs.cols() >= 1, ErrorKind::data, "watermark key is empty");
  require(static_cast<Eigen::Index>(key.target_labels.size()) == key.inputs.cols(), ErrorKind::data,
          "watermark key inputs and labels differ in length");
  const LabeledDataset key_data{key.inputs, key.target_labels, static_cast<int>(model.num_classes()), Split::train};
  key_data.validate();

  WatermarkResult result{model, accuracy(model, key_data), 0, false, {}};
  TrainConfig one_epoch = config;
  one_epoch.epochs = 1;
  one_epoch.batch_size = std::min<int>(config.batch_size, static_cast<int>(key.inputs.cols()));
  while (result.key_accuracy < target_accuracy && result.epochs_run < config.epochs) {
    // Fresh shuffle per epoch.
    one_epoch.seed = SeededStream(config.seed, static_cast<std::uint64_t>(result.epochs_run)).bits(0);
    TrainResult step = train(result.model, key_data, one_epoch);
    ++result.epochs_run;
    step.history.front().epoch = result.epochs_run;
    result.history.push_back(step.history.front());
    result.model = std::move(step.model);
    result.key_accuracy = result.history.back().accuracy;
  }
  result.reached_target = result.key_accuracy >= target_accuracy;
  return result;
}

}  // namespace zonn
