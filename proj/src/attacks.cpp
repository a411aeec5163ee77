#include "zonn/attacks.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "zonn/error.hpp"
#include "zonn/random.hpp"
#include "zonn/training.hpp"

namespace zonn {

namespace {

void check_epsilon(const AttackConfig& config) {
  require(config.epsilon > 0 && std::isfinite(config.epsilon), ErrorKind::parameter, "epsilon must be positive");
}

}  // namespace

InputPoint fgm(const MlpModel& model, const InputPoint& x, int true_label, const AttackConfig& config) {
  check_epsilon(config);
  const Vector grad = input_gradient(model, x, true_label);
  const Vector step = grad.unaryExpr([](double g) { return static_cast<double>((g > 0) - (g < 0)); });
  return (x + config.epsilon * step).cwiseMax(0.0).cwiseMin(1.0);
}

std::vector<Eigen::Index> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const SeededStream stream(seed, 0x7065726dULL);
  for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[uniform_below(stream, i, i + 1)]);
  return order;
}

std::vector<AdversarialPair> generate_adversarial_set(const MlpModel& model, const LabeledDataset& data,
                                                      std::size_t n, const AttackConfig& config) {
  check_epsilon(config);
  require(n >= 1, ErrorKind::parameter, "number of adversarial examples must be at least 1");
  require(n <= static_cast<std::size_t>(data.size()), ErrorKind::parameter,
          "requested " + std::to_string(n) + " adversarial examples from a dataset of " +
              std::to_string(data.size()));
  data.validate();

  const auto predicted = predict_labels(model, data.inputs);
  std::vector<AdversarialPair> out;
  out.reserve(n);
  for (const Eigen::Index i : seeded_permutation(static_cast<std::size_t>(data.size()), config.seed)) {
    if (out.size() == n) break;
    const int label = data.labels[static_cast<std::size_t>(i)];
    if (predicted[static_cast<std::size_t>(i)] != label) continue;
    AdversarialPair pair;
    pair.source_index = i;
    pair.original = data.inputs.col(i);
    pair.adversarial = fgm(model, pair.original, label, config);
    pair.original_label = label;
    pair.adversarial_label = static_cast<int>(argmax(model.logits(pair.adversarial)));
    pair.linf_distance = (pair.adversarial - pair.original).cwiseAbs().maxCoeff();
    out.push_back(std::move(pair));
  }
  require(out.size() == n, ErrorKind::data,
          "only " + std::to_string(out.size()) + " correctly-classified inputs available, " + std::to_string(n) +
              " requested");
  return out;
}

std::string adversarial_set_csv(const std::vector<AdversarialPair>& set) {
  std::ostringstream os;
  os.precision(17);
  os << "index,orig_label,adv_label,linf_distance\n";
  for (const auto& p : set)
    os << p.source_index << ',' << p.original_label << ',' << p.adversarial_label << ',' << p.linf_distance << '\n';
  return os.str();
}

}  // namespace zonn
