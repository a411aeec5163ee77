#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zonn/data.hpp"
#include "zonn/model.hpp"

namespace zonn {

struct AttackConfig {
  double epsilon = 0.2;
  std::uint64_t seed = 0;  // drives input selection only
};

/// Fast gradient method: clip(x + epsilon * sign(grad_x loss(x, label)), 0, 1)
/// with sign(0) = 0. Untargeted.
InputPoint fgm(const MlpModel& model, const InputPoint& x, int true_label, const AttackConfig& config);

struct AdversarialPair {
  Eigen::Index source_index = 0;  // column in the source dataset
  InputPoint original;
  InputPoint adversarial;
  int original_label = 0;  // ground-truth label (equal to the clean prediction)
  int adversarial_label = 0;  // model prediction on the adversarial input
  double linf_distance = 0;
};

/// Picks n correctly-classified inputs of `data` in a seed-determined order
/// and attacks each with `fgm`.
std::vector<AdversarialPair> generate_adversarial_set(const MlpModel& model, const LabeledDataset& data,
                                                      std::size_t n, const AttackConfig& config);

/// Columns (index, orig_label, adv_label, linf_distance).
std::string adversarial_set_csv(const std::vector<AdversarialPair>& set);

/// Seed-determined permutation of [0, n).
std::vector<Eigen::Index> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace zonn
