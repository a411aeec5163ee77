#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zonn/attacks.hpp"
#include "zonn/data.hpp"
#include "zonn/index.hpp"
#include "zonn/stats.hpp"
#include "zonn/training.hpp"

namespace zonn {

/// Index value around every column of `inputs`. Input i uses stream
/// `first_stream + i`; scans run in parallel across inputs.
std::vector<double> scan_inputs(const MlpModel& model, const Matrix& inputs, double radius, std::uint64_t k,
                                std::uint64_t seed, std::uint64_t first_stream = 0, unsigned workers = 1);

struct ScanParams {
  double radius = 0.025;
  std::uint64_t num_samples = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Clean inputs versus their FGM adversarials.

struct AdversarialExperimentConfig {
  std::size_t n = 100;
  AttackConfig attack;
  ScanParams scan;
};

struct AdversarialExperimentReport {
  std::vector<AdversarialPair> pairs;
  std::vector<double> clean_values;
  std::vector<double> adversarial_values;
  DistributionSummary clean;
  DistributionSummary adversarial;
  KsResult ks;
  double attack_success_rate = 0;  // share of adversarials whose prediction changed
};

AdversarialExperimentReport run_adversarial_experiment(const MlpModel& model, const LabeledDataset& test,
                                                       const AdversarialExperimentConfig& config);

// Inputs on which several models disagree versus random inputs.

struct DisagreementExperimentConfig {
  std::size_t random_inputs = 200;
  std::size_t min_corner_cases = 20;  // below this, no test is run
  ScanParams scan;
};

struct DisagreementScan {
  std::vector<double> corner_values;
  std::vector<double> random_values;
  DistributionSummary corner;
  DistributionSummary random;
  KsResult ks;
};

struct DisagreementExperimentReport {
  std::vector<Eigen::Index> corner_cases;
  std::vector<Eigen::Index> random_indices;
  /// One entry per model when the test ran; empty otherwise.
  std::vector<DisagreementScan> per_model;
  bool tested = false;
  std::string diagnostic;
};

DisagreementExperimentReport run_disagreement_experiment(std::span<const MlpModel> models, const LabeledDataset& test,
                                                         const DisagreementExperimentConfig& config);

// Index distributions over a watermark key before and after embedding it.

struct WatermarkExperimentConfig {
  std::size_t key_size = 20;
  AttackConfig attack;
  TrainConfig finetune{0.1, 500, 20, 0};
  double target_accuracy = 0.9;
  std::size_t runs = 100;  // index estimates per key input
  ScanParams scan;
};

/// Half clean inputs with their labels, half successful FGM adversarials
/// relabeled to their original class.
struct BuiltKey {
  WatermarkKey key;
  std::vector<Eigen::Index> source_indices;
  std::vector<bool> adversarial;
};

BuiltKey build_watermark_key(const MlpModel& model, const LabeledDataset& data, std::size_t key_size,
                             const AttackConfig& attack);

struct WatermarkExperimentReport {
  BuiltKey key;
  WatermarkResult finetune;
  double key_accuracy_before = 0;
  std::vector<double> before_values;
  std::vector<double> after_values;
  DistributionSummary before;
  DistributionSummary after;
  KsResult ks;
};

WatermarkExperimentReport run_watermark_experiment(const MlpModel& model, const LabeledDataset& data,
                                                   const WatermarkExperimentConfig& config);

/// Scans `runs` times around each key input (stream i * runs + r).
std::vector<double> scan_key(const MlpModel& model, const Matrix& key_inputs, std::size_t runs,
                             const ScanParams& scan);

}  // namespace zonn
