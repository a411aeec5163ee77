#include "zonn/experiments.hpp"

#include "zonn/error.hpp"
#include "zonn/parallel.hpp"

namespace zonn {

std::vector<double> scan_inputs(const MlpModel& model, const Matrix& inputs, double radius, std::uint64_t k,
                                std::uint64_t seed, std::uint64_t first_stream, unsigned workers) {
  std::vector<double> out(static_cast<std::size_t>(inputs.cols()));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const ScanConfig config{radius, k, seed, first_stream + i, false, 1};
    out[i] = zonnscan(model, inputs.col(static_cast<Eigen::Index>(i)), config).index_value;
  });
  return out;
}

AdversarialExperimentReport run_adversarial_experiment(const MlpModel& model, const LabeledDataset& test,
                                                       const AdversarialExperimentConfig& config) {
  AdversarialExperimentReport report;
  report.pairs = generate_adversarial_set(model, test, config.n, config.attack);

  const auto n = static_cast<Eigen::Index>(report.pairs.size());
  Matrix clean(test.dim(), n), adversarial(test.dim(), n);
  std::size_t flipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = report.pairs[static_cast<std::size_t>(i)];
    clean.col(i) = p.original;
    adversarial.col(i) = p.adversarial;
    flipped += p.adversarial_label != p.original_label;
  }
  const auto& s = config.scan;
  report.clean_values = scan_inputs(model, clean, s.radius, s.num_samples, s.seed, 0, s.workers);
  report.adversarial_values =
      scan_inputs(model, adversarial, s.radius, s.num_samples, s.seed, static_cast<std::uint64_t>(n), s.workers);
  report.clean = summarize(report.clean_values);
  report.adversarial = summarize(report.adversarial_values);
  report.ks = ks_two_sample(report.clean_values, report.adversarial_values);
  report.attack_success_rate = static_cast<double>(flipped) / static_cast<double>(n);
  return report;
}

DisagreementExperimentReport run_disagreement_experiment(std::span<const MlpModel> models, const LabeledDataset& test,
                                                         const DisagreementExperimentConfig& config) {
  require(config.random_inputs >= 1, ErrorKind::parameter, "number of random inputs must be at least 1");
  require(config.random_inputs <= static_cast<std::size_t>(test.size()), ErrorKind::parameter,
          "more random inputs requested than the dataset holds");
  DisagreementExperimentReport report;
  report.corner_cases = find_disagreements(models, test);

  auto order = seeded_permutation(static_cast<std::size_t>(test.size()), config.scan.seed);
  report.random_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.random_inputs));

  if (report.corner_cases.size() < std::max<std::size_t>(config.min_corner_cases, 1)) {
    report.diagnostic = "found " + std::to_string(report.corner_cases.size()) +
                        " corner cases, fewer than the " + std::to_string(config.min_corner_cases) +
                        " required; no test possible";
    return report;
  }

  // Input i of the dataset always uses stream i, whichever group it is in.
  auto scan_group = [&](const MlpModel& model, const std::vector<Eigen::Index>& indices) {
    std::vector<double> out(indices.size());
    parallel_for(indices.size(), config.scan.workers, [&](std::size_t i) {
      const ScanConfig sc{config.scan.radius, config.scan.num_samples, config.scan.seed,
                          static_cast<std::uint64_t>(indices[i]), false, 1};
      out[i] = zonnscan(model, test.inputs.col(indices[i]), sc).index_value;
    });
    return out;
  };

  for (const auto& model : models) {
    DisagreementScan scan;
    scan.corner_values = scan_group(model, report.corner_cases);
    scan.random_values = scan_group(model, report.random_indices);
    scan.corner = summarize(scan.corner_values);
    scan.random = summarize(scan.random_values);
    scan.ks = ks_two_sample(scan.corner_values, scan.random_values);
    report.per_model.push_back(std::move(scan));
  }
  report.tested = true;
  return report;
}

BuiltKey build_watermark_key(const MlpModel& model, const LabeledDataset& data, std::size_t key_size,
                             const AttackConfig& attack) {
  require(key_size >= 1, ErrorKind::parameter, "watermark key size must be at least 1");
  data.validate();
  const std::size_t clean_wanted = key_size / 2;
  const std::size_t adversarial_wanted = key_size - clean_wanted;
  const auto predicted = predict_labels(model, data.inputs);

  BuiltKey out;
  out.key.inputs.resize(data.dim(), static_cast<Eigen::Index>(key_size));
  std::size_t clean = 0, adversarial = 0;
  for (const Eigen::Index i : seeded_permutation(static_cast<std::size_t>(data.size()), attack.seed)) {
    if (clean == clean_wanted && adversarial == adversarial_wanted) break;
    const int label = data.labels[static_cast<std::size_t>(i)];
    if (predicted[static_cast<std::size_t>(i)] != label) continue;
    InputPoint input = data.inputs.col(i);
    bool is_adversarial = false;
    if (clean < clean_wanted) {
      ++clean;
    } else {
      InputPoint adv = fgm(model, input, label, attack);
      if (argmax(model.logits(adv)) == label) continue;  // attack failed; not usable as a key input
      input = std::move(adv);
      is_adversarial = true;
      ++adversarial;
    }
    out.key.inputs.col(static_cast<Eigen::Index>(out.source_indices.size())) = input;
    out.key.target_labels.push_back(label);
    out.source_indices.push_back(i);
    out.adversarial.push_back(is_adversarial);
  }
  require(out.source_indices.size() == key_size, ErrorKind::data,
          "could only build " + std::to_string(out.source_indices.size()) + " of " + std::to_string(key_size) +
              " key inputs (" + std::to_string(adversarial) + " successful adversarials)");
  return out;
}

std::vector<double> scan_key(const MlpModel& model, const Matrix& key_inputs, std::size_t runs,
                             const ScanParams& scan) {
  require(runs >= 1, ErrorKind::parameter, "number of runs must be at least 1");
  const auto n = static_cast<std::size_t>(key_inputs.cols());
  std::vector<double> out(n * runs);
  parallel_for(out.size(), scan.workers, [&](std::size_t slot) {
    const ScanConfig sc{scan.radius, scan.num_samples, scan.seed, slot, false, 1};
    out[slot] = zonnscan(model, key_inputs.col(static_cast<Eigen::Index>(slot / runs)), sc).index_value;
  });
  return out;
}

WatermarkExperimentReport run_watermark_experiment(const MlpModel& model, const LabeledDataset& data,
                                                   const WatermarkExperimentConfig& config) {
  WatermarkExperimentReport report;
  report.key = build_watermark_key(model, data, config.key_size, config.attack);
  const LabeledDataset key_data{report.key.key.inputs, report.key.key.target_labels,
                                static_cast<int>(model.num_classes()), Split::train};
  report.key_accuracy_before = accuracy(model, key_data);
  report.finetune = watermark_finetune(model, report.key.key, config.finetune, config.target_accuracy);
  report.before_values = scan_key(model, report.key.key.inputs, config.runs, config.scan);
  report.after_values = scan_key(report.finetune.model, report.key.key.inputs, config.runs, config.scan);
  report.before = summarize(report.before_values);
  report.after = summarize(report.after_values);
  report.ks = ks_two_sample(report.before_values, report.after_values);
  return report;
}

}  // namespace zonn
