#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "zonn/entropy.hpp"
#include "zonn/error.hpp"
#include "zonn/model.hpp"
#include "zonn/parallel.hpp"
#include "zonn/random.hpp"
#include "zonn/sampler.hpp"

namespace zonn {

/// Anything that maps a d x n batch of inputs to a C x n batch of
/// probability vectors. `Mlp` satisfies it; the index itself does not care
/// about the architecture.
template <class M>
concept Classifier = requires(const M& m, const Matrix& x) {
  { m.input_dim() } -> std::convertible_to<Eigen::Index>;
  { m.num_classes() } -> std::convertible_to<Eigen::Index>;
  { m.predict_batch(x) };
};

struct ScanConfig {
  double radius = 0.025;
  std::uint64_t num_samples = 10000;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  bool keep_samples = false;
  unsigned workers = 1;
};

struct ScanReport {
  double index_value = 0;
  double entropy_std = 0;  // sample standard deviation of the per-sample entropies
  Vector mean_confidence;
  std::vector<double> entropy_samples;  // filled only with ScanConfig::keep_samples
  ScanConfig config;
};

/// Samples are processed in fixed blocks; partial sums are combined in
/// block order, which makes results independent of the worker count.
inline constexpr std::uint64_t scan_block_size = 512;

namespace detail {

struct BlockSums {
  double entropy = 0;
  double entropy_sq = 0;
  Vector confidence;
};

inline void validate_scan(Eigen::Index input_dim, const InputPoint& x, const ScanConfig& config) {
  require(config.num_samples >= 1, ErrorKind::parameter, "number of samples k must be at least 1");
  require(config.radius >= 0 && !std::isnan(config.radius), ErrorKind::parameter, "radius must be non-negative");
  require(x.size() == input_dim, ErrorKind::shape,
          "input has dimension " + std::to_string(x.size()) + ", model expects " + std::to_string(input_dim));
  require(in_unit_cube(x), ErrorKind::domain, "input component outside [0, 1]");
}

}  // namespace detail

/// Monte Carlo estimate of the expected base-C entropy of the classifier
/// output over B_inf(x, r) intersected with [0,1]^d, using k uniform samples.
template <Classifier M>
ScanReport zonnscan(const M& model, const InputPoint& x, const ScanConfig& config) {
  detail::validate_scan(model.input_dim(), x, config);
  const BallRegion region = make_region(x, config.radius);
  const SeededStream stream(config.seed, config.stream_id);
  const std::uint64_t k = config.num_samples;
  const std::uint64_t blocks = (k + scan_block_size - 1) / scan_block_size;
  const Eigen::Index classes = model.num_classes();

  ScanReport report;
  report.config = config;
  if (config.keep_samples) report.entropy_samples.assign(k, 0.0);

  std::vector<detail::BlockSums> sums(blocks);
  parallel_for(blocks, config.workers, [&](std::size_t b) {
    const std::uint64_t first = b * scan_block_size;
    const std::uint64_t count = std::min(scan_block_size, k - first);
    const Matrix probs = model.predict_batch(sample(region, count, stream, first));
    auto& s = sums[b];
    s.confidence = probs.rowwise().sum();
    for (Eigen::Index i = 0; i < probs.cols(); ++i) {
      const double h = entropy(probs.col(i));
      s.entropy += h;
      s.entropy_sq += h * h;
      if (config.keep_samples) report.entropy_samples[first + static_cast<std::uint64_t>(i)] = h;
    }
  });

  double total = 0, total_sq = 0;
  Vector confidence = Vector::Zero(classes);
  for (const auto& s : sums) {
    total += s.entropy;
    total_sq += s.entropy_sq;
    confidence += s.confidence;
  }
  const double kd = static_cast<double>(k);
  report.index_value = std::clamp(total / kd, 0.0, 1.0);
  report.entropy_std = k > 1 ? std::sqrt(std::max(0.0, (total_sq - kd * report.index_value * report.index_value) / (kd - 1))) : 0.0;
  report.mean_confidence = (confidence / kd).cwiseMax(0.0).cwiseMin(1.0);
  return report;
}

/// One scan per radius. Every radius shares `seed`; radius i uses stream i.
template <Classifier M>
std::vector<ScanReport> radius_sweep(const M& model, const InputPoint& x, const std::vector<double>& radii,
                                     std::uint64_t k, std::uint64_t seed, unsigned workers = 1,
                                     bool keep_samples = false) {
  require(!radii.empty(), ErrorKind::parameter, "radius list is empty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] >= 0 && radii[i] <= 1, ErrorKind::parameter, "radius " + std::to_string(radii[i]) + " outside [0, 1]");
    require(i == 0 || radii[i] > radii[i - 1], ErrorKind::parameter, "radii must be strictly ascending");
  }
  std::vector<ScanReport> out;
  out.reserve(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i)
    out.push_back(zonnscan(model, x, ScanConfig{radii[i], k, seed, i, keep_samples, workers}));
  return out;
}

/// Share of [0,1]^d assigned to each class by argmax prediction, estimated
/// from k uniform samples. Ties go to the lowest class index.
template <Classifier M>
Vector class_surface(const M& model, std::uint64_t k, std::uint64_t seed, unsigned workers = 1) {
  require(k >= 1, ErrorKind::parameter, "number of samples k must be at least 1");
  const BallRegion cube = make_region(Vector::Constant(model.input_dim(), 0.5), 1.0);
  const SeededStream stream(seed, 0);
  const std::uint64_t blocks = (k + scan_block_size - 1) / scan_block_size;
  std::vector<std::vector<std::uint64_t>> counts(blocks, std::vector<std::uint64_t>(model.num_classes(), 0));
  parallel_for(blocks, workers, [&](std::size_t b) {
    const std::uint64_t first = b * scan_block_size;
    const std::uint64_t count = std::min(scan_block_size, k - first);
    const Matrix probs = model.predict_batch(sample(cube, count, stream, first));
    for (Eigen::Index i = 0; i < probs.cols(); ++i) ++counts[b][static_cast<std::size_t>(argmax(probs.col(i)))];
  });
  Vector shares = Vector::Zero(model.num_classes());
  for (const auto& c : counts)
    for (std::size_t j = 0; j < c.size(); ++j) shares(static_cast<Eigen::Index>(j)) += static_cast<double>(c[j]);
  return shares / static_cast<double>(k);
}

}  // namespace zonn
