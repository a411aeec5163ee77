#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "zonn/data.hpp"
#include "zonn/model.hpp"

namespace zonn {

struct KsResult {
  double statistic = 0;  // D = sup |ECDF_a - ECDF_b|
  double p_value = 1;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Two-sample Kolmogorov-Smirnov test. D is exact (right-continuous ECDFs,
/// ties handled); the p-value uses the asymptotic Kolmogorov distribution
/// at lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D, ne = n1 n2 / (n1 + n2).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Q(lambda) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2), truncated once
/// a term falls below 1e-12 and clamped to [0, 1]. Q(0) = 1.
double kolmogorov_survival(double lambda);

struct DistributionSummary {
  double mean = 0;
  double std = 0;  // sample standard deviation (n - 1 denominator), 0 for a single value
  double min = 0;
  double max = 0;
  std::size_t count = 0;
};

DistributionSummary summarize(std::span<const double> values);

/// Indices of `data` where the models do not all predict the same class.
std::vector<Eigen::Index> find_disagreements(std::span<const MlpModel> models, const LabeledDataset& data);

}  // namespace zonn
