#include "zonn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zonn/error.hpp"
#include "zonn/training.hpp"

namespace zonn {

double kolmogorov_survival(double lambda) {
  // Q(lambda) > 1 - 1e-12 below 0.2, where the alternating series needs many
  // nearly-cancelling terms.
  if (!(lambda >= 0.2)) return 1.0;
  const double two_lambda_sq = 2.0 * lambda * lambda;
  double sum = 0;
  double sign = 1;
  for (int j = 1; j < 100; ++j) {
    const double term = std::exp(-two_lambda_sq * j * j);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), ErrorKind::parameter, "KS test needs two non-empty samples");
  auto finite = [](double v) { return std::isfinite(v); };
  require(std::all_of(a.begin(), a.end(), finite) && std::all_of(b.begin(), b.end(), finite), ErrorKind::parameter,
          "KS test samples must be finite");

  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());

  // Evaluate both ECDFs just after each distinct merged value.
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }

  const double ne = n1 * n2 / (n1 + n2);
  const double root = std::sqrt(ne);
  return {d, kolmogorov_survival((root + 0.12 + 0.11 / root) * d), x.size(), y.size()};
}

DistributionSummary summarize(std::span<const double> values) {
  require(!values.empty(), ErrorKind::parameter, "cannot summarize an empty sample");
  DistributionSummary s;
  s.count = values.size();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  const double n = static_cast<double>(values.size());
  s.mean = std::clamp(std::accumulate(values.begin(), values.end(), 0.0) / n, s.min, s.max);
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1));
  }
  return s;
}

std::vector<Eigen::Index> find_disagreements(std::span<const MlpModel> models, const LabeledDataset& data) {
  require(models.size() >= 2, ErrorKind::parameter, "need at least two models to compare");
  for (const auto& m : models) {
    require(m.input_dim() == models.front().input_dim() && m.num_classes() == models.front().num_classes(),
            ErrorKind::parameter, "models differ in input dimension or class count");
  }
  require(data.dim() == models.front().input_dim(), ErrorKind::shape, "dataset dimension does not match the models");

  std::vector<std::vector<int>> predictions;
  for (const auto& m : models) predictions.push_back(predict_labels(m, data.inputs));
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < predictions.front().size(); ++i) {
    const bool agree = std::all_of(predictions.begin() + 1, predictions.end(),
                                   [&](const std::vector<int>& p) { return p[i] == predictions.front()[i]; });
    if (!agree) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

}  // namespace zonn
