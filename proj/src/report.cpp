#include "zonn/report.hpp"

#include <charconv>
#include <sstream>

#include "zonn/error.hpp"

namespace zonn {

using nlohmann::json;

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const ScanConfig& config) {
  return {{"radius", config.radius},
          {"num_samples", config.num_samples},
          {"seed", config.seed},
          {"stream_id", config.stream_id}};
}

json to_json(const ScanReport& report) {
  return {{"index_value", report.index_value},
          {"entropy_std", report.entropy_std},
          {"mean_confidence", to_json(report.mean_confidence)},
          {"config", to_json(report.config)}};
}

json to_json(const KsResult& ks) {
  return {{"statistic", ks.statistic}, {"p_value", ks.p_value}, {"n1", ks.n1}, {"n2", ks.n2}};
}

json to_json(const DistributionSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}, {"count", s.count}};
}

std::string values_csv(std::span<const double> values) {
  std::ostringstream os;
  os.precision(17);
  for (double v : values) os << v << '\n';
  return os.str();
}

std::vector<double> read_values(const std::string& text, const std::string& name) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    const std::string_view cell(line.data() + first, last - first + 1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      if (out.empty() && line_no == 1) continue;  // header
      fail(ErrorKind::parse, name + ":" + std::to_string(line_no) + ": '" + std::string(cell) + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

std::string sweep_csv(const std::vector<ScanReport>& reports) {
  std::ostringstream os;
  os.precision(17);
  os << "radius,index,std";
  const Eigen::Index classes = reports.empty() ? 0 : reports.front().mean_confidence.size();
  for (Eigen::Index c = 0; c < classes; ++c) os << ",p" << c;
  os << '\n';
  for (const auto& r : reports) {
    os << r.config.radius << ',' << r.index_value << ',' << r.entropy_std;
    for (Eigen::Index c = 0; c < classes; ++c) os << ',' << r.mean_confidence(c);
    os << '\n';
  }
  return os.str();
}

}  // namespace zonn
