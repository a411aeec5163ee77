#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "zonn/index.hpp"
#include "zonn/stats.hpp"

namespace zonn {

nlohmann::json to_json(const ScanConfig& config);
nlohmann::json to_json(const ScanReport& report);  // entropy samples go to CSV, not JSON
nlohmann::json to_json(const KsResult& ks);
nlohmann::json to_json(const DistributionSummary& summary);
nlohmann::json to_json(const Vector& v);

/// One value per line, full round-trip precision.
std::string values_csv(std::span<const double> values);

/// Reads numbers one per line (blank lines and a non-numeric first line
/// are skipped).
std::vector<double> read_values(const std::string& text, const std::string& name);

/// Columns radius,index,std,p0..p{C-1}.
std::string sweep_csv(const std::vector<ScanReport>& reports);

}  // namespace zonn
