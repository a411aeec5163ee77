#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "zonn/model.hpp"

namespace zonn {

inline constexpr int model_format_version = 1;

nlohmann::json model_to_json(const MlpModel& model);

/// Builds a model from its JSON form. Structural problems are parse errors
/// naming the offending field; dimension or finiteness problems are
/// validation errors.
MlpModel model_from_json(const nlohmann::json& j);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace zonn
