#include "zonn/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>

#include "zonn/io.hpp"

namespace zonn {

using nlohmann::json;

namespace {

// A weight entry must be a JSON number. Strings spelling a non-finite value
// and nulls (how non-finite doubles are usually serialized) are reported as
// validation errors rather than parse errors.
double read_real(const json& v, const std::string& field) {
  if (v.is_number()) {
    const double x = v.get<double>();
    require(std::isfinite(x), ErrorKind::validation, field + ": non-finite value");
    return x;
  }
  if (v.is_null()) fail(ErrorKind::validation, field + ": non-finite value (null)");
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "nan" || s == "inf" || s == "-inf" || s == "infinity" || s == "-infinity")
      fail(ErrorKind::validation, field + ": non-finite value \"" + v.get<std::string>() + "\"");
  }
  fail(ErrorKind::parse, field + ": expected a number, got " + std::string(v.type_name()));
}

const json& member(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorKind::parse, where + ": missing field '" + key + "'");
  return *it;
}

Eigen::Index read_dim(const json& obj, const char* key) {
  const json& v = member(obj, key, "model");
  require(v.is_number_integer() && v.get<long long>() > 0, ErrorKind::parse,
          std::string("field '") + key + "' must be a positive integer");
  return static_cast<Eigen::Index>(v.get<long long>());
}

}  // namespace

json model_to_json(const MlpModel& model) {
  json layers = json::array();
  for (const auto& l : model.layers()) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row.push_back(l.weights(r, c));
      rows.push_back(std::move(row));
    }
    json bias = json::array();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) bias.push_back(l.bias(r));
    layers.push_back({{"weights", std::move(rows)}, {"bias", std::move(bias)}, {"activation", to_string(l.activation)}});
  }
  return {{"format_version", model_format_version},
          {"input_dim", model.input_dim()},
          {"num_classes", model.num_classes()},
          {"layers", std::move(layers)}};
}

MlpModel model_from_json(const json& j) {
  require(j.is_object(), ErrorKind::parse, "model file must hold a JSON object");
  const json& version = member(j, "format_version", "model");
  require(version.is_number_integer() && version.get<int>() == model_format_version, ErrorKind::parse,
          "unsupported format_version " + version.dump());
  const Eigen::Index input_dim = read_dim(j, "input_dim");
  const Eigen::Index num_classes = read_dim(j, "num_classes");
  const json& jl = member(j, "layers", "model");
  require(jl.is_array() && !jl.empty(), ErrorKind::parse, "field 'layers' must be a non-empty array");

  std::vector<DenseLayer<double>> layers;
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string where = "layers[" + std::to_string(i) + "]";
    const json& layer = jl[i];
    require(layer.is_object(), ErrorKind::parse, where + ": expected an object");
    const json& w = member(layer, "weights", where);
    const json& b = member(layer, "bias", where);
    const json& act = member(layer, "activation", where);
    require(w.is_array() && !w.empty() && w[0].is_array(), ErrorKind::parse,
            where + ".weights: expected a non-empty array of rows");
    require(b.is_array(), ErrorKind::parse, where + ".bias: expected an array");
    require(act.is_string(), ErrorKind::parse, where + ".activation: expected a string");

    const auto rows = static_cast<Eigen::Index>(w.size());
    const auto cols = static_cast<Eigen::Index>(w[0].size());
    Matrix weights(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const json& row = w[static_cast<std::size_t>(r)];
      const std::string rw = where + ".weights[" + std::to_string(r) + "]";
      require(row.is_array(), ErrorKind::parse, rw + ": expected an array");
      require(static_cast<Eigen::Index>(row.size()) == cols, ErrorKind::validation,
              rw + ": ragged row of length " + std::to_string(row.size()) + ", expected " + std::to_string(cols));
      for (Eigen::Index c = 0; c < cols; ++c)
        weights(r, c) = read_real(row[static_cast<std::size_t>(c)], rw + "[" + std::to_string(c) + "]");
    }
    Vector bias(static_cast<Eigen::Index>(b.size()));
    for (std::size_t r = 0; r < b.size(); ++r)
      bias(static_cast<Eigen::Index>(r)) = read_real(b[r], where + ".bias[" + std::to_string(r) + "]");
    layers.push_back({std::move(weights), std::move(bias), parse_activation(act.get<std::string>())});
  }

  MlpModel model(std::move(layers));
  require(model.input_dim() == input_dim, ErrorKind::validation,
          "input_dim " + std::to_string(input_dim) + " does not match first layer width " +
              std::to_string(model.input_dim()));
  require(model.num_classes() == num_classes, ErrorKind::validation,
          "num_classes " + std::to_string(num_classes) + " does not match last layer width " +
              std::to_string(model.num_classes()));
  return model;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model).dump() + "\n");
}

MlpModel load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    fail(ErrorKind::parse, path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

}  // namespace zonn
