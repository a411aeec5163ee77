#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "zonn/cli.hpp"
#include "zonn/entropy.hpp"
#include "zonn/index.hpp"
#include "zonn/io.hpp"
#include "zonn/model_io.hpp"

using namespace zonn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("zonn_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

json payload(const fs::path& p) {
  json j = read_json(p);
  j.erase("metadata");
  return j;
}

// Trains a small blobs model once; returns its path.
const fs::path& trained_model() {
  static const fs::path path = [] {
    const auto dir = fresh_dir("shared");
    const Run r = invoke({"--seed", "7", "--out-dir", dir.string(), "train", "--blobs", "2000", "--blobs-seed", "1",
                       "--epochs", "50"});
    REQUIRE(r.code == 0);
    return dir / "model.json";
  }();
  return path;
}

}  // namespace

TEST_CASE("radius ranges") {
  const auto r = cli::parse_radii("0:1:0.05");
  CHECK(r.size() == 21);
  CHECK(r.front() == 0.0);
  CHECK(r.back() == 1.0);
  CHECK(cli::parse_radii("0,0.1,0.5") == std::vector<double>{0, 0.1, 0.5});
  CHECK_THROWS_AS(cli::parse_radii("0:1"), Error);
  CHECK_THROWS_AS(cli::parse_radii("a,b"), Error);
}

TEST_CASE("train writes a model, history and report; reruns are identical") {
  const auto a = fresh_dir("train_a"), b = fresh_dir("train_b");
  for (const auto& dir : {a, b}) {
    const Run r = invoke({"--seed", "3", "--out-dir", dir.string(), "train", "--blobs", "2000", "--blobs-seed", "1"});
    REQUIRE(r.code == 0);
  }
  CHECK(read_json(a / "train.json")["train_accuracy"].get<double>() >= 0.95);
  CHECK(read_file(a / "model.json") == read_file(b / "model.json"));
  CHECK(read_file(a / "history.csv") == read_file(b / "history.csv"));
  CHECK(payload(a / "train.json") == payload(b / "train.json"));
  CHECK(read_json(a / "train.json")["metadata"].contains("generated_at"));
}

TEST_CASE("train reports a missing dataset and writes nothing") {
  const auto dir = fresh_dir("train_missing");
  const Run r = invoke({"--out-dir", dir.string(), "train", "--data-csv", (dir / "absent.csv").string(), "--classes", "2"});
  CHECK(r.code == 3);
  CHECK(fs::is_empty(dir));
  CHECK(invoke({"--out-dir", dir.string(), "train"}).code == 2);
  CHECK(invoke({"bogus"}).code == 2);
}

TEST_CASE("scan matches the library and plain inference at r = 0") {
  const auto dir = fresh_dir("scan");
  const MlpModel model = load_model(trained_model());
  fs::create_directories(dir);
  {
    std::ofstream(dir / "x.csv") << "0.45,0.5\n";
  }
  Vector x(2);
  x << 0.45, 0.5;

  REQUIRE(invoke({"--seed", "5", "--out-dir", dir.string(), "scan", "--model", trained_model().string(), "--input-csv",
               (dir / "x.csv").string(), "--radius", "0", "--k", "100"})
              .code == 0);
  CHECK(std::abs(read_json(dir / "scan.json")["index_value"].get<double>() - entropy(forward(model, x))) < 1e-12);

  REQUIRE(invoke({"--seed", "5", "--workers", "3", "--out-dir", dir.string(), "scan", "--model",
               trained_model().string(), "--input-csv", (dir / "x.csv").string(), "--radius", "0.1", "--k", "2000",
               "--keep-samples"})
              .code == 0);
  const ScanReport lib = zonnscan(model, x, {0.1, 2000, 5, 0});
  const json j = read_json(dir / "scan.json");
  CHECK(j["index_value"].get<double>() == lib.index_value);
  CHECK(j["entropy_std"].get<double>() == lib.entropy_std);
  CHECK(j["mean_confidence"][0].get<double>() == lib.mean_confidence(0));
  CHECK(fs::exists(dir / "entropies.csv"));

  // Dataset column as the input.
  REQUIRE(invoke({"--out-dir", dir.string(), "scan", "--model", trained_model().string(), "--blobs", "10", "--index", "3",
               "--k", "10"})
              .code == 0);
}

TEST_CASE("scan of a uniform model is one; bad inputs fail validation") {
  const auto dir = fresh_dir("scan_uniform");
  save_model(make_zero_model(2, 3), dir / "zero.json");
  {
    std::ofstream(dir / "x.csv") << "0.2,0.7\n";
    std::ofstream(dir / "bad.csv") << "0.2,1.7\n";
  }
  REQUIRE(invoke({"--out-dir", dir.string(), "scan", "--model", (dir / "zero.json").string(), "--input-csv",
               (dir / "x.csv").string(), "--k", "300"})
              .code == 0);
  CHECK(read_json(dir / "scan.json")["index_value"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(invoke({"--out-dir", dir.string(), "scan", "--model", (dir / "zero.json").string(), "--input-csv",
             (dir / "bad.csv").string()})
            .code == 2);
  CHECK(invoke({"--out-dir", dir.string(), "scan", "--model", (dir / "zero.json").string(), "--input-csv",
             (dir / "x.csv").string(), "--k", "0"})
            .code == 2);
}

TEST_CASE("numeric failures exit with code 4") {
  const auto dir = fresh_dir("numeric");
  DenseLayer<double> huge{Matrix::Constant(2, 2, 1e308), Vector::Zero(2), Activation::identity};
  save_model(MlpModel({huge}), dir / "huge.json");
  {
    std::ofstream(dir / "x.csv") << "1,1\n";
  }
  const Run r = invoke({"--out-dir", (dir / "out").string(), "scan", "--model", (dir / "huge.json").string(),
                     "--input-csv", (dir / "x.csv").string(), "--radius", "0", "--k", "5"});
  CHECK(r.code == 4);
  CHECK(!fs::exists(dir / "out"));
}

TEST_CASE("sweep writes one row per radius") {
  const auto dir = fresh_dir("sweep");
  save_model(make_zero_model(2, 2), dir / "zero.json");
  {
    std::ofstream(dir / "x.csv") << "0.5,0.5\n";
  }
  REQUIRE(invoke({"--out-dir", dir.string(), "sweep", "--model", (dir / "zero.json").string(), "--input-csv",
               (dir / "x.csv").string(), "--radii", "0:1:0.05", "--k", "50"})
              .code == 0);
  std::istringstream csv(read_file(dir / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "radius,index,std,p0,p1");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    const auto first = line.find(','), second = line.find(',', first + 1);
    CHECK(std::stod(line.substr(first + 1, second - first - 1)) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(rows == 21);
}

TEST_CASE("adversarial experiment command") {
  const auto a = fresh_dir("adv_a"), b = fresh_dir("adv_b");
  const std::vector<std::string> common{"adv", "--model", trained_model().string(), "--blobs", "2000",
                                        "--blobs-seed", "2", "--n", "40", "--k", "300"};
  auto args = std::vector<std::string>{"--seed", "1", "--out-dir", a.string()};
  args.insert(args.end(), common.begin(), common.end());
  REQUIRE(invoke(args).code == 0);
  args = {"--seed", "1", "--workers", "4", "--out-dir", b.string()};
  args.insert(args.end(), common.begin(), common.end());
  REQUIRE(invoke(args).code == 0);
  CHECK(payload(a / "adv.json") == payload(b / "adv.json"));
  CHECK(read_file(a / "adv_clean.csv") == read_file(b / "adv_clean.csv"));
  const json j = read_json(a / "adv.json");
  CHECK(j["adversarial"]["mean"].get<double>() > j["clean"]["mean"].get<double>());

  const auto c = fresh_dir("adv_zero");
  CHECK(invoke({"--out-dir", c.string(), "adv", "--model", trained_model().string(), "--blobs", "100", "--n", "0"}).code ==
        2);
  CHECK(fs::is_empty(c));
}

TEST_CASE("disagreement command") {
  const auto dir = fresh_dir("disagree");
  const Run same = invoke({"--out-dir", dir.string(), "disagree", "--model", trained_model().string(), "--model",
                        trained_model().string(), "--blobs", "500", "--k", "100"});
  REQUIRE(same.code == 0);
  const json j = read_json(dir / "disagree.json");
  CHECK(j["corner_cases"].get<int>() == 0);
  CHECK(j["tested"].get<bool>() == false);
  CHECK(j["diagnostic"].get<std::string>().find("no test possible") != std::string::npos);

  save_model(make_zero_model(2, 3), dir / "three.json");
  CHECK(invoke({"--out-dir", dir.string(), "disagree", "--model", trained_model().string(), "--model",
             (dir / "three.json").string(), "--blobs", "500"})
            .code == 2);
}

TEST_CASE("watermark command rejects an empty key") {
  const auto dir = fresh_dir("watermark");
  CHECK(invoke({"--out-dir", dir.string(), "watermark", "--model", trained_model().string(), "--blobs", "500",
             "--key-size", "0"})
            .code == 2);
  CHECK(fs::is_empty(dir));
}

TEST_CASE("surface command") {
  const auto dir = fresh_dir("surface");
  DenseLayer<double> constant{Matrix::Zero(3, 2), Vector::Zero(3), Activation::identity};
  constant.bias << 0, 4, 0;
  save_model(MlpModel({constant}), dir / "const.json");
  REQUIRE(invoke({"--out-dir", dir.string(), "surface", "--model", (dir / "const.json").string(), "--k", "500"}).code ==
          0);
  const json shares = read_json(dir / "surface.json")["shares"];
  CHECK(shares == json::array({0.0, 1.0, 0.0}));
}

TEST_CASE("ks command and configuration files") {
  const auto dir = fresh_dir("ks");
  {
    std::ofstream(dir / "a.csv") << "value\n0.1\n0.2\n0.3\n0.4\n";
    std::ofstream(dir / "b.csv") << "0.35\n0.45\n0.55\n0.65\n";
    std::ofstream(dir / "run.conf") << "out-dir = \"" << dir.string() << "\"\nseed = 4\n";
  }
  REQUIRE(invoke({"--config", (dir / "run.conf").string(), "ks", (dir / "a.csv").string(), (dir / "b.csv").string()})
              .code == 0);
  const json j = read_json(dir / "ks.json");
  CHECK(j["statistic"].get<double>() == 0.75);
  CHECK(j["p_value"].get<double>() == doctest::Approx(0.1074904650209663689).epsilon(1e-12));
  CHECK(j["metadata"]["seed"].get<int>() == 4);
}

TEST_CASE("installed binary returns the documented exit codes") {
  const char* exe = std::getenv("ZONN_CLI");
  if (exe == nullptr) return;
  const auto dir = fresh_dir("binary");
  const std::string base = std::string(exe) + " --out-dir " + dir.string() + " ";
  CHECK(std::system((base + "surface --model " + trained_model().string() + " --k 100 > /dev/null").c_str()) == 0);
  const int missing = std::system((base + "surface --model " + (dir / "none.json").string() + " 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(missing) == 3);
  const int bad = std::system((base + "scan --model " + trained_model().string() + " --k -3 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(bad) == 2);
}
