// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Set ZONN_MNIST_DIR to a directory holding the
// four MNIST IDX files to run the adversarial experiment on MNIST instead of
// the two-blob fallback.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"
#include "oracles.hpp"
#include "zonn/cli.hpp"
#include "zonn/entropy.hpp"
#include "zonn/experiments.hpp"
#include "zonn/index.hpp"
#include "zonn/io.hpp"
#include "zonn/model_io.hpp"
#include "zonn/sampler.hpp"
#include "zonn/stats.hpp"

using namespace zonn;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double uniform_entropy_tol = 1e-12;
constexpr double identity_tol = 1e-12;
constexpr double quadrature_tol = 0.01;
constexpr double chi_square_critical_99_df = 148.2304;  // 0.999 quantile, 99 degrees of freedom
constexpr double gradient_tol = 1e-4;
constexpr double ks_alpha = 1e-3;
constexpr double watermark_key_accuracy = 0.9;
constexpr double null_rate_lo = 0.03, null_rate_hi = 0.08;
constexpr double budget_1 = 1, budget_2 = 5, budget_3 = 30, budget_4 = 5, budget_5 = 10, budget_6 = 300,
                 budget_7 = 300, budget_8 = 300, budget_9 = 10, budget_10 = 60, budget_11 = 5;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- 1

Outcome entropy_suite() {
  double worst_uniform = 0;
  bool one_hot_zero = true;
  for (int c : {2, 3, 10, 100}) {
    worst_uniform = std::max(worst_uniform, std::abs(entropy(Vector::Constant(c, 1.0 / c)) - 1.0));
    for (int hot = 0; hot < c; ++hot) one_hot_zero &= entropy(Vector::Unit(c, hot)) == 0.0;
  }
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<int> classes(2, 20);
  std::bernoulli_distribution sparse(0.2);
  int outside = 0;
  for (int t = 0; t < 100000; ++t) {
    Vector p(classes(rng));
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = sparse(rng) ? 0.0 : expo(rng);
    if (p.sum() == 0) p(0) = 1;
    p /= p.sum();
    const double h = entropy(p);
    outside += !(h >= 0 && h <= 1);
  }
  return {worst_uniform < uniform_entropy_tol && one_hot_zero && outside == 0,
          "max |H(uniform)-1| = " + fmt(worst_uniform) + ", one-hot exact " + (one_hot_zero ? "yes" : "no") +
              ", fuzz violations " + std::to_string(outside) + "/100000"};
}

// ---------------------------------------------------------------- 2

Outcome zero_radius_identity() {
  std::mt19937_64 rng(2);
  const std::vector<Activation> acts{Activation::relu, Activation::tanh, Activation::sigmoid};
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 2 + t % 7, c = 2 + t % 9;
    const MlpModel model = oracle::random_model(rng, {d, 8, c}, {acts[t % 3], Activation::identity}, 3.0);
    const InputPoint x = oracle::random_inputs(rng, d, 1);
    const double scanned = zonnscan(model, x, {0.0, 1000, static_cast<std::uint64_t>(t), 0}).index_value;
    worst = std::max(worst, std::abs(scanned - entropy(forward(model, x))));
  }
  return {worst < identity_tol, "max deviation " + fmt(worst) + " over 100 models"};
}

// ---------------------------------------------------------------- 3

Outcome quadrature_equivalence() {
  const oracle::Linear2D lin{{{-6, -4}, {6, 4}}, {5, -5}};
  const MlpModel model = lin.to_model();
  const double probes[5][2] = {{0.5, 0.5}, {0.1, 0.2}, {0.95, 0.9}, {0.3, 0.7}, {0.6, 0.35}};
  double worst = 0;
  std::uint64_t stream = 0;
  for (double r : {0.05, 0.1, 0.5, 1.0})
    for (const auto& p : probes) {
      InputPoint x(2);
      x << p[0], p[1];
      const double mc = zonnscan(model, x, {r, 100000, 3, stream++}).index_value;
      const double quad = static_cast<double>(oracle::grid_quadrature_index(lin, p[0], p[1], r, 1000));
      worst = std::max(worst, std::abs(mc - quad));
    }
  return {worst < quadrature_tol, "max |MC - quadrature| = " + fmt(worst) + " over 20 probe/radius pairs"};
}

// ---------------------------------------------------------------- 4

Outcome sampler_containment() {
  long violations = 0;
  std::mt19937_64 rng(4);
  for (int d : {1, 2, 5, 784}) {
    const InputPoint x = oracle::random_inputs(rng, d, 1);
    for (double r : {0.0, 0.025, 0.3, 1.0}) {
      const BallRegion region = make_region(x, r);
      const Matrix s = sample(region, 100000 / (d > 100 ? 100 : 1), SeededStream(4, static_cast<std::uint64_t>(d)));
      for (Eigen::Index i = 0; i < s.cols(); ++i) {
        const auto col = s.col(i).array();
        violations += !((col >= 0).all() && (col <= 1).all() && ((col - x.array()).abs() <= r).all());
      }
    }
  }

  // Chi-square on a 10 x 10 grid over a region clipped on two sides.
  InputPoint c(2);
  c << 0.05, 0.8;
  const BallRegion region = make_region(c, 0.3);
  const Matrix s = sample(region, 100000, SeededStream(44, 0));
  std::vector<double> counts(100, 0.0);
  for (Eigen::Index i = 0; i < s.cols(); ++i) {
    int cell[2];
    for (int j = 0; j < 2; ++j) {
      const double u = (s(j, i) - region.lower(j)) / (region.upper(j) - region.lower(j));
      cell[j] = std::min(9, static_cast<int>(u * 10));
    }
    counts[static_cast<std::size_t>(cell[0] * 10 + cell[1])] += 1;
  }
  double chi2 = 0;
  for (double n : counts) chi2 += (n - 1000.0) * (n - 1000.0) / 1000.0;
  return {violations == 0 && chi2 < chi_square_critical_99_df,
          std::to_string(violations) + " bound violations, chi-square " + fmt(chi2) + " (critical " +
              fmt(chi_square_critical_99_df) + ")"};
}

// ---------------------------------------------------------------- 5

Outcome gradient_check() {
  std::mt19937_64 rng(5);
  const std::vector<Activation> acts{Activation::tanh, Activation::sigmoid, Activation::relu, Activation::identity};
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 3 + t % 3, c = 2 + t % 4;
    const MlpModel model =
        oracle::random_model(rng, {d, 6, 5, c}, {acts[t % 4], acts[(t / 4) % 4], Activation::identity}, 2.0);
    const Matrix x = oracle::random_inputs(rng, d, 4, 0.05, 0.95);
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) labels.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(c)));
    const LossGradient g = loss_and_gradient(model, x, labels);

    auto layers = model.layers();
    auto loss_of_layers = [&] { return oracle::loss(MlpModel(layers), x, labels); };
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (Eigen::Index i = 0; i < layers[l].weights.size(); ++i)
        worst = std::max(worst, oracle::relative_error(g.layers[l].weights.data()[i],
                                                       oracle::central_difference(layers[l].weights.data()[i],
                                                                                  loss_of_layers)));
      for (Eigen::Index i = 0; i < layers[l].bias.size(); ++i)
        worst = std::max(worst, oracle::relative_error(g.layers[l].bias(i),
                                                       oracle::central_difference(layers[l].bias(i), loss_of_layers)));
    }
    Matrix xm = x;
    for (Eigen::Index i = 0; i < xm.size(); ++i)
      worst = std::max(worst, oracle::relative_error(g.inputs.data()[i],
                                                     oracle::central_difference(xm.data()[i], [&] {
                                                       return oracle::loss(model, xm, labels);
                                                     })));
  }
  return {worst < gradient_tol, "max relative error " + fmt(worst) + " over 100 model/batch pairs"};
}

// ---------------------------------------------------------------- 6-8

struct TrainTest {
  LabeledDataset train;
  LabeledDataset test;
  std::string source;
};

TrainTest adversarial_data() {
  if (const char* dir = std::getenv("ZONN_MNIST_DIR")) {
    const fs::path p(dir);
    return {load_idx(p / "train-images-idx3-ubyte", p / "train-labels-idx1-ubyte", 2000, 10, Split::train),
            load_idx(p / "t10k-images-idx3-ubyte", p / "t10k-labels-idx1-ubyte", 1000, 10, Split::test), "MNIST"};
  }
  return {make_blobs({2000, {{0.3, 0.3}, {0.7, 0.7}}, 0.05, 1}, Split::train),
          make_blobs({1000, {{0.3, 0.3}, {0.7, 0.7}}, 0.05, 2}, Split::test), "blobs"};
}

MlpModel adversarial_model(const TrainTest& data) {
  const Eigen::Index d = data.train.dim();
  const std::vector<Eigen::Index> widths =
      d > 2 ? std::vector<Eigen::Index>{d, 128, 10} : std::vector<Eigen::Index>{2, 16, 16, 2};
  return train(init_model(widths, Activation::relu, 7), data.train, {0.1, d > 2 ? 20 : 50, 32, 7}).model;
}

Outcome adversarial_experiment() {
  const TrainTest data = adversarial_data();
  const MlpModel model = adversarial_model(data);
  AdversarialExperimentConfig config;
  config.n = 100;
  config.attack = {0.2, 11};
  config.scan = {0.025, 1000, 11, 1};
  const auto r = run_adversarial_experiment(model, data.test, config);
  return {r.adversarial.mean > r.clean.mean && r.ks.p_value < ks_alpha,
          data.source + ": mean clean " + fmt(r.clean.mean) + ", adversarial " + fmt(r.adversarial.mean) +
              ", KS p " + fmt(r.ks.p_value) + ", attack success " + fmt(r.attack_success_rate)};
}

Outcome disagreement_experiment() {
  const std::vector<std::array<double, 2>> centers{{0.35, 0.35}, {0.65, 0.65}};
  const LabeledDataset train_set = make_blobs({2000, centers, 0.12, 1}, Split::train);
  const LabeledDataset test_set = make_blobs({2000, centers, 0.12, 2}, Split::test);
  std::vector<MlpModel> models;
  for (std::uint64_t seed : {1, 2})
    models.push_back(train(init_model({2, 16, 16, 2}, Activation::relu, seed), train_set, {0.1, 50, 32, seed}).model);
  DisagreementExperimentConfig config;
  config.scan = {0.025, 1000, 13, 1};
  const auto r = run_disagreement_experiment(models, test_set, config);
  if (!r.tested) return {false, r.diagnostic};
  bool pass = true;
  std::string detail = std::to_string(r.corner_cases.size()) + " corner cases";
  for (std::size_t m = 0; m < r.per_model.size(); ++m) {
    const auto& s = r.per_model[m];
    pass &= s.corner.mean > s.random.mean && s.ks.p_value < ks_alpha;
    detail += "; model " + std::to_string(m) + ": corner " + fmt(s.corner.mean) + ", random " + fmt(s.random.mean) +
              ", KS p " + fmt(s.ks.p_value);
  }
  return {pass, detail};
}

Outcome watermark_experiment() {
  const TrainTest data = adversarial_data();
  const MlpModel model = adversarial_model(data);
  WatermarkExperimentConfig config;
  config.key_size = 20;
  config.attack = {0.2, 17};
  config.finetune = {0.1, 2000, 2, 17};
  config.target_accuracy = watermark_key_accuracy;
  config.runs = 100;
  config.scan = {0.025, 1000, 17, 1};
  const auto r = run_watermark_experiment(model, data.test, config);
  return {r.finetune.key_accuracy >= watermark_key_accuracy && r.ks.p_value < ks_alpha,
          "key accuracy " + fmt(r.key_accuracy_before) + " -> " + fmt(r.finetune.key_accuracy) + " in " +
              std::to_string(r.finetune.epochs_run) + " epochs; mean before " + fmt(r.before.mean) + ", after " +
              fmt(r.after.mean) + ", KS p " + fmt(r.ks.p_value)};
}

// ---------------------------------------------------------------- 9

Outcome ks_validation() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  auto draw = [&](std::size_t n, double shift) {
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng) + shift;
    return v;
  };
  const auto same = draw(50, 0);
  const KsResult identical = ks_two_sample(same, same);
  const KsResult disjoint = ks_two_sample(draw(30, 0), draw(40, 2));
  bool edges = identical.statistic == 0 && identical.p_value == 1 && disjoint.statistic == 1;

  std::uniform_int_distribution<int> size(1, 20);
  std::uniform_int_distribution<int> level(0, 5);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    for (auto& x : a) x = level(rng) / 5.0;  // coarse levels force ties
    for (auto& x : b) x = t % 2 ? level(rng) / 5.0 : u(rng);
    const KsResult r = ks_two_sample(a, b);
    const double d = oracle::brute_force_ks_d(a, b);
    const double p = static_cast<double>(oracle::ks_p_value(d, a.size(), b.size()));
    mismatches += std::abs(r.statistic - d) > 1e-12 || std::abs(r.p_value - p) > 1e-9;
  }

  int rejected = 0;
  for (int t = 0; t < 1000; ++t) rejected += ks_two_sample(draw(100, 0), draw(100, 0)).p_value < 0.05;
  const double rate = rejected / 1000.0;
  return {edges && mismatches == 0 && rate >= null_rate_lo && rate <= null_rate_hi,
          std::string("edge cases ") + (edges ? "ok" : "wrong") + ", oracle mismatches " +
              std::to_string(mismatches) + "/1000, null rejection rate " + fmt(rate)};
}

// ---------------------------------------------------------------- 10

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "zonn_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args) {
    std::ostringstream err;
    const int code = cli::run(args, sink, err);
    if (code != 0) throw std::runtime_error("command failed: " + err.str());
  };
  run({"--seed", "3", "--out-dir", (root / "model").string(), "train", "--blobs", "1000", "--epochs", "20"});
  const std::string model = (root / "model" / "model.json").string();
  const std::vector<std::vector<std::string>> commands{
      {"train", "--blobs", "1000", "--epochs", "20"},
      {"scan", "--model", model, "--blobs", "50", "--index", "7", "--k", "5000", "--radius", "0.2", "--keep-samples"},
      {"sweep", "--model", model, "--blobs", "50", "--index", "7", "--radii", "0:1:0.1", "--k", "2000"},
      {"adv", "--model", model, "--blobs", "400", "--blobs-seed", "5", "--n", "30", "--k", "500"},
      {"disagree", "--model", model, "--model", model, "--blobs", "300", "--k", "200"},
      {"watermark", "--model", model, "--blobs", "400", "--key-size", "6", "--runs", "5", "--k", "200"},
      {"surface", "--model", model, "--k", "20000"}};

  auto payloads = [&](const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
      std::string text = read_file(entry.path());
      if (entry.path().extension() == ".json") {
        auto j = nlohmann::json::parse(text);
        j.erase("metadata");
        text = j.dump();
      }
      out[entry.path().filename().string()] = text;
    }
    return out;
  };

  int differing = 0;
  std::size_t files = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::map<std::string, std::string> first;
    for (const auto& [tag, workers] : std::vector<std::pair<std::string, std::string>>{{"a", "1"}, {"b", "1"}, {"c", "4"}}) {
      const fs::path dir = root / (std::to_string(c) + tag);
      std::vector<std::string> args{"--seed", "21", "--workers", workers, "--out-dir", dir.string()};
      args.insert(args.end(), commands[c].begin(), commands[c].end());
      run(args);
      const auto p = payloads(dir);
      if (tag == "a") {
        first = p;
        files += p.size();
      } else {
        differing += p != first;
      }
    }
  }
  fs::remove_all(root);
  return {differing == 0, std::to_string(commands.size()) + " commands, " + std::to_string(files) +
                              " output files; reruns differing: " + std::to_string(differing)};
}

// ---------------------------------------------------------------- 11

double performance_seconds = 0;

Outcome performance() {
  const MlpModel model = init_model({784, 128, 10}, Activation::relu, 11);
  std::mt19937_64 rng(11);
  const InputPoint x = oracle::random_inputs(rng, 784, 1);
  const auto start = std::chrono::steady_clock::now();
  const ScanReport r = zonnscan(model, x, {0.025, 10000, 11, 0, false, 1});
  performance_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::isfinite(r.index_value), "index " + fmt(r.index_value)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "entropy unit suite", budget_1, entropy_suite},
      {2, "zero-radius identity", budget_2, zero_radius_identity},
      {3, "quadrature equivalence", budget_3, quadrature_equivalence},
      {4, "sampler containment and uniformity", budget_4, sampler_containment},
      {5, "gradient correctness", budget_5, gradient_check},
      {6, "adversarial distributions", budget_6, adversarial_experiment},
      {7, "corner-case distributions", budget_7, disagreement_experiment},
      {8, "watermark distributions", budget_8, watermark_experiment},
      {9, "KS test validation", budget_9, ks_validation},
      {10, "determinism", budget_10, determinism},
      {11, "scan performance", budget_11, performance},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.id == 11) seconds = performance_seconds;
    const bool in_time = seconds < c.budget;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s criterion %2d (%s): %s; %.2f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), seconds, c.budget, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
