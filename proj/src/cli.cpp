#include "zonn/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "zonn/error.hpp"
#include "zonn/experiments.hpp"
#include "zonn/io.hpp"
#include "zonn/model_io.hpp"
#include "zonn/report.hpp"

namespace zonn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  unsigned workers = 1;
};

struct DataOptions {
  std::string csv;
  int classes = 0;
  std::string idx_images;
  std::string idx_labels;
  std::size_t limit = 0;
  std::size_t blobs = 0;
  std::string blobs_centers = "0.3,0.3;0.7,0.7";
  double blobs_spread = 0.05;
  std::uint64_t blobs_seed = 0;
};

void add_data_options(CLI::App* app, DataOptions& d) {
  app->add_option("--data-csv", d.csv, "CSV dataset: feature columns then an integer label");
  app->add_option("--classes", d.classes, "Number of classes (CSV and IDX sources)");
  app->add_option("--idx-images", d.idx_images, "IDX image file (MNIST layout)");
  app->add_option("--idx-labels", d.idx_labels, "IDX label file (MNIST layout)");
  app->add_option("--limit", d.limit, "Keep only the first N IDX items (0 = all)");
  app->add_option("--blobs", d.blobs, "Generate N synthetic 2-D Gaussian blob points");
  app->add_option("--blobs-centers", d.blobs_centers, "Blob centers as \"x,y;x,y;...\"");
  app->add_option("--blobs-spread", d.blobs_spread, "Blob standard deviation");
  app->add_option("--blobs-seed", d.blobs_seed, "Seed of the blob generator");
}

std::vector<std::array<double, 2>> parse_centers(const std::string& spec) {
  std::vector<std::array<double, 2>> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ';')) {
    std::array<double, 2> c{};
    char comma = 0;
    std::istringstream is(item);
    if (!(is >> c[0] >> comma >> c[1]) || comma != ',')
      fail(ErrorKind::parameter, "bad blob center '" + item + "', expected x,y");
    out.push_back(c);
  }
  return out;
}

LabeledDataset load_data(const DataOptions& d) {
  const int sources = !d.csv.empty() + !d.idx_images.empty() + (d.blobs > 0);
  require(sources == 1, ErrorKind::parameter,
          "exactly one dataset source is required (--data-csv, --idx-images/--idx-labels or --blobs)");
  if (!d.csv.empty()) {
    require(d.classes >= 2, ErrorKind::parameter, "--classes (>= 2) is required with --data-csv");
    require(fs::exists(d.csv), ErrorKind::io, "dataset '" + d.csv + "' does not exist");
    return load_csv(d.csv, d.classes);
  }
  if (!d.idx_images.empty()) {
    require(!d.idx_labels.empty(), ErrorKind::parameter, "--idx-labels is required with --idx-images");
    std::optional<std::size_t> limit;
    if (d.limit > 0) limit = d.limit;
    return load_idx(d.idx_images, d.idx_labels, limit, d.classes > 0 ? d.classes : 10);
  }
  return make_blobs({d.blobs, parse_centers(d.blobs_centers), d.blobs_spread, d.blobs_seed});
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Files produced by a command. Nothing touches the disk until every
/// result is computed; each file is then replaced atomically.
class Outputs {
 public:
  Outputs(std::string command, const Globals& g) : command_(std::move(command)), dir_(g.out_dir), seed_(g.seed) {}

  void add(const std::string& name, std::string contents) { files_.emplace_back(name, std::move(contents)); }

  /// JSON report; timestamps live only under "metadata".
  void add_report(const std::string& name, json payload) {
    payload["metadata"] = {{"tool", "zonnscan"}, {"command", command_}, {"seed", seed_}, {"generated_at", timestamp()}};
    add(name, payload.dump(2) + "\n");
  }

  void flush(std::ostream& out) const {
    for (const auto& [name, contents] : files_) {
      write_file_atomic(dir_ / name, contents);
      out << "wrote " << (dir_ / name).string() << '\n';
    }
  }

 private:
  std::string command_;
  fs::path dir_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::string>> files_;
};

MlpModel load_model_checked(const std::string& path) {
  require(!path.empty(), ErrorKind::parameter, "--model is required");
  require(fs::exists(path), ErrorKind::io, "model file '" + path + "' does not exist");
  return load_model(path);
}

// Input point for scan/sweep: a CSV row of d features, or a dataset column.
struct InputOptions {
  std::string input_csv;
  long long index = -1;
  DataOptions data;
};

void add_input_options(CLI::App* app, InputOptions& in) {
  app->add_option("--input-csv", in.input_csv, "File whose first row holds the d input features");
  app->add_option("--index", in.index, "Column of the dataset to scan");
  add_data_options(app, in.data);
}

InputPoint load_input(const InputOptions& in, Eigen::Index dim) {
  if (!in.input_csv.empty()) {
    require(in.index < 0, ErrorKind::parameter, "use either --input-csv or --index, not both");
    const std::string text = read_file(in.input_csv);
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    std::vector<double> values;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        fail(ErrorKind::parse, in.input_csv + ":1: '" + cell + "' is not a number");
      }
    }
    // A trailing label column is tolerated.
    if (static_cast<Eigen::Index>(values.size()) == dim + 1) values.pop_back();
    require(static_cast<Eigen::Index>(values.size()) == dim, ErrorKind::shape,
            "input has " + std::to_string(values.size()) + " features, model expects " + std::to_string(dim));
    InputPoint x = Eigen::Map<Vector>(values.data(), dim);
    require(in_unit_cube(x), ErrorKind::domain, "input component outside [0, 1]");
    return x;
  }
  require(in.index >= 0, ErrorKind::parameter, "an input is required (--input-csv or --index with a dataset)");
  const LabeledDataset data = load_data(in.data);
  require(in.index < data.size(), ErrorKind::parameter,
          "--index " + std::to_string(in.index) + " outside dataset of size " + std::to_string(data.size()));
  return data.inputs.col(in.index);
}

std::vector<Eigen::Index> parse_widths(const std::string& spec) {
  std::vector<Eigen::Index> out;
  if (spec.empty()) return out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stol(item));
    } catch (const std::exception&) {
      fail(ErrorKind::parameter, "bad layer width '" + item + "'");
    }
  }
  return out;
}

}  // namespace

std::vector<double> parse_radii(const std::string& spec) {
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(ErrorKind::parameter, "bad radius '" + s + "' in '" + spec + "'");
    }
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    require(parts.size() == 3, ErrorKind::parameter, "radius range must be start:stop:step");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    require(step > 0 && stop >= start, ErrorKind::parameter, "radius range needs step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(std::min(stop, start + static_cast<double>(i) * step));
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(number(item));
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boundary-entropy index (zoNNscan) around classifier inputs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value configuration file");
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--out-dir", g.out_dir, "Directory receiving reports");
  app.add_option("--workers", g.workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train an MLP classifier with mini-batch SGD");
  DataOptions train_data;
  add_data_options(train_cmd, train_data);
  std::string hidden = "16,16", activation = "relu", model_out = "model.json";
  TrainConfig tc{0.1, 50, 32, 0};
  train_cmd->add_option("--hidden", hidden, "Hidden layer widths, comma separated");
  train_cmd->add_option("--activation", activation, "Hidden activation: relu, sigmoid, tanh, identity");
  train_cmd->add_option("--lr", tc.learning_rate, "Learning rate");
  train_cmd->add_option("--epochs", tc.epochs, "Epochs");
  train_cmd->add_option("--batch-size", tc.batch_size, "Mini-batch size");
  train_cmd->add_option("--model-out", model_out, "Model file name inside the output directory");

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "Estimate the index around one input");
  std::string model_path;
  InputOptions scan_input;
  double radius = 0.025;
  std::uint64_t k = 10000;
  bool keep = false;
  scan_cmd->add_option("--model", model_path, "Model file")->required();
  add_input_options(scan_cmd, scan_input);
  scan_cmd->add_option("--radius,-r", radius, "Scan radius r");
  scan_cmd->add_option("--k", k, "Monte Carlo samples");
  scan_cmd->add_flag("--keep-samples", keep, "Also write the per-sample entropies as CSV");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Scan one input over a range of radii");
  InputOptions sweep_input;
  std::string radii = "0:1:0.05";
  std::uint64_t sweep_k = 10000;
  sweep_cmd->add_option("--model", model_path, "Model file")->required();
  add_input_options(sweep_cmd, sweep_input);
  sweep_cmd->add_option("--radii", radii, "start:stop:step or a comma-separated list");
  sweep_cmd->add_option("--k", sweep_k, "Monte Carlo samples per radius");

  // adv
  auto* adv_cmd = app.add_subcommand("adv", "Index distributions of clean inputs versus FGM adversarials");
  DataOptions adv_data;
  AdversarialExperimentConfig ac;
  ac.scan.num_samples = 10000;
  adv_cmd->add_option("--model", model_path, "Model file")->required();
  add_data_options(adv_cmd, adv_data);
  adv_cmd->add_option("--n", ac.n, "Number of source inputs");
  adv_cmd->add_option("--epsilon", ac.attack.epsilon, "FGM step size");
  adv_cmd->add_option("--radius,-r", ac.scan.radius, "Scan radius r");
  adv_cmd->add_option("--k", ac.scan.num_samples, "Monte Carlo samples per scan");

  // disagree
  auto* dis_cmd = app.add_subcommand("disagree", "Index distributions of corner cases versus random inputs");
  DataOptions dis_data;
  std::vector<std::string> model_paths;
  DisagreementExperimentConfig dc;
  dc.scan.num_samples = 10000;
  dis_cmd->add_option("--model", model_paths, "Model files (two or more)")->required();
  add_data_options(dis_cmd, dis_data);
  dis_cmd->add_option("--random-inputs", dc.random_inputs, "Number of random reference inputs");
  dis_cmd->add_option("--min-corner-cases", dc.min_corner_cases, "Fewest corner cases for which a test is run");
  dis_cmd->add_option("--radius,-r", dc.scan.radius, "Scan radius r");
  dis_cmd->add_option("--k", dc.scan.num_samples, "Monte Carlo samples per scan");

  // watermark
  auto* wm_cmd = app.add_subcommand("watermark", "Embed a watermark key and compare index distributions");
  DataOptions wm_data;
  WatermarkExperimentConfig wc;
  wc.finetune = {0.1, 2000, 2, 0};
  wm_cmd->add_option("--model", model_path, "Model file")->required();
  add_data_options(wm_cmd, wm_data);
  wm_cmd->add_option("--key-size", wc.key_size, "Key inputs (half adversarial)");
  wm_cmd->add_option("--epsilon", wc.attack.epsilon, "FGM step size for the adversarial half");
  wm_cmd->add_option("--ft-lr", wc.finetune.learning_rate, "Finetuning learning rate");
  wm_cmd->add_option("--ft-epochs", wc.finetune.epochs, "Maximum finetuning epochs");
  wm_cmd->add_option("--ft-batch-size", wc.finetune.batch_size, "Finetuning batch size");
  wm_cmd->add_option("--target-accuracy", wc.target_accuracy, "Key accuracy that ends finetuning");
  wm_cmd->add_option("--runs", wc.runs, "Index estimates per key input");
  wm_cmd->add_option("--radius,-r", wc.scan.radius, "Scan radius r");
  wm_cmd->add_option("--k", wc.scan.num_samples, "Monte Carlo samples per scan");

  // surface
  auto* surf_cmd = app.add_subcommand("surface", "Share of the input cube assigned to each class");
  std::uint64_t surface_k = 10000;
  surf_cmd->add_option("--model", model_path, "Model file")->required();
  surf_cmd->add_option("--k", surface_k, "Monte Carlo samples");

  // ks
  auto* ks_cmd = app.add_subcommand("ks", "Two-sample Kolmogorov-Smirnov test on two value files");
  std::string ks_a, ks_b;
  ks_cmd->add_option("a", ks_a, "First sample, one value per line")->required();
  ks_cmd->add_option("b", ks_b, "Second sample, one value per line")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "zonnscan: " << e.what() << '\n';
    return 2;
  }

  try {
    if (train_cmd->parsed()) {
      Outputs files("train", g);
      const LabeledDataset data = load_data(train_data);
      std::vector<Eigen::Index> widths{data.dim()};
      for (auto w : parse_widths(hidden)) widths.push_back(w);
      widths.push_back(data.num_classes);
      tc.seed = g.seed;
      const TrainResult result = train(init_model(widths, parse_activation(activation), g.seed), data, tc);
      files.add(model_out, model_to_json(result.model).dump() + "\n");
      files.add("history.csv", history_csv(result.history));
      files.add_report("train.json", {{"final_loss", result.history.back().loss},
                                      {"train_accuracy", result.history.back().accuracy},
                                      {"epochs", tc.epochs},
                                      {"learning_rate", tc.learning_rate},
                                      {"batch_size", tc.batch_size},
                                      {"widths", widths}});
      files.flush(out);
      out << "train accuracy " << result.history.back().accuracy << '\n';
    } else if (scan_cmd->parsed()) {
      Outputs files("scan", g);
      const MlpModel model = load_model_checked(model_path);
      const InputPoint x = load_input(scan_input, model.input_dim());
      const ScanReport report = zonnscan(model, x, ScanConfig{radius, k, g.seed, 0, keep, g.workers});
      files.add_report("scan.json", to_json(report));
      if (keep) files.add("entropies.csv", values_csv(report.entropy_samples));
      files.flush(out);
      out << "index " << report.index_value << '\n';
    } else if (sweep_cmd->parsed()) {
      Outputs files("sweep", g);
      const MlpModel model = load_model_checked(model_path);
      const InputPoint x = load_input(sweep_input, model.input_dim());
      const auto reports = radius_sweep(model, x, parse_radii(radii), sweep_k, g.seed, g.workers);
      files.add("sweep.csv", sweep_csv(reports));
      files.flush(out);
    } else if (adv_cmd->parsed()) {
      Outputs files("adv", g);
      const MlpModel model = load_model_checked(model_path);
      const LabeledDataset data = load_data(adv_data);
      ac.attack.seed = g.seed;
      ac.scan.seed = g.seed;
      ac.scan.workers = g.workers;
      const auto r = run_adversarial_experiment(model, data, ac);
      files.add_report("adv.json", {{"n", ac.n},
                                    {"epsilon", ac.attack.epsilon},
                                    {"radius", ac.scan.radius},
                                    {"num_samples", ac.scan.num_samples},
                                    {"attack_success_rate", r.attack_success_rate},
                                    {"clean", to_json(r.clean)},
                                    {"adversarial", to_json(r.adversarial)},
                                    {"ks", to_json(r.ks)}});
      files.add("adv_clean.csv", values_csv(r.clean_values));
      files.add("adv_adversarial.csv", values_csv(r.adversarial_values));
      files.add("adv_pairs.csv", adversarial_set_csv(r.pairs));
      files.flush(out);
      out << "mean clean " << r.clean.mean << ", adversarial " << r.adversarial.mean << ", KS p " << r.ks.p_value
          << '\n';
    } else if (dis_cmd->parsed()) {
      Outputs files("disagree", g);
      require(model_paths.size() >= 2, ErrorKind::parameter, "disagree needs at least two --model files");
      std::vector<MlpModel> models;
      for (const auto& p : model_paths) models.push_back(load_model_checked(p));
      const LabeledDataset data = load_data(dis_data);
      dc.scan.seed = g.seed;
      dc.scan.workers = g.workers;
      const auto r = run_disagreement_experiment(models, data, dc);
      json per_model = json::array();
      for (std::size_t m = 0; m < r.per_model.size(); ++m) {
        const auto& s = r.per_model[m];
        per_model.push_back({{"model", model_paths[m]},
                             {"corner", to_json(s.corner)},
                             {"random", to_json(s.random)},
                             {"ks", to_json(s.ks)}});
        files.add("disagree_corner_m" + std::to_string(m) + ".csv", values_csv(s.corner_values));
        files.add("disagree_random_m" + std::to_string(m) + ".csv", values_csv(s.random_values));
      }
      json report = {{"corner_cases", r.corner_cases.size()},
                     {"corner_indices", r.corner_cases},
                     {"random_inputs", r.random_indices.size()},
                     {"radius", dc.scan.radius},
                     {"num_samples", dc.scan.num_samples},
                     {"tested", r.tested},
                     {"per_model", per_model}};
      if (!r.tested) report["diagnostic"] = r.diagnostic;
      files.add_report("disagree.json", report);
      files.flush(out);
      if (r.tested)
        out << r.corner_cases.size() << " corner cases\n";
      else
        out << r.diagnostic << '\n';
    } else if (wm_cmd->parsed()) {
      Outputs files("watermark", g);
      const MlpModel model = load_model_checked(model_path);
      const LabeledDataset data = load_data(wm_data);
      wc.attack.seed = g.seed;
      wc.finetune.seed = g.seed;
      wc.scan.seed = g.seed;
      wc.scan.workers = g.workers;
      const auto r = run_watermark_experiment(model, data, wc);
      std::ostringstream key_csv;
      key_csv << "source_index,target_label,adversarial\n";
      for (std::size_t i = 0; i < r.key.source_indices.size(); ++i)
        key_csv << r.key.source_indices[i] << ',' << r.key.key.target_labels[i] << ',' << int(r.key.adversarial[i])
                << '\n';
      files.add_report("watermark.json", {{"key_size", wc.key_size},
                                          {"epsilon", wc.attack.epsilon},
                                          {"runs", wc.runs},
                                          {"radius", wc.scan.radius},
                                          {"num_samples", wc.scan.num_samples},
                                          {"key_accuracy_before", r.key_accuracy_before},
                                          {"key_accuracy_after", r.finetune.key_accuracy},
                                          {"finetune_epochs", r.finetune.epochs_run},
                                          {"reached_target", r.finetune.reached_target},
                                          {"before", to_json(r.before)},
                                          {"after", to_json(r.after)},
                                          {"ks", to_json(r.ks)}});
      files.add("watermark_before.csv", values_csv(r.before_values));
      files.add("watermark_after.csv", values_csv(r.after_values));
      files.add("watermark_key.csv", key_csv.str());
      files.add("watermarked_model.json", model_to_json(r.finetune.model).dump() + "\n");
      files.flush(out);
      out << "key accuracy " << r.finetune.key_accuracy << ", KS p " << r.ks.p_value << '\n';
    } else if (surf_cmd->parsed()) {
      Outputs files("surface", g);
      const MlpModel model = load_model_checked(model_path);
      const Vector shares = class_surface(model, surface_k, g.seed, g.workers);
      files.add_report("surface.json", {{"num_samples", surface_k}, {"shares", to_json(shares)}});
      files.flush(out);
    } else if (ks_cmd->parsed()) {
      Outputs files("ks", g);
      const auto a = read_values(read_file(ks_a), ks_a);
      const auto b = read_values(read_file(ks_b), ks_b);
      const KsResult r = ks_two_sample(a, b);
      files.add_report("ks.json", to_json(r));
      files.flush(out);
      out << "D " << r.statistic << ", p " << r.p_value << '\n';
    }
  } catch (const Error& e) {
    err << "zonnscan: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "zonnscan: I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "zonnscan: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace zonn::cli
