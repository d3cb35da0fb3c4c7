// Copyright 2026 The miplgp Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// miplgp command-line tool: synth, train, predict, eval.
//
// Exit codes: 0 success, 1 other failure, 2 usage or invalid configuration,
// 3 I/O or format error, 4 numerical failure, 5 dimension mismatch.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "miplgp/miplgp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kNumeric = 4, kDimension = 5 };

// Collects output files. Each one is written to a temporary sibling and only
// renamed into place by commit(); anything left uncommitted is deleted.
class Outputs {
 public:
  Outputs() = default;
  Outputs(const Outputs&) = delete;
  Outputs& operator=(const Outputs&) = delete;
  ~Outputs() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [final_path, tmp] : files_) {
      fs::remove(tmp, ec);
      fs::remove(final_path, ec);
    }
  }

  // Returns the temporary path to write `path` through.
  std::string stage(const std::string& path) {
    const std::string tmp = path + ".tmp";
    files_.emplace_back(path, tmp);
    return tmp;
  }

  void commit() {
    for (const auto& [final_path, tmp] : files_) {
      std::error_code ec;
      fs::rename(tmp, final_path, ec);
      if (ec) throw miplgp::IoError("cannot move '" + tmp + "' to '" + final_path + "': " + ec.message());
    }
    committed_ = true;
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
  bool committed_ = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw miplgp::IoError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string file_hash(const std::string& path) {
  const std::string bytes = read_file(path);
  return miplgp::hex64(miplgp::fnv1a(bytes.data(), bytes.size()));
}

template <typename Writer>
void write_text(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw miplgp::IoError("cannot write '" + path + "'");
  writer(out);
  out.flush();
  if (!out) throw miplgp::IoError("write failed for '" + path + "'");
}

// The manifest is written (and committed) before long computations. It holds
// no timestamps so repeated runs produce identical bytes.
void write_manifest(Outputs& outputs, const std::string& out_path, const std::string& command, json config,
                    json inputs, json output_paths) {
  const json manifest = {{"tool", "miplgp"},
                         {"version", miplgp::kVersion},
                         {"command", command},
                         {"config", std::move(config)},
                         {"inputs", std::move(inputs)},
                         {"outputs", std::move(output_paths)}};
  const std::string path = out_path + ".manifest.json";
  write_text(outputs.stage(path), [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Shared training flags.
struct TrainFlags {
  miplgp::TrainConfig cfg;
  double nu = 2.5;
  std::string variant = "full";
  std::string logit_source = "posterior-mean";
  bool no_standardize = false;

  void add(CLI::App* app, bool with_variant) {
    app->add_option("--iters", cfg.iterations, "Training iterations T")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--alpha-eps", cfg.alpha_eps, "Dirichlet prior alpha_eps")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--nu", nu, "Matern smoothness (0.5, 1.5 or 2.5)")->capture_default_str()->check(CLI::IsMember({0.5, 1.5, 2.5}));
    app->add_option("--mc", cfg.mc_samples, "Monte-Carlo samples per instance")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--lr", cfg.learning_rate, "Initial Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    if (with_variant)
      app->add_option("--variant", variant, "full | uniform | naive")->capture_default_str()->check(CLI::IsMember({"full", "uniform", "naive"}));
    app->add_option("--train-lengthscale", cfg.train_lengthscale, "Learn the kernel lengthscale (true/false)")->capture_default_str();
    app->add_option("--train-outputscale", cfg.train_outputscale, "Learn the kernel output scale (true/false)")->capture_default_str();
    app->add_flag("--no-standardize", no_standardize, "Disable feature standardization");
    app->add_option("--logit-source", logit_source, "Classifier output for the alpha update: posterior-mean | mc-theta")
        ->capture_default_str()
        ->check(CLI::IsMember({"posterior-mean", "mc-theta"}));
    app->add_option("--jitter-scale", cfg.jitter_scale, "Diagonal jitter relative to the output scale")->capture_default_str()->check(CLI::NonNegativeNumber);
  }

  miplgp::TrainConfig resolve() const {
    miplgp::TrainConfig c = cfg;
    c.nu = miplgp::smoothness_from_value(nu);
    c.variant = miplgp::variant_from_string(variant);
    c.logit_source = miplgp::logit_source_from_string(logit_source);
    c.standardize = !no_standardize;
    c.validate();
    return c;
  }
};

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw miplgp::ValidationError(std::string("invalid ") + what + " entry '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string base;
  bool blobs = false;
  int classes = 5;
  int dim = 8;
  double separation = 6.0;
  std::string targets;
  std::string reserved;
  miplgp::SynthesisConfig cfg;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  if (a.blobs == !a.base.empty()) throw CLI::ValidationError("synth", "give exactly one of --base or --blobs");
  miplgp::SynthesisConfig cfg = a.cfg;
  json config = {{"source", a.blobs ? "blobs" : "base"}};
  json inputs = json::object();
  miplgp::BasePool pool;
  if (a.blobs) {
    if (!a.targets.empty() || !a.reserved.empty())
      throw CLI::ValidationError("synth", "--targets/--reserved apply to --base only");
    config["blobs"] = {{"classes", a.classes}, {"dim", a.dim}, {"separation", a.separation}};
  } else {
    cfg.target_classes = parse_int_list(a.targets, "--targets");
    cfg.reserved_classes = parse_int_list(a.reserved, "--reserved");
    if (cfg.target_classes.empty()) throw CLI::ValidationError("synth", "--base needs --targets");
    inputs["base"] = {{"path", a.base}, {"fnv1a64", file_hash(a.base)}};
  }
  config["synthesis"] = miplgp::to_json(cfg);
  if (!a.blobs) miplgp::validate(cfg);
  if (!a.blobs && cfg.reserved_classes.empty() && cfg.positive_fraction < 1.0)
    std::cerr << "warning: no reserved classes; every instance comes from the truth class and "
                 "--pos-frac is ignored\n";

  Outputs outputs;
  write_manifest(outputs, a.out, "synth", config, inputs, {{"dataset", a.out}});
  const std::string tmp = outputs.stage(a.out);
  const miplgp::MiplDataset ds = a.blobs ? miplgp::make_blobs(a.classes, a.dim, a.separation, cfg)
                                         : miplgp::synthesize(miplgp::load_base_pool(a.base), cfg);
  miplgp::save_dataset(tmp, ds);
  outputs.commit();
  std::cerr << "wrote " << ds.num_bags() << " bags, " << ds.num_instances() << " instances to " << a.out << '\n';
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::uint64_t split_seed = 0;
  double split_frac = 0.5;
  std::uint64_t seed = 0;
  std::string model_out;
  std::string trace_out;
  TrainFlags flags;
};

int cmd_train(TrainArgs a) {
  miplgp::TrainConfig cfg = a.flags.resolve();
  cfg.seed = a.seed;
  const json config = {{"train", miplgp::to_json(cfg)}, {"split_seed", a.split_seed}, {"split_fraction", a.split_frac}};
  json outs = {{"model", a.model_out}};
  if (!a.trace_out.empty()) outs["trace"] = a.trace_out;

  Outputs outputs;
  const json inputs = {{"data", {{"path", a.data}, {"fnv1a64", file_hash(a.data)}}}};
  const miplgp::MiplDataset ds = miplgp::load_dataset(a.data);
  const miplgp::Split split = miplgp::random_split(ds, a.split_frac, a.split_seed);
  json full_config = config;
  full_config["split_hash"] = miplgp::hex64(split.hash());
  write_manifest(outputs, a.model_out, "train", full_config, inputs, outs);

  const miplgp::TrainResult result = miplgp::train(ds, split, cfg);
  miplgp::save_model(outputs.stage(a.model_out), result.model);
  if (!a.trace_out.empty())
    write_text(outputs.stage(a.trace_out), [&](std::ostream& o) { miplgp::write_trace_csv(o, result.trace); });
  outputs.commit();
  std::cerr << "trained on " << split.train_bag_ids.size() << " bags; final objective "
            << format_double(result.trace.back().nlml) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
};

int cmd_predict(const PredictArgs& a) {
  const json inputs = {{"model", {{"path", a.model}, {"fnv1a64", file_hash(a.model)}}},
                       {"data", {{"path", a.data}, {"fnv1a64", file_hash(a.data)}}}};
  Outputs outputs;
  write_manifest(outputs, a.out, "predict", {{"seed", a.seed}}, inputs, {{"predictions", a.out}});
  const miplgp::TrainedModel model = miplgp::load_model(a.model);
  const miplgp::MiplDataset ds = miplgp::load_dataset(a.data);
  if (ds.num_classes() != model.label_space.num_classes())
    throw miplgp::DimensionError("dataset has " + std::to_string(ds.num_classes()) + " classes, model has " +
                                 std::to_string(model.label_space.num_classes()));
  if (ds.feature_dim() != model.gp.train_x().cols())
    throw miplgp::DimensionError("dataset feature_dim " + std::to_string(ds.feature_dim()) +
                                 " does not match the model's " + std::to_string(model.gp.train_x().cols()));
  const auto preds = miplgp::predict_bags(model, ds.bags(), a.seed);
  const auto width = model.label_space.width();
  write_text(outputs.stage(a.out), [&](std::ostream& o) {
    o << "bag_id,predicted_label,true_label";
    for (Eigen::Index c = 0; c < width; ++c) {
      if (model.label_space.augmented() && c == model.label_space.negative_index())
        o << ",theta_neg";
      else
        o << ",theta_" << c;
    }
    o << '\n';
    for (std::size_t b = 0; b < preds.size(); ++b) {
      const auto& p = preds[b];
      o << p.bag_id << ',' << p.predicted_label << ',';
      if (ds.bags()[b].true_label) o << *ds.bags()[b].true_label;
      for (Eigen::Index c = 0; c < width; ++c) o << ',' << format_double(p.instance_probs(p.winning_instance, c));
      o << '\n';
    }
  });
  outputs.commit();
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string data;
  int runs = 10;
  double split_frac = 0.5;
  std::string algos = "miplgp,miplgp-uniform,miplgp-naive,plknn-mean,plknn-maxmin";
  std::uint64_t seed = 0;
  int knn_k = 10;
  std::string report_out;
  std::string runs_csv;
  TrainFlags flags;
};

int cmd_eval(EvalArgs a) {
  const auto names = parse_name_list(a.algos);
  if (names.empty()) throw CLI::ValidationError("--algos", "no algorithms given");
  for (const auto& n : names) {
    const auto& known = miplgp::known_algorithms();
    if (std::find(known.begin(), known.end(), n) == known.end())
      throw CLI::ValidationError("--algos", "unknown algorithm '" + n + "'");
  }
  miplgp::AlgorithmOptions options;
  options.train = a.flags.resolve();
  options.knn_k = a.knn_k;
  json config = {{"algorithms", names}, {"runs", a.runs}, {"split_fraction", a.split_frac}, {"base_seed", a.seed},
                 {"knn_k", a.knn_k}, {"train", miplgp::to_json(options.train)}};
  json outs = {{"report", a.report_out}};
  if (!a.runs_csv.empty()) outs["runs_csv"] = a.runs_csv;

  Outputs outputs;
  const json inputs = {{"data", {{"path", a.data}, {"fnv1a64", file_hash(a.data)}}}};
  write_manifest(outputs, a.report_out, "eval", config, inputs, outs);
  const miplgp::MiplDataset ds = miplgp::load_dataset(a.data);
  std::vector<miplgp::Algorithm> algorithms;
  for (const auto& n : names) algorithms.push_back(miplgp::make_algorithm(n, options));
  miplgp::EvalReport report = miplgp::run_experiment(ds, algorithms, a.runs, a.split_frac, a.seed);
  report.config = config;
  write_text(outputs.stage(a.report_out), [&](std::ostream& o) { o << miplgp::to_json(report).dump(2) << '\n'; });
  if (!a.runs_csv.empty())
    write_text(outputs.stage(a.runs_csv), [&](std::ostream& o) { miplgp::write_runs_csv(o, report); });
  outputs.commit();
  miplgp::write_summary_table(std::cout, report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  miplgp::configure_threads_from_env();
  CLI::App app{"miplgp: multi-instance partial-label learning with Gaussian processes.\n"
               "Worker threads are capped by the MIPLGP_THREADS environment variable (default 1)."};
  app.set_version_flag("--version", std::string(miplgp::kVersion));
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* s = app.add_subcommand("synth", "Synthesize a MIPL-JSONL dataset from a base pool or Gaussian blobs");
  s->add_option("--base", synth.base, "Base-pool CSV (label,f1,...,fd)");
  s->add_flag("--blobs", synth.blobs, "Use the built-in Gaussian-blob generator");
  s->add_option("--classes", synth.classes, "Blob target classes q")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  s->add_option("--dim", synth.dim, "Blob feature dimension d")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--separation", synth.separation, "Pairwise distance between blob means")->capture_default_str()->check(CLI::NonNegativeNumber);
  s->add_option("--targets", synth.targets, "Comma-separated base-pool target labels");
  s->add_option("--reserved", synth.reserved, "Comma-separated base-pool reserved (negative) labels");
  s->add_option("--bags", synth.cfg.num_bags, "Number of bags m")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--min-ins", synth.cfg.min_instances, "Minimum instances per bag")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--max-ins", synth.cfg.max_instances, "Maximum instances per bag")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--pos-frac", synth.cfg.positive_fraction, "Fraction of ground-truth instances per bag")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  s->add_option("--r", synth.cfg.num_false_positives, "False-positive labels per bag")->capture_default_str()->check(CLI::NonNegativeNumber);
  s->add_option("--seed", synth.cfg.seed, "Random seed")->capture_default_str();
  s->add_option("--out", synth.out, "Output dataset path")->required();

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "Train a model on the train side of a seeded split");
  t->add_option("--data", train.data, "MIPL-JSONL dataset")->required();
  t->add_option("--split-seed", train.split_seed, "Split seed")->capture_default_str();
  t->add_option("--split-frac", train.split_frac, "Training fraction of bags")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  t->add_option("--seed", train.seed, "Training seed")->capture_default_str();
  t->add_option("--model-out", train.model_out, "Output model path")->required();
  t->add_option("--trace-out", train.trace_out, "Optional training trace CSV (iteration,nlml,lr)");
  train.flags.add(t, true);

  PredictArgs predict;
  CLI::App* p = app.add_subcommand("predict", "Score every bag of a dataset");
  p->add_option("--model", predict.model, "Model file")->required();
  p->add_option("--data", predict.data, "MIPL-JSONL dataset")->required();
  p->add_option("--out", predict.out, "Output predictions CSV")->required();
  p->add_option("--seed", predict.seed, "Monte-Carlo seed")->capture_default_str();

  EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "Repeated seeded splits with paired t-tests against the first algorithm");
  e->add_option("--data", eval.data, "MIPL-JSONL dataset with true labels")->required();
  e->add_option("--runs", eval.runs, "Number of splits")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_option("--split-frac", eval.split_frac, "Training fraction of bags")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  e->add_option("--algos", eval.algos, "Comma list from miplgp, miplgp-uniform, miplgp-naive, plknn-mean, plknn-maxmin")->capture_default_str();
  e->add_option("--seed", eval.seed, "Base seed; run i uses seed + i")->capture_default_str();
  e->add_option("--knn-k", eval.knn_k, "PL-kNN neighbours")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_option("--report-out", eval.report_out, "Output report JSON")->required();
  e->add_option("--runs-csv", eval.runs_csv, "Optional per-run accuracy CSV");
  eval.flags.add(e, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_train(train);
    if (*p) return cmd_predict(predict);
    if (*e) return cmd_eval(eval);
  } catch (const CLI::ValidationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const miplgp::ValidationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const miplgp::IoError& err) {
    std::cerr << "I/O error: " << err.what() << '\n';
    return kIo;
  } catch (const miplgp::NumericError& err) {
    std::cerr << "numerical error: " << err.what() << '\n';
    return kNumeric;
  } catch (const miplgp::DimensionError& err) {
    std::cerr << "dimension mismatch: " << err.what() << '\n';
    return kDimension;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
