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


// Acceptance checks. Prints one line per criterion and exits non-zero if any
// criterion fails. The miplgp binary is taken from MIPLGP_CLI_PATH, falling
// back to the path compiled in by the build.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "miplgp/miplgp.hpp"

namespace fs = std::filesystem;
using namespace miplgp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Runs a criterion body; an exception counts as a failure.
void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

// Gamma(alpha, 1) mean and variance recovered from the LogNormal targets.
void criterion1() {
  const auto start = Clock::now();
  std::vector<double> alphas = {1e-4, 1e-3, 1e-2, 0.1, 0.5, 1, 2, 10, 100};
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> log_unif(std::log(1e-4), std::log(100.0));
  for (int i = 0; i < 1000; ++i) alphas.push_back(std::exp(log_unif(gen)));
  AlphaMatrix a{Eigen::Map<Matrix>(alphas.data(), static_cast<Eigen::Index>(alphas.size()), 1)};
  const TransformedTargets t = transform_targets(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double y = t.y_dot(static_cast<Eigen::Index>(i), 0);
    const double s = t.sigma_dot(static_cast<Eigen::Index>(i), 0);
    const double mean = std::exp(y + s / 2);
    const double var = std::expm1(s) * std::exp(2 * y + s);
    worst = std::max({worst, std::abs(mean - alphas[i]) / alphas[i], std::abs(var - alphas[i]) / alphas[i]});
  }
  const double secs = seconds_since(start);
  report(1, worst <= 1e-10 && secs < 1.0,
         "max rel err " + fmt("%.3g", worst) + " (<= 1e-10), " + fmt("%.3f", secs) + " s (< 1 s)");
}

void criterion2() {
  const auto start = Clock::now();
  Vector alpha(3);
  alpha << 2, 3, 5;
  const Matrix draws = sample_dirichlet(alpha, 100000, 2024);
  const RowVector mean = draws.colwise().mean();
  RowVector expected(3);
  expected << 0.2, 0.3, 0.5;
  const double mean_err = (mean - expected).cwiseAbs().maxCoeff();
  const double sum_err = (draws.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double secs = seconds_since(start);
  report(2, mean_err <= 0.01 && sum_err <= 1e-12 && secs < 5.0,
         "mean err " + fmt("%.4f", mean_err) + " (<= 0.01), sum err " + fmt("%.2g", sum_err) + " (<= 1e-12), " +
             fmt("%.3f", secs) + " s (< 5 s)");
}

void criterion3() {
  const auto start = Clock::now();
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> noise(0.1, 2.0);
  const Eigen::Index n = 20, d = 3, w = 4;
  Matrix x(n, d), y(n, w), s(n, w);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(gen);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = normal(gen);
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = noise(gen);
  KernelParams p;
  p.log_lengthscale = std::log(1.3);
  p.log_outputscale = std::log(0.8);
  const TransformedTargets targets{y, s};
  const Vector g = nlml_grad(fit(x, targets, p));
  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    Vector step = Vector::Zero(g.size());
    step(k) = h;
    KernelParams up = p, down = p;
    up.add_to_trainable(step);
    down.add_to_trainable(-step);
    const double fd = (nlml(fit(x, targets, up)) - nlml(fit(x, targets, down))) / (2 * h);
    worst = std::max(worst, std::abs(g(k) - fd) / std::abs(fd));
  }
  const double secs = seconds_since(start);
  report(3, g.size() == 2 && worst < 1e-4 && secs < 1.0,
         "max rel err " + fmt("%.3g", worst) + " over " + std::to_string(g.size()) + " params (< 1e-4), " +
             fmt("%.3f", secs) + " s (< 1 s)");
}

double bessel_matern(double nu, double r, double ell) {
  const double t = std::sqrt(2 * nu) * r / ell;
  return std::pow(2.0, 1 - nu) / std::tgamma(nu) * std::pow(t, nu) * std::cyl_bessel_k(nu, t);
}

void criterion4() {
  double worst = 0.0;
  std::string values;
  for (Smoothness nu : {Smoothness::kHalf, Smoothness::kFiveHalves}) {
    KernelParams p;
    p.nu = nu;
    Matrix a(1, 1), b(1, 1);
    a << 0.0;
    b << 1.0;
    const double closed = cross_gram(a, b, p)(0, 0);
    worst = std::max(worst, std::abs(closed - bessel_matern(smoothness_value(nu), 1.0, 1.0)));
    values += fmt(" %.6f", closed);
  }
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  Matrix x(100, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(gen);
  Matrix k = gram(x, KernelParams{});
  k.diagonal().array() += 1e-6;
  const bool factorizes = Eigen::LLT<Matrix>(k).info() == Eigen::Success;
  report(4, worst <= 1e-10 && factorizes,
         "values" + values + ", max err vs Bessel " + fmt("%.2g", worst) + " (<= 1e-10), gram+1e-6 I " +
             (factorizes ? "factorizes" : "does not factorize"));
}

// The desk-scale blob dataset.
MiplDataset blobs(int r) {
  SynthesisConfig cfg;
  cfg.num_bags = 100;
  cfg.min_instances = 5;
  cfg.max_instances = 15;
  cfg.positive_fraction = 0.2;
  cfg.num_false_positives = r;
  cfg.seed = 42;
  return make_blobs(5, 8, 6.0, cfg);
}

constexpr int kRuns = 5;
constexpr std::uint64_t kBaseSeed = 0;

TrainConfig train_config() {
  TrainConfig cfg;
  cfg.iterations = 100;
  return cfg;
}

EvalReport evaluate(const MiplDataset& ds, const std::vector<std::string>& names) {
  AlgorithmOptions options;
  options.train = train_config();
  std::vector<Algorithm> algos;
  for (const auto& n : names) algos.push_back(make_algorithm(n, options));
  return run_experiment(ds, algos, kRuns, 0.5, kBaseSeed);
}

double mean_of(const EvalReport& r, const std::string& name) {
  for (const auto& a : r.algorithms)
    if (a.name == name) return a.mean;
  throw std::runtime_error("missing algorithm " + name);
}

const PairwiseVerdict& verdict(const EvalReport& r, const std::string& other) {
  for (const auto& v : r.pairwise)
    if (v.other == other) return v;
  throw std::runtime_error("missing comparison " + other);
}

void criteria5to7() {
  const MiplDataset r1 = blobs(1);
  const auto start = Clock::now();
  const EvalReport full = evaluate(r1, {"miplgp"});
  const double secs = seconds_since(start);
  const double acc = mean_of(full, "miplgp");
  report(5, acc >= 0.85 && secs < 300.0,
         "miplgp-full mean accuracy " + fmt("%.3f", acc) + " (>= 0.85), " + fmt("%.1f", secs) + " s (< 300 s)");

  const EvalReport rest = evaluate(r1, {"miplgp", "miplgp-uniform", "miplgp-naive", "plknn-mean", "plknn-maxmin"});
  const EvalReport r3 = evaluate(blobs(3), {"miplgp", "miplgp-uniform", "miplgp-naive"});
  const double f1 = mean_of(rest, "miplgp"), u1 = mean_of(rest, "miplgp-uniform"), n1 = mean_of(rest, "miplgp-naive");
  const double f3 = mean_of(r3, "miplgp"), u3 = mean_of(r3, "miplgp-uniform"), n3 = mean_of(r3, "miplgp-naive");
  report(6, f1 >= u1 && u1 >= n1 && f3 >= u3 && u3 >= n3 && f3 - u3 > 0.0,
         "r=1 full/uniform/naive " + fmt("%.3f", f1) + fmt("/%.3f", u1) + fmt("/%.3f", n1) +
             ", r=3 " + fmt("%.3f", f3) + fmt("/%.3f", u3) + fmt("/%.3f", n3) +
             " (full >= uniform >= naive, r=3 full > uniform)");

  const double km = mean_of(rest, "plknn-mean"), kx = mean_of(rest, "plknn-maxmin");
  const TTestResult& t = verdict(rest, "plknn-mean").test;
  report(7, f1 - km >= 0.05 && f1 - kx >= 0.05 && t.df == 4 && t.t > 2.7764,
         "full " + fmt("%.3f", f1) + " vs plknn-mean " + fmt("%.3f", km) + ", plknn-maxmin " + fmt("%.3f", kx) +
             " (gaps >= 0.05), t vs plknn-mean " + fmt("%.3f", t.t) + " (> 2.7764, df 4)");
}

void criterion8() {
  const double acc = mean_of(evaluate(blobs(0), {"miplgp"}), "miplgp");
  report(8, acc >= 0.95, "r=0 miplgp-full mean accuracy " + fmt("%.3f", acc) + " (>= 0.95)");
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing output " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

const char* cli_path() {
  if (const char* env = std::getenv("MIPLGP_CLI_PATH")) return env;
  return MIPLGP_CLI_PATH;
}

int run_cli(const std::string& args) {
  const char* cli = cli_path();
  const std::string cmd = std::string("\"") + cli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion9() {
  const fs::path dir = fs::temp_directory_path() / "miplgp_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string() + "/";
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"synth --blobs --classes 3 --dim 4 --separation 6 --bags 30 --r 1 --seed 7 --out " + d + "data.jsonl",
       {"data.jsonl", "data.jsonl.manifest.json"}},
      {"train --data " + d + "data.jsonl --iters 5 --mc 64 --seed 3 --split-seed 1 --model-out " + d +
           "model.bin --trace-out " + d + "trace.csv",
       {"model.bin", "model.bin.manifest.json", "trace.csv"}},
      {"eval --data " + d + "data.jsonl --runs 2 --iters 5 --mc 64 --seed 5 --report-out " + d +
           "report.json --runs-csv " + d + "runs.csv",
       {"report.json", "report.json.manifest.json", "runs.csv"}},
  };
  std::vector<std::string> differing;
  for (const auto& [args, files] : commands) {
    if (run_cli(args) != 0) throw std::runtime_error("command failed: miplgp " + args);
    std::vector<std::string> first;
    for (const auto& f : files) first.push_back(read_bytes(dir / f));
    if (run_cli(args) != 0) throw std::runtime_error("command failed: miplgp " + args);
    for (std::size_t i = 0; i < files.size(); ++i)
      if (read_bytes(dir / files[i]) != first[i]) differing.push_back(files[i]);
  }
  fs::remove_all(dir);
  std::string detail = "synth/train/eval outputs ";
  if (differing.empty()) {
    detail += "byte-identical across two invocations";
  } else {
    detail += "differ:";
    for (const auto& f : differing) detail += " " + f;
  }
  report(9, differing.empty(), detail);
}

}  // namespace

int main() {
  guarded(1, criterion1);
  guarded(2, criterion2);
  guarded(3, criterion3);
  guarded(4, criterion4);
  guarded(5, criteria5to7);
  guarded(8, criterion8);
  guarded(9, criterion9);
  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
