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

#pragma once

// Repeated-split evaluation: accuracy per run, mean and sample std, and a
// paired two-tailed t-test of every algorithm against the first one.

#include <boost/math/distributions/students_t.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "miplgp/baselines.hpp"
#include "miplgp/data_model.hpp"
#include "miplgp/errors.hpp"
#include "miplgp/predictor.hpp"
#include "miplgp/trainer.hpp"

namespace miplgp {

inline double accuracy(const std::vector<int>& predictions, const std::vector<std::optional<int>>& truths) {
  if (predictions.size() != truths.size()) throw ValidationError("prediction and truth counts differ");
  if (predictions.empty()) throw ValidationError("accuracy of an empty prediction set is undefined");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!truths[i]) throw ValidationError("accuracy needs every true label");
    hits += predictions[i] == *truths[i];
  }
  return static_cast<double>(hits) / static_cast<double>(truths.size());
}

// Two-tailed 0.05 critical values of Student's t for df = 1..30.
inline constexpr std::array<double, 30> kTCritical05 = {
    12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281,
    2.2010,  2.1788, 2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860,
    2.0796,  2.0739, 2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423};

inline double t_critical_05(int df) {
  if (df < 1) throw ValidationError("t-test needs df >= 1");
  if (df <= static_cast<int>(kTCritical05.size())) return kTCritical05[static_cast<std::size_t>(df - 1)];
  return boost::math::quantile(boost::math::complement(boost::math::students_t(df), 0.025));
}

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double critical = 0.0;
  bool significant = false;
};

// Differences d = a - b. A zero-variance difference is significant iff its
// mean is non-zero; t is then +/-infinity (0 when the mean is also 0).
inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("paired t-test needs equal-length samples");
  if (a.size() < 2) throw ValidationError("paired t-test needs at least 2 paired runs");
  const auto n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  TTestResult r;
  r.df = static_cast<int>(a.size()) - 1;
  r.critical = t_critical_05(r.df);
  if (sd == 0.0) {
    r.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
    r.significant = mean != 0.0;
  } else {
    r.t = mean * std::sqrt(n) / sd;
    r.significant = std::abs(r.t) > r.critical;
  }
  return r;
}

// Trains on the first dataset and returns one predicted label per bag of the
// second.
using FitPredict = std::function<std::vector<int>(const MiplDataset& train, const MiplDataset& test,
                                                  std::uint64_t seed)>;

struct Algorithm {
  std::string name;
  FitPredict fit_predict;
};

struct AlgorithmOptions {
  TrainConfig train;  // variant is overridden per algorithm name
  int knn_k = 10;
};

inline const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names = {"miplgp", "miplgp-uniform", "miplgp-naive", "plknn-mean",
                                                 "plknn-maxmin"};
  return names;
}

inline Algorithm make_algorithm(const std::string& name, const AlgorithmOptions& options) {
  auto gp = [&](Variant v) {
    TrainConfig cfg = options.train;
    cfg.variant = v;
    return Algorithm{name, [cfg](const MiplDataset& tr, const MiplDataset& te, std::uint64_t seed) {
                       TrainConfig run_cfg = cfg;
                       run_cfg.seed = seed;
                       const TrainResult result = train(tr, run_cfg);
                       std::vector<int> labels;
                       for (const auto& p : predict_bags(result.model, te.bags(), seed))
                         labels.push_back(p.predicted_label);
                       return labels;
                     }};
  };
  auto knn = [&](bool maxmin) {
    const int k = options.knn_k;
    return Algorithm{name, [k, maxmin](const MiplDataset& tr, const MiplDataset& te, std::uint64_t) {
                       const auto etr = maxmin ? embed_maxmin(tr) : embed_mean(tr);
                       const auto ete = maxmin ? embed_maxmin(te) : embed_mean(te);
                       return plknn_fit_predict(etr, ete, std::min<int>(k, static_cast<int>(etr.size())));
                     }};
  };
  if (name == "miplgp") return gp(Variant::kFull);
  if (name == "miplgp-uniform") return gp(Variant::kUniform);
  if (name == "miplgp-naive") return gp(Variant::kNaive);
  if (name == "plknn-mean") return knn(false);
  if (name == "plknn-maxmin") return knn(true);
  throw ValidationError("unknown algorithm '" + name + "'");
}

struct AlgorithmSummary {
  std::string name;
  std::vector<double> accuracies;  // one per run
  double mean = 0.0;
  double stddev = 0.0;             // sample std, 0 when undefined
  bool stddev_defined = false;
};

struct PairwiseVerdict {
  std::string reference;
  std::string other;
  TTestResult test;
};

struct EvalReport {
  nlohmann::json config;
  std::vector<std::uint64_t> split_seeds;
  std::vector<std::string> split_hashes;
  std::vector<AlgorithmSummary> algorithms;
  std::vector<PairwiseVerdict> pairwise;
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void summarize(AlgorithmSummary& s) {
  const auto n = static_cast<double>(s.accuracies.size());
  s.mean = 0.0;
  for (double a : s.accuracies) s.mean += a;
  s.mean /= n;
  s.stddev_defined = s.accuracies.size() >= 2;
  s.stddev = 0.0;
  if (s.stddev_defined) {
    for (double a : s.accuracies) s.stddev += (a - s.mean) * (a - s.mean);
    s.stddev = std::sqrt(s.stddev / (n - 1.0));
  }
}

// Run i splits with seed base_seed + i; every algorithm sees the same split
// and is seeded with that split seed.
inline EvalReport run_experiment(const MiplDataset& dataset, const std::vector<Algorithm>& algorithms, int runs,
                                 double fraction, std::uint64_t base_seed) {
  if (runs < 1) throw ValidationError("runs must be >= 1");
  if (algorithms.empty()) throw ValidationError("no algorithms to evaluate");
  if (!dataset.has_true_labels()) throw ValidationError("evaluation needs true labels on every bag");
  EvalReport report;
  report.config = {{"runs", runs}, {"split_fraction", fraction}, {"base_seed", base_seed}};
  for (const auto& a : algorithms) report.algorithms.push_back({a.name, {}, 0.0, 0.0, false});
  for (int run = 0; run < runs; ++run) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(run);
    const Split split = random_split(dataset, fraction, seed);
    const MiplDataset train_set = dataset.subset(split.train_bag_ids);
    const MiplDataset test_set = dataset.subset(split.test_bag_ids);
    std::vector<std::optional<int>> truths;
    for (const auto& b : test_set.bags()) truths.push_back(b.true_label);
    report.split_seeds.push_back(seed);
    report.split_hashes.push_back(hex64(split.hash()));
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      const auto preds = algorithms[a].fit_predict(train_set, test_set, seed);
      report.algorithms[a].accuracies.push_back(accuracy(preds, truths));
    }
  }
  for (auto& s : report.algorithms) summarize(s);
  if (runs >= 2) {
    for (std::size_t a = 1; a < algorithms.size(); ++a) {
      report.pairwise.push_back({report.algorithms[0].name, report.algorithms[a].name,
                                 paired_t_test(report.algorithms[0].accuracies, report.algorithms[a].accuracies)});
    }
  }
  return report;
}

namespace detail {
inline nlohmann::json t_value_to_json(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}
inline double t_value_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                          : -std::numeric_limits<double>::infinity();
  return j.get<double>();
}
}  // namespace detail

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json algos = nlohmann::json::array();
  for (const auto& s : r.algorithms)
    algos.push_back({{"name", s.name}, {"accuracies", s.accuracies}, {"mean", s.mean},
                     {"std", s.stddev}, {"std_defined", s.stddev_defined}});
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairwise)
    pairs.push_back({{"reference", p.reference}, {"other", p.other}, {"t", detail::t_value_to_json(p.test.t)},
                     {"df", p.test.df}, {"critical", p.test.critical}, {"significant", p.test.significant}});
  return {{"format", "MIPLGP-REPORT"}, {"version", 1}, {"config", r.config}, {"split_seeds", r.split_seeds},
          {"split_hashes", r.split_hashes}, {"algorithms", algos}, {"pairwise", pairs}};
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.config = j.at("config");
  r.split_seeds = j.at("split_seeds").get<std::vector<std::uint64_t>>();
  r.split_hashes = j.at("split_hashes").get<std::vector<std::string>>();
  for (const auto& a : j.at("algorithms"))
    r.algorithms.push_back({a.at("name").get<std::string>(), a.at("accuracies").get<std::vector<double>>(),
                            a.at("mean").get<double>(), a.at("std").get<double>(), a.at("std_defined").get<bool>()});
  for (const auto& p : j.at("pairwise"))
    r.pairwise.push_back({p.at("reference").get<std::string>(), p.at("other").get<std::string>(),
                          TTestResult{detail::t_value_from_json(p.at("t")), p.at("df").get<int>(),
                                      p.at("critical").get<double>(), p.at("significant").get<bool>()}});
  return r;
}

// "mean±std" with three decimals, as in accuracy tables.
inline std::string format_mean_std(const AlgorithmSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f±%.3f", s.mean, s.stddev);
  return buf;
}

inline void write_summary_table(std::ostream& out, const EvalReport& r) {
  std::size_t width = 9;
  for (const auto& s : r.algorithms) width = std::max(width, s.name.size());
  out << std::left << std::setw(static_cast<int>(width) + 2) << "algorithm" << "accuracy" << '\n';
  for (const auto& s : r.algorithms) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << s.name << format_mean_std(s);
    if (!s.stddev_defined) out << "  (single run, std undefined)";
    out << '\n';
  }
  for (const auto& p : r.pairwise) {
    std::ostringstream t;
    t << std::setprecision(4) << p.test.t;
    out << p.reference << " vs " << p.other << ": t=" << t.str() << " (df=" << p.test.df
        << ", critical=" << p.test.critical << ") " << (p.test.significant ? "significant" : "not significant")
        << '\n';
  }
}

// Flat per-run CSV: run,seed,split_hash,<algorithm accuracies...>
inline void write_runs_csv(std::ostream& out, const EvalReport& r) {
  out << "run,seed,split_hash";
  for (const auto& s : r.algorithms) out << ',' << s.name;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < r.split_seeds.size(); ++i) {
    out << i << ',' << r.split_seeds[i] << ',' << r.split_hashes[i];
    for (const auto& s : r.algorithms) out << ',' << s.accuracies[i];
    out << '\n';
  }
}

}  // namespace miplgp
