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


#include "miplgp/evaluation.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <sstream>

#include "miplgp/synthesis.hpp"

namespace miplgp {
namespace {

TEST(AccuracyTest, Examples) {
  EXPECT_EQ(accuracy({0, 1, 2}, {0, 1, 2}), 1.0);
  EXPECT_EQ(accuracy({1, 2, 0}, {0, 1, 2}), 0.0);
  EXPECT_EQ(accuracy({0, 1, 2, 3}, {0, 1, 2, 0}), 0.75);
  EXPECT_THROW(accuracy({0}, {std::nullopt}), ValidationError);
  EXPECT_THROW(accuracy({0, 1}, {0}), ValidationError);
  EXPECT_THROW(accuracy({}, {}), ValidationError);
}

TEST(TCriticalTest, TableMatchesStudentQuantiles) {
  for (int df = 1; df <= 30; ++df) {
    const double exact = boost::math::quantile(boost::math::complement(boost::math::students_t(df), 0.025));
    EXPECT_NEAR(t_critical_05(df), exact, 5e-4) << "df " << df;
  }
  EXPECT_DOUBLE_EQ(t_critical_05(9), 2.2622);
  EXPECT_DOUBLE_EQ(t_critical_05(4), 2.7764);
  EXPECT_NEAR(t_critical_05(120), 1.9799, 1e-4);
  EXPECT_THROW(t_critical_05(0), ValidationError);
}

TEST(PairedTTest, IdenticalRuns) {
  const auto r = paired_t_test({0.5, 0.6, 0.7}, {0.5, 0.6, 0.7});
  EXPECT_EQ(r.t, 0.0);
  EXPECT_FALSE(r.significant);
  EXPECT_EQ(r.df, 2);
}

TEST(PairedTTest, ZeroVarianceDifferences) {
  const auto up = paired_t_test(std::vector<double>(10, 2.0), std::vector<double>(10, 1.0));
  EXPECT_TRUE(up.significant);
  EXPECT_EQ(up.t, std::numeric_limits<double>::infinity());
  const auto down = paired_t_test(std::vector<double>(4, 0.0), std::vector<double>(4, 1.0));
  EXPECT_TRUE(down.significant);
  EXPECT_EQ(down.t, -std::numeric_limits<double>::infinity());
}

TEST(PairedTTest, WorkedExample) {
  const std::vector<double> d = {0.05, 0.06, 0.04, 0.05, 0.05, 0.06, 0.04, 0.05, 0.06, 0.04};
  std::vector<double> a, b;
  for (double v : d) {
    a.push_back(0.5 + v);
    b.push_back(0.5);
  }
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= 10.0;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double expected = mean / (std::sqrt(ss / 9.0) / std::sqrt(10.0));
  const auto r = paired_t_test(a, b);
  EXPECT_NEAR(r.t, expected, 1e-6);
  EXPECT_NEAR(r.t, 19.36, 0.01);
  EXPECT_TRUE(r.significant);
  EXPECT_DOUBLE_EQ(r.critical, 2.2622);
}

TEST(PairedTTest, SymmetryAndErrors) {
  const std::vector<double> a = {0.7, 0.72, 0.69, 0.75}, b = {0.66, 0.7, 0.7, 0.71};
  const auto ab = paired_t_test(a, b), ba = paired_t_test(b, a);
  EXPECT_DOUBLE_EQ(ab.t, -ba.t);
  EXPECT_EQ(ab.significant, ba.significant);
  EXPECT_THROW(paired_t_test({1.0}, {1.0}), ValidationError);
  EXPECT_THROW(paired_t_test({1.0, 2.0}, {1.0}), ValidationError);
}

MiplDataset blobs() {
  SynthesisConfig cfg;
  cfg.num_bags = 30;
  cfg.seed = 13;
  return make_blobs(3, 4, 6.0, cfg);
}

AlgorithmOptions quick_options() {
  AlgorithmOptions o;
  o.train.iterations = 3;
  o.train.mc_samples = 16;
  o.knn_k = 5;
  return o;
}

TEST(RunExperimentTest, ShapeAndPairing) {
  const auto o = quick_options();
  const EvalReport r = run_experiment(blobs(), {make_algorithm("miplgp", o), make_algorithm("plknn-mean", o)}, 3,
                                      0.5, 100);
  ASSERT_EQ(r.algorithms.size(), 2u);
  EXPECT_EQ(r.split_seeds, (std::vector<std::uint64_t>{100, 101, 102}));
  ASSERT_EQ(r.split_hashes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_EQ(r.split_hashes[i], hex64(random_split(blobs(), 0.5, 100 + i).hash()));
  for (const auto& s : r.algorithms) {
    EXPECT_EQ(s.accuracies.size(), 3u);
    for (double a : s.accuracies) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
    EXPECT_TRUE(s.stddev_defined);
  }
  ASSERT_EQ(r.pairwise.size(), 1u);
  EXPECT_EQ(r.pairwise[0].reference, "miplgp");
  EXPECT_EQ(r.pairwise[0].other, "plknn-mean");
}

TEST(RunExperimentTest, SingleRunHasNoStd) {
  const auto o = quick_options();
  const EvalReport r = run_experiment(blobs(), {make_algorithm("plknn-maxmin", o)}, 1, 0.5, 0);
  EXPECT_FALSE(r.algorithms[0].stddev_defined);
  EXPECT_EQ(r.algorithms[0].stddev, 0.0);
  EXPECT_TRUE(r.pairwise.empty());
  std::ostringstream table;
  write_summary_table(table, r);
  EXPECT_NE(table.str().find("std undefined"), std::string::npos);
}

TEST(RunExperimentTest, SameAlgorithmTwiceGivesZeroT) {
  const auto o = quick_options();
  const EvalReport r = run_experiment(blobs(), {make_algorithm("plknn-mean", o), make_algorithm("plknn-mean", o)},
                                      3, 0.5, 0);
  EXPECT_EQ(r.pairwise[0].test.t, 0.0);
  EXPECT_FALSE(r.pairwise[0].test.significant);
}

TEST(RunExperimentTest, UnknownAlgorithm) {
  EXPECT_THROW(make_algorithm("svm", quick_options()), ValidationError);
  EXPECT_EQ(known_algorithms().size(), 5u);
}

TEST(ReportTest, JsonRoundTripIsLossless) {
  EvalReport r;
  r.config = {{"runs", 2}, {"note", "x"}};
  r.split_seeds = {7, 8};
  r.split_hashes = {hex64(1), hex64(0xffffffffffffffffull)};
  r.algorithms = {{"a", {0.1, 1.0 / 3.0}, 0.0, 0.0, false}, {"b", {0.2, 0.2}, 0.0, 0.0, false}};
  for (auto& s : r.algorithms) summarize(s);
  r.pairwise = {{"a", "b", paired_t_test(r.algorithms[0].accuracies, r.algorithms[1].accuracies)},
                {"a", "a", TTestResult{-std::numeric_limits<double>::infinity(), 1, 12.706, true}}};
  const nlohmann::json j = to_json(r);
  const EvalReport back = eval_report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_EQ(back.algorithms[0].accuracies[1], 1.0 / 3.0);
  EXPECT_EQ(back.pairwise[1].test.t, -std::numeric_limits<double>::infinity());
}

TEST(ReportTest, MeanStdFormatting) {
  AlgorithmSummary s{"x", {0.9, 0.95, 0.92}, 0.0, 0.0, false};
  summarize(s);
  EXPECT_NEAR(s.mean, 0.92333333, 1e-8);
  EXPECT_NEAR(s.stddev, 0.025166, 1e-6);
  EXPECT_EQ(format_mean_std(s), "0.923±0.025");
}

TEST(ReportTest, RunsCsv) {
  EvalReport r;
  r.split_seeds = {3};
  r.split_hashes = {hex64(5)};
  r.algorithms = {{"a", {0.5}, 0.5, 0.0, false}};
  std::ostringstream out;
  write_runs_csv(out, r);
  EXPECT_EQ(out.str(), "run,seed,split_hash,a\n0,3,0000000000000005,0.5\n");
}

}  // namespace
}  // namespace miplgp
