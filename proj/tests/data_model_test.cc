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

#include "miplgp/data_model.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <set>

#include "miplgp/synthesis.hpp"

namespace miplgp {
namespace {

Bag make_bag(std::string id, Matrix x, std::vector<int> cands, std::optional<int> truth = std::nullopt) {
  return Bag{std::move(id), std::move(x), std::move(cands), truth};
}

MiplDataset two_bag_dataset() {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Matrix b(3, 2);
  b << 5, 6, 7, 8, 9, 10;
  return MiplDataset(LabelSpace(5, false), 2,
                     {make_bag("a", a, {0, 3}, 0), make_bag("b", b, {1, 4}, 4)});
}

TEST(LabelSpaceTest, AugmentedNegativeIsLastIndex) {
  const LabelSpace s(5, true);
  EXPECT_EQ(s.width(), 6);
  EXPECT_EQ(s.negative_index(), 5);
  EXPECT_EQ(LabelSpace(5, false).width(), 5);
  EXPECT_THROW(LabelSpace(5, false).negative_index(), ValidationError);
  EXPECT_THROW(LabelSpace(1, false), ValidationError);
}

TEST(MiplDatasetTest, RejectsInvalidBags) {
  Matrix x = Matrix::Ones(2, 2);
  EXPECT_THROW(MiplDataset(LabelSpace(3, false), 2, {make_bag("a", x, {})}), ValidationError);
  EXPECT_THROW(MiplDataset(LabelSpace(3, false), 2, {make_bag("a", x, {0}, 1)}), ValidationError);
  EXPECT_THROW(MiplDataset(LabelSpace(3, false), 2, {make_bag("a", x, {3})}), ValidationError);
  EXPECT_THROW(MiplDataset(LabelSpace(3, false), 2, {make_bag("a", x, {0}), make_bag("a", x, {1})}),
               ValidationError);
  EXPECT_THROW(MiplDataset(LabelSpace(3, false), 3, {make_bag("a", x, {0})}), ValidationError);
  EXPECT_THROW(MiplDataset(LabelSpace(3, false), 2, {make_bag("a", Matrix(0, 2), {0})}), ValidationError);
  Matrix bad = x;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(MiplDataset(LabelSpace(3, false), 2, {make_bag("a", bad, {0})}), ValidationError);
}

TEST(InstanceViewTest, PropagatesAugmentedCandidates) {
  const InstanceView view = build_instance_view(two_bag_dataset());
  ASSERT_EQ(view.rows(), 5);
  EXPECT_EQ(view.width(), 6);
  EXPECT_EQ(view.bag_index, (std::vector<int>{0, 0, 1, 1, 1}));
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_EQ(view.mask(i, 0), 1);
    EXPECT_EQ(view.mask(i, 3), 1);
    EXPECT_EQ(view.mask(i, 5), 1);
    EXPECT_EQ(view.mask.row(i).cast<int>().sum(), 3);
  }
  EXPECT_EQ(view.mask(3, 1) + view.mask(3, 4) + view.mask(3, 5), 3);
}

TEST(InstanceViewTest, NonAugmentedKeepsRawMask) {
  const InstanceView view = build_instance_view(two_bag_dataset(), false);
  EXPECT_EQ(view.width(), 5);
  EXPECT_EQ(view.mask.row(0).cast<int>().sum(), 2);
}

TEST(InstanceViewTest, IsABijectionOnInstances) {
  SynthesisConfig cfg;
  cfg.num_bags = 20;
  cfg.seed = 3;
  const MiplDataset ds = make_blobs(4, 3, 5.0, cfg);
  const InstanceView view = build_instance_view(ds);
  std::vector<std::vector<RowVector>> rebuilt(ds.num_bags());
  for (Eigen::Index i = 0; i < view.rows(); ++i) {
    rebuilt[static_cast<std::size_t>(view.bag_index[static_cast<std::size_t>(i)])].push_back(view.features.row(i));
    EXPECT_EQ(view.mask(i, 4), 1);
    EXPECT_GE(view.mask.row(i).cast<int>().sum(), 2);
  }
  for (std::size_t b = 0; b < ds.num_bags(); ++b) {
    const Matrix& x = ds.bags()[b].instances;
    ASSERT_EQ(static_cast<Eigen::Index>(rebuilt[b].size()), x.rows());
    for (Eigen::Index j = 0; j < x.rows(); ++j) EXPECT_EQ(rebuilt[b][static_cast<std::size_t>(j)], x.row(j));
  }
}

TEST(StandardizeTest, TwoPointColumn) {
  Matrix x(2, 1);
  x << 1, 3;
  const FeatureStats s = FeatureStats::compute(x);
  EXPECT_DOUBLE_EQ(s.mean(0), 2.0);
  EXPECT_DOUBLE_EQ(s.stddev(0), 1.0);
  const Matrix z = s.apply(x);
  EXPECT_DOUBLE_EQ(z(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(z(1, 0), 1.0);
}

TEST(StandardizeTest, ConstantColumnPassesThrough) {
  Matrix x(3, 1);
  x << 5, 5, 5;
  const FeatureStats s = FeatureStats::compute(x);
  EXPECT_EQ(s.stddev(0), 0.0);
  EXPECT_EQ(s.apply(x), x);
}

TEST(StandardizeTest, ReusesTrainingStats) {
  const FeatureStats s{Vector::Constant(1, 2.0), Vector::Constant(1, 1.0)};
  Matrix test(1, 1);
  test << 4;
  EXPECT_DOUBLE_EQ(s.apply(test)(0, 0), 2.0);
  InstanceView view{LabelSpace(2, true), test, {0}, MaskMatrix::Ones(1, 3)};
  auto [out, used] = standardize_features(view, s);
  EXPECT_DOUBLE_EQ(out.features(0, 0), 2.0);
  EXPECT_EQ(used.mean, s.mean);
}

MiplDataset dataset_with_bags(int m) {
  std::vector<Bag> bags;
  for (int i = 0; i < m; ++i) bags.push_back(make_bag("bag" + std::to_string(i), Matrix::Constant(1, 1, i), {0}));
  return MiplDataset(LabelSpace(2, false), 1, std::move(bags));
}

TEST(RandomSplitTest, HalfOfFiveHundred) {
  const Split s = random_split(dataset_with_bags(500), 0.5, 7);
  EXPECT_EQ(s.train_bag_ids.size(), 250u);
  EXPECT_EQ(s.test_bag_ids.size(), 250u);
}

TEST(RandomSplitTest, DeterministicAndDisjoint) {
  const MiplDataset ds = dataset_with_bags(40);
  const Split a = random_split(ds, 0.5, 11);
  const Split b = random_split(ds, 0.5, 11);
  EXPECT_EQ(a.train_bag_ids, b.train_bag_ids);
  EXPECT_EQ(a.test_bag_ids, b.test_bag_ids);
  std::set<std::string> all(a.train_bag_ids.begin(), a.train_bag_ids.end());
  for (const auto& id : a.test_bag_ids) EXPECT_TRUE(all.insert(id).second);
  EXPECT_EQ(all.size(), 40u);
}

TEST(RandomSplitTest, RoundsHalfUp) {
  const Split s = random_split(dataset_with_bags(3), 0.5, 1);
  EXPECT_EQ(s.train_bag_ids.size(), 2u);
  EXPECT_EQ(s.test_bag_ids.size(), 1u);
}

TEST(RandomSplitTest, RejectsEmptySides) {
  EXPECT_THROW(random_split(dataset_with_bags(3), 0.1, 1), ValidationError);
  EXPECT_THROW(random_split(dataset_with_bags(3), 0.9, 1), ValidationError);
  EXPECT_THROW(random_split(dataset_with_bags(1), 0.5, 1), ValidationError);
  EXPECT_THROW(random_split(dataset_with_bags(4), 1.0, 1), ValidationError);
}

TEST(RandomSplitTest, DistinctSeedsGiveDistinctSplits) {
  const MiplDataset ds = dataset_with_bags(4);
  std::set<std::vector<std::string>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) seen.insert(random_split(ds, 0.5, seed).train_bag_ids);
  EXPECT_GE(seen.size(), 2u);
}

}  // namespace
}  // namespace miplgp
