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

// Bag-to-vector degenerations and a candidate-voting k-nearest-neighbour
// partial-label learner that runs on them.

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "miplgp/data_model.hpp"
#include "miplgp/errors.hpp"

namespace miplgp {

struct EmbeddedDataset {
  int num_classes = 0;
  Matrix features;  // one row per bag
  std::vector<std::vector<int>> candidates;
  std::vector<std::optional<int>> true_labels;

  Eigen::Index size() const { return features.rows(); }
};

namespace detail {

template <typename Embed>
EmbeddedDataset embed(const MiplDataset& dataset, Eigen::Index width, Embed&& embed_bag) {
  EmbeddedDataset out;
  out.num_classes = dataset.num_classes();
  out.features.resize(static_cast<Eigen::Index>(dataset.num_bags()), width);
  Eigen::Index row = 0;
  for (const auto& bag : dataset.bags()) {
    out.features.row(row++) = embed_bag(bag.instances);
    out.candidates.push_back(bag.candidate_labels);
    out.true_labels.push_back(bag.true_label);
  }
  return out;
}

}  // namespace detail

// Per-dimension mean of the bag's instances.
inline EmbeddedDataset embed_mean(const MiplDataset& dataset) {
  return detail::embed(dataset, dataset.feature_dim(),
                       [](const Matrix& x) -> RowVector { return x.colwise().mean(); });
}

// Per-dimension max followed by per-dimension min, length 2d.
inline EmbeddedDataset embed_maxmin(const MiplDataset& dataset) {
  const auto d = dataset.feature_dim();
  return detail::embed(dataset, 2 * d, [d](const Matrix& x) -> RowVector {
    RowVector v(2 * d);
    v << x.colwise().maxCoeff(), x.colwise().minCoeff();
    return v;
  });
}

// Each of the k nearest training bags (Euclidean, ties by index) spreads a
// vote of 1/(distance + 1e-12) equally over its candidates; the label with the
// largest total wins, ties going to the smallest index.
inline std::vector<int> plknn_fit_predict(const EmbeddedDataset& train, const EmbeddedDataset& test, int k) {
  if (train.size() == 0) throw ValidationError("PL-kNN needs a non-empty training set");
  if (k < 1 || k > train.size()) throw ValidationError("PL-kNN k must satisfy 1 <= k <= |train|");
  if (test.size() > 0 && train.features.cols() != test.features.cols())
    throw DimensionError("PL-kNN train and test embeddings differ in dimension");
  const int q = std::max(train.num_classes, test.num_classes);
  std::vector<int> predictions;
  predictions.reserve(static_cast<std::size_t>(test.size()));
  std::vector<double> dist(static_cast<std::size_t>(train.size()));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(train.size()));
  for (Eigen::Index t = 0; t < test.size(); ++t) {
    for (Eigen::Index i = 0; i < train.size(); ++i)
      dist[static_cast<std::size_t>(i)] = (train.features.row(i) - test.features.row(t)).norm();
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double da = dist[static_cast<std::size_t>(a)], db = dist[static_cast<std::size_t>(b)];
      return da < db || (da == db && a < b);
    });
    std::vector<double> votes(static_cast<std::size_t>(q), 0.0);
    for (int j = 0; j < k; ++j) {
      const auto idx = static_cast<std::size_t>(order[static_cast<std::size_t>(j)]);
      const auto& cands = train.candidates[idx];
      const double weight = 1.0 / (dist[idx] + 1e-12) / static_cast<double>(cands.size());
      for (int c : cands) votes[static_cast<std::size_t>(c)] += weight;
    }
    predictions.push_back(static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
  }
  return predictions;
}

}  // namespace miplgp
