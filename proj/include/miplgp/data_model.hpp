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

// Core domain types: label spaces, bags, datasets, instance views, splits.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "miplgp/errors.hpp"
#include "miplgp/random.hpp"

namespace miplgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using MaskMatrix = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Zero-based class indices. When augmented, the negative class sits at
// index num_classes, i.e. the last column of every augmented matrix.
class LabelSpace {
 public:
  LabelSpace(int num_classes, bool augmented)
      : num_classes_(num_classes), augmented_(augmented) {
    if (num_classes < 2) throw ValidationError("label space needs at least 2 classes");
  }

  int num_classes() const { return num_classes_; }
  bool augmented() const { return augmented_; }
  int width() const { return augmented_ ? num_classes_ + 1 : num_classes_; }
  int negative_index() const {
    if (!augmented_) throw ValidationError("label space has no negative class");
    return num_classes_;
  }
  LabelSpace augment() const { return LabelSpace(num_classes_, true); }

  bool operator==(const LabelSpace&) const = default;

 private:
  int num_classes_;
  bool augmented_;
};

struct Bag {
  std::string bag_id;
  Matrix instances;                 // z x d, one instance per row
  std::vector<int> candidate_labels;  // sorted, unique
  std::optional<int> true_label;    // evaluation only
};

class MiplDataset {
 public:
  MiplDataset(LabelSpace label_space, int feature_dim, std::vector<Bag> bags,
              nlohmann::json metadata = nlohmann::json::object())
      : label_space_(label_space),
        feature_dim_(feature_dim),
        bags_(std::move(bags)),
        metadata_(std::move(metadata)) {
    validate();
  }

  const LabelSpace& label_space() const { return label_space_; }
  int num_classes() const { return label_space_.num_classes(); }
  int feature_dim() const { return feature_dim_; }
  const std::vector<Bag>& bags() const { return bags_; }
  std::size_t num_bags() const { return bags_.size(); }
  const nlohmann::json& metadata() const { return metadata_; }

  std::size_t num_instances() const {
    std::size_t n = 0;
    for (const auto& b : bags_) n += static_cast<std::size_t>(b.instances.rows());
    return n;
  }

  bool has_true_labels() const {
    return std::all_of(bags_.begin(), bags_.end(),
                       [](const Bag& b) { return b.true_label.has_value(); });
  }

  // Bags whose ids are listed, kept in dataset order.
  MiplDataset subset(const std::vector<std::string>& ids) const {
    std::unordered_set<std::string> wanted(ids.begin(), ids.end());
    std::vector<Bag> picked;
    for (const auto& b : bags_)
      if (wanted.count(b.bag_id)) picked.push_back(b);
    if (picked.size() != wanted.size())
      throw ValidationError("subset references unknown bag ids");
    return MiplDataset(label_space_, feature_dim_, std::move(picked), metadata_);
  }

 private:
  void validate() {
    if (label_space_.augmented())
      throw ValidationError("dataset label space must not be augmented");
    if (feature_dim_ < 1) throw ValidationError("feature_dim must be positive");
    std::unordered_set<std::string> seen;
    for (auto& bag : bags_) {
      const std::string where = "bag '" + bag.bag_id + "': ";
      if (!seen.insert(bag.bag_id).second) throw ValidationError(where + "duplicate bag_id");
      if (bag.instances.rows() < 1) throw ValidationError(where + "bag has no instances");
      if (bag.instances.cols() != feature_dim_)
        throw ValidationError(where + "instance width differs from feature_dim");
      if (!bag.instances.allFinite()) throw ValidationError(where + "non-finite feature value");
      if (bag.candidate_labels.empty()) throw ValidationError(where + "empty candidate set");
      std::sort(bag.candidate_labels.begin(), bag.candidate_labels.end());
      bag.candidate_labels.erase(
          std::unique(bag.candidate_labels.begin(), bag.candidate_labels.end()),
          bag.candidate_labels.end());
      for (int c : bag.candidate_labels)
        if (c < 0 || c >= num_classes()) throw ValidationError(where + "candidate label out of range");
      if (bag.true_label) {
        if (!std::binary_search(bag.candidate_labels.begin(), bag.candidate_labels.end(),
                                *bag.true_label))
          throw ValidationError(where + "true_label is not a candidate");
      }
    }
  }

  LabelSpace label_space_;
  int feature_dim_;
  std::vector<Bag> bags_;
  nlohmann::json metadata_;
};

// Instance-level flattening of a dataset: every instance inherits its bag's
// candidate mask, widened by the negative class when augmented.
struct InstanceView {
  LabelSpace label_space;
  Matrix features;             // n x d
  std::vector<int> bag_index;  // per row
  MaskMatrix mask;             // n x width, 1 = candidate

  Eigen::Index rows() const { return features.rows(); }
  int width() const { return label_space.width(); }
};

inline InstanceView build_instance_view(const MiplDataset& dataset, bool augment = true) {
  const LabelSpace space = augment ? dataset.label_space().augment() : dataset.label_space();
  const auto n = static_cast<Eigen::Index>(dataset.num_instances());
  InstanceView view{space, Matrix(n, dataset.feature_dim()), {}, MaskMatrix::Zero(n, space.width())};
  view.bag_index.reserve(static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < dataset.bags().size(); ++b) {
    const Bag& bag = dataset.bags()[b];
    if (!bag.instances.allFinite()) throw ValidationError("non-finite feature value");
    if (bag.candidate_labels.empty()) throw ValidationError("empty candidate set");
    const auto z = bag.instances.rows();
    view.features.middleRows(row, z) = bag.instances;
    for (Eigen::Index j = 0; j < z; ++j) {
      view.bag_index.push_back(static_cast<int>(b));
      for (int c : bag.candidate_labels) view.mask(row + j, c) = 1;
      if (augment) view.mask(row + j, space.negative_index()) = 1;
    }
    row += z;
  }
  return view;
}

// Per-dimension affine standardization (population std). A zero std marks a
// constant dimension, which is passed through unscaled.
struct FeatureStats {
  Vector mean;
  Vector stddev;

  static FeatureStats compute(const Matrix& x) {
    if (x.rows() == 0) return identity(x.cols());
    FeatureStats s;
    const auto n = static_cast<double>(x.rows());
    s.mean = x.colwise().mean().transpose();
    s.stddev = Vector::Zero(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double ss = (x.col(j).array() - s.mean(j)).square().sum();
      s.stddev(j) = std::sqrt(ss / n);
    }
    return s;
  }

  static FeatureStats identity(Eigen::Index d) {
    return FeatureStats{Vector::Zero(d), Vector::Ones(d)};
  }

  Matrix apply(const Matrix& x) const {
    if (x.cols() != mean.size())
      throw DimensionError("feature dimension " + std::to_string(x.cols()) +
                           " does not match standardization stats (" +
                           std::to_string(mean.size()) + ")");
    Matrix out = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (stddev(j) > 0.0) {
        out.col(j) = (x.col(j).array() - mean(j)) / stddev(j);
      }
    }
    return out;
  }
};

inline std::pair<InstanceView, FeatureStats> standardize_features(
    const InstanceView& view, const std::optional<FeatureStats>& stats = std::nullopt) {
  FeatureStats s = stats ? *stats : FeatureStats::compute(view.features);
  InstanceView out = view;
  out.features = s.apply(view.features);
  return {std::move(out), std::move(s)};
}

struct Split {
  std::uint64_t seed = 0;
  std::vector<std::string> train_bag_ids;
  std::vector<std::string> test_bag_ids;

  // Fingerprint of the train side, reported so runs can be checked as paired.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& id : train_bag_ids) {
      h = fnv1a(id.data(), id.size(), h);
      const char sep = '\n';
      h = fnv1a(&sep, 1, h);
    }
    return h;
  }
};

// Bag-level shuffle split; train size is round-half-up of fraction * m.
// Both id lists are returned in dataset order.
inline Split random_split(const MiplDataset& dataset, double fraction, std::uint64_t seed) {
  const std::size_t m = dataset.num_bags();
  if (m < 2) throw ValidationError("random_split needs at least 2 bags");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("split fraction must lie in (0,1)");
  const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(m) + 0.5));
  if (n_train == 0 || n_train >= m)
    throw ValidationError("split fraction leaves one side empty");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng({seed, 0x5e11u});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> in_train(m, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;
  Split split;
  split.seed = seed;
  for (std::size_t i = 0; i < m; ++i) {
    (in_train[i] ? split.train_bag_ids : split.test_bag_ids).push_back(dataset.bags()[i].bag_id);
  }
  return split;
}

}  // namespace miplgp
