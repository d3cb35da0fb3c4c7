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

// Bag-level prediction: Monte-Carlo expected class probabilities per
// instance, removal of the negative class, and max-over-bag aggregation.

#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "miplgp/data_model.hpp"
#include "miplgp/gp_regression.hpp"
#include "miplgp/model.hpp"
#include "miplgp/random.hpp"

namespace miplgp {

struct BagPrediction {
  std::string bag_id;
  int predicted_label = 0;
  Matrix instance_probs;  // z x width, before truncation
  Eigen::Index winning_instance = 0;
};

// E[softmax(f)] per row by averaging softmax over `samples` joint draws with
// independent Normal(mean_c, variance_c) outputs. Row i uses an engine seeded
// from (seed, bag_index, i).
inline Matrix mc_class_probs(const PredictiveDistribution& pred, int samples, std::uint64_t seed,
                             std::uint64_t bag_index = 0) {
  if (samples < 1) throw ValidationError("Monte-Carlo sample count must be >= 1");
  const auto rows = pred.mean.rows();
  const auto width = pred.mean.cols();
  Matrix out = Matrix::Zero(rows, width);
  RowVector f(width);
  for (Eigen::Index i = 0; i < rows; ++i) {
    Rng rng = make_rng({seed, bag_index, static_cast<std::uint64_t>(i)});
    std::normal_distribution<double> normal(0.0, 1.0);
    const RowVector sd = pred.variance.row(i).cwiseMax(0.0).cwiseSqrt();
    RowVector acc = RowVector::Zero(width);
    for (int s = 0; s < samples; ++s) {
      for (Eigen::Index c = 0; c < width; ++c) f(c) = pred.mean(i, c) + sd(c) * normal(rng);
      f = (f.array() - f.maxCoeff()).exp();
      acc += f / f.sum();
    }
    out.row(i) = acc / static_cast<double>(samples);
  }
  return out;
}

// Drops the negative-class column of augmented rows. Rows are not
// renormalized: aggregation is an argmax, which positive row scaling cannot
// change, so the result is not a calibrated distribution over q classes.
inline Matrix truncate_negative(const Matrix& theta, const LabelSpace& space) {
  if (theta.cols() != space.width()) throw DimensionError("probability width does not match the label space");
  if (!space.augmented()) return theta;
  return theta.leftCols(space.num_classes());
}

struct BagDecision {
  int label = 0;
  Eigen::Index instance = 0;
};

// Column of the global maximum; ties go to the smallest row, then column.
inline BagDecision aggregate_bag(const Matrix& theta_bag) {
  if (theta_bag.rows() < 1 || theta_bag.cols() < 1) throw ValidationError("cannot aggregate an empty bag");
  BagDecision best;
  double top = theta_bag(0, 0);
  for (Eigen::Index i = 0; i < theta_bag.rows(); ++i) {
    for (Eigen::Index c = 0; c < theta_bag.cols(); ++c) {
      if (theta_bag(i, c) > top) {
        top = theta_bag(i, c);
        best = {static_cast<int>(c), i};
      }
    }
  }
  return best;
}

// Scores bags with a trained model. Bag k in `bags` draws its Monte-Carlo
// samples from seeds derived from (seed, k, instance).
inline std::vector<BagPrediction> predict_bags(const TrainedModel& model, std::span<const Bag> bags,
                                               std::uint64_t seed) {
  std::vector<BagPrediction> out;
  if (bags.empty()) return out;
  const auto d = model.gp.train_x().cols();
  for (const auto& bag : bags) {
    if (bag.instances.cols() != d)
      throw DimensionError("bag '" + bag.bag_id + "' has feature dimension " +
                           std::to_string(bag.instances.cols()) + ", model expects " + std::to_string(d));
  }

  // Each bag is predicted on its own so its result does not depend on the
  // other bags in the call.
  out.reserve(bags.size());
  for (std::size_t k = 0; k < bags.size(); ++k) {
    const PredictiveDistribution pred = predict(model.gp, model.stats.apply(bags[k].instances));
    BagPrediction p;
    p.bag_id = bags[k].bag_id;
    p.instance_probs = mc_class_probs(pred, model.config.mc_samples, seed, k);
    const BagDecision decision = aggregate_bag(truncate_negative(p.instance_probs, model.label_space));
    p.predicted_label = decision.label;
    p.winning_instance = decision.instance;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace miplgp
