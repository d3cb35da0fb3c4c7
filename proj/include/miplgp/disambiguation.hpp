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

// Dirichlet concentration bookkeeping and the Gamma -> LogNormal moment
// match that turns candidate masks into log-space regression targets.

#include <cmath>
#include <limits>
#include <random>

#include "miplgp/data_model.hpp"
#include "miplgp/errors.hpp"
#include "miplgp/random.hpp"

namespace miplgp {

struct DirichletPrior {
  double alpha_eps = 1e-4;

  explicit DirichletPrior(double eps = 1e-4) : alpha_eps(eps) {
    if (!(eps > 0.0) || !std::isfinite(eps))
      throw ValidationError("alpha_eps must be positive and finite");
  }
};

// n x width concentrations. Non-candidate entries hold exactly alpha_eps;
// candidate entries of a row sum to 1 + |candidates| * alpha_eps.
struct AlphaMatrix {
  Matrix values;
};

struct TransformedTargets {
  Matrix y_dot;      // log-space means
  Matrix sigma_dot;  // log-space variances, > 0

  Eigen::Index rows() const { return y_dot.rows(); }
  Eigen::Index cols() const { return y_dot.cols(); }
};

inline AlphaMatrix init_alpha(const InstanceView& view, const DirichletPrior& prior) {
  AlphaMatrix alpha{Matrix::Constant(view.rows(), view.width(), prior.alpha_eps)};
  for (Eigen::Index i = 0; i < view.rows(); ++i) {
    const double count = view.mask.row(i).cast<double>().sum();
    if (count == 0) continue;
    for (Eigen::Index c = 0; c < view.width(); ++c)
      if (view.mask(i, c)) alpha.values(i, c) = 1.0 / count + prior.alpha_eps;
  }
  return alpha;
}

// Softmax of each row of logits restricted to that row's candidates;
// non-candidates are 0. Rows without candidates stay all-zero.
inline Matrix candidate_softmax(const InstanceView& view, const Matrix& logits) {
  if (logits.rows() != view.rows() || logits.cols() != view.width())
    throw DimensionError("logit matrix shape does not match the instance view");
  if (!logits.allFinite()) throw NumericError("non-finite classifier output");
  Matrix out = Matrix::Zero(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
      if (view.mask(i, c)) top = std::max(top, logits(i, c));
    double total = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      if (!view.mask(i, c)) continue;
      out(i, c) = std::exp(logits(i, c) - top);
      total += out(i, c);
    }
    if (total > 0.0) out.row(i) /= total;
  }
  return out;
}

inline AlphaMatrix update_alpha(const InstanceView& view, const Matrix& logits,
                                const DirichletPrior& prior) {
  Matrix soft = candidate_softmax(view, logits);
  return AlphaMatrix{soft.array() + prior.alpha_eps};
}

// S draws from Dir(alpha) via normalized Gamma(alpha_c, 1) variates. A draw
// in which every Gamma variate underflows is retried; after the retry budget
// it falls back to the uniform point of the simplex.
inline Matrix sample_dirichlet(const Vector& alpha, int count, std::uint64_t seed) {
  if (count < 0) throw ValidationError("sample count must be non-negative");
  for (Eigen::Index c = 0; c < alpha.size(); ++c)
    if (!(alpha(c) > 0.0) || !std::isfinite(alpha(c)))
      throw ValidationError("Dirichlet concentrations must be positive and finite");
  constexpr int kMaxRetries = 16;
  const auto width = alpha.size();
  Rng rng = make_rng({seed, 0xd1c4u});
  std::vector<std::gamma_distribution<double>> gammas;
  gammas.reserve(static_cast<std::size_t>(width));
  for (Eigen::Index c = 0; c < width; ++c) gammas.emplace_back(alpha(c), 1.0);

  Matrix draws(count, width);
  RowVector g(width);
  for (int s = 0; s < count; ++s) {
    double total = 0.0;
    for (int attempt = 0; attempt <= kMaxRetries && !(total > 0.0); ++attempt) {
      for (Eigen::Index c = 0; c < width; ++c) g(c) = gammas[static_cast<std::size_t>(c)](rng);
      total = g.sum();
    }
    if (total > 0.0) {
      draws.row(s) = g / total;
    } else {
      draws.row(s).setConstant(1.0 / static_cast<double>(width));
    }
  }
  return draws;
}

// Matches LogNormal(y, s) to Gamma(alpha, 1) in mean and variance:
//   s = log(1/alpha + 1),  y = log(alpha) - s/2.
inline TransformedTargets transform_targets(const AlphaMatrix& alpha) {
  TransformedTargets t;
  t.sigma_dot = alpha.values.unaryExpr([](double a) { return std::log1p(1.0 / a); });
  t.y_dot = alpha.values.array().log() - 0.5 * t.sigma_dot.array();
  return t;
}

}  // namespace miplgp
