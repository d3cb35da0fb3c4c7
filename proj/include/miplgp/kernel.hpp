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

// Matern covariance at half-integer smoothness, where the Bessel form
// reduces to polynomial-times-exponential closed forms:
//   nu = 1/2 : exp(-t)
//   nu = 3/2 : (1 + t) exp(-t)
//   nu = 5/2 : (1 + t + t^2/3) exp(-t)
// with t = sqrt(2 nu) * r / lengthscale. One kernel is shared by every output
// class; outputs are independent, so no cross-class covariance exists.

#include <cmath>
#include <string>
#include <vector>

#include "miplgp/data_model.hpp"
#include "miplgp/errors.hpp"

namespace miplgp {

enum class Smoothness { kHalf, kThreeHalves, kFiveHalves };

inline double smoothness_value(Smoothness nu) {
  switch (nu) {
    case Smoothness::kHalf: return 0.5;
    case Smoothness::kThreeHalves: return 1.5;
    case Smoothness::kFiveHalves: return 2.5;
  }
  return 2.5;
}

inline Smoothness smoothness_from_value(double nu) {
  if (nu == 0.5) return Smoothness::kHalf;
  if (nu == 1.5) return Smoothness::kThreeHalves;
  if (nu == 2.5) return Smoothness::kFiveHalves;
  throw ValidationError("Matern smoothness must be one of 0.5, 1.5, 2.5");
}

struct KernelParams {
  Smoothness nu = Smoothness::kFiveHalves;
  double log_lengthscale = 0.0;
  double log_outputscale = 0.0;
  bool train_lengthscale = true;
  bool train_outputscale = true;

  double lengthscale() const { return std::exp(log_lengthscale); }
  double outputscale() const { return std::exp(log_outputscale); }

  // Trainable parameters in fixed order: log lengthscale, log outputscale.
  Vector trainable_values() const {
    std::vector<double> v;
    if (train_lengthscale) v.push_back(log_lengthscale);
    if (train_outputscale) v.push_back(log_outputscale);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  std::vector<std::string> trainable_names() const {
    std::vector<std::string> names;
    if (train_lengthscale) names.emplace_back("log_lengthscale");
    if (train_outputscale) names.emplace_back("log_outputscale");
    return names;
  }

  Eigen::Index num_trainable() const {
    return static_cast<Eigen::Index>(train_lengthscale) + static_cast<Eigen::Index>(train_outputscale);
  }

  void add_to_trainable(const Vector& delta) {
    if (delta.size() != num_trainable()) throw DimensionError("parameter delta has wrong length");
    Eigen::Index k = 0;
    if (train_lengthscale) log_lengthscale += delta(k++);
    if (train_outputscale) log_outputscale += delta(k++);
  }
};

namespace detail {

// Unit-scale Matern shape m(t) and t * dm/dt for each smoothness.
inline double matern_shape(Smoothness nu, double t) {
  const double e = std::exp(-t);
  switch (nu) {
    case Smoothness::kHalf: return e;
    case Smoothness::kThreeHalves: return (1.0 + t) * e;
    case Smoothness::kFiveHalves: return (1.0 + t + t * t / 3.0) * e;
  }
  return e;
}

// d m(t) / d log(lengthscale) = -t * m'(t).
inline double matern_shape_dlog_lengthscale(Smoothness nu, double t) {
  const double e = std::exp(-t);
  switch (nu) {
    case Smoothness::kHalf: return t * e;
    case Smoothness::kThreeHalves: return t * t * e;
    case Smoothness::kFiveHalves: return t * t * (1.0 + t) * e / 3.0;
  }
  return 0.0;
}

template <typename A, typename B>
double distance(const A& x, const B& y) {
  double ss = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double diff = x(k) - y(k);
    ss += diff * diff;
  }
  return std::sqrt(ss);
}

inline double scaled_distance(const KernelParams& p, double r) {
  return std::sqrt(2.0 * smoothness_value(p.nu)) * r / p.lengthscale();
}

}  // namespace detail

template <typename A, typename B>
double kernel_eval(const A& x, const B& y, const KernelParams& params) {
  if (x.size() != y.size()) throw DimensionError("kernel arguments differ in dimension");
  const double t = detail::scaled_distance(params, detail::distance(x, y));
  return params.outputscale() * detail::matern_shape(params.nu, t);
}

inline Matrix gram(const Matrix& x, const KernelParams& params) {
  const auto n = x.rows();
  const double s2 = params.outputscale();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = s2;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double t = detail::scaled_distance(params, detail::distance(x.row(i), x.row(j)));
      k(i, j) = k(j, i) = s2 * detail::matern_shape(params.nu, t);
    }
  }
  return k;
}

inline Matrix cross_gram(const Matrix& x, const Matrix& z, const KernelParams& params) {
  if (x.cols() != z.cols()) throw DimensionError("cross_gram inputs differ in dimension");
  const double s2 = params.outputscale();
  Matrix k(x.rows(), z.rows());
  for (Eigen::Index j = 0; j < z.rows(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double t = detail::scaled_distance(params, detail::distance(x.row(i), z.row(j)));
      k(i, j) = s2 * detail::matern_shape(params.nu, t);
    }
  }
  return k;
}

// dK/dphi for each trainable parameter, in KernelParams::trainable order.
inline std::vector<Matrix> gram_param_grads(const Matrix& x, const KernelParams& params) {
  std::vector<Matrix> grads;
  if (params.train_lengthscale) {
    const auto n = x.rows();
    const double s2 = params.outputscale();
    Matrix g = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const double t = detail::scaled_distance(params, detail::distance(x.row(i), x.row(j)));
        g(i, j) = g(j, i) = s2 * detail::matern_shape_dlog_lengthscale(params.nu, t);
      }
    }
    grads.push_back(std::move(g));
  }
  if (params.train_outputscale) grads.push_back(gram(x, params));
  return grads;
}

}  // namespace miplgp
