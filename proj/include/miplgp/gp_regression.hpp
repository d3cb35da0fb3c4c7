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

// Exact multi-output GP regression with heteroscedastic noise. Every output
// class c has its own block
//   A_c = K + diag(sigma_dot[:, c]) + jitter * I
// sharing one kernel K; blocks never interact. The objective is
//   L = sum_c log|A_c| + y_c^T A_c^{-1} y_c
// (twice the negative log marginal likelihood, constants dropped), and
//   dL/dphi = sum_c tr(A_c^{-1} dA/dphi) - w_c^T (dA/dphi) w_c,  w_c = A_c^{-1} y_c.

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "miplgp/data_model.hpp"
#include "miplgp/disambiguation.hpp"
#include "miplgp/errors.hpp"
#include "miplgp/kernel.hpp"
#include "miplgp/parallel.hpp"

namespace miplgp {

struct FitOptions {
  double jitter_scale = 1e-6;  // relative to the output scale
  int max_retries = 3;         // each retry multiplies the jitter by 10
};

class GpModel {
 public:
  const KernelParams& params() const { return params_; }
  const Matrix& train_x() const { return train_x_; }
  const TransformedTargets& targets() const { return targets_; }
  const Matrix& kernel() const { return kernel_; }
  // Absolute jitter added to every block diagonal.
  double jitter() const { return jitter_; }
  // Jitter relative to the output scale, after any retries.
  double jitter_scale() const { return jitter_scale_; }
  const Eigen::LLT<Matrix>& factor(Eigen::Index cls) const { return factors_[static_cast<std::size_t>(cls)]; }
  // Column c holds A_c^{-1} y_c.
  const Matrix& weights() const { return weights_; }
  Eigen::Index num_outputs() const { return targets_.cols(); }
  Eigen::Index num_train() const { return train_x_.rows(); }

  // Noise diagonal of block c, jitter included.
  Vector block_diagonal_noise(Eigen::Index cls) const {
    return targets_.sigma_dot.col(cls).array() + jitter_;
  }

 private:
  friend GpModel fit(Matrix, TransformedTargets, const KernelParams&, const FitOptions&);

  KernelParams params_;
  Matrix train_x_;
  TransformedTargets targets_;
  Matrix kernel_;
  double jitter_ = 0.0;
  double jitter_scale_ = 0.0;
  std::vector<Eigen::LLT<Matrix>> factors_;
  Matrix weights_;
};

inline GpModel fit(Matrix train_x, TransformedTargets targets, const KernelParams& params,
                   const FitOptions& options = {}) {
  const auto n = train_x.rows();
  if (n < 1) throw ValidationError("GP fit needs at least one training point");
  if (targets.y_dot.rows() != n || targets.sigma_dot.rows() != n ||
      targets.sigma_dot.cols() != targets.y_dot.cols())
    throw DimensionError("targets do not match the training matrix");
  if (!train_x.allFinite() || !targets.y_dot.allFinite())
    throw ValidationError("GP inputs must be finite");
  if (!(targets.sigma_dot.array() > 0.0).all() || !targets.sigma_dot.allFinite())
    throw ValidationError("noise variances must be positive and finite");

  GpModel model;
  model.params_ = params;
  model.kernel_ = gram(train_x, params);
  model.train_x_ = std::move(train_x);
  model.targets_ = std::move(targets);
  const auto outputs = static_cast<std::size_t>(model.targets_.cols());

  double scale = options.jitter_scale;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt, scale *= 10.0) {
    const double jitter = scale * params.outputscale();
    std::vector<Eigen::LLT<Matrix>> factors(outputs);
    std::vector<char> ok(outputs, 0);
    parallel_for(outputs, [&](std::size_t c) {
      Matrix a = model.kernel_;
      a.diagonal().array() += model.targets_.sigma_dot.col(static_cast<Eigen::Index>(c)).array() + jitter;
      factors[c].compute(a);
      ok[c] = factors[c].info() == Eigen::Success;
    });
    if (std::find(ok.begin(), ok.end(), 0) != ok.end()) continue;
    model.jitter_ = jitter;
    model.jitter_scale_ = scale;
    model.factors_ = std::move(factors);
    model.weights_.resize(n, static_cast<Eigen::Index>(outputs));
    for (std::size_t c = 0; c < outputs; ++c) {
      const auto col = static_cast<Eigen::Index>(c);
      model.weights_.col(col) = model.factors_[c].solve(model.targets_.y_dot.col(col));
    }
    return model;
  }
  throw NumericError("covariance not PD after " + std::to_string(options.max_retries) +
                     " jitter retries");
}

inline double nlml(const GpModel& model) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < model.num_outputs(); ++c) {
    const Matrix& l = model.factor(c).matrixLLT();
    total += 2.0 * l.diagonal().array().log().sum();
    total += model.targets().y_dot.col(c).dot(model.weights().col(c));
  }
  return total;
}

// Gradient with respect to the trainable kernel parameters. The jitter scales
// with the output scale, so it contributes to the log-outputscale component.
inline Vector nlml_grad(const GpModel& model) {
  const KernelParams& p = model.params();
  Vector grad = Vector::Zero(p.num_trainable());
  if (grad.size() == 0) return grad;
  const auto n = model.num_train();
  // W = sum_c A_c^{-1} - w_c w_c^T, so each component is <W, dA/dphi>.
  std::vector<Matrix> per_class(static_cast<std::size_t>(model.num_outputs()));
  parallel_for(per_class.size(), [&](std::size_t c) {
    const auto col = static_cast<Eigen::Index>(c);
    per_class[c] = model.factor(col).solve(Matrix::Identity(n, n));
    per_class[c].noalias() -= model.weights().col(col) * model.weights().col(col).transpose();
  });
  Matrix w = Matrix::Zero(n, n);
  for (const auto& m : per_class) w += m;
  const auto dk = gram_param_grads(model.train_x(), p);
  for (Eigen::Index k = 0; k < grad.size(); ++k) grad(k) = w.cwiseProduct(dk[static_cast<std::size_t>(k)]).sum();
  if (p.train_outputscale) grad(grad.size() - 1) += model.jitter() * w.trace();
  return grad;
}

// Smoothed latent means at the training inputs, K A_c^{-1} y_c per class.
inline Matrix posterior_mean_train(const GpModel& model) { return model.kernel() * model.weights(); }

struct PredictiveDistribution {
  Matrix mean;      // t x outputs
  Matrix variance;  // t x outputs, latent (noise-free)
};

inline PredictiveDistribution predict(const GpModel& model, const Matrix& test_x) {
  if (test_x.cols() != model.train_x().cols())
    throw DimensionError("test features have dimension " + std::to_string(test_x.cols()) +
                         ", model expects " + std::to_string(model.train_x().cols()));
  const Matrix ks = cross_gram(model.train_x(), test_x, model.params());
  PredictiveDistribution out;
  out.mean = ks.transpose() * model.weights();
  out.variance.resize(test_x.rows(), model.num_outputs());
  const double prior = model.params().outputscale();
  parallel_for(static_cast<std::size_t>(model.num_outputs()), [&](std::size_t c) {
    const auto col = static_cast<Eigen::Index>(c);
    const Matrix v = model.factor(col).matrixL().solve(ks);
    out.variance.col(col) = (prior - v.colwise().squaredNorm().array()).max(0.0).transpose();
  });
  return out;
}

struct CgOptions {
  int preconditioner_rank = 100;
  double tolerance = 1e-10;  // on ||r|| / ||b||
  int max_iterations = 1000;
};

struct CgResult {
  Vector solution;
  int iterations = 0;
  double relative_residual = 0.0;
};

// Partial pivoted Cholesky: returns L (n x r, r <= rank) with K ~= L L^T,
// stopping early once the largest remaining diagonal is negligible.
inline Matrix pivoted_cholesky(const Matrix& k, int rank) {
  const auto n = k.rows();
  const auto r = std::min<Eigen::Index>(std::max(rank, 0), n);
  Matrix l = Matrix::Zero(n, r);
  Vector diag = k.diagonal();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  const double floor = 1e-14 * std::max(1.0, diag.maxCoeff());
  Eigen::Index m = 0;
  for (; m < r; ++m) {
    Eigen::Index best = m;
    for (Eigen::Index j = m + 1; j < n; ++j)
      if (diag(perm[static_cast<std::size_t>(j)]) > diag(perm[static_cast<std::size_t>(best)])) best = j;
    std::swap(perm[static_cast<std::size_t>(m)], perm[static_cast<std::size_t>(best)]);
    const Eigen::Index piv = perm[static_cast<std::size_t>(m)];
    if (diag(piv) <= floor) break;
    const double root = std::sqrt(diag(piv));
    l(piv, m) = root;
    for (Eigen::Index j = m + 1; j < n; ++j) {
      const Eigen::Index row = perm[static_cast<std::size_t>(j)];
      const double dot = m > 0 ? l.row(row).head(m).dot(l.row(piv).head(m)) : 0.0;
      l(row, m) = (k(row, piv) - dot) / root;
      diag(row) -= l(row, m) * l(row, m);
    }
  }
  return l.leftCols(m);
}

// Preconditioned conjugate gradients for A_c x = rhs, with the preconditioner
// L L^T + D built from a partial pivoted Cholesky of K and D = block noise.
// Only matrix-vector products with A_c are used.
inline CgResult cg_solve(const GpModel& model, Eigen::Index cls, const Vector& rhs,
                         const CgOptions& options = {}) {
  const auto n = model.num_train();
  if (rhs.size() != n) throw DimensionError("cg_solve right-hand side has wrong length");
  if (cls < 0 || cls >= model.num_outputs()) throw ValidationError("cg_solve class out of range");
  const Matrix& k = model.kernel();
  const Vector noise = model.block_diagonal_noise(cls);
  auto apply_a = [&](const Vector& v) -> Vector { return k * v + noise.cwiseProduct(v); };

  const Matrix l = pivoted_cholesky(k, options.preconditioner_rank);
  const Vector d_inv = noise.cwiseInverse();
  const Matrix d_inv_l = d_inv.asDiagonal() * l;
  Matrix core = Matrix::Identity(l.cols(), l.cols());
  core.noalias() += l.transpose() * d_inv_l;
  const Eigen::LLT<Matrix> core_factor(core);
  auto apply_p_inv = [&](const Vector& r) -> Vector {
    Vector out = d_inv.cwiseProduct(r);
    if (l.cols() > 0) out -= d_inv_l * core_factor.solve(d_inv_l.transpose() * r);
    return out;
  };

  CgResult result;
  result.solution = Vector::Zero(n);
  const double b_norm = rhs.norm();
  if (b_norm == 0.0) return result;
  Vector r = rhs;
  Vector z = apply_p_inv(r);
  Vector p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Vector ap = apply_a(p);
    const double step = rz / p.dot(ap);
    result.solution += step * p;
    r -= step * ap;
    result.iterations = it;
    result.relative_residual = r.norm() / b_norm;
    if (result.relative_residual <= options.tolerance) return result;
    z = apply_p_inv(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw NumericError("conjugate gradients did not converge; final relative residual " +
                     std::to_string(result.relative_residual));
}

}  // namespace miplgp
