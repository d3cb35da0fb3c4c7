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

// Training loop: augment and propagate candidate sets, initialize the
// Dirichlet concentrations, then per iteration transform targets, fit the
// GP, take one Adam step on the kernel parameters under a cosine learning
// rate, and (full variant only) re-weight candidates from the classifier
// output.

#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

#include "miplgp/data_model.hpp"
#include "miplgp/disambiguation.hpp"
#include "miplgp/errors.hpp"
#include "miplgp/gp_regression.hpp"
#include "miplgp/model.hpp"
#include "miplgp/predictor.hpp"

namespace miplgp {

inline double cosine_lr(int step, int total, double base_lr) {
  if (total < 1 || step < 0 || step >= total) throw ValidationError("cosine_lr step out of range");
  return base_lr * (1.0 + std::cos(std::numbers::pi * step / total)) / 2.0;
}

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  long step = 0;

  explicit AdamState(Eigen::Index size = 0)
      : first_moment(Vector::Zero(size)), second_moment(Vector::Zero(size)) {}
};

// Advances the state and returns the parameter delta (to be added).
inline Vector adam_step(AdamState& state, const Vector& grad, double lr, const AdamHyper& hyper = {}) {
  if (grad.size() != state.first_moment.size()) throw DimensionError("Adam gradient has wrong length");
  ++state.step;
  state.first_moment = hyper.beta1 * state.first_moment + (1.0 - hyper.beta1) * grad;
  state.second_moment = hyper.beta2 * state.second_moment + (1.0 - hyper.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  const Vector m_hat = state.first_moment / c1;
  const Vector v_hat = state.second_moment / c2;
  return -lr * m_hat.array() / (v_hat.array().sqrt() + hyper.eps);
}

struct TraceEntry {
  int iteration = 0;
  double nlml = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  TrainedModel model;
  InstanceView view;          // standardized training instances
  AlphaMatrix initial_alpha;
  AlphaMatrix final_alpha;    // after the last update
  std::vector<TraceEntry> trace;
};

inline void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << "iteration,nlml,lr\n";
  out.precision(17);
  for (const auto& e : trace) out << e.iteration << ',' << e.nlml << ',' << e.learning_rate << '\n';
}

namespace detail {

inline Matrix training_logits(const GpModel& gp, const TrainConfig& cfg, int iteration) {
  if (cfg.logit_source == LogitSource::kPosteriorMean) return posterior_mean_train(gp);
  const PredictiveDistribution pred = predict(gp, gp.train_x());
  const Matrix theta = mc_class_probs(pred, cfg.mc_samples, cfg.seed ^ 0x7a11u,
                                      static_cast<std::uint64_t>(iteration));
  return theta.array().max(1e-300).log();
}

}  // namespace detail

// Trains on the bags of `train`.
inline TrainResult train(const MiplDataset& train, const TrainConfig& cfg) {
  cfg.validate();
  if (train.num_bags() < 1) throw ValidationError("training set has no bags");
  InstanceView view = build_instance_view(train, cfg.variant != Variant::kNaive);
  FeatureStats stats = FeatureStats::identity(view.features.cols());
  if (cfg.standardize) std::tie(view, stats) = standardize_features(view);

  const DirichletPrior prior(cfg.alpha_eps);
  const AlphaMatrix initial = init_alpha(view, prior);
  AlphaMatrix alpha = initial;
  AlphaMatrix fitted_alpha = alpha;

  KernelParams params;
  params.nu = cfg.nu;
  params.train_lengthscale = cfg.train_lengthscale;
  params.train_outputscale = cfg.train_outputscale;
  const FitOptions fit_options{cfg.jitter_scale, 3};
  AdamState adam(params.num_trainable());
  const AdamHyper hyper{cfg.beta1, cfg.beta2, cfg.adam_eps};

  std::vector<TraceEntry> trace;
  trace.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int t = 0; t < cfg.iterations; ++t) {
    fitted_alpha = alpha;
    const GpModel gp = fit(view.features, transform_targets(alpha), params, fit_options);
    const double objective = nlml(gp);
    if (!std::isfinite(objective))
      throw NumericError("objective became non-finite at iteration " + std::to_string(t));
    const double lr = cosine_lr(t, cfg.iterations, cfg.learning_rate);
    trace.push_back({t, objective, lr});
    if (params.num_trainable() > 0) {
      const Vector grad = nlml_grad(gp);
      if (!grad.allFinite())
        throw NumericError("gradient became non-finite at iteration " + std::to_string(t));
      params.add_to_trainable(adam_step(adam, grad, lr, hyper));
    }
    if (cfg.variant == Variant::kFull) alpha = update_alpha(view, detail::training_logits(gp, cfg, t), prior);
  }

  GpModel final_gp = fit(view.features, transform_targets(fitted_alpha), params, fit_options);
  TrainedModel model{view.label_space, std::move(stats), std::move(final_gp), std::move(fitted_alpha), cfg};
  return TrainResult{std::move(model), std::move(view), initial, std::move(alpha), std::move(trace)};
}

inline TrainResult train(const MiplDataset& dataset, const Split& split, const TrainConfig& cfg) {
  return train(dataset.subset(split.train_bag_ids), cfg);
}

}  // namespace miplgp
