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

// Training configuration and the artifact produced by training.

#include <cstdint>
#include <string>

#include "json.hpp"
#include "miplgp/data_model.hpp"
#include "miplgp/disambiguation.hpp"
#include "miplgp/errors.hpp"
#include "miplgp/gp_regression.hpp"
#include "miplgp/kernel.hpp"

namespace miplgp {

enum class Variant {
  kFull,     // augmentation + iterative Dirichlet disambiguation
  kUniform,  // augmentation, weights frozen at their uniform initialization
  kNaive,    // no augmentation, raw candidate masks in the q-wide space
};

// Which classifier output drives the concentration update.
enum class LogitSource {
  kPosteriorMean,    // latent posterior mean at the training points
  kMonteCarloTheta,  // log of the Monte-Carlo expected class probabilities
};

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kUniform: return "uniform";
    case Variant::kNaive: return "naive";
  }
  return "full";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::kFull;
  if (s == "uniform") return Variant::kUniform;
  if (s == "naive") return Variant::kNaive;
  throw ValidationError("unknown variant '" + s + "' (expected full, uniform or naive)");
}

inline std::string to_string(LogitSource s) {
  return s == LogitSource::kPosteriorMean ? "posterior-mean" : "mc-theta";
}

inline LogitSource logit_source_from_string(const std::string& s) {
  if (s == "posterior-mean") return LogitSource::kPosteriorMean;
  if (s == "mc-theta") return LogitSource::kMonteCarloTheta;
  throw ValidationError("unknown logit source '" + s + "' (expected posterior-mean or mc-theta)");
}

struct TrainConfig {
  int iterations = 500;
  double alpha_eps = 1e-4;
  Smoothness nu = Smoothness::kFiveHalves;
  int mc_samples = 512;
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  Variant variant = Variant::kFull;
  std::uint64_t seed = 0;
  bool standardize = true;
  bool train_lengthscale = false;
  bool train_outputscale = false;
  LogitSource logit_source = LogitSource::kPosteriorMean;
  double jitter_scale = 1e-6;

  void validate() const {
    if (iterations < 1) throw ValidationError("iterations must be >= 1");
    if (mc_samples < 1) throw ValidationError("mc_samples must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
    if (!(alpha_eps > 0.0)) throw ValidationError("alpha_eps must be positive");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"iterations", c.iterations},
          {"alpha_eps", c.alpha_eps},
          {"nu", smoothness_value(c.nu)},
          {"mc_samples", c.mc_samples},
          {"learning_rate", c.learning_rate},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},
          {"variant", to_string(c.variant)},
          {"seed", c.seed},
          {"standardize", c.standardize},
          {"train_lengthscale", c.train_lengthscale},
          {"train_outputscale", c.train_outputscale},
          {"logit_source", to_string(c.logit_source)},
          {"jitter_scale", c.jitter_scale}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.iterations = j.at("iterations").get<int>();
  c.alpha_eps = j.at("alpha_eps").get<double>();
  c.nu = smoothness_from_value(j.at("nu").get<double>());
  c.mc_samples = j.at("mc_samples").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.standardize = j.at("standardize").get<bool>();
  c.train_lengthscale = j.at("train_lengthscale").get<bool>();
  c.train_outputscale = j.at("train_outputscale").get<bool>();
  c.logit_source = logit_source_from_string(j.at("logit_source").get<std::string>());
  c.jitter_scale = j.at("jitter_scale").get<double>();
  return c;
}

// Everything needed to score new bags. `alpha` is the concentration matrix
// whose transformed targets the GP was fitted on.
struct TrainedModel {
  LabelSpace label_space;
  FeatureStats stats;
  GpModel gp;
  AlphaMatrix alpha;
  TrainConfig config;
};

}  // namespace miplgp
